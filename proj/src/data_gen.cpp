#include "fedmax/data_gen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "fedmax/errors.hpp"
#include "fedmax/rng.hpp"

namespace fedmax {

namespace {

// Tilt of each cluster pair's separation direction away from the shared
// axis; keeps per-cluster optimal scorers genuinely different while the
// axis-aligned scorer stays near-optimal globally.
constexpr double kDirectionTilt = 0.35;

// Per-cluster noise scale ramp. Clients that own different clusters then see
// different local curvature, so cluster-disjoint shards drift apart instead
// of averaging back to the global solution.
constexpr double kNoiseRampLo = 0.6;
constexpr double kNoiseRampHi = 1.4;

double cluster_noise_scale(int cluster, int cluster_count) {
  if (cluster_count <= 1) return 1.0;
  const double t = static_cast<double>(cluster) / (cluster_count - 1);
  return kNoiseRampLo + (kNoiseRampHi - kNoiseRampLo) * t;
}

// Latent center spread relative to the noise level.
constexpr double kOffsetScale = 0.4;

void validate(const SynthSpec& spec) {
  if (spec.n < 2) throw ConfigError("synthetic n must be >= 2");
  if (spec.d < 1) throw ConfigError("synthetic d must be >= 1");
  if (!(spec.imratio > 0.0) || !(spec.imratio < 1.0)) {
    throw ConfigError("imratio must lie in (0,1)");
  }
  const long n_pos = std::lround(spec.imratio * static_cast<double>(spec.n));
  if (n_pos < 1 || n_pos >= spec.n) {
    throw ConfigError("imratio*n must round to at least one sample per class");
  }
  if (spec.cluster_count < 1) throw ConfigError("cluster_count must be >= 1");
  if (spec.cluster_count > spec.n / 2) {
    throw ConfigError("cluster_count must be <= n/2");
  }
  if (spec.separation < 0.0) throw ConfigError("separation must be >= 0");
  if (!(spec.noise_sd > 0.0)) throw ConfigError("noise_sd must be > 0");
}

// Gaussian vector with the separation-axis component removed.
DenseVector perp_normal(RngStream& rng, int d) {
  DenseVector out(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) out[static_cast<std::size_t>(i)] = rng.next_normal();
  out[0] = 0.0;
  return out;
}

std::vector<long> split_counts(long total, int parts) {
  std::vector<long> counts(static_cast<std::size_t>(parts), total / parts);
  for (long r = 0; r < total % parts; ++r) ++counts[static_cast<std::size_t>(r)];
  return counts;
}

void seeded_shuffle(std::vector<std::size_t>& idx, RngStream& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = rng.next_index(i);
    std::swap(idx[i - 1], idx[j]);
  }
}

ClientShard make_shard(int client_id, std::span<const Sample> data,
                       const std::vector<std::size_t>& indices) {
  ClientShard shard;
  shard.client_id = client_id;
  shard.samples.reserve(indices.size());
  long pos = 0;
  for (std::size_t idx : indices) {
    shard.samples.push_back(data[idx]);
    if (data[idx].label == 1) ++pos;
  }
  shard.local_pos_ratio =
      shard.samples.empty()
          ? 0.0
          : static_cast<double>(pos) / static_cast<double>(shard.samples.size());
  return shard;
}

}  // namespace

SynthData generate_synthetic(const SynthSpec& spec, std::uint64_t seed) {
  validate(spec);
  const long n_pos = std::lround(spec.imratio * static_cast<double>(spec.n));
  const long n_neg = spec.n - n_pos;
  const int d = spec.d;
  const int clusters = spec.cluster_count;

  RngStream cluster_rng =
      derive_stream(seed, 0, rng_purpose::kSynthClusters, 0, 0);

  // Paired cluster geometry: one offset and one direction per pair.
  std::vector<DenseVector> offsets;
  std::vector<DenseVector> directions;
  offsets.reserve(static_cast<std::size_t>(clusters));
  directions.reserve(static_cast<std::size_t>(clusters));
  const double offset_sd = kOffsetScale * spec.noise_sd;
  for (int m = 0; m < clusters; ++m) {
    DenseVector off = perp_normal(cluster_rng, d);
    off.scale(offset_sd);
    offsets.push_back(std::move(off));

    DenseVector dir = perp_normal(cluster_rng, d);
    const double norm = std::sqrt(dir.sq_norm());
    if (norm > 0.0) dir.scale(kDirectionTilt / norm);
    dir[0] += 1.0;
    dir.scale(1.0 / std::sqrt(dir.sq_norm()));
    directions.push_back(std::move(dir));
  }

  const std::vector<long> pos_counts = split_counts(n_pos, clusters);
  const std::vector<long> neg_counts = split_counts(n_neg, clusters);

  SynthData out;
  out.samples.reserve(static_cast<std::size_t>(spec.n));
  out.cluster_of.reserve(static_cast<std::size_t>(spec.n));

  RngStream sample_rng = derive_stream(seed, 0, rng_purpose::kSynthSamples, 0, 0);
  const double half = 0.5 * spec.separation;
  for (int m = 0; m < clusters; ++m) {
    const double sd = spec.noise_sd * cluster_noise_scale(m, clusters);
    for (int sign : {+1, -1}) {
      const long count = sign == 1 ? pos_counts[static_cast<std::size_t>(m)]
                                   : neg_counts[static_cast<std::size_t>(m)];
      for (long j = 0; j < count; ++j) {
        Sample s;
        s.label = sign;
        s.x = offsets[static_cast<std::size_t>(m)];
        s.x.axpy(sign == 1 ? half : -half, directions[static_cast<std::size_t>(m)]);
        for (int i = 0; i < d; ++i) {
          s.x[static_cast<std::size_t>(i)] += sd * sample_rng.next_normal();
        }
        out.samples.push_back(std::move(s));
        out.cluster_of.push_back(sign == 1 ? 2 * m : 2 * m + 1);
      }
    }
  }

  // Joint shuffle so row order carries no class/cluster structure.
  std::vector<std::size_t> order(out.samples.size());
  std::iota(order.begin(), order.end(), 0);
  RngStream shuffle_rng = derive_stream(seed, 0, rng_purpose::kSynthShuffle, 0, 0);
  seeded_shuffle(order, shuffle_rng);
  SynthData shuffled;
  shuffled.samples.reserve(out.samples.size());
  shuffled.cluster_of.reserve(out.samples.size());
  for (std::size_t idx : order) {
    shuffled.samples.push_back(std::move(out.samples[idx]));
    shuffled.cluster_of.push_back(out.cluster_of[idx]);
  }
  return shuffled;
}

std::vector<ClientShard> partition_heterogeneous(const SynthData& data, int k,
                                                 std::uint64_t seed) {
  if (k < 1) throw ConfigError("client count must be >= 1");
  if (data.samples.size() != data.cluster_of.size()) {
    throw ShapeError("cluster ids not aligned with samples");
  }
  if (data.samples.empty()) throw EmptyDatasetError("nothing to partition");

  if (k == 1) {
    std::vector<std::size_t> all(data.samples.size());
    std::iota(all.begin(), all.end(), 0);
    ClientShard shard = make_shard(0, data.samples, all);
    std::set<int> ids(data.cluster_of.begin(), data.cluster_of.end());
    shard.cluster_ids.assign(ids.begin(), ids.end());
    return {std::move(shard)};
  }

  // Group sample indices per cluster; a cluster belongs to the class of the
  // majority of its samples (ties count as positive).
  std::map<int, std::vector<std::size_t>> by_cluster;
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    by_cluster[data.cluster_of[i]].push_back(i);
  }
  std::vector<int> pos_clusters, neg_clusters;
  for (const auto& [cid, members] : by_cluster) {
    long pos = 0;
    for (std::size_t idx : members) {
      if (data.samples[idx].label == 1) ++pos;
    }
    (2 * pos >= static_cast<long>(members.size()) ? pos_clusters : neg_clusters)
        .push_back(cid);
  }
  for (const auto* list : {&pos_clusters, &neg_clusters}) {
    if (!list->empty() && static_cast<int>(list->size()) < k) {
      throw ConfigError("client count " + std::to_string(k) +
                        " exceeds cluster availability (" +
                        std::to_string(list->size()) + " per class)");
    }
  }

  RngStream pos_rng = derive_stream(seed, 0, rng_purpose::kPartitionHet, 0, 0);
  RngStream neg_rng = derive_stream(seed, 0, rng_purpose::kPartitionHet, 1, 0);
  std::vector<std::size_t> pos_order(pos_clusters.size());
  std::iota(pos_order.begin(), pos_order.end(), 0);
  seeded_shuffle(pos_order, pos_rng);
  std::vector<std::size_t> neg_order(neg_clusters.size());
  std::iota(neg_order.begin(), neg_order.end(), 0);
  seeded_shuffle(neg_order, neg_rng);

  std::vector<std::vector<int>> assigned(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < pos_order.size(); ++i) {
    assigned[i % static_cast<std::size_t>(k)].push_back(
        pos_clusters[pos_order[i]]);
  }
  for (std::size_t i = 0; i < neg_order.size(); ++i) {
    assigned[i % static_cast<std::size_t>(k)].push_back(
        neg_clusters[neg_order[i]]);
  }

  std::vector<ClientShard> shards;
  shards.reserve(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    std::vector<std::size_t> indices;
    std::vector<int> ids = assigned[static_cast<std::size_t>(c)];
    std::sort(ids.begin(), ids.end());
    for (int cid : ids) {
      const auto& members = by_cluster[cid];
      indices.insert(indices.end(), members.begin(), members.end());
    }
    ClientShard shard = make_shard(c, data.samples, indices);
    shard.cluster_ids = std::move(ids);
    shards.push_back(std::move(shard));
  }
  return shards;
}

std::vector<ClientShard> partition_homogeneous(std::span<const Sample> data,
                                               int k, std::uint64_t seed) {
  if (k < 1) throw ConfigError("client count must be >= 1");
  if (static_cast<long>(data.size()) < k) {
    throw ConfigError("fewer samples than clients");
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  RngStream rng = derive_stream(seed, 0, rng_purpose::kPartitionHom, 0, 0);
  seeded_shuffle(order, rng);

  std::vector<std::vector<std::size_t>> buckets(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < order.size(); ++i) {
    buckets[i % static_cast<std::size_t>(k)].push_back(order[i]);
  }
  std::vector<ClientShard> shards;
  shards.reserve(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    shards.push_back(make_shard(c, data, buckets[static_cast<std::size_t>(c)]));
  }
  return shards;
}

std::vector<Sample> load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  long line_no = 0;

  if (!std::getline(in, line)) throw ParseError("missing header row", 1);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind("label", 0) != 0) {
    throw ParseError("header must start with 'label'", line_no);
  }
  long cols = std::count(line.begin(), line.end(), ',');
  if (cols < 1) throw ParseError("header names no feature columns", line_no);

  std::vector<Sample> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Sample s;
    s.x = DenseVector(static_cast<std::size_t>(cols));
    const char* ptr = line.data();
    const char* end = line.data() + line.size();
    for (long field = 0; field <= cols; ++field) {
      const char* stop = std::find(ptr, end, ',');
      if (field < cols && stop == end) {
        throw ParseError("expected " + std::to_string(cols + 1) + " fields",
                         line_no);
      }
      if (field == cols && stop != end) {
        throw ParseError("too many fields", line_no);
      }
      if (field == 0) {
        const std::string label(ptr, stop);
        if (label == "1" || label == "+1") {
          s.label = 1;
        } else if (label == "-1" || label == "0") {
          s.label = -1;
        } else {
          throw ParseError("label must be 1, -1 or 0; got '" + label + "'",
                           line_no);
        }
      } else {
        double value = 0.0;
        const auto res = std::from_chars(ptr, stop, value);
        if (res.ec != std::errc() || res.ptr != stop) {
          throw ParseError("non-numeric feature '" + std::string(ptr, stop) +
                           "'", line_no);
        }
        s.x[static_cast<std::size_t>(field - 1)] = value;
      }
      ptr = stop == end ? end : stop + 1;
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace fedmax
