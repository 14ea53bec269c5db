#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "fedmax/data_gen.hpp"
#include "fedmax/errors.hpp"
#include "fedmax/metrics.hpp"
#include "oracles.hpp"

using namespace fedmax;
using namespace fedmax::testing;

namespace {

SynthSpec base_spec() {
  SynthSpec spec;
  spec.n = 1000;
  spec.d = 6;
  spec.imratio = 0.1;
  spec.cluster_count = 4;
  spec.separation = 3.0;
  spec.noise_sd = 1.0;
  return spec;
}

long count_pos(const std::vector<Sample>& data) {
  long pos = 0;
  for (const auto& s : data) pos += s.label == 1 ? 1 : 0;
  return pos;
}

// multiset signature of a dataset, order-independent
std::multiset<std::pair<int, double>> signature(const std::vector<Sample>& v) {
  std::multiset<std::pair<int, double>> out;
  for (const auto& s : v) out.insert({s.label, s.x.size() ? s.x[0] : 0.0});
  return out;
}

}  // namespace

TEST_CASE("positive count is exact by construction") {
  const SynthData data = generate_synthetic(base_spec(), 3);
  CHECK(count_pos(data.samples) == 100);
  CHECK(data.samples.size() == 1000);
  CHECK(data.cluster_of.size() == 1000);
}

TEST_CASE("generation is deterministic in (spec, seed)") {
  const SynthData a = generate_synthetic(base_spec(), 11);
  const SynthData b = generate_synthetic(base_spec(), 11);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].label == b.samples[i].label);
    CHECK(a.samples[i].x == b.samples[i].x);
    CHECK(a.cluster_of[i] == b.cluster_of[i]);
  }
  const SynthData c = generate_synthetic(base_spec(), 12);
  CHECK(c.samples[0].x[0] != a.samples[0].x[0]);
}

TEST_CASE("zero separation leaves any fixed scorer near chance") {
  SynthSpec spec = base_spec();
  spec.n = 10000;
  spec.separation = 0.0;
  spec.imratio = 0.3;
  const SynthData data = generate_synthetic(spec, 5);
  RngStream rng = derive_stream(77, 0, 0, 0, 0);
  for (int trial = 0; trial < 3; ++trial) {
    const DenseVector w = random_vector(rng, static_cast<std::size_t>(spec.d));
    std::vector<double> scores(data.samples.size());
    std::vector<int> labels(data.samples.size());
    for (std::size_t i = 0; i < data.samples.size(); ++i) {
      scores[i] = w.dot(data.samples[i].x);
      labels[i] = data.samples[i].label;
    }
    CHECK(std::fabs(empirical_auc(scores, labels) - 0.5) <= 0.05);
  }
}

TEST_CASE("invalid specs are rejected") {
  SynthSpec spec = base_spec();
  spec.imratio = 0.0;
  CHECK_THROWS_AS(generate_synthetic(spec, 0), ConfigError);
  spec = base_spec();
  spec.noise_sd = 0.0;
  CHECK_THROWS_AS(generate_synthetic(spec, 0), ConfigError);
  spec = base_spec();
  spec.n = 10;
  spec.imratio = 0.01;  // rounds to zero positives
  CHECK_THROWS_AS(generate_synthetic(spec, 0), ConfigError);
  spec = base_spec();
  spec.cluster_count = 600;
  CHECK_THROWS_AS(generate_synthetic(spec, 0), ConfigError);
}

TEST_CASE("cluster-disjoint partition deals whole clusters") {
  SynthSpec spec = base_spec();
  spec.cluster_count = 2;  // clusters {P1,P2,N1,N2}
  const SynthData data = generate_synthetic(spec, 9);
  const auto shards = partition_heterogeneous(data, 2, 9);
  REQUIRE(shards.size() == 2);
  // each shard: one positive cluster (even id), one negative cluster (odd id)
  for (const auto& shard : shards) {
    REQUIRE(shard.cluster_ids.size() == 2);
    CHECK(shard.cluster_ids[0] % 2 != shard.cluster_ids[1] % 2);
    CHECK(shard.local_pos_ratio > 0.0);
    CHECK(shard.local_pos_ratio < 1.0);
  }
  std::set<int> seen;
  std::size_t total = 0;
  for (const auto& shard : shards) {
    total += shard.samples.size();
    for (int cid : shard.cluster_ids) CHECK(seen.insert(cid).second);
  }
  CHECK(total == data.samples.size());
}

TEST_CASE("k=1 heterogeneous partition returns the input unchanged") {
  const SynthData data = generate_synthetic(base_spec(), 2);
  const auto shards = partition_heterogeneous(data, 1, 2);
  REQUIRE(shards.size() == 1);
  REQUIRE(shards[0].samples.size() == data.samples.size());
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    CHECK(shards[0].samples[i].x == data.samples[i].x);
    CHECK(shards[0].samples[i].label == data.samples[i].label);
  }
}

TEST_CASE("k=4 on 4 clusters per class partitions cleanly") {
  const SynthData data = generate_synthetic(base_spec(), 21);
  const auto shards = partition_heterogeneous(data, 4, 21);
  REQUIRE(shards.size() == 4);
  std::size_t total = 0;
  for (std::size_t i = 0; i < shards.size(); ++i) {
    total += shards[i].samples.size();
    for (std::size_t j = i + 1; j < shards.size(); ++j) {
      std::vector<int> inter;
      std::set_intersection(shards[i].cluster_ids.begin(),
                            shards[i].cluster_ids.end(),
                            shards[j].cluster_ids.begin(),
                            shards[j].cluster_ids.end(),
                            std::back_inserter(inter));
      CHECK(inter.empty());
    }
  }
  CHECK(total == data.samples.size());
  CHECK_THROWS_AS(partition_heterogeneous(data, 5, 21), ConfigError);
}

TEST_CASE("partitions preserve the sample multiset") {
  const SynthData data = generate_synthetic(base_spec(), 33);
  const auto het = partition_heterogeneous(data, 4, 33);
  const auto hom = partition_homogeneous(data.samples, 4, 33);
  for (const auto& shards : {het, hom}) {
    std::vector<Sample> joined;
    for (const auto& s : shards) {
      joined.insert(joined.end(), s.samples.begin(), s.samples.end());
    }
    CHECK(signature(joined) == signature(data.samples));
  }
}

TEST_CASE("homogeneous split balances sizes and ratios") {
  const SynthData data = generate_synthetic(base_spec(), 4);
  const auto shards = partition_homogeneous(data.samples, 2, 4);
  REQUIRE(shards.size() == 2);
  CHECK(shards[0].samples.size() == shards[1].samples.size());

  SynthSpec big = base_spec();
  big.n = 10000;
  big.imratio = 0.1;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SynthData d = generate_synthetic(big, seed);
    const auto s8 = partition_homogeneous(d.samples, 8, seed);
    for (const auto& shard : s8) {
      CHECK(shard.local_pos_ratio >= 0.07);
      CHECK(shard.local_pos_ratio <= 0.13);
    }
  }
}

TEST_CASE("single-label data splits into single-class shards") {
  std::vector<Sample> data(10);
  for (auto& s : data) {
    s.x = DenseVector(1);
    s.label = 1;
  }
  const auto shards = partition_homogeneous(data, 2, 0);
  CHECK(shards[0].local_pos_ratio == 1.0);
  CHECK(shards[1].local_pos_ratio == 1.0);
  CHECK_THROWS_AS(partition_homogeneous(data, 11, 0), ConfigError);
}

TEST_CASE("heterogeneous drift exceeds homogeneous drift") {
  SynthSpec spec = base_spec();
  spec.n = 2000;
  spec.cluster_count = 4;
  const ScorerSpec scorer = ScorerSpec::linear(spec.d);
  std::vector<double> het_drift, hom_drift;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SynthData data = generate_synthetic(spec, seed);
    const ObjectiveContext ctx =
        ObjectiveContext::make(empirical_ratio(data.samples));
    RngStream rng = derive_stream(100 + seed, 0, 0, 0, 0);
    const PrimalDualPoint pt =
        random_point(rng, static_cast<std::size_t>(spec.d), 0.3);
    const auto het = partition_heterogeneous(data, 4, seed);
    const auto hom = partition_homogeneous(data.samples, 4, seed);
    het_drift.push_back(client_drift_proxy(het, scorer, ctx, pt));
    hom_drift.push_back(client_drift_proxy(hom, scorer, ctx, pt));
  }
  CHECK(median(het_drift) > median(hom_drift));
}

TEST_CASE("csv loading handles the documented format") {
  const char* path = "fedmax_test_data.csv";
  {
    std::ofstream out(path);
    out << "label,f0\n1,0.5\n-1,-0.5\n";
  }
  const auto data = load_csv(path);
  REQUIRE(data.size() == 2);
  CHECK(data[0].label == 1);
  CHECK(data[0].x.size() == 1);
  CHECK(data[0].x[0] == 0.5);
  CHECK(data[1].label == -1);

  {
    std::ofstream out(path);
    out << "label,f0,f1\n0,1.0,2.0\n1,3.0,4.0\n";
  }
  const auto mapped = load_csv(path);
  CHECK(mapped[0].label == -1);  // 0 maps to -1
  CHECK(mapped[1].label == 1);
  CHECK(mapped[0].x.size() == 2);

  {
    std::ofstream out(path);
    out << "label,f0\n1,0.5\n-1,oops\n";
  }
  try {
    load_csv(path);
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
  }

  {
    std::ofstream out(path);
    out << "label,f0\n1,0.5,9.0\n";
  }
  CHECK_THROWS_AS(load_csv(path), ParseError);

  CHECK_THROWS_AS(load_csv("does_not_exist.csv"), IoError);
  std::remove(path);
}
