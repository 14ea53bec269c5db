#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedmax/objective.hpp"

namespace fedmax {

// Synthetic imbalanced Gaussian mixture. Each class is a mixture of
// cluster_count clusters; cluster pair m shares one latent center offset
// (orthogonal to the class-separation axis), a mildly tilted separation
// direction, and its own noise scale on a fixed ramp. The two class
// distributions are mirror images at the stated mean distance and coincide
// exactly when separation = 0, while cluster-disjoint shards see different
// local geometry and curvature.
struct SynthSpec {
  long n = 0;
  int d = 0;
  double imratio = 0.1;     // target positive fraction
  int cluster_count = 1;    // latent clusters per class
  double separation = 1.0;  // distance between paired cluster means
  double noise_sd = 1.0;
};

struct SynthData {
  std::vector<Sample> samples;
  std::vector<int> cluster_of;  // parallel to samples
};

SynthData generate_synthetic(const SynthSpec& spec, std::uint64_t seed);

// One client's slice of the training data.
struct ClientShard {
  std::vector<Sample> samples;
  int client_id = 0;
  double local_pos_ratio = 0.0;
  std::vector<int> cluster_ids;  // sorted; empty for homogeneous splits
};

// Cluster-disjoint split: whole clusters are dealt to clients, positive-class
// and negative-class clusters independently, so no cluster spans two shards.
std::vector<ClientShard> partition_heterogeneous(const SynthData& data, int k,
                                                 std::uint64_t seed);

// Seeded uniform shuffle followed by a round-robin deal.
std::vector<ClientShard> partition_homogeneous(std::span<const Sample> data,
                                               int k, std::uint64_t seed);

// CSV with header "label,f0,f1,...". Labels 1 / -1, or 0 mapped to -1.
std::vector<Sample> load_csv(const std::string& path);

}  // namespace fedmax
