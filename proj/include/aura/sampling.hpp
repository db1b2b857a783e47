#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aura/clustering.hpp"
#include "aura/dataset.hpp"
#include "aura/matrix.hpp"
#include "aura/random.hpp"

namespace aura {

/// hardness / ranking / diversity are per-cluster (stratified); random and
/// variance are the unclustered baselines. global_hardness is hardness
/// weighting without stratification.
enum class SamplingMode { kHardness, kRanking, kRandom, kDiversity, kVariance, kGlobalHardness };

std::string_view to_string(SamplingMode mode);
SamplingMode parse_sampling_mode(std::string_view name);
bool is_stratified(SamplingMode mode);

inline constexpr double kDefaultEpsilon = 0.05;

struct SamplingConfig {
  std::size_t budget = 0;
  SamplingMode mode = SamplingMode::kHardness;
  Channel channel = Channel::kOvrl;
  std::uint64_t seed = 0;
  double epsilon = kDefaultEpsilon;
};

struct SampleEntry {
  std::string clip_id;
  std::size_t clip_index = 0;  // position in the source collection
  std::uint32_t cluster = 0;
  double weight = 0.0;  // pre-normalization weight

  friend bool operator==(const SampleEntry&, const SampleEntry&) = default;
};

struct SampleManifest {
  std::vector<SampleEntry> entries;
  SamplingConfig config;
  std::string strategy_name;
  std::size_t k = 0;  // clusters in the model used (0 if none)

  std::vector<std::size_t> clip_indices() const;
};

/// Unnormalized hardness weights: max(dmos) - dmos_i + epsilon.
std::vector<double> hardness_scores(std::span<const double> dmos_values, double epsilon);
/// hardness_scores normalized to sum to one.
std::vector<double> hardness_weights(std::span<const double> dmos_values, double epsilon);

/// Unnormalized: population variance of each row + epsilon.
std::vector<double> variance_scores(const Matrix& dmos_rows, double epsilon);
std::vector<double> variance_weights(const Matrix& dmos_rows, double epsilon);

/// Efraimidis-Spirakis weighted sampling without replacement. Returns the
/// positions (into `weights`) of the `quota` largest keys u^(1/w), in
/// descending key order.
std::vector<std::size_t> weighted_sample_without_replacement(std::span<const double> weights,
                                                             std::size_t quota, Rng& rng);

template <typename Id>
std::vector<Id> weighted_sample_without_replacement(std::span<const Id> ids,
                                                    std::span<const double> weights,
                                                    std::size_t quota, Rng& rng) {
  std::vector<Id> out;
  for (auto pos : weighted_sample_without_replacement(weights, quota, rng)) out.push_back(ids[pos]);
  return out;
}

/// Per-cluster quotas: floor(budget / k) each, remainder one apiece to the
/// largest clusters; quota beyond a cluster's size is redistributed to the
/// remaining clusters in proportion to their sizes.
std::vector<std::size_t> allocate_quotas(std::span<const std::size_t> cluster_sizes,
                                         std::size_t budget);

/// Precomputes per-clip DMOS statistics so repeated draws (bootstrap rounds,
/// budget sweeps) cost O(n) each.
class Sampler {
 public:
  /// `clusters` may be null; stratified modes then throw.
  Sampler(const ClipCollection& collection, const ClusterModel* clusters, Channel channel,
          double epsilon = kDefaultEpsilon);

  SampleManifest draw(SamplingMode mode, std::size_t budget, std::uint64_t seed) const;

  const ClipCollection& collection() const { return *collection_; }
  const Matrix& dmos() const { return dmos_; }
  Channel channel() const { return channel_; }
  double epsilon() const { return epsilon_; }

 private:
  SampleManifest stratified(SamplingMode mode, std::size_t budget, std::uint64_t seed) const;
  SampleManifest global(SamplingMode mode, std::size_t budget, std::uint64_t seed) const;
  std::uint32_t cluster_of(std::size_t clip) const;

  const ClipCollection* collection_;
  const ClusterModel* clusters_;
  Channel channel_;
  double epsilon_;
  Matrix dmos_;                     // n x models on channel_
  std::vector<double> mean_dmos_;   // per clip, across models
  std::vector<double> variance_;    // per clip, population variance across models
  std::vector<std::vector<std::size_t>> members_;
};

SampleManifest stratified_sample(const ClipCollection& collection,
                                 const ClusterModel& clusters, const SamplingConfig& config);
SampleManifest baseline_random(const ClipCollection& collection, std::size_t budget,
                               std::uint64_t seed);
SampleManifest baseline_variance(const ClipCollection& collection, std::size_t budget,
                                 Channel channel, std::uint64_t seed,
                                 double epsilon = kDefaultEpsilon);
/// Dispatches on config.mode. `clusters` is needed for stratified modes and
/// used to label entries otherwise.
SampleManifest draw_sample(const ClipCollection& collection, const ClusterModel* clusters,
                           const SamplingConfig& config);

/// JSON-lines: a header line {strategy, seed, budget, k, mode, channel,
/// epsilon} followed by one {clip_id, cluster, weight} line per entry.
void write_manifest(const std::filesystem::path& path, const SampleManifest& manifest);
/// Resolves clip ids against the collection.
SampleManifest read_manifest(const std::filesystem::path& path, const ClipCollection& collection);

}  // namespace aura
