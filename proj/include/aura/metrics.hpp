#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aura/clustering.hpp"
#include "aura/dataset.hpp"
#include "aura/matrix.hpp"
#include "aura/sampling.hpp"

namespace aura {

// --- special functions -----------------------------------------------------

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double regularized_gamma_q(double a, double x);
/// Chi-square survival function with `df` degrees of freedom.
double chi_square_sf(double statistic, double df);

// --- diversity -------------------------------------------------------------

struct DiversityReport {
  double chi2 = 0.0;
  double p_value = 1.0;
  std::vector<std::size_t> cluster_counts;
};

/// Chi-square of cluster percentages against the uniform 100/k split,
/// df = k - 1.
DiversityReport chi_square_uniformity(std::span<const std::size_t> cluster_counts);

/// Counts of sampled entries per cluster (k bins).
std::vector<std::size_t> cluster_counts(const SampleManifest& manifest, std::size_t k);

// --- ranking ---------------------------------------------------------------

/// 1-based ranks, ties receive the average of the positions they span.
/// Ascending: smallest value gets rank 1.
std::vector<double> average_ranks(std::span<const double> values, bool descending = false);

/// Spearman correlation: Pearson correlation of the tie-averaged ranks.
double srcc(std::span<const double> a, std::span<const double> b);

struct ModelRanking {
  std::vector<std::string> model_ids;
  std::vector<double> mean_dmos;
  std::vector<double> ranks;  // 1 = highest mean DMOS
};

/// Ranks models by mean DMOS over every clip (or over `clip_indices`).
ModelRanking rank_models(const ClipCollection& collection, Channel channel);
ModelRanking rank_models(const ClipCollection& collection, Channel channel,
                         std::span<const std::size_t> clip_indices);
/// Same, from a precomputed clips x models DMOS matrix.
ModelRanking rank_models(const Matrix& dmos, std::span<const std::string> model_ids,
                         std::span<const std::size_t> clip_indices);

struct RankingFidelity {
  double srcc_mean = 0.0;
  double srcc_std = 0.0;  // sample standard deviation across rounds
  double ci95_low = 0.0;
  double ci95_high = 0.0;
  int bootstrap_rounds = 0;
  std::vector<double> per_round;
};

/// Summarizes per-round SRCC values: mean, std, 2.5/97.5 percentiles.
RankingFidelity summarize_rounds(std::vector<double> per_round);

/// Repeats the configured draw with round-derived seeds and compares each
/// sample ranking to the full-data ranking.
RankingFidelity bootstrap_srcc(const ClipCollection& collection, const ClusterModel* clusters,
                               const SamplingConfig& config, int rounds = 200);
RankingFidelity bootstrap_srcc(const Sampler& sampler, SamplingMode mode, std::size_t budget,
                               std::uint64_t seed, int rounds = 200);

/// Seed used for bootstrap round `round`.
std::uint64_t round_seed(std::uint64_t seed, int round);

// --- out-of-distribution accounting ---------------------------------------

struct OodSummary {
  double fraction = 0.0;
  std::size_t ood = 0;
  std::size_t labeled = 0;
  std::size_t unlabeled = 0;
};

/// Fraction of labeled sampled clips whose label is outside the baseline set.
/// Unlabeled clips are excluded and counted separately.
OodSummary ood_fraction(const SampleManifest& manifest, const ClipCollection& collection,
                        const std::set<std::string>& baseline_labels);

using CategoryCount = std::pair<std::string, std::size_t>;

struct CategoryReport {
  std::vector<CategoryCount> ood;
  std::vector<CategoryCount> in_distribution;
};

/// Labels split by baseline membership, descending count then name, first n.
CategoryReport top_categories(const SampleManifest& manifest, const ClipCollection& collection,
                              const std::set<std::string>& baseline_labels, std::size_t n = 10);

// --- difficulty -----------------------------------------------------------

struct ChannelMean {
  double mean = 0.0;
  double ci95 = 0.0;  // half width: 1.96 * std / sqrt(count)
};

struct MeanDmosReport {
  ChannelMean sig;
  ChannelMean bak;
  ChannelMean ovrl;
  std::size_t count = 0;  // (clip, model) cells
};

/// Mean DMOS over all (clip, model) cells of the sample. Empty `model_set`
/// means every model of the collection.
MeanDmosReport mean_dmos(const SampleManifest& manifest, const ClipCollection& collection,
                         const std::vector<std::string>& model_set = {});
MeanDmosReport mean_dmos(std::span<const std::size_t> clip_indices,
                         const ClipCollection& collection,
                         const std::vector<std::string>& model_set = {});

}  // namespace aura
