#include "aura/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "aura/error.hpp"
#include "aura/random.hpp"

namespace aura {

DiversityReport chi_square_uniformity(std::span<const std::size_t> cluster_counts) {
  const std::size_t k = cluster_counts.size();
  if (k < 2) throw InvalidInput("chi-square uniformity needs at least 2 clusters");
  const double total = static_cast<double>(
      std::accumulate(cluster_counts.begin(), cluster_counts.end(), std::size_t{0}));
  if (total == 0.0) throw InvalidInput("chi-square uniformity: all cluster counts are zero");

  const double expected = 100.0 / static_cast<double>(k);
  double chi2 = 0.0;
  for (auto c : cluster_counts) {
    const double pct = 100.0 * static_cast<double>(c) / total;
    chi2 += (pct - expected) * (pct - expected) / expected;
  }
  DiversityReport r;
  r.chi2 = chi2;
  r.p_value = chi_square_sf(chi2, static_cast<double>(k - 1));
  r.cluster_counts.assign(cluster_counts.begin(), cluster_counts.end());
  return r;
}

std::vector<std::size_t> cluster_counts(const SampleManifest& manifest, std::size_t k) {
  std::vector<std::size_t> counts(k, 0);
  for (const auto& e : manifest.entries) {
    if (e.cluster >= k) throw InvalidInput("sample entry cluster index out of range");
    ++counts[e.cluster];
  }
  return counts;
}

std::vector<double> average_ranks(std::span<const double> values, bool descending) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) {
    return descending ? values[a] > values[b] : values[a] < values[b];
  });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // positions i..j-1 share the mean of ranks i+1..j
    const double r = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = r;
    i = j;
  }
  return ranks;
}

double srcc(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidInput("srcc: inputs differ in length");
  if (a.size() < 2) throw InvalidInput("srcc: need at least 2 values");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n + 1.0) / 2.0;  // tie averaging preserves the rank sum
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double da = ra[i] - mean;
    const double db = rb[i] - mean;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw InvalidInput("srcc: undefined for a constant input");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

ModelRanking rank_models(const Matrix& dmos, std::span<const std::string> model_ids,
                         std::span<const std::size_t> clip_indices) {
  if (clip_indices.empty()) throw InvalidInput("rank_models: empty clip set");
  if (model_ids.size() != dmos.cols()) throw InvalidInput("rank_models: model count mismatch");
  ModelRanking r;
  r.model_ids.assign(model_ids.begin(), model_ids.end());
  r.mean_dmos.assign(dmos.cols(), 0.0);
  for (auto i : clip_indices) {
    const auto row = dmos.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) r.mean_dmos[j] += row[j];
  }
  for (double& m : r.mean_dmos) m /= static_cast<double>(clip_indices.size());
  r.ranks = average_ranks(r.mean_dmos, /*descending=*/true);
  return r;
}

ModelRanking rank_models(const ClipCollection& collection, Channel channel,
                         std::span<const std::size_t> clip_indices) {
  for (auto i : clip_indices) {
    if (i >= collection.size()) throw InvalidInput("rank_models: clip index out of range");
  }
  return rank_models(dmos_matrix(collection, channel), collection.model_ids(), clip_indices);
}

ModelRanking rank_models(const ClipCollection& collection, Channel channel) {
  std::vector<std::size_t> all(collection.size());
  std::iota(all.begin(), all.end(), 0);
  return rank_models(collection, channel, all);
}

RankingFidelity summarize_rounds(std::vector<double> per_round) {
  if (per_round.empty()) throw InvalidInput("no bootstrap rounds to summarize");
  RankingFidelity f;
  const double n = static_cast<double>(per_round.size());
  f.srcc_mean = std::accumulate(per_round.begin(), per_round.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : per_round) ss += (v - f.srcc_mean) * (v - f.srcc_mean);
  f.srcc_std = per_round.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;

  std::vector<double> sorted = per_round;
  std::ranges::sort(sorted);
  auto percentile = [&](double q) {
    const double pos = q * (n - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  // Skewed round distributions can put the mean outside the percentile band.
  f.ci95_low = std::min(percentile(0.025), f.srcc_mean);
  f.ci95_high = std::max(percentile(0.975), f.srcc_mean);
  f.bootstrap_rounds = static_cast<int>(per_round.size());
  f.per_round = std::move(per_round);
  return f;
}

std::uint64_t round_seed(std::uint64_t seed, int round) {
  return derive_seed(seed, static_cast<std::uint64_t>(round));
}

RankingFidelity bootstrap_srcc(const Sampler& sampler, SamplingMode mode, std::size_t budget,
                               std::uint64_t seed, int rounds) {
  if (rounds < 2) throw InvalidInput("bootstrap needs at least 2 rounds");
  const auto& collection = sampler.collection();
  std::vector<std::size_t> all(collection.size());
  std::iota(all.begin(), all.end(), 0);
  const ModelRanking full = rank_models(sampler.dmos(), collection.model_ids(), all);

  std::vector<double> values(static_cast<std::size_t>(rounds));
  for (int r = 0; r < rounds; ++r) {
    const auto sample = sampler.draw(mode, budget, round_seed(seed, r));
    const auto idx = sample.clip_indices();
    const ModelRanking est = rank_models(sampler.dmos(), collection.model_ids(), idx);
    values[static_cast<std::size_t>(r)] = srcc(est.ranks, full.ranks);
  }
  return summarize_rounds(std::move(values));
}

RankingFidelity bootstrap_srcc(const ClipCollection& collection, const ClusterModel* clusters,
                               const SamplingConfig& config, int rounds) {
  const Sampler sampler(collection, clusters, config.channel, config.epsilon);
  return bootstrap_srcc(sampler, config.mode, config.budget, config.seed, rounds);
}

OodSummary ood_fraction(const SampleManifest& manifest, const ClipCollection& collection,
                        const std::set<std::string>& baseline_labels) {
  OodSummary s;
  for (const auto& e : manifest.entries) {
    const auto& label = collection[e.clip_index].noise_label;
    if (!label) {
      ++s.unlabeled;
      continue;
    }
    ++s.labeled;
    if (!baseline_labels.contains(*label)) ++s.ood;
  }
  if (s.labeled == 0) throw InvalidInput("ood_fraction: no labeled clips in the sample");
  s.fraction = static_cast<double>(s.ood) / static_cast<double>(s.labeled);
  return s;
}

CategoryReport top_categories(const SampleManifest& manifest, const ClipCollection& collection,
                              const std::set<std::string>& baseline_labels, std::size_t n) {
  if (n < 1) throw InvalidInput("top_categories: n must be >= 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& e : manifest.entries) {
    if (const auto& label = collection[e.clip_index].noise_label) ++counts[*label];
  }
  CategoryReport r;
  for (const auto& [label, count] : counts) {
    (baseline_labels.contains(label) ? r.in_distribution : r.ood).emplace_back(label, count);
  }
  auto order = [](const CategoryCount& a, const CategoryCount& b) {
    return a.second > b.second || (a.second == b.second && a.first < b.first);
  };
  for (auto* list : {&r.ood, &r.in_distribution}) {
    std::ranges::sort(*list, order);
    if (list->size() > n) list->resize(n);
  }
  return r;
}

MeanDmosReport mean_dmos(std::span<const std::size_t> clip_indices,
                         const ClipCollection& collection,
                         const std::vector<std::string>& model_set) {
  if (clip_indices.empty()) throw InvalidInput("mean_dmos: empty sample");
  const auto& models = model_set.empty() ? collection.model_ids() : model_set;
  if (models.empty()) throw InvalidInput("mean_dmos: no models");

  std::vector<DmosTriple> cells;
  cells.reserve(clip_indices.size() * models.size());
  for (auto i : clip_indices) {
    for (const auto& m : models) cells.push_back(dmos(collection[i], m));
  }
  const double n = static_cast<double>(cells.size());
  auto summarize = [&](Channel c) {
    ChannelMean out;
    for (const auto& t : cells) out.mean += t[c];
    out.mean /= n;
    if (cells.size() > 1) {
      double ss = 0.0;
      for (const auto& t : cells) ss += (t[c] - out.mean) * (t[c] - out.mean);
      out.ci95 = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    return out;
  };
  MeanDmosReport r;
  r.sig = summarize(Channel::kSig);
  r.bak = summarize(Channel::kBak);
  r.ovrl = summarize(Channel::kOvrl);
  r.count = cells.size();
  return r;
}

MeanDmosReport mean_dmos(const SampleManifest& manifest, const ClipCollection& collection,
                         const std::vector<std::string>& model_set) {
  const auto idx = manifest.clip_indices();
  return mean_dmos(idx, collection, model_set);
}

}  // namespace aura
