#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "aura/error.hpp"
#include "aura/simulator.hpp"

namespace aura {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kRandom:
      return "random";
    case Strategy::kDiversity:
      return "diversity";
    case Strategy::kVariance:
      return "variance";
    case Strategy::kAura:
      return "aura";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  for (auto s : {Strategy::kRandom, Strategy::kDiversity, Strategy::kVariance, Strategy::kAura}) {
    if (to_string(s) == name) return s;
  }
  throw InvalidInput("unknown strategy \"" + std::string(name) +
                     "\" (expected random, diversity, variance or aura)");
}

SamplingMode strategy_mode(Strategy s) {
  switch (s) {
    case Strategy::kRandom:
      return SamplingMode::kRandom;
    case Strategy::kDiversity:
      return SamplingMode::kDiversity;
    case Strategy::kVariance:
      return SamplingMode::kVariance;
    case Strategy::kAura:
      return SamplingMode::kRanking;
  }
  return SamplingMode::kRandom;
}

namespace {

// Per-clip sums of DMOS and DMOS^2 across models, one entry per channel, so
// pooled means over many samples are O(budget) per round.
struct RowMoments {
  std::vector<double> sum[3];
  std::vector<double> sum_sq[3];
  std::size_t models = 0;

  explicit RowMoments(const ClipCollection& collection) : models(collection.model_ids().size()) {
    for (int c = 0; c < 3; ++c) {
      const Matrix d = dmos_matrix(collection, static_cast<Channel>(c));
      sum[c].resize(d.rows());
      sum_sq[c].resize(d.rows());
      for (std::size_t i = 0; i < d.rows(); ++i) {
        for (double v : d.row(i)) {
          sum[c][i] += v;
          sum_sq[c][i] += v * v;
        }
      }
    }
  }
};

struct Pool {
  std::vector<std::size_t> counts;
  std::size_t labeled = 0;
  std::size_t ood = 0;
  std::size_t unlabeled = 0;
  std::size_t cells = 0;
  double sum[3] = {0, 0, 0};
  double sum_sq[3] = {0, 0, 0};
};

ChannelMean pooled_mean(const Pool& p, int c) {
  ChannelMean m;
  if (p.cells == 0) return m;
  const double n = static_cast<double>(p.cells);
  m.mean = p.sum[c] / n;
  if (p.cells > 1) {
    const double var = std::max(0.0, (p.sum_sq[c] - n * m.mean * m.mean) / (n - 1.0));
    m.ci95 = 1.96 * std::sqrt(var) / std::sqrt(n);
  }
  return m;
}

nlohmann::ordered_json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

ExperimentReport run_experiment(const ClipCollection& collection, const ClusterModel& clusters,
                                const ExperimentConfig& config) {
  if (config.strategies.empty()) throw InvalidInput("experiment: no strategies");
  if (config.budgets.empty()) throw InvalidInput("experiment: no budgets");
  if (config.channels.empty()) throw InvalidInput("experiment: no channels");
  if (config.rounds < 2) throw InvalidInput("experiment: rounds must be >= 2");
  if (clusters.k < 2) throw InvalidInput("experiment: cluster model needs k >= 2");
  for (auto b : config.budgets) {
    if (b == 0 || b > collection.size()) {
      throw InvalidInput("experiment: budget " + std::to_string(b) + " outside [1, " +
                         std::to_string(collection.size()) + "]");
    }
  }

  std::vector<Sampler> samplers;
  for (auto ch : config.channels) samplers.emplace_back(collection, &clusters, ch, config.epsilon);
  std::vector<std::size_t> all(collection.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::vector<ModelRanking> full;
  for (const auto& s : samplers) full.push_back(rank_models(s.dmos(), collection.model_ids(), all));
  const RowMoments moments(collection);

  ExperimentReport report;
  report.n_clips = collection.size();
  report.k = clusters.k;
  report.rounds = config.rounds;

  for (auto strategy : config.strategies) {
    const SamplingMode mode = strategy_mode(strategy);
    for (auto budget : config.budgets) {
      ExperimentRow row;
      row.strategy = strategy;
      row.budget = budget;
      row.channels = config.channels;
      Pool pool;
      pool.counts.assign(clusters.k, 0);

      for (std::size_t c = 0; c < samplers.size(); ++c) {
        std::vector<double> values(static_cast<std::size_t>(config.rounds));
        for (int r = 0; r < config.rounds; ++r) {
          const auto sample = samplers[c].draw(mode, budget, round_seed(config.seed, r));
          const auto idx = sample.clip_indices();
          const auto est = rank_models(samplers[c].dmos(), collection.model_ids(), idx);
          values[static_cast<std::size_t>(r)] = srcc(est.ranks, full[c].ranks);
          if (c != 0) continue;
          for (const auto& e : sample.entries) {
            ++pool.counts[e.cluster];
            const auto& label = collection[e.clip_index].noise_label;
            if (!label) {
              ++pool.unlabeled;
            } else {
              ++pool.labeled;
              if (!config.baseline_labels.contains(*label)) ++pool.ood;
            }
            for (int ch = 0; ch < 3; ++ch) {
              pool.sum[ch] += moments.sum[ch][e.clip_index];
              pool.sum_sq[ch] += moments.sum_sq[ch][e.clip_index];
            }
            pool.cells += moments.models;
          }
        }
        row.fidelity.push_back(summarize_rounds(std::move(values)));
      }

      row.diversity = chi_square_uniformity(pool.counts);
      row.ood.labeled = pool.labeled;
      row.ood.ood = pool.ood;
      row.ood.unlabeled = pool.unlabeled;
      row.ood.fraction = pool.labeled ? static_cast<double>(pool.ood) / static_cast<double>(pool.labeled)
                                      : std::numeric_limits<double>::quiet_NaN();
      row.difficulty.sig = pooled_mean(pool, 0);
      row.difficulty.bak = pooled_mean(pool, 1);
      row.difficulty.ovrl = pooled_mean(pool, 2);
      row.difficulty.count = pool.cells;
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

const ExperimentRow& ExperimentReport::row(Strategy s, std::size_t budget) const {
  for (const auto& r : rows) {
    if (r.strategy == s && r.budget == budget) return r;
  }
  throw InvalidInput("experiment report has no row for " + std::string(to_string(s)) +
                     " at budget " + std::to_string(budget));
}

nlohmann::ordered_json ExperimentReport::to_json() const {
  nlohmann::ordered_json j;
  j["n_clips"] = n_clips;
  j["k"] = k;
  j["rounds"] = rounds;
  auto& out_rows = j["rows"] = nlohmann::ordered_json::array();
  std::map<std::string, std::map<std::string, nlohmann::ordered_json>> curves;
  for (const auto& r : rows) {
    nlohmann::ordered_json jr;
    jr["strategy"] = to_string(r.strategy);
    jr["budget"] = r.budget;
    jr["budget_fraction"] = static_cast<double>(r.budget) / static_cast<double>(n_clips);
    nlohmann::ordered_json srcc_json;
    for (std::size_t c = 0; c < r.channels.size(); ++c) {
      const auto& f = r.fidelity[c];
      srcc_json[std::string(to_string(r.channels[c]))] = {{"mean", f.srcc_mean},
                                                          {"std", f.srcc_std},
                                                          {"ci95_low", f.ci95_low},
                                                          {"ci95_high", f.ci95_high}};
      auto& curve = curves[std::string(to_string(r.strategy))][std::string(to_string(r.channels[c]))];
      if (curve.is_null()) curve = nlohmann::ordered_json::array();
      curve.push_back({r.budget, f.srcc_mean});
    }
    jr["srcc"] = std::move(srcc_json);
    jr["chi2"] = r.diversity.chi2;
    jr["chi2_p_value"] = r.diversity.p_value;
    jr["cluster_counts"] = r.diversity.cluster_counts;
    jr["ood_fraction"] = number_or_null(r.ood.fraction);
    jr["ood_labeled"] = r.ood.labeled;
    jr["ood_unlabeled"] = r.ood.unlabeled;
    jr["dmos"] = {{"sig", {{"mean", r.difficulty.sig.mean}, {"ci95", r.difficulty.sig.ci95}}},
                  {"bak", {{"mean", r.difficulty.bak.mean}, {"ci95", r.difficulty.bak.ci95}}},
                  {"ovrl", {{"mean", r.difficulty.ovrl.mean}, {"ci95", r.difficulty.ovrl.ci95}}}};
    out_rows.push_back(std::move(jr));
  }
  nlohmann::ordered_json jc = nlohmann::ordered_json::object();
  for (const auto& [strategy, by_channel] : curves) {
    for (const auto& [channel, points] : by_channel) jc[strategy][channel] = points;
  }
  j["srcc_vs_budget"] = std::move(jc);
  return j;
}

std::string ExperimentReport::to_text() const {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "clips: %zu  clusters: %zu  bootstrap rounds: %d\n", n_clips, k,
                rounds);
  out << buf;
  if (rows.empty()) return out.str();

  std::string header = "strategy    budget ";
  for (auto ch : rows.front().channels) {
    std::string name(to_string(ch));
    for (auto& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    std::snprintf(buf, sizeof buf, " %-26s", ("SRCC " + name + " (CI95)").c_str());
    header += buf;
  }
  header += "  chi2       p        OOD%   DMOS SIG  BAK    OVRL";
  out << header << '\n' << std::string(header.size(), '-') << '\n';
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-10s %7zu ", std::string(to_string(r.strategy)).c_str(),
                  r.budget);
    out << buf;
    for (const auto& f : r.fidelity) {
      std::snprintf(buf, sizeof buf, " %.3f+-%.3f [%.3f,%.3f]  ", f.srcc_mean, f.srcc_std,
                    f.ci95_low, f.ci95_high);
      out << buf;
    }
    const double ood = std::isfinite(r.ood.fraction) ? 100.0 * r.ood.fraction : -1.0;
    std::snprintf(buf, sizeof buf, "%9.2f  %7.4f  %6.1f  %+.3f  %+.3f  %+.3f\n", r.diversity.chi2,
                  r.diversity.p_value, ood, r.difficulty.sig.mean, r.difficulty.bak.mean,
                  r.difficulty.ovrl.mean);
    out << buf;
  }
  return out.str();
}

}  // namespace aura
