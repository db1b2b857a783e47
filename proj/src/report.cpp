#include "aura/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "aura/error.hpp"

namespace aura {

SampleReport build_sample_report(const ClipCollection& collection, const ClusterModel* clusters,
                                 const SampleManifest& manifest,
                                 const SampleReportOptions& options) {
  if (manifest.entries.empty()) throw InvalidInput("report: sample is empty");
  SampleReport r;
  r.strategy = manifest.strategy_name;
  r.budget = manifest.entries.size();
  r.seed = manifest.config.seed;
  r.k = clusters ? clusters->k : manifest.k;
  r.channel = options.channel;
  r.difficulty = mean_dmos(manifest, collection);
  if (clusters && clusters->k >= 2) {
    r.diversity = chi_square_uniformity(cluster_counts(manifest, clusters->k));
  }
  try {
    r.ood = ood_fraction(manifest, collection, options.baseline_labels);
  } catch (const InvalidInput&) {
    r.ood.reset();
  }
  r.categories = top_categories(manifest, collection, options.baseline_labels, options.top_n);

  const Matrix d = dmos_matrix(collection, options.channel);
  std::vector<std::size_t> all(collection.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  r.full_ranking = rank_models(d, collection.model_ids(), all);
  r.sample_ranking = rank_models(d, collection.model_ids(), manifest.clip_indices());
  if (collection.model_ids().size() >= 2) {
    try {
      r.ranking_srcc = srcc(r.sample_ranking.ranks, r.full_ranking.ranks);
    } catch (const InvalidInput&) {
      r.ranking_srcc.reset();
    }
  }
  if (options.bootstrap_rounds > 0) {
    const Sampler sampler(collection, clusters, options.channel, manifest.config.epsilon);
    r.fidelity = bootstrap_srcc(sampler, manifest.config.mode, manifest.entries.size(),
                                manifest.config.seed, options.bootstrap_rounds);
  }
  return r;
}

nlohmann::ordered_json SampleReport::to_json() const {
  using json = nlohmann::ordered_json;
  json j;
  j["strategy"] = strategy;
  j["budget"] = budget;
  j["seed"] = seed;
  j["k"] = k;
  j["channel"] = to_string(channel);
  j["dmos"] = {{"sig", {{"mean", difficulty.sig.mean}, {"ci95", difficulty.sig.ci95}}},
               {"bak", {{"mean", difficulty.bak.mean}, {"ci95", difficulty.bak.ci95}}},
               {"ovrl", {{"mean", difficulty.ovrl.mean}, {"ci95", difficulty.ovrl.ci95}}},
               {"cells", difficulty.count}};
  if (diversity) {
    j["diversity"] = {{"chi2", diversity->chi2},
                      {"p_value", diversity->p_value},
                      {"cluster_counts", diversity->cluster_counts}};
  } else {
    j["diversity"] = nullptr;
  }
  if (ood) {
    j["ood"] = {{"fraction", ood->fraction},
                {"ood", ood->ood},
                {"labeled", ood->labeled},
                {"unlabeled", ood->unlabeled}};
  } else {
    j["ood"] = nullptr;
  }
  auto cat_json = [](const std::vector<CategoryCount>& v) {
    json a = json::array();
    for (const auto& [name, count] : v) a.push_back({{"category", name}, {"count", count}});
    return a;
  };
  j["top_categories"] = {{"ood", cat_json(categories.ood)},
                         {"in_distribution", cat_json(categories.in_distribution)}};
  json models = json::array();
  for (std::size_t m = 0; m < full_ranking.model_ids.size(); ++m) {
    models.push_back({{"model_id", full_ranking.model_ids[m]},
                      {"mean_dmos_full", full_ranking.mean_dmos[m]},
                      {"rank_full", full_ranking.ranks[m]},
                      {"mean_dmos_sample", sample_ranking.mean_dmos[m]},
                      {"rank_sample", sample_ranking.ranks[m]}});
  }
  j["ranking"] = {{"models", std::move(models)},
                  {"srcc", ranking_srcc ? json(*ranking_srcc) : json(nullptr)}};
  if (fidelity) {
    j["bootstrap"] = {{"rounds", fidelity->bootstrap_rounds},
                      {"srcc_mean", fidelity->srcc_mean},
                      {"srcc_std", fidelity->srcc_std},
                      {"ci95_low", fidelity->ci95_low},
                      {"ci95_high", fidelity->ci95_high}};
  }
  return j;
}

std::string SampleReport::to_text() const {
  std::ostringstream out;
  char buf[256];
  out << "test set                 DMOS SIG         DMOS BAK         DMOS OVRL        "
         "chi2 (p)              OOD %\n";
  std::string label = strategy + " (" + std::to_string(budget) + ")";
  std::snprintf(buf, sizeof buf, "%-24s %+.3f +-%.3f   %+.3f +-%.3f   %+.3f +-%.3f   ",
                label.c_str(), difficulty.sig.mean, difficulty.sig.ci95, difficulty.bak.mean,
                difficulty.bak.ci95, difficulty.ovrl.mean, difficulty.ovrl.ci95);
  out << buf;
  if (diversity) {
    std::snprintf(buf, sizeof buf, "%9.2f (%.4f)    ", diversity->chi2, diversity->p_value);
  } else {
    std::snprintf(buf, sizeof buf, "%-22s", "n/a");
  }
  out << buf;
  if (ood) {
    std::snprintf(buf, sizeof buf, "%5.1f\n", 100.0 * ood->fraction);
  } else {
    std::snprintf(buf, sizeof buf, "%5s\n", "n/a");
  }
  out << buf;

  out << "\nmodel ranking (" << to_string(channel) << ")\n";
  out << "model                  mean full   rank full   mean sample   rank sample\n";
  for (std::size_t m = 0; m < full_ranking.model_ids.size(); ++m) {
    std::snprintf(buf, sizeof buf, "%-20s %+10.4f %11.1f %+13.4f %13.1f\n",
                  full_ranking.model_ids[m].c_str(), full_ranking.mean_dmos[m],
                  full_ranking.ranks[m], sample_ranking.mean_dmos[m], sample_ranking.ranks[m]);
    out << buf;
  }
  if (ranking_srcc) {
    std::snprintf(buf, sizeof buf, "SRCC sample vs full: %.4f\n", *ranking_srcc);
    out << buf;
  }
  if (fidelity) {
    std::snprintf(buf, sizeof buf, "bootstrap SRCC (%d rounds): %.4f +- %.4f  CI95 [%.4f, %.4f]\n",
                  fidelity->bootstrap_rounds, fidelity->srcc_mean, fidelity->srcc_std,
                  fidelity->ci95_low, fidelity->ci95_high);
    out << buf;
  }

  auto cats = [&](const char* title, const std::vector<CategoryCount>& v) {
    out << "\n" << title << "\n";
    for (const auto& [name, count] : v) {
      std::snprintf(buf, sizeof buf, "  %-30s %zu\n", name.c_str(), count);
      out << buf;
    }
  };
  cats("top out-of-distribution categories", categories.ood);
  cats("top in-distribution categories", categories.in_distribution);
  return out.str();
}

}  // namespace aura
