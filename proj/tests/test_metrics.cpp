#include <gtest/gtest.h>

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "aura/error.hpp"
#include "aura/metrics.hpp"
#include "aura/simulator.hpp"
#include "test_util.hpp"

using namespace aura;
using aura::test::collection_from_dmos;
using aura::test::fixed_clusters;
using aura::test::make_record;

namespace {

SampleManifest manifest_of(const ClipCollection& c, std::vector<std::size_t> idx) {
  SampleManifest m;
  for (auto i : idx) m.entries.push_back({c[i].clip_id, i, 0, 1.0});
  return m;
}

ClipCollection labeled(const std::vector<std::optional<std::string>>& labels) {
  std::vector<ClipRecord> recs;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    recs.push_back(make_record("c" + std::to_string(i), {static_cast<float>(i)}, {{"m", 0.1}}, labels[i]));
  }
  return ClipCollection(1, {"m"}, recs);
}

std::vector<std::size_t> all_of(const ClipCollection& c) {
  std::vector<std::size_t> v(c.size());
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

// --- special functions ------------------------------------------------------

TEST(IncompleteGamma, MatchesBoost) {
  const double as[] = {0.5, 1.0, 1.5, 2.0, 3.5, 7.0, 15.5, 50.0, 127.5, 255.0 / 2.0};
  const double xs[] = {1e-6, 0.01, 0.3, 1.0, 2.5, 5.0, 9.0, 20.0, 60.0, 150.0, 400.0};
  for (double a : as) {
    for (double x : xs) {
      const double want_q = boost::math::gamma_q(a, x);
      const double want_p = boost::math::gamma_p(a, x);
      const double got_q = regularized_gamma_q(a, x);
      const double got_p = regularized_gamma_p(a, x);
      EXPECT_NEAR(got_q, want_q, 1e-10 * std::max(want_q, 1e-300) + 1e-300) << a << " " << x;
      EXPECT_NEAR(got_p, want_p, 1e-10 * std::max(want_p, 1e-300) + 1e-300) << a << " " << x;
    }
  }
}

TEST(IncompleteGamma, EdgesAndErrors) {
  EXPECT_EQ(regularized_gamma_p(2.0, 0.0), 0.0);
  EXPECT_EQ(regularized_gamma_q(2.0, 0.0), 1.0);
  EXPECT_THROW(regularized_gamma_p(0.0, 1.0), InvalidInput);
  EXPECT_THROW(regularized_gamma_q(1.0, -1.0), InvalidInput);
}

TEST(ChiSquareSf, KnownQuantiles) {
  // df 1: P(X > 3.841459) = 0.05; df 7: P(X > 24.32189) = 0.001.
  EXPECT_NEAR(chi_square_sf(3.841458820694124, 1), 0.05, 1e-10);
  EXPECT_NEAR(chi_square_sf(24.321886347856854, 7), 0.001, 1e-10);
  EXPECT_EQ(chi_square_sf(0.0, 3), 1.0);
  // df 2 has closed form exp(-x/2).
  for (double x : {0.1, 1.0, 7.0, 30.0}) EXPECT_NEAR(chi_square_sf(x, 2), std::exp(-x / 2), 1e-14);
}

// --- diversity ---------------------------------------------------------------

TEST(ChiSquare, UniformIsZero) {
  const std::vector<std::size_t> c = {7, 7, 7};
  const auto r = chi_square_uniformity(c);
  EXPECT_EQ(r.chi2, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
  EXPECT_EQ(r.cluster_counts, c);
}

TEST(ChiSquare, HandCase) {
  const std::vector<std::size_t> c = {75, 25};
  const auto r = chi_square_uniformity(c);
  EXPECT_EQ(r.chi2, 25.0);
  EXPECT_NEAR(r.p_value, boost::math::gamma_q(0.5, 12.5), 1e-12);
}

TEST(ChiSquare, ScaleInvariantAndZeroOnlyIfEqual) {
  std::mt19937_64 gen(4);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::size_t> c(2 + gen() % 8);
    for (auto& v : c) v = 1 + gen() % 50;
    const double base = chi_square_uniformity(c).chi2;
    auto scaled = c;
    const std::size_t f = 1 + gen() % 1000;
    for (auto& v : scaled) v *= f;
    EXPECT_NEAR(chi_square_uniformity(scaled).chi2, base, 1e-9 * std::max(1.0, base));
    const bool equal = std::all_of(c.begin(), c.end(), [&](auto v) { return v == c[0]; });
    EXPECT_EQ(base == 0.0, equal);
  }
}

TEST(ChiSquare, Errors) {
  EXPECT_THROW(chi_square_uniformity(std::vector<std::size_t>{5}), InvalidInput);
  EXPECT_THROW(chi_square_uniformity(std::vector<std::size_t>{0, 0}), InvalidInput);
}

TEST(ChiSquare, ClusterCounts) {
  SampleManifest m;
  for (std::uint32_t c : {0u, 2u, 2u, 1u, 2u}) m.entries.push_back({"x", 0, c, 1.0});
  EXPECT_EQ(cluster_counts(m, 4), (std::vector<std::size_t>{1, 1, 3, 0}));
  EXPECT_THROW(cluster_counts(m, 2), InvalidInput);
}

// --- ranks and SRCC ------------------------------------------------------------

TEST(Ranks, AverageTies) {
  const std::vector<double> v = {3.0, 1.0, 3.0, 2.0};
  EXPECT_EQ(average_ranks(v), (std::vector<double>{3.5, 1.0, 3.5, 2.0}));
  EXPECT_EQ(average_ranks(v, true), (std::vector<double>{1.5, 4.0, 1.5, 3.0}));
}

TEST(Srcc, IdentityAndReversal) {
  const std::vector<double> a = {0.3, -1.0, 2.0, 7.5, 0.0};
  std::vector<double> r(a.size());
  std::transform(a.begin(), a.end(), r.begin(), [](double x) { return -x; });
  EXPECT_EQ(srcc(a, a), 1.0);
  EXPECT_EQ(srcc(a, r), -1.0);
}

TEST(Srcc, HandCase) {
  const std::vector<double> a = {1, 2, 3, 4, 5};
  const std::vector<double> b = {2, 1, 4, 3, 5};
  EXPECT_NEAR(srcc(a, b), 0.8, 1e-15);
}

TEST(Srcc, MatchesClosedFormWithoutTies) {
  std::mt19937_64 gen(12);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + gen() % 20;
    std::vector<double> a(n), b(n);
    std::iota(a.begin(), a.end(), 1.0);
    std::iota(b.begin(), b.end(), 1.0);
    std::shuffle(a.begin(), a.end(), gen);
    std::shuffle(b.begin(), b.end(), gen);
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
    const double nn = static_cast<double>(n);
    EXPECT_NEAR(srcc(a, b), 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0)), 1e-12);
  }
}

TEST(Srcc, TiesUsePearsonOfAverageRanks) {
  const std::vector<double> a = {1, 1, 2, 3};
  const std::vector<double> b = {1, 2, 3, 3};
  // ranks (1.5, 1.5, 3, 4) and (1, 2, 3.5, 3.5); Pearson by hand.
  const double ra[] = {1.5, 1.5, 3, 4}, rb[] = {1, 2, 3.5, 3.5};
  double sab = 0, saa = 0, sbb = 0;
  for (int i = 0; i < 4; ++i) {
    sab += (ra[i] - 2.5) * (rb[i] - 2.5);
    saa += (ra[i] - 2.5) * (ra[i] - 2.5);
    sbb += (rb[i] - 2.5) * (rb[i] - 2.5);
  }
  EXPECT_NEAR(srcc(a, b), sab / std::sqrt(saa * sbb), 1e-14);
}

TEST(Srcc, Errors) {
  EXPECT_THROW(srcc(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), InvalidInput);
  EXPECT_THROW(srcc(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), InvalidInput);
  EXPECT_THROW(srcc(std::vector<double>{1}, std::vector<double>{1}), InvalidInput);
}

TEST(RankModels, OneClip) {
  const auto c = collection_from_dmos({{0.5, 0.1}});
  const auto r = rank_models(c, Channel::kOvrl);
  EXPECT_EQ(r.ranks, (std::vector<double>{1.0, 2.0}));
}

TEST(RankModels, EqualMeansTie) {
  const auto c = collection_from_dmos({{0.5, 0.1}, {0.1, 0.5}});
  EXPECT_EQ(rank_models(c, Channel::kOvrl).ranks, (std::vector<double>{1.5, 1.5}));
}

TEST(RankModels, HandMeans) {
  const auto c = collection_from_dmos({{0.3, -0.6, 1.2}, {0.0, 0.3, -0.3}, {0.6, 0.0, 0.3}});
  const auto r = rank_models(c, Channel::kOvrl);
  EXPECT_NEAR(r.mean_dmos[0], 0.3, 1e-12);
  EXPECT_NEAR(r.mean_dmos[1], -0.1, 1e-12);
  EXPECT_NEAR(r.mean_dmos[2], 0.4, 1e-12);
  EXPECT_EQ(r.ranks, (std::vector<double>{2.0, 3.0, 1.0}));
  const std::vector<std::size_t> subset = {1};
  EXPECT_EQ(rank_models(c, Channel::kOvrl, subset).ranks, (std::vector<double>{2.0, 1.0, 3.0}));
  const std::vector<std::size_t> bad = {3};
  EXPECT_THROW(rank_models(c, Channel::kOvrl, bad), InvalidInput);
}

// --- bootstrap -----------------------------------------------------------------

TEST(Bootstrap, FullBudgetIsExact) {
  const auto c = collection_from_dmos({{0.1, 0.5, -0.2}, {0.3, 0.2, 0.0}, {-0.4, 0.1, 0.3}, {0.2, 0.2, 0.1}});
  const auto f = bootstrap_srcc(c, nullptr, {4, SamplingMode::kRandom, Channel::kOvrl, 3}, 20);
  EXPECT_EQ(f.bootstrap_rounds, 20);
  EXPECT_EQ(f.per_round.size(), 20u);
  for (double v : f.per_round) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(f.srcc_mean, 1.0);
  EXPECT_EQ(f.srcc_std, 0.0);
}

TEST(Bootstrap, Summary) {
  std::vector<double> v(41);
  for (int i = 0; i <= 40; ++i) v[i] = i / 40.0;
  const auto f = summarize_rounds(v);
  EXPECT_NEAR(f.srcc_mean, 0.5, 1e-12);
  EXPECT_NEAR(f.ci95_low, 0.025, 1e-12);
  EXPECT_NEAR(f.ci95_high, 0.975, 1e-12);
  double ss = 0;
  for (double x : v) ss += (x - 0.5) * (x - 0.5);
  EXPECT_NEAR(f.srcc_std, std::sqrt(ss / 40.0), 1e-12);
  EXPECT_THROW(summarize_rounds({}), InvalidInput);
}

TEST(Bootstrap, RoundsAreReproducibleAndDistinct) {
  EXPECT_EQ(round_seed(5, 3), round_seed(5, 3));
  EXPECT_NE(round_seed(5, 3), round_seed(5, 4));
  EXPECT_NE(round_seed(5, 3), round_seed(6, 3));
}

TEST(Bootstrap, AuraBeatsRandomOnPlantedGaps) {
  WorkloadSpec spec;
  spec.n_clips = 3000;
  spec.dim = 8;
  spec.k_true = 4;
  spec.n_models = 8;
  spec.noise_std = 0.3;
  spec.clean_fraction = 0.8;
  spec.seed = 2;
  const auto coll = generate_workload(spec);
  SelectKOptions opt;
  opt.k_grid = {4};
  const auto clusters = select_k(coll.points(), opt);
  const auto aura = bootstrap_srcc(coll, &clusters, {30, SamplingMode::kRanking, Channel::kOvrl, 1}, 100);
  const auto rand = bootstrap_srcc(coll, &clusters, {30, SamplingMode::kRandom, Channel::kOvrl, 1}, 100);
  EXPECT_GE(aura.srcc_mean, rand.srcc_mean);
  EXPECT_LE(aura.ci95_low, aura.srcc_mean);
  EXPECT_GE(aura.ci95_high, aura.srcc_mean);
}

TEST(Bootstrap, NeedsTwoRounds) {
  const auto c = collection_from_dmos({{0.1, 0.5}, {0.3, 0.2}});
  EXPECT_THROW(bootstrap_srcc(c, nullptr, {2, SamplingMode::kRandom, Channel::kOvrl, 3}, 1), InvalidInput);
}

// --- OOD and categories ---------------------------------------------------------

TEST(Ood, AllInAndAllOut) {
  const auto c = labeled({"a", "b", "a"});
  const auto m = manifest_of(c, all_of(c));
  EXPECT_EQ(ood_fraction(m, c, {"a", "b"}).fraction, 0.0);
  EXPECT_EQ(ood_fraction(m, c, {"z"}).fraction, 1.0);
}

TEST(Ood, EightOfEleven) {
  std::vector<std::optional<std::string>> labels = {"x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8",
                                                    "in1", "in2", "in1", std::nullopt};
  const auto c = labeled(labels);
  const auto r = ood_fraction(manifest_of(c, all_of(c)), c, {"in1", "in2"});
  EXPECT_EQ(r.ood, 8u);
  EXPECT_EQ(r.labeled, 11u);
  EXPECT_EQ(r.unlabeled, 1u);
  EXPECT_DOUBLE_EQ(r.fraction, 8.0 / 11.0);
}

TEST(Ood, NothingLabeledThrows) {
  const auto c = labeled({std::nullopt, std::nullopt});
  EXPECT_THROW(ood_fraction(manifest_of(c, all_of(c)), c, {"a"}), InvalidInput);
}

TEST(Categories, SingleInBaseline) {
  const auto c = labeled({"a", "a"});
  const auto r = top_categories(manifest_of(c, all_of(c)), c, {"a"});
  EXPECT_TRUE(r.ood.empty());
  EXPECT_EQ(r.in_distribution, (std::vector<CategoryCount>{{"a", 2}}));
}

TEST(Categories, TieBreakByName) {
  const auto c = labeled({"b", "a", "c", "b", "a", "b", "a"});
  const auto r = top_categories(manifest_of(c, all_of(c)), c, {}, 2);
  EXPECT_EQ(r.ood, (std::vector<CategoryCount>{{"a", 3}, {"b", 3}}));
}

TEST(Categories, MixedSixCategories) {
  const auto c = labeled({"wind", "dog", "fan", "dog", "siren", "fan", "wind", "dog", "babble",
                          "siren", "fan", "keys", std::nullopt});
  const auto r = top_categories(manifest_of(c, all_of(c)), c, {"fan", "babble", "keys"});
  // dog 3, siren 2, wind 2 outside; fan 3, babble 1, keys 1 inside.
  EXPECT_EQ(r.ood, (std::vector<CategoryCount>{{"dog", 3}, {"siren", 2}, {"wind", 2}}));
  EXPECT_EQ(r.in_distribution, (std::vector<CategoryCount>{{"fan", 3}, {"babble", 1}, {"keys", 1}}));
}

// --- difficulty -------------------------------------------------------------------

TEST(MeanDmos, SingleCell) {
  ClipRecord r;
  r.clip_id = "x";
  r.embedding = {0.f};
  r.scores["m"] = MosPair{{3.0, 2.0, 2.5}, {2.8, 4.1, 3.0}};
  ClipCollection c(1, {"m"}, {r});
  const auto d = mean_dmos(manifest_of(c, {0}), c);
  EXPECT_NEAR(d.sig.mean, -0.2, 1e-12);
  EXPECT_NEAR(d.bak.mean, 2.1, 1e-12);
  EXPECT_NEAR(d.ovrl.mean, 0.5, 1e-12);
  EXPECT_EQ(d.ovrl.ci95, 0.0);
  EXPECT_EQ(d.count, 1u);
}

TEST(MeanDmos, FourHandValues) {
  // Cells 0.1, 0.3, -0.2, 0.6: mean 0.2, sample sd sqrt(0.34/3).
  const auto c = collection_from_dmos({{0.1, 0.3}, {-0.2, 0.6}});
  const auto d = mean_dmos(manifest_of(c, {0, 1}), c);
  EXPECT_NEAR(d.ovrl.mean, 0.2, 1e-12);
  EXPECT_NEAR(d.ovrl.ci95, 1.96 * std::sqrt(0.34 / 3.0) / 2.0, 1e-12);
  EXPECT_EQ(d.count, 4u);
  const auto one = mean_dmos(manifest_of(c, {0, 1}), c, {"m1"});
  EXPECT_NEAR(one.ovrl.mean, 0.45, 1e-12);
}

TEST(MeanDmos, Errors) {
  const auto c = collection_from_dmos({{0.1}});
  EXPECT_THROW(mean_dmos(SampleManifest{}, c), InvalidInput);
  EXPECT_THROW(mean_dmos(manifest_of(c, {0}), c, {"nope"}), InvalidInput);
}
