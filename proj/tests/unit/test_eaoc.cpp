#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "facexai/aggregation.hpp"
#include "facexai/eaoc.hpp"
#include "facexai/error.hpp"
#include "test_support.hpp"

namespace facexai {
namespace {

// Rank of j after overwriting its norm and re-sorting everything.
std::size_t brute_force_rank(std::vector<double> norms, std::size_t j, double value) {
  norms[j] = value;
  std::vector<std::size_t> idx(norms.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return norms[a] != norms[b] ? norms[a] > norms[b] : a < b;
  });
  return static_cast<std::size_t>(std::find(idx.begin(), idx.end(), j) - idx.begin());
}

TEST(OutputSpace, OrderIsDescendingWithIndexTieBreak) {
  OutputSpace space({1.0, 3.0, 3.0, 0.5});
  EXPECT_EQ(space.order(), (RankSequence{1, 2, 0, 3}));
  EXPECT_EQ(space.rank_of(2), 1u);
  EXPECT_EQ(space.rank_of(3), 3u);
}

TEST(OutputSpace, ReplacementExample) {
  OutputSpace space({10.0, 5.0, 1.0});
  EXPECT_EQ(space.rank_with_replacement(0, 3.0), 1u);
  EXPECT_EQ(eaoc_score(space, 0, 3.0), 1u);
  EXPECT_EQ(space.rank_with_replacement(2, 20.0), 0u);
  EXPECT_EQ(eaoc_score(space, 2, 20.0), 2u);
  EXPECT_EQ(eaoc_score(space, 1, 5.0), 0u);
}

TEST(OutputSpace, RankQueryMatchesBruteForceResort) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> size(1, 40);
  std::uniform_int_distribution<int> level(0, 12);  // coarse levels force ties
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> norms(static_cast<std::size_t>(size(rng)));
    for (auto& v : norms) v = level(rng) * 0.5;
    OutputSpace space(norms);
    std::uniform_int_distribution<std::size_t> pick(0, norms.size() - 1);
    const auto j = pick(rng);
    const double value = level(rng) * 0.5 + (trial % 3 == 0 ? 0.25 : 0.0);
    ASSERT_EQ(space.rank_with_replacement(j, value), brute_force_rank(norms, j, value))
        << "trial " << trial;
  }
}

TEST(OutputSpace, RejectsInvalidNorms) {
  EXPECT_THROW(OutputSpace({}), ValidationError);
  EXPECT_THROW(OutputSpace({1.0, -1.0}), ValidationError);
  EXPECT_THROW(OutputSpace({1.0, std::nan("")}), ValidationError);
}

TEST(Eaoc, PlantedZeroRegionsScoreZero) {
  auto weights = test::planted_weights(13);
  weights[3] = 0.0;
  weights[9] = 0.0;
  auto w = test::synthetic_world("set0", 16, 0, 21, 64, weights);
  EaocConfig cfg;
  const auto cal = calibrate_eaoc(*w.embedder, w.dataset.samples, cfg);
  for (std::size_t j = 0; j < w.dataset.samples.size(); ++j) {
    const auto r = eaoc_attribution(*w.embedder, w.dataset.samples, cal, j, cfg);
    EXPECT_EQ(r.attribution.scores[3], 0.0);
    EXPECT_EQ(r.attribution.scores[9], 0.0);
    EXPECT_EQ(r.group_rankings.size(), 1u);
  }
}

TEST(Eaoc, PlantedOrderIsRecovered) {
  auto w = test::synthetic_world("set0", 24, 0, 4);
  EaocConfig cfg;
  cfg.jobs = 2;
  const auto cal = calibrate_eaoc(*w.embedder, w.dataset.samples, cfg);
  std::vector<std::vector<RankSequence>> per_image;
  for (std::size_t j = 0; j < w.dataset.samples.size(); ++j) {
    per_image.push_back(eaoc_attribution(*w.embedder, w.dataset.samples, cal, j, cfg).group_rankings);
  }
  const auto global = two_level_borda(per_image);
  RankSequence planted(13);
  std::iota(planted.begin(), planted.end(), std::size_t{0});
  EXPECT_EQ(global.order, planted);
}

TEST(Eaoc, JobCountDoesNotChangeScores) {
  auto w = test::synthetic_world("set1", 10, 0, 8);
  EaocConfig one;
  EaocConfig many;
  many.jobs = 4;
  const auto cal1 = calibrate_eaoc(*w.embedder, w.dataset.samples, one);
  const auto cal4 = calibrate_eaoc(*w.embedder, w.dataset.samples, many);
  for (std::size_t j = 0; j < 10; ++j) {
    EXPECT_EQ(eaoc_attribution(*w.embedder, w.dataset.samples, cal1, j, one).attribution.scores,
              eaoc_attribution(*w.embedder, w.dataset.samples, cal4, j, many).attribution.scores);
  }
}

TEST(Eaoc, GroupsNeedActivations) {
  auto w = test::synthetic_world("set0", 4, 0, 1);
  ConceptGroups g{8, {{0, 1, 2, 3}, {4, 5, 6, 7}}, {}};
  EaocConfig cfg;
  EXPECT_THROW(calibrate_eaoc(*w.embedder, w.dataset.samples, cfg, g), ValidationError);
  cfg.representation = Representation::kActivations;
  EXPECT_THROW(calibrate_eaoc(*w.embedder, w.dataset.samples, cfg, g), UnsupportedOperation);
}

TEST(Eaoc, GroupedRankingsOnePerGroup) {
  auto w = test::synthetic_world("set0", 8, 0, 2, 64, {}, 8);
  ConceptGroups g{8, {{0, 1, 2, 3}, {4, 5, 6, 7}}, {}};
  EaocConfig cfg;
  cfg.representation = Representation::kActivations;
  const auto cal = calibrate_eaoc(*w.embedder, w.dataset.samples, cfg, g);
  ASSERT_EQ(cal.spaces.size(), 2u);
  const auto r = eaoc_attribution(*w.embedder, w.dataset.samples, cal, 0, cfg);
  ASSERT_EQ(r.group_rankings.size(), 2u);
  // Merged scores are s - position of the BORDA merge of the group rankings.
  const auto merged = borda_aggregate(r.group_rankings);
  for (std::size_t n = 0; n < 13; ++n) {
    EXPECT_EQ(r.attribution.scores[n], static_cast<double>(13 - merged.position[n]));
  }
}

TEST(ConceptGroups, ValidationAndJson) {
  ConceptGroups ok{4, {{0, 2}, {1, 3}}, {{"k", 2}}};
  EXPECT_NO_THROW(ok.validate());
  const auto back = concept_groups_from_json(to_json(ok));
  EXPECT_EQ(back.groups, ok.groups);
  EXPECT_THROW((ConceptGroups{4, {{0, 1}, {1, 2, 3}}, {}}.validate()), ValidationError);
  EXPECT_THROW((ConceptGroups{4, {{0, 1}, {2}}, {}}.validate()), ValidationError);
  EXPECT_THROW((ConceptGroups{4, {{0, 1, 2, 7}}, {}}.validate()), ValidationError);
}

TEST(Mage, SingleClusterAndOneClusterPerChannel) {
  auto w = test::synthetic_world("set0", 6, 0, 3, 64, {}, 8);
  MageConfig cfg;
  cfg.k = 1;
  auto one = mage_concept_groups(*w.embedder, w.dataset.samples, cfg);
  ASSERT_EQ(one.groups.size(), 1u);
  EXPECT_EQ(one.groups[0], (std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7}));
  cfg.k = 8;
  auto each = mage_concept_groups(*w.embedder, w.dataset.samples, cfg);
  ASSERT_EQ(each.groups.size(), 8u);
  for (int c = 0; c < 8; ++c) EXPECT_EQ(each.groups[static_cast<std::size_t>(c)], std::vector<int>{c});
  cfg.k = 9;
  EXPECT_THROW(mage_concept_groups(*w.embedder, w.dataset.samples, cfg), ValidationError);
}

TEST(Mage, RecoversPlantedChannelFamilies) {
  auto w = test::synthetic_world("set0", 8, 0, 6, 64, {}, 8);
  MageConfig cfg;
  cfg.k = 2;
  cfg.seed = 17;
  const auto groups = mage_concept_groups(*w.embedder, w.dataset.samples, cfg);
  ASSERT_EQ(groups.groups.size(), 2u);
  EXPECT_EQ(groups.groups[0], (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(groups.groups[1], (std::vector<int>{4, 5, 6, 7}));
}

TEST(Mage, ClusteringIsSeedDeterministic) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<std::vector<double>> sig(20, std::vector<double>(5));
  for (auto& v : sig) {
    for (auto& x : v) x = noise(rng);
  }
  MageConfig cfg;
  cfg.k = 4;
  cfg.seed = 3;
  EXPECT_EQ(cluster_channels(sig, cfg).groups, cluster_channels(sig, cfg).groups);
}

}  // namespace
}  // namespace facexai
