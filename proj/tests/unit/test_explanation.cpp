#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "facexai/error.hpp"
#include "facexai/explanation.hpp"
#include "test_support.hpp"

namespace facexai {
namespace {

// Fixed random projection of the raw pixels; every region moves it.
class ProjectionEmbedder final : public Embedder {
 public:
  ProjectionEmbedder(std::size_t inputs, std::size_t dim, std::uint64_t seed)
      : dim_(dim), weights_(inputs * dim) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    for (auto& w : weights_) w = g(rng);
  }
  std::string model_id() const override { return "projection"; }
  Embedding embed(const Image& image) const override {
    Embedding e{std::vector<double>(dim_, 0.1), "projection"};
    auto px = image.data();
    for (std::size_t i = 0; i < px.size(); ++i) {
      const double v = px[i] / 255.0;
      for (std::size_t k = 0; k < dim_; ++k) e.values[k] += weights_[i * dim_ + k] * v;
    }
    return e;
  }

 private:
  std::size_t dim_;
  std::vector<double> weights_;
};

std::vector<double> sum_of_masks(const RegionMaskStack& masks, const std::vector<double>& v) {
  std::vector<double> map(static_cast<std::size_t>(masks.width) * masks.height, 0.0);
  for (std::size_t n = 0; n < masks.size(); ++n) {
    if (v[n] == 0.0) continue;
    auto bits = masks.masks[n].data();
    for (std::size_t p = 0; p < bits.size(); ++p) {
      if (bits[p]) map[p] += v[n];
    }
  }
  return map;
}

TEST(SingleRemoval, InvariantsOnRandomSyntheticPairs) {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> weight(0.1, 3.0);
  for (int trial = 0; trial < 40; ++trial) {
    const std::string set_id = trial % 2 ? "set1" : "set0";
    std::vector<double> w(13);
    for (auto& v : w) v = weight(rng);
    auto world = test::synthetic_world(set_id, 2, 1, 1000 + trial, 48, w);
    std::vector<double> g(13);
    for (auto& v : g) v = weight(rng);
    ExplainConfig cfg;
    const auto& a = world.dataset.samples[0];
    const auto& b = world.dataset.samples[1];
    const auto ex = single_removal_s0(*world.embedder, a, b, g, world.dataset.region_names, cfg);

    double pos = 0.0, neg = 0.0;
    for (double v : ex.normalized) (v >= 0.0 ? pos : neg) += v;
    if (pos != 0.0) EXPECT_NEAR(pos, 1.0, 1e-9);
    if (neg != 0.0) EXPECT_NEAR(neg, -1.0, 1e-9);
    for (std::size_t n = 0; n < 13; ++n) {
      EXPECT_DOUBLE_EQ(ex.delta[n], g[n] * (ex.score - ex.occluded_score[n]));
      EXPECT_DOUBLE_EQ(ex.contribution[n], ex.delta[n] * ex.area_weight[n]);
      EXPECT_EQ(std::signbit(ex.normalized[n]), std::signbit(ex.contribution[n]));
    }
    EXPECT_EQ(ex.map_a, sum_of_masks(a.masks, ex.normalized));
    EXPECT_EQ(ex.map_b, sum_of_masks(b.masks, ex.normalized));
  }
}

TEST(SingleRemoval, IdenticalImagesGiveAllZeroContributions) {
  auto world = test::synthetic_world("set2", 1, 0, 5, 64, test::planted_weights(30));
  const auto& a = world.dataset.samples[0];
  const std::vector<double> g(30, 1.0);
  const auto ex = single_removal_s0(*world.embedder, a, a, g, world.dataset.region_names, {});
  EXPECT_EQ(ex.score, 1.0);
  for (std::size_t n = 0; n < 30; ++n) {
    EXPECT_EQ(ex.contribution[n], 0.0);
    EXPECT_EQ(ex.normalized[n], 0.0);
  }
  const auto table = contribution_table(ex, 10);
  EXPECT_TRUE(table.negative.empty());
  EXPECT_EQ(table.positive.size(), 10u);
  for (const auto& row : table.positive) EXPECT_EQ(format_value(row.value), "0.0000");
  // Untinted maps: the face is copied unchanged.
  const auto [ma, mb] = render_pair(ex, a, a, 10);
  for (int y = 0; y < a.image.height(); ++y) {
    for (int x = 0; x < a.image.width(); ++x) {
      for (int c = 0; c < 3; ++c) ASSERT_EQ(ma.at(x, y, c), a.image.at(x, y, c));
    }
  }
}

TEST(SingleRemoval, ProjectionModelMapsAndNormalization) {
  auto world = test::synthetic_world("set2", 2, 1, 17, 32, test::planted_weights(30));
  ProjectionEmbedder model(32 * 32 * 3, 12, 3);
  const auto& a = world.dataset.samples[0];
  const auto& b = world.dataset.samples[1];
  const std::vector<double> g(30, 1.0);
  ExplainConfig cfg;
  cfg.jobs = 3;
  const auto ex = single_removal_s0(model, a, b, g, world.dataset.region_names, cfg);
  double pos = 0.0, neg = 0.0;
  for (double v : ex.normalized) (v >= 0.0 ? pos : neg) += v;
  EXPECT_NEAR(pos, 1.0, 1e-9);
  EXPECT_NEAR(neg, -1.0, 1e-9);
  EXPECT_EQ(ex.map_a, sum_of_masks(a.masks, ex.normalized));
  cfg.jobs = 1;
  EXPECT_EQ(single_removal_s0(model, a, b, g, world.dataset.region_names, cfg).contribution,
            ex.contribution);
}

TEST(SingleRemoval, AreaWeightIsTheRegionShareOfBothFaces) {
  auto world = test::synthetic_world("set0", 2, 1, 2);
  const auto& a = world.dataset.samples[0];
  const auto& b = world.dataset.samples[1];
  const std::vector<double> g(13, 1.0);
  const auto ex = single_removal_s0(*world.embedder, a, b, g, world.dataset.region_names, {});
  const double face = static_cast<double>(a.masks.face_area() + b.masks.face_area());
  for (std::size_t n = 0; n < 13; ++n) {
    const double expected =
        static_cast<double>(a.masks.masks[n].area() + b.masks.masks[n].area()) / face;
    EXPECT_DOUBLE_EQ(ex.area_weight[n], expected);
  }
  ExplainConfig uniform;
  uniform.area_weighting = AreaWeighting::kUniform;
  const auto ux = single_removal_s0(*world.embedder, a, b, g, world.dataset.region_names, uniform);
  for (double w : ux.area_weight) EXPECT_EQ(w, 1.0);
}

TEST(SingleRemoval, RejectsBadWeights) {
  auto world = test::synthetic_world("set0", 2, 1, 2);
  const auto& a = world.dataset.samples[0];
  std::vector<double> g(13, 1.0);
  g[4] = 0.0;
  EXPECT_THROW(single_removal_s0(*world.embedder, a, a, g, world.dataset.region_names, {}),
               ValidationError);
  EXPECT_THROW(single_removal_s0(*world.embedder, a, a, std::vector<double>(12, 1.0),
                                 world.dataset.region_names, {}),
               ValidationError);
}

TEST(SingleRemoval, EmptyMaskInBothImagesIsSkipped) {
  auto world = test::synthetic_world("set0", 2, 1, 2);
  auto a = world.dataset.samples[0];
  auto b = world.dataset.samples[1];
  a.masks.masks[5] = Mask(a.masks.width, a.masks.height, false);
  b.masks.masks[5] = Mask(b.masks.width, b.masks.height, false);
  const std::vector<double> g(13, 1.0);
  const auto ex = single_removal_s0(*world.embedder, a, b, g, world.dataset.region_names, {});
  EXPECT_EQ(ex.skipped[5], 1);
  EXPECT_EQ(ex.contribution[5], 0.0);
  ASSERT_EQ(ex.warnings.size(), 1u);
}

TEST(Normalize, SignGroupsSumToPlusMinusOne) {
  const std::vector<double> c{0.2, -0.1, 0.0, 0.6, -0.3};
  const auto n = normalize_contributions(c);
  EXPECT_DOUBLE_EQ(n[0], 0.25);
  EXPECT_DOUBLE_EQ(n[1], -0.25);
  EXPECT_DOUBLE_EQ(n[2], 0.0);
  EXPECT_DOUBLE_EQ(n[3], 0.75);
  EXPECT_DOUBLE_EQ(n[4], -0.75);
  const auto pos_only = normalize_contributions(std::vector<double>{0.0, 2.0});
  EXPECT_EQ(pos_only, (std::vector<double>{0.0, 1.0}));
}

TEST(TopK, LargestMagnitudesWithIndexTies) {
  const std::vector<double> c{0.1, -0.5, 0.5, 0.05, -0.2};
  EXPECT_EQ(top_k_select(c, 3), (std::vector<std::size_t>{1, 2, 4}));
  EXPECT_EQ(top_k_select(c, 5).size(), 5u);
  EXPECT_THROW(top_k_select(c, 0), ValidationError);
  EXPECT_THROW(top_k_select(c, 6), ValidationError);
}

TEST(RenderMap, AlphaScalesWithMagnitude) {
  RegionMaskStack masks;
  masks.width = 4;
  masks.height = 1;
  masks.masks.assign(2, Mask(4, 1, false));
  masks.masks[0].set(0, 0, true);
  masks.masks[1].set(1, 0, true);
  masks.masks[1].set(2, 0, true);
  Image base(4, 1, 3, 255);
  const std::vector<double> norm{-1.0, 0.5};
  const std::vector<std::size_t> sel{0, 1};
  Palette p;
  const auto out = render_map(base, masks, norm, sel, p);
  EXPECT_EQ(out.height(), 1 + p.legend_height);
  // Full-strength purple at the peak.
  EXPECT_EQ(out.at(0, 0, 0), std::lround(0.25 * 255 + 0.75 * 128));
  EXPECT_EQ(out.at(0, 0, 1), std::lround(0.25 * 255));
  // Half-strength orange.
  EXPECT_EQ(out.at(1, 0, 2), std::lround((1 - 0.375) * 255));
  // Untouched pixel.
  EXPECT_EQ(out.at(3, 0, 0), 255);
  // Unselected regions stay untinted.
  const std::vector<std::size_t> only0{0};
  EXPECT_EQ(render_map(base, masks, norm, only0, p).at(1, 0, 2), 255);
}

TEST(Table, BlocksAscendingAndSerializations) {
  const std::vector<std::string> names{"A", "B \"q\"", "C", "D"};
  const std::vector<double> values{0.003, -0.001, -0.004, 0.0};
  const auto t = make_table(names, values);
  ASSERT_EQ(t.negative.size(), 2u);
  ASSERT_EQ(t.positive.size(), 2u);
  EXPECT_EQ(t.negative[0].name, "C");
  EXPECT_EQ(t.positive[0].name, "D");
  EXPECT_EQ(to_markdown(t),
            "| Negative | Value | Positive | Value |\n|---|---|---|---|\n"
            "| 'C' | -0.0040 | 'D' | 0.0000 |\n| 'B \"q\"' | -0.0010 | 'A' | 0.0030 |\n");
  EXPECT_EQ(to_csv(t),
            "block,region_index,region,value,normalized\n"
            "negative,2,\"C\",-0.0040,-0.800000\n"
            "negative,1,\"B \"\"q\"\"\",-0.0010,-0.200000\n"
            "positive,3,\"D\",0.0000,0.000000\n"
            "positive,0,\"A\",0.0030,1.000000\n");
  const auto j = to_json(t);
  EXPECT_EQ(j["negative"][0]["display"], "-0.0040");
  EXPECT_EQ(j["positive"][1]["region_index"], 0);
}

TEST(Table, FormatValue) {
  EXPECT_EQ(format_value(0.00005), "0.0001");
  EXPECT_EQ(format_value(-0.00414), "-0.0041");
  EXPECT_EQ(format_value(0.0), "0.0000");
}

}  // namespace
}  // namespace facexai
