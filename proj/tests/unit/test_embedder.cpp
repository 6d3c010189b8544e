#include <gtest/gtest.h>

#include <atomic>
#include <cmath>

#include <nlohmann/json.hpp>

#include "facexai/embedder.hpp"
#include "facexai/error.hpp"
#include "facexai/onnx_embedder.hpp"
#include "facexai/parallel.hpp"
#include "facexai/synthetic_embedder.hpp"
#include "test_support.hpp"

namespace facexai {
namespace {

TEST(Similarity, CosineOfKnownVectors) {
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> b{4, 5, 6};
  // 32 / sqrt(14 * 77)
  EXPECT_NEAR(cosine_similarity(a, b), 0.9746318461970762, 1e-15);
  EXPECT_NEAR(cosine_similarity(a, a), 1.0, 1e-15);
  const std::vector<double> neg{-1, -2, -3};
  EXPECT_NEAR(cosine_similarity(a, neg), -1.0, 1e-15);
}

TEST(Similarity, ZeroVectorAndLengthMismatchFail) {
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> z{0, 0, 0};
  EXPECT_THROW(cosine_similarity(a, z), NumericError);
  const std::vector<double> short_v{1, 2};
  EXPECT_THROW(cosine_similarity(a, short_v), ValidationError);
}

TEST(Similarity, Norms) {
  const std::vector<double> v{3, -4};
  EXPECT_DOUBLE_EQ(l1_norm(v), 7.0);
  EXPECT_DOUBLE_EQ(l2_norm(v), 5.0);
  const std::vector<double> w{0, 0};
  EXPECT_DOUBLE_EQ(euclidean_distance(v, w), 5.0);
}

class CountingEmbedder final : public Embedder {
 public:
  std::string model_id() const override { return "counting"; }
  Embedding embed(const Image& image) const override {
    ++calls;
    double sum = 0.0;
    for (auto v : image.data()) sum += v;
    return {{sum, 1.0}, "counting"};
  }
  mutable std::atomic<int> calls{0};
};

TEST(Cache, IdenticalContentHitsTheCache) {
  auto inner = std::make_shared<CountingEmbedder>();
  CachedEmbedder cached(inner);
  Image a(3, 3, 3, 10);
  Image b(3, 3, 3, 10);
  Image c(3, 3, 3, 11);
  EXPECT_EQ(cached.embed(a), cached.embed(b));
  cached.embed(c);
  EXPECT_EQ(inner->calls.load(), 2);
  EXPECT_EQ(cached.hits(), 1u);
  EXPECT_EQ(cached.misses(), 2u);
  EXPECT_EQ(cached.model_id(), "counting");
}

TEST(Cache, ConcurrentLookupsAgree) {
  auto inner = std::make_shared<CountingEmbedder>();
  CachedEmbedder cached(inner);
  std::vector<Embedding> out(64);
  parallel_for(out.size(), 4, [&](std::size_t i) {
    out[i] = cached.embed(Image(4, 4, 3, static_cast<std::uint8_t>(i % 8)));
  });
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i], inner->embed(Image(4, 4, 3, static_cast<std::uint8_t>(i % 8))));
  }
  EXPECT_EQ(cached.size(), 8u);
}

TEST(Cache, CapacityBoundsStoredEntries) {
  auto inner = std::make_shared<CountingEmbedder>();
  CachedEmbedder cached(inner, 2);
  for (int i = 0; i < 5; ++i) cached.embed(Image(2, 2, 1, static_cast<std::uint8_t>(i)));
  EXPECT_EQ(cached.size(), 2u);
  EXPECT_EQ(cached.embed(Image(2, 2, 1, 4)).values[0], 16.0);
}

TEST(Embedder, ActivationsUnsupportedByDefault) {
  CountingEmbedder e;
  EXPECT_FALSE(e.has_activations());
  EXPECT_THROW(e.activations(Image(2, 2, 3)), UnsupportedOperation);
}

TEST(Onnx, ReferenceEmbeddingAndFeatureShape) {
  const auto dir = test::fixtures_dir() / "onnx";
  const auto ref = nlohmann::json::parse(test::read_file(dir / "tiny_embedder_reference.json"));
  OnnxEmbedderConfig cfg;
  cfg.model_path = dir / "tiny_embedder.onnx";
  cfg.input_name = "input";
  cfg.output_name = "embedding";
  cfg.activation_name = "features";
  cfg.input_width = cfg.input_height = 32;
  OnnxEmbedder model(cfg);
  EXPECT_EQ(model.model_id(), "tiny_embedder");

  const auto rgb = ref.at("input_rgb").get<std::vector<int>>();
  Image img(32, 32, 3);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<std::uint8_t>(rgb[c]);
    }
  }
  const auto e = model.embed(img);
  const auto expected = ref.at("embedding").get<std::vector<double>>();
  ASSERT_EQ(e.values.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(e.values[i], expected[i], 1e-5);

  const auto fm = model.activations(img);
  const auto shape = ref.at("features_shape").get<std::vector<int>>();
  EXPECT_EQ(fm.channels, shape[0]);
  EXPECT_EQ(fm.height, shape[1]);
  EXPECT_EQ(fm.width, shape[2]);
  EXPECT_EQ(fm.values.size(), 512u);

  EXPECT_THROW(model.embed(Image(16, 16, 3)), ValidationError);
}

TEST(Onnx, ConfigurationErrors) {
  const auto dir = test::fixtures_dir() / "onnx";
  OnnxEmbedderConfig cfg;
  cfg.model_path = dir / "missing.onnx";
  cfg.output_name = "embedding";
  EXPECT_THROW(OnnxEmbedder{cfg}, ValidationError);
  cfg.model_path = dir / "tiny_embedder.onnx";
  cfg.output_name = "no_such_tensor";
  EXPECT_THROW(OnnxEmbedder{cfg}, ValidationError);
  cfg.output_name = "embedding";
  OnnxEmbedder plain(cfg);
  EXPECT_FALSE(plain.has_activations());
}

TEST(Synthetic, OcclusionZeroesTheRegionCoordinate) {
  auto w = test::synthetic_world("set0", 2, 1, 3);
  const auto& sample = w.dataset.samples[0];
  const auto full = w.embedder->embed(sample.image);
  const auto s = w.set.size();
  for (std::size_t n = 0; n < s; ++n) {
    const std::size_t region[] = {n};
    const auto occluded =
        w.embedder->embed(occlude_regions(sample.image, sample.masks, region, FillStrategy::mid_gray()));
    for (std::size_t k = 0; k < full.values.size(); ++k) {
      if (k == n) {
        EXPECT_EQ(occluded.values[k], 0.0);
      } else {
        EXPECT_EQ(occluded.values[k], full.values[k]) << "region " << n << " dim " << k;
      }
    }
  }
}

TEST(Synthetic, RegionCoordinateIsWeightTimesOffset) {
  auto w = test::synthetic_world("set1", 3, 1, 9);
  const auto& sample = w.dataset.samples[2];
  const auto e = w.embedder->embed(sample.image);
  const auto r = w.embedder->region_offsets(sample.image);
  const auto weights = test::planted_weights(w.set.size());
  for (std::size_t n = 0; n < r.size(); ++n) {
    EXPECT_DOUBLE_EQ(e.values[n], weights[n] * r[n]);
    EXPECT_GT(std::abs(r[n]), 0.0);
  }
}

TEST(Synthetic, ActivationFamiliesRespondToBands) {
  auto w = test::synthetic_world("set0", 1, 0, 1, 64, {}, 6);
  const auto fm = w.embedder->activations(w.dataset.samples[0].image);
  EXPECT_EQ(fm.channels, 6);
  EXPECT_EQ(fm.height, 4);
  EXPECT_EQ(w.embedder->family_of(0), 0);
  EXPECT_EQ(w.embedder->family_of(5), 1);
}

TEST(Synthetic, InvalidConfigurations) {
  auto w = test::synthetic_world("set0", 1, 0, 1);
  SyntheticEmbedderConfig cfg;
  cfg.weights = {1.0};
  EXPECT_THROW(SyntheticRegionEmbedder(w.dataset.samples[0].masks, cfg), ValidationError);
  cfg.weights = test::planted_weights(13);
  cfg.dim = 13;
  EXPECT_THROW(SyntheticRegionEmbedder(w.dataset.samples[0].masks, cfg), ValidationError);
}

}  // namespace
}  // namespace facexai
