#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "facexai/embedder.hpp"
#include "facexai/semantics.hpp"

namespace facexai {

struct SyntheticEmbedderConfig {
  // Planted importance w_n, one per region of the bound mask stack.
  std::vector<double> weights;
  // Embedding dimension; must exceed the region count. The extra dimensions
  // carry a fixed seeded offset that never depends on the image.
  int dim = 64;
  std::uint64_t seed = 0;
  double offset_scale = 1.0;
  // Feature-map channels (0 disables activations) on a grid x grid raster.
  int activation_channels = 0;
  int activation_grid = 4;
  // Channels are split into this many families, each responding to its own
  // horizontal band of the image.
  int activation_families = 2;
};

// Oracle embedder with analytically known region importance.
//
//   e[n] = w_n * (mean intensity of region n in [0,1] - 128/255),  n < s
//   e[k] = offset_k (seeded, image independent),                   k >= s
//
// Occluding region n with the mid-gray fill zeroes e[n] exactly, so the L1
// norm of the embedding is affine in region presence and a region with
// w_n = 0 never moves the embedding. The L2 norm is monotone in each |e[n]|.
// Every image is read through the masks given at construction.
class SyntheticRegionEmbedder final : public Embedder {
 public:
  SyntheticRegionEmbedder(RegionMaskStack masks, SyntheticEmbedderConfig config);

  std::string model_id() const override { return model_id_; }
  Embedding embed(const Image& image) const override;
  bool has_activations() const override { return config_.activation_channels > 0; }
  FeatureMaps activations(const Image& image) const override;

  const SyntheticEmbedderConfig& config() const { return config_; }
  const RegionMaskStack& masks() const { return masks_; }
  // Per-region mean intensity minus the mid-gray level.
  std::vector<double> region_offsets(const Image& image) const;
  // Channel-to-family assignment used by activations().
  int family_of(int channel) const;

 private:
  RegionMaskStack masks_;
  SyntheticEmbedderConfig config_;
  std::vector<double> offset_;
  std::vector<double> gain_;
  std::vector<std::vector<std::uint32_t>> pixels_;
  std::string model_id_;
};

}  // namespace facexai
