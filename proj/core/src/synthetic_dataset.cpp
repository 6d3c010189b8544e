#include <random>

#include "facexai/dataset.hpp"
#include "facexai/error.hpp"

namespace facexai {

Image paint_regions(const RegionMaskStack& masks, std::span<const std::uint8_t> levels,
                    int channels) {
  if (levels.size() != masks.size()) {
    throw ValidationError("paint_regions: " + std::to_string(levels.size()) + " levels for " +
                          std::to_string(masks.size()) + " regions");
  }
  Image out(masks.width, masks.height, channels, 128);
  auto px = out.data();
  for (std::size_t n = 0; n < masks.size(); ++n) {
    auto bits = masks.masks[n].data();
    for (std::size_t p = 0; p < bits.size(); ++p) {
      if (!bits[p]) continue;
      for (int c = 0; c < channels; ++c) px[p * channels + c] = levels[n];
    }
  }
  return out;
}

Dataset make_synthetic_dataset(const SemanticSet& set, const SyntheticDatasetConfig& config) {
  if (config.image_size < 8) throw ValidationError("synthetic dataset: image_size must be >= 8");
  if (config.images < 1) throw ValidationError("synthetic dataset: images must be >= 1");
  if (config.pairs < 0 || 2 * config.pairs > config.images) {
    throw ValidationError("synthetic dataset: pairs must be in [0, images / 2]");
  }
  if (config.min_amplitude < 0 || config.max_amplitude > 127 ||
      config.min_amplitude > config.max_amplitude) {
    throw ValidationError("synthetic dataset: amplitudes must satisfy 0 <= min <= max <= 127");
  }
  const auto landmarks = canonical_landmarks(config.image_size, config.image_size, "synthetic");
  LandmarkFile lm = landmarks;
  if (lm.mesh_size != set.mesh_size) {
    throw ValidationError("synthetic dataset: set '" + set.set_id + "' does not use the " +
                          std::to_string(lm.mesh_size) + "-point canonical mesh");
  }
  const auto base = build_masks(lm, set);

  Dataset ds;
  ds.set_id = set.set_id;
  ds.region_names = set.names();
  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<int> amp(config.min_amplitude, config.max_amplitude);
  std::bernoulli_distribution coin(0.5);
  std::vector<std::uint8_t> levels(set.size());
  for (int i = 0; i < config.images; ++i) {
    const int a = amp(rng);
    for (auto& l : levels) l = static_cast<std::uint8_t>(coin(rng) ? 128 + a : 128 - a);
    Sample sample;
    sample.image_id = "synthetic_" + std::to_string(i);
    sample.masks = base;
    sample.masks.image_id = sample.image_id;
    sample.image = paint_regions(base, levels);
    ds.samples.push_back(std::move(sample));
  }
  for (int k = 0; k < config.pairs; ++k) {
    ds.pairs.push_back({"pair_" + std::to_string(k), static_cast<std::size_t>(2 * k),
                        static_cast<std::size_t>(2 * k + 1)});
  }
  return ds;
}

}  // namespace facexai
