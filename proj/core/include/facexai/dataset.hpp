#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "facexai/image.hpp"
#include "facexai/semantics.hpp"

namespace facexai {

// One image with its region masks.
struct Sample {
  std::string image_id;
  Image image;
  RegionMaskStack masks;
};

// Indices into Dataset::samples.
struct PairSpec {
  std::string pair_id;
  std::size_t a = 0;
  std::size_t b = 0;
};

struct Dataset {
  std::string set_id;
  std::vector<std::string> region_names;
  std::vector<Sample> samples;
  std::vector<PairSpec> pairs;

  std::size_t region_count() const { return region_names.size(); }
  std::optional<std::size_t> find(std::string_view image_id) const;
};

struct ManifestEntry {
  std::string image_id;
  std::filesystem::path image_path;
  std::filesystem::path landmark_path;
};

// Image manifest: a JSON list of {image_id, image_path, landmark_path}, or an
// object holding that list under "images". Relative paths resolve against the
// manifest's directory. Image ids must be unique.
std::vector<ManifestEntry> load_image_manifest(const std::filesystem::path& path);

struct PairEntry {
  std::string pair_id;
  std::string image_a;
  std::string image_b;
};

// Pair manifest: a JSON list of {pair_id?, image_a, image_b} naming image ids
// of the image manifest, or an object holding that list under "pairs".
std::vector<PairEntry> load_pair_manifest(const std::filesystem::path& path);

// Loads every image and landmark file and builds its masks. Pairs must name
// known image ids.
Dataset load_dataset(const std::vector<ManifestEntry>& images, const SemanticSet& set,
                     const std::vector<PairEntry>& pairs = {});

struct SyntheticDatasetConfig {
  int image_size = 64;
  int images = 48;
  int pairs = 24;
  std::uint64_t seed = 0;
  // Every region of image i is painted at 128 +/- amplitude_i, with the
  // amplitude drawn uniformly from this range and a random sign per region.
  int min_amplitude = 20;
  int max_amplitude = 100;
};

// Images drawn on the canonical mesh, so all samples share one mask stack
// (what SyntheticRegionEmbedder binds). Pair k joins images 2k and 2k+1.
Dataset make_synthetic_dataset(const SemanticSet& set, const SyntheticDatasetConfig& config);

// Paints region n of `masks` with levels[n]; later regions overwrite earlier
// ones where masks overlap.
Image paint_regions(const RegionMaskStack& masks, std::span<const std::uint8_t> levels,
                    int channels = 3);

}  // namespace facexai
