#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "facexai/image.hpp"

namespace facexai {

inline constexpr int kFaceMeshSize = 468;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

// Face-mesh landmarks of one image, in pixel coordinates.
struct LandmarkFile {
  std::string image_id;
  int width = 0;
  int height = 0;
  int mesh_size = kFaceMeshSize;
  std::vector<Point2> points;

  // Checks every documented invariant; throws ValidationError listing the
  // offending point.
  void validate() const;
};

LandmarkFile parse_landmarks(const nlohmann::json& doc);
LandmarkFile load_landmarks(const std::filesystem::path& path);
nlohmann::json to_json(const LandmarkFile& landmarks);

struct SemanticRegion {
  std::string name;
  // Each polygon is an ordered list of landmark indices.
  std::vector<std::vector<int>> polygons;
  bool is_background = false;
};

struct SemanticSet {
  std::string set_id;
  int mesh_size = kFaceMeshSize;
  std::vector<SemanticRegion> regions;

  std::size_t size() const { return regions.size(); }
  std::optional<std::size_t> background_index() const;
  std::optional<std::size_t> find(std::string_view name) const;
  std::vector<std::string> names() const;

  void validate() const;
};

// Parses the set schema from JSON text or TOML text.
SemanticSet parse_semantic_set_json(std::string_view text);
SemanticSet parse_semantic_set_toml(std::string_view text);
// Dispatches on the extension (.toml, otherwise JSON). A path of the form
// "builtin:<id>" or a bare built-in id ("set0", "set1", "set2") resolves to
// the shipped definitions.
SemanticSet load_semantic_set(const std::string& path_or_id);
SemanticSet builtin_semantic_set(std::string_view set_id);
std::vector<std::string> builtin_semantic_set_ids();

// Per-region binary masks of one image. masks[n] belongs to region n of the
// set it was built from.
struct RegionMaskStack {
  std::string image_id;
  std::string set_id;
  int width = 0;
  int height = 0;
  std::vector<Mask> masks;
  // Index of the background region, if the set has one.
  std::optional<std::size_t> background;
  // Pairs of non-background regions whose masks share at least one pixel.
  std::vector<std::pair<std::size_t, std::size_t>> overlaps;

  std::size_t size() const { return masks.size(); }
  // Union of the masks whose indices are listed.
  Mask union_of(std::span<const std::size_t> regions) const;
  // Pixels covered by any non-background region.
  std::size_t face_area() const;
};

// Even-odd scan fill sampled at pixel centers. Throws ValidationError for
// fewer than three distinct vertices.
Mask rasterize_polygon(std::span<const Point2> polygon, int width, int height);
// Same rule applied to all loops together, so inner loops cut holes.
Mask rasterize_polygons(std::span<const std::vector<Point2>> loops, int width, int height);

RegionMaskStack build_masks(const LandmarkFile& landmarks, const SemanticSet& set);

// The shipped 468-point canonical mesh scaled to width x height.
LandmarkFile canonical_landmarks(int width, int height, std::string image_id = "canonical");

// Occludes the union of the listed regions.
Image occlude_regions(const Image& image, const RegionMaskStack& masks,
                      std::span<const std::size_t> regions, const FillStrategy& fill);

}  // namespace facexai
