#include "facexai/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>
#include <toml.hpp>

#include "facexai/error.hpp"

namespace facexai {
namespace {

#include "builtin_sets.inc"

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string describe(const Point2& p) {
  std::ostringstream ss;
  ss << "(" << p.x << ", " << p.y << ")";
  return ss.str();
}

}  // namespace

void LandmarkFile::validate() const {
  if (image_id.empty()) throw ValidationError("landmark file: image_id is empty");
  if (width <= 0 || height <= 0) {
    throw ValidationError("landmark file '" + image_id + "': width and height must be positive");
  }
  if (mesh_size <= 0) {
    throw ValidationError("landmark file '" + image_id + "': mesh_size must be positive");
  }
  if (static_cast<int>(points.size()) != mesh_size) {
    throw ValidationError("landmark file '" + image_id + "': header declares " +
                          std::to_string(mesh_size) + " points but " +
                          std::to_string(points.size()) + " are present");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < 0 || p.x >= width || p.y < 0 ||
        p.y >= height) {
      throw ValidationError("landmark file '" + image_id + "': point " + std::to_string(i) +
                            " " + describe(p) + " lies outside [0, " + std::to_string(width) +
                            ") x [0, " + std::to_string(height) + ")");
    }
  }
}

LandmarkFile parse_landmarks(const nlohmann::json& doc) {
  LandmarkFile lm;
  try {
    lm.image_id = doc.at("image_id").get<std::string>();
    lm.width = doc.at("width").get<int>();
    lm.height = doc.at("height").get<int>();
    lm.mesh_size = doc.value("mesh_size", kFaceMeshSize);
    for (const auto& pt : doc.at("points")) {
      if (!pt.is_array() || pt.size() < 2) {
        throw ValidationError("landmark point must be an [x, y] array");
      }
      lm.points.push_back({pt[0].get<double>(), pt[1].get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("landmark file: ") + e.what());
  }
  lm.validate();
  return lm;
}

LandmarkFile load_landmarks(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("landmark file '" + path.string() + "': " + e.what());
  }
  return parse_landmarks(doc);
}

nlohmann::json to_json(const LandmarkFile& lm) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : lm.points) pts.push_back({p.x, p.y});
  return {{"image_id", lm.image_id},
          {"width", lm.width},
          {"height", lm.height},
          {"mesh_size", lm.mesh_size},
          {"points", std::move(pts)}};
}

std::optional<std::size_t> SemanticSet::background_index() const {
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (regions[i].is_background) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> SemanticSet::find(std::string_view name) const {
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (regions[i].name == name) return i;
  }
  return std::nullopt;
}

std::vector<std::string> SemanticSet::names() const {
  std::vector<std::string> out;
  out.reserve(regions.size());
  for (const auto& r : regions) out.push_back(r.name);
  return out;
}

void SemanticSet::validate() const {
  if (set_id.empty()) throw ValidationError("semantic set: set_id is empty");
  if (mesh_size <= 0) throw ValidationError("semantic set '" + set_id + "': mesh_size must be positive");
  if (regions.size() < 2) {
    throw ValidationError("semantic set '" + set_id + "': needs at least 2 regions, has " +
                          std::to_string(regions.size()));
  }
  std::set<std::string> seen;
  int backgrounds = 0;
  for (const auto& r : regions) {
    if (r.name.empty()) throw ValidationError("semantic set '" + set_id + "': empty region name");
    if (!seen.insert(r.name).second) {
      throw ValidationError("semantic set '" + set_id + "': duplicate region name '" + r.name + "'");
    }
    if (r.is_background) {
      ++backgrounds;
      continue;
    }
    if (r.polygons.empty()) {
      throw ValidationError("semantic set '" + set_id + "': region '" + r.name + "' has no polygons");
    }
    for (const auto& poly : r.polygons) {
      for (int idx : poly) {
        if (idx < 0 || idx >= mesh_size) {
          throw ValidationError("semantic set '" + set_id + "': region '" + r.name +
                                "' references landmark index " + std::to_string(idx) +
                                " outside mesh of size " + std::to_string(mesh_size));
        }
      }
    }
  }
  if (backgrounds > 1) {
    throw ValidationError("semantic set '" + set_id + "': more than one background region");
  }
}

SemanticSet parse_semantic_set_json(std::string_view text) {
  SemanticSet set;
  try {
    auto doc = nlohmann::json::parse(text);
    set.set_id = doc.at("set_id").get<std::string>();
    set.mesh_size = doc.value("mesh_size", kFaceMeshSize);
    for (const auto& r : doc.at("regions")) {
      SemanticRegion region;
      region.name = r.at("name").get<std::string>();
      region.is_background = r.value("background", false);
      if (r.contains("polygons")) {
        region.polygons = r.at("polygons").get<std::vector<std::vector<int>>>();
      }
      set.regions.push_back(std::move(region));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("semantic set: ") + e.what());
  }
  set.validate();
  return set;
}

SemanticSet parse_semantic_set_toml(std::string_view text) {
  SemanticSet set;
  try {
    auto doc = toml::parse(text);
    auto id = doc["set_id"].value<std::string>();
    if (!id) throw ValidationError("semantic set: missing set_id");
    set.set_id = *id;
    set.mesh_size = static_cast<int>(doc["mesh_size"].value_or<int64_t>(kFaceMeshSize));
    auto* regions = doc["regions"].as_array();
    if (!regions) throw ValidationError("semantic set '" + set.set_id + "': missing regions");
    for (const auto& node : *regions) {
      const auto* tbl = node.as_table();
      if (!tbl) throw ValidationError("semantic set '" + set.set_id + "': region is not a table");
      SemanticRegion region;
      auto name = (*tbl)["name"].value<std::string>();
      if (!name) throw ValidationError("semantic set '" + set.set_id + "': region without name");
      region.name = *name;
      region.is_background = (*tbl)["background"].value_or(false);
      if (const auto* polys = (*tbl)["polygons"].as_array()) {
        for (const auto& poly : *polys) {
          const auto* arr = poly.as_array();
          if (!arr) throw ValidationError("semantic set: region '" + region.name + "' polygon is not an array");
          std::vector<int> idx;
          for (const auto& v : *arr) {
            auto i = v.value<int64_t>();
            if (!i) throw ValidationError("semantic set: region '" + region.name + "' has a non-integer index");
            idx.push_back(static_cast<int>(*i));
          }
          region.polygons.push_back(std::move(idx));
        }
      }
      set.regions.push_back(std::move(region));
    }
  } catch (const toml::parse_error& e) {
    throw ValidationError(std::string("semantic set: ") + std::string(e.description()));
  }
  set.validate();
  return set;
}

std::vector<std::string> builtin_semantic_set_ids() { return {"set0", "set1", "set2"}; }

SemanticSet builtin_semantic_set(std::string_view set_id) {
  if (set_id == "set0") return parse_semantic_set_json(kBuiltinSet0);
  if (set_id == "set1") return parse_semantic_set_json(kBuiltinSet1);
  if (set_id == "set2") return parse_semantic_set_json(kBuiltinSet2);
  throw ValidationError("unknown built-in semantic set '" + std::string(set_id) + "'");
}

SemanticSet load_semantic_set(const std::string& path_or_id) {
  std::string_view id = path_or_id;
  if (id.starts_with("builtin:")) return builtin_semantic_set(id.substr(8));
  for (const auto& b : builtin_semantic_set_ids()) {
    if (id == b) return builtin_semantic_set(id);
  }
  std::filesystem::path path(path_or_id);
  const auto text = read_text(path);
  try {
    if (path.extension() == ".toml") return parse_semantic_set_toml(text);
    return parse_semantic_set_json(text);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

Mask RegionMaskStack::union_of(std::span<const std::size_t> regions) const {
  Mask out(width, height, false);
  for (auto r : regions) out |= masks.at(r);
  return out;
}

std::size_t RegionMaskStack::face_area() const {
  Mask face(width, height, false);
  for (std::size_t n = 0; n < masks.size(); ++n) {
    if (background && *background == n) continue;
    face |= masks[n];
  }
  return face.area();
}

Mask rasterize_polygons(std::span<const std::vector<Point2>> loops, int width, int height) {
  for (const auto& polygon : loops) {
    std::vector<std::pair<double, double>> distinct;
    for (const auto& p : polygon) distinct.emplace_back(p.x, p.y);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 3) {
      throw ValidationError("degenerate polygon: fewer than 3 distinct points");
    }
  }
  Mask mask(width, height, false);
  std::vector<double> crossings;
  for (int y = 0; y < height; ++y) {
    const double py = y + 0.5;
    crossings.clear();
    for (const auto& polygon : loops) {
      const std::size_t n = polygon.size();
      for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        Point2 a = polygon[i];
        Point2 b = polygon[j];
        if ((a.y > py) == (b.y > py)) continue;
        // Canonical endpoint order keeps shared edges bit-identical.
        if (std::tie(b.y, b.x) < std::tie(a.y, a.x)) std::swap(a, b);
        crossings.push_back(a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(crossings.begin(), crossings.end());
    // A pixel center px is inside when an odd number of crossings lie at or
    // left of it, i.e. crossings[2k] <= px < crossings[2k+1].
    for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
      const double lo = crossings[k];
      const double hi = crossings[k + 1];
      int x0 = static_cast<int>(std::max(0.0, std::floor(lo - 1.0)));
      while (x0 < width && x0 + 0.5 < lo) ++x0;
      for (int x = x0; x < width && x + 0.5 < hi; ++x) mask.set(x, y, true);
    }
  }
  return mask;
}

Mask rasterize_polygon(std::span<const Point2> polygon, int width, int height) {
  const std::vector<std::vector<Point2>> loops{{polygon.begin(), polygon.end()}};
  return rasterize_polygons(loops, width, height);
}

RegionMaskStack build_masks(const LandmarkFile& landmarks, const SemanticSet& set) {
  landmarks.validate();
  set.validate();
  if (landmarks.mesh_size != set.mesh_size) {
    throw ValidationError("landmark file '" + landmarks.image_id + "' has mesh size " +
                          std::to_string(landmarks.mesh_size) + " but set '" + set.set_id +
                          "' expects " + std::to_string(set.mesh_size));
  }
  RegionMaskStack stack;
  stack.image_id = landmarks.image_id;
  stack.set_id = set.set_id;
  stack.width = landmarks.width;
  stack.height = landmarks.height;
  stack.masks.assign(set.size(), Mask(landmarks.width, landmarks.height, false));

  Mask face(landmarks.width, landmarks.height, false);
  for (std::size_t n = 0; n < set.size(); ++n) {
    const auto& region = set.regions[n];
    if (region.is_background) continue;
    std::vector<std::vector<Point2>> loops;
    for (const auto& indices : region.polygons) {
      auto& loop = loops.emplace_back();
      for (int idx : indices) loop.push_back(landmarks.points[static_cast<std::size_t>(idx)]);
    }
    try {
      stack.masks[n] = rasterize_polygons(loops, landmarks.width, landmarks.height);
    } catch (const ValidationError& e) {
      throw ValidationError("region '" + region.name + "' of set '" + set.set_id + "' on image '" +
                            landmarks.image_id + "': " + e.what());
    }
    face |= stack.masks[n];
  }
  stack.background = set.background_index();
  if (stack.background) stack.masks[*stack.background] = face.complement();

  for (std::size_t a = 0; a < set.size(); ++a) {
    if (set.regions[a].is_background) continue;
    auto da = stack.masks[a].data();
    for (std::size_t b = a + 1; b < set.size(); ++b) {
      if (set.regions[b].is_background) continue;
      auto db = stack.masks[b].data();
      for (std::size_t p = 0; p < da.size(); ++p) {
        if (da[p] && db[p]) {
          stack.overlaps.emplace_back(a, b);
          break;
        }
      }
    }
  }
  return stack;
}


LandmarkFile canonical_landmarks(int width, int height, std::string image_id) {
  if (width <= 0 || height <= 0) throw ValidationError("canonical landmarks: size must be positive");
  const auto doc = nlohmann::json::parse(kCanonicalUnitMesh);
  LandmarkFile out;
  out.image_id = std::move(image_id);
  out.width = width;
  out.height = height;
  out.mesh_size = doc.at("mesh_size").get<int>();
  for (const auto& p : doc.at("points")) {
    out.points.push_back({p[0].get<double>() * width, p[1].get<double>() * height});
  }
  return out;
}

Image occlude_regions(const Image& image, const RegionMaskStack& masks,
                      std::span<const std::size_t> regions, const FillStrategy& fill) {
  if (regions.empty()) return image;
  return occlude(image, masks.union_of(regions), fill);
}

}  // namespace facexai
