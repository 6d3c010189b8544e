#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "facexai/dataset.hpp"
#include "facexai/error.hpp"

namespace facexai {
namespace {

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

const nlohmann::json& list_of(const nlohmann::json& doc, const char* key,
                              const std::filesystem::path& path) {
  if (doc.is_array()) return doc;
  if (doc.is_object() && doc.contains(key) && doc.at(key).is_array()) return doc.at(key);
  throw ValidationError(path.string() + ": expected a list or an object with \"" + key + "\"");
}

std::string required_string(const nlohmann::json& entry, const char* key, std::size_t index,
                            const std::filesystem::path& path) {
  if (!entry.is_object() || !entry.contains(key) || !entry.at(key).is_string() ||
      entry.at(key).get<std::string>().empty()) {
    throw ValidationError(path.string() + ": entry " + std::to_string(index) + " needs a non-empty \"" +
                          key + "\"");
  }
  return entry.at(key).get<std::string>();
}

}  // namespace

std::optional<std::size_t> Dataset::find(std::string_view image_id) const {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].image_id == image_id) return i;
  }
  return std::nullopt;
}

std::vector<ManifestEntry> load_image_manifest(const std::filesystem::path& path) {
  const auto doc = read_json(path);
  const auto& list = list_of(doc, "images", path);
  const auto dir = path.parent_path();
  std::vector<ManifestEntry> out;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < list.size(); ++i) {
    ManifestEntry e;
    e.image_id = required_string(list[i], "image_id", i, path);
    e.image_path = dir / required_string(list[i], "image_path", i, path);
    e.landmark_path = dir / required_string(list[i], "landmark_path", i, path);
    if (!ids.insert(e.image_id).second) {
      throw ValidationError(path.string() + ": duplicate image_id '" + e.image_id + "'");
    }
    out.push_back(std::move(e));
  }
  if (out.empty()) throw ValidationError(path.string() + ": manifest lists no images");
  return out;
}

std::vector<PairEntry> load_pair_manifest(const std::filesystem::path& path) {
  const auto doc = read_json(path);
  const auto& list = list_of(doc, "pairs", path);
  std::vector<PairEntry> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    PairEntry e;
    e.image_a = required_string(list[i], "image_a", i, path);
    e.image_b = required_string(list[i], "image_b", i, path);
    e.pair_id = list[i].value("pair_id", e.image_a + "__" + e.image_b);
    out.push_back(std::move(e));
  }
  return out;
}

Dataset load_dataset(const std::vector<ManifestEntry>& images, const SemanticSet& set,
                     const std::vector<PairEntry>& pairs) {
  Dataset ds;
  ds.set_id = set.set_id;
  ds.region_names = set.names();
  for (const auto& entry : images) {
    Sample sample;
    sample.image_id = entry.image_id;
    sample.image = load_image(entry.image_path);
    auto lm = load_landmarks(entry.landmark_path);
    if (lm.width != sample.image.width() || lm.height != sample.image.height()) {
      throw ValidationError("image '" + entry.image_id + "' is " +
                            std::to_string(sample.image.width()) + "x" +
                            std::to_string(sample.image.height()) + " but its landmarks declare " +
                            std::to_string(lm.width) + "x" + std::to_string(lm.height));
    }
    sample.masks = build_masks(lm, set);
    sample.masks.image_id = entry.image_id;
    ds.samples.push_back(std::move(sample));
  }
  for (const auto& p : pairs) {
    auto a = ds.find(p.image_a);
    auto b = ds.find(p.image_b);
    if (!a) throw ValidationError("pair '" + p.pair_id + "' names unknown image '" + p.image_a + "'");
    if (!b) throw ValidationError("pair '" + p.pair_id + "' names unknown image '" + p.image_b + "'");
    ds.pairs.push_back({p.pair_id, *a, *b});
  }
  return ds;
}

}  // namespace facexai
