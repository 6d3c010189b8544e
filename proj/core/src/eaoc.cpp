#include "facexai/eaoc.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "facexai/aggregation.hpp"
#include "facexai/error.hpp"
#include "facexai/parallel.hpp"

namespace facexai {

void ConceptGroups::validate() const {
  if (channels < 1) throw ValidationError("concept groups: channel count must be positive");
  if (groups.empty()) throw ValidationError("concept groups: at least one group is required");
  std::vector<int> owner(static_cast<std::size_t>(channels), -1);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) throw ValidationError("concept groups: group " + std::to_string(g) + " is empty");
    for (int c : groups[g]) {
      if (c < 0 || c >= channels) {
        throw ValidationError("concept groups: group " + std::to_string(g) + " references unknown channel " +
                              std::to_string(c));
      }
      if (owner[static_cast<std::size_t>(c)] >= 0) {
        throw ValidationError("concept groups: channel " + std::to_string(c) + " is in groups " +
                              std::to_string(owner[static_cast<std::size_t>(c)]) + " and " +
                              std::to_string(g));
      }
      owner[static_cast<std::size_t>(c)] = static_cast<int>(g);
    }
  }
  for (int c = 0; c < channels; ++c) {
    if (owner[static_cast<std::size_t>(c)] < 0) {
      throw ValidationError("concept groups: channel " + std::to_string(c) + " belongs to no group");
    }
  }
}

nlohmann::json to_json(const ConceptGroups& groups) {
  return {{"channels", groups.channels}, {"groups", groups.groups}, {"metadata", groups.metadata}};
}

ConceptGroups concept_groups_from_json(const nlohmann::json& doc) {
  ConceptGroups g;
  try {
    g.channels = doc.at("channels").get<int>();
    g.groups = doc.at("groups").get<std::vector<std::vector<int>>>();
    g.metadata = doc.value("metadata", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("concept groups: ") + e.what());
  }
  g.validate();
  return g;
}

std::string to_string(Representation r) {
  return r == Representation::kEmbedding ? "embedding" : "activations";
}

Representation parse_representation(std::string_view text) {
  if (text == "embedding") return Representation::kEmbedding;
  if (text == "activations") return Representation::kActivations;
  throw ValidationError("unknown representation '" + std::string(text) +
                        "' (expected embedding or activations)");
}

OutputSpace::OutputSpace(std::vector<double> norms) : norms_(std::move(norms)) {
  if (norms_.empty()) throw ValidationError("output space: dataset is empty");
  for (std::size_t i = 0; i < norms_.size(); ++i) {
    if (!std::isfinite(norms_[i]) || norms_[i] < 0.0) {
      throw ValidationError("output space: norm of image " + std::to_string(i) +
                            " is not a finite nonnegative value");
    }
  }
  order_ = order_sequence(norms_);
  rank_ = positions_of(order_);
}

std::size_t OutputSpace::rank_with_replacement(std::size_t j, double norm) const {
  // Images that precede key (norm, j) in the order: larger norm, or equal
  // norm with a smaller index.
  auto precedes = [&](std::size_t i) {
    return norms_[i] > norm || (norms_[i] == norm && i < j);
  };
  const auto it = std::partition_point(order_.begin(), order_.end(), precedes);
  auto before = static_cast<std::size_t>(it - order_.begin());
  if (norms_[j] > norm) --before;  // j itself was counted
  return before;
}

RankSequence order_sequence(std::span<const double> distances) {
  for (double d : distances) {
    if (!std::isfinite(d)) throw ValidationError("order_sequence: distances must be finite");
  }
  return rank_by_score(distances);
}

std::size_t eaoc_score(const OutputSpace& space, std::size_t j, double occluded_norm) {
  if (j >= space.size()) throw ValidationError("eaoc: image index out of range");
  const auto before = space.rank_of(j);
  const auto after = space.rank_with_replacement(j, occluded_norm);
  return before > after ? before - after : after - before;
}

OutputSpace output_space(const Embedder& embedder, std::span<const Sample> dataset, int jobs) {
  if (dataset.empty()) throw ValidationError("output space: dataset is empty");
  std::vector<double> norms(dataset.size());
  parallel_for(dataset.size(), jobs, [&](std::size_t i) {
    try {
      norms[i] = l2_norm(embedder.embed(dataset[i].image).values);
    } catch (const Error& e) {
      throw ModelError("embedding image '" + dataset[i].image_id + "': " + e.what());
    }
  });
  return OutputSpace(std::move(norms));
}

namespace {

// Norm of each group (or one norm for the whole representation).
std::vector<double> group_norms(const Embedder& embedder, const Image& image,
                                Representation rep, const std::optional<ConceptGroups>& groups) {
  if (rep == Representation::kEmbedding) return {l2_norm(embedder.embed(image).values)};
  const auto fm = embedder.activations(image);
  if (!groups) return {l2_norm(fm.values)};
  if (fm.channels != groups->channels) {
    throw ValidationError("concept groups cover " + std::to_string(groups->channels) +
                          " channels but the model exposes " + std::to_string(fm.channels));
  }
  std::vector<double> out;
  out.reserve(groups->size());
  for (const auto& group : groups->groups) {
    double sq = 0.0;
    for (int c : group) {
      for (double v : fm.channel(c)) sq += v * v;
    }
    out.push_back(std::sqrt(sq));
  }
  return out;
}

}  // namespace

EaocCalibration calibrate_eaoc(const Embedder& embedder, std::span<const Sample> dataset,
                               const EaocConfig& config,
                               const std::optional<ConceptGroups>& groups) {
  if (dataset.empty()) throw ValidationError("eaoc: calibration dataset is empty");
  EaocCalibration cal;
  cal.representation = config.representation;
  cal.groups = groups;
  if (groups) {
    groups->validate();
    if (config.representation != Representation::kActivations) {
      throw ValidationError("eaoc: concept groups require the activations representation");
    }
  }
  if (cal.representation == Representation::kActivations && !embedder.has_activations()) {
    throw UnsupportedOperation("eaoc: model '" + embedder.model_id() + "' exposes no activations");
  }
  const std::size_t n_groups = groups ? groups->size() : 1;
  std::vector<std::vector<double>> per_image(dataset.size());
  parallel_for(dataset.size(), config.jobs, [&](std::size_t i) {
    try {
      per_image[i] = group_norms(embedder, dataset[i].image, cal.representation, groups);
    } catch (const ModelError& e) {
      throw ModelError("image '" + dataset[i].image_id + "': " + e.what());
    }
  });
  for (std::size_t g = 0; g < n_groups; ++g) {
    std::vector<double> norms(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) norms[i] = per_image[i][g];
    cal.spaces.emplace_back(std::move(norms));
  }
  return cal;
}

EaocResult eaoc_attribution(const Embedder& embedder, std::span<const Sample> dataset,
                            const EaocCalibration& calibration, std::size_t j,
                            const EaocConfig& config) {
  if (j >= dataset.size()) throw ValidationError("eaoc: image index out of range");
  const auto& sample = dataset[j];
  const auto s = sample.masks.size();
  const auto n_groups = calibration.spaces.size();

  // scores[g][n]: displacement for group g, region n.
  std::vector<std::vector<double>> scores(n_groups, std::vector<double>(s, 0.0));
  parallel_for(s, config.jobs, [&](std::size_t n) {
    const std::size_t region[] = {n};
    const auto occluded = occlude_regions(sample.image, sample.masks, region, config.fill);
    const auto norms = group_norms(embedder, occluded, calibration.representation, calibration.groups);
    for (std::size_t g = 0; g < n_groups; ++g) {
      scores[g][n] = static_cast<double>(eaoc_score(calibration.spaces[g], j, norms[g]));
    }
  });

  EaocResult result;
  result.attribution.image_id = sample.image_id;
  result.attribution.method = Method::kEaoc;
  result.attribution.set_id = sample.masks.set_id;
  result.attribution.config = {{"fill", to_string(config.fill)},
                               {"representation", to_string(calibration.representation)},
                               {"groups", n_groups},
                               {"calibration_images", dataset.size()}};
  for (const auto& sc : scores) result.group_rankings.push_back(rank_by_score(sc));
  if (!calibration.groups) {
    result.attribution.scores = std::move(scores.front());
  } else {
    const auto merged = borda_aggregate(result.group_rankings);
    result.attribution.scores.assign(s, 0.0);
    for (std::size_t n = 0; n < s; ++n) {
      result.attribution.scores[n] = static_cast<double>(s - merged.position[n]);
    }
  }
  return result;
}

}  // namespace facexai
