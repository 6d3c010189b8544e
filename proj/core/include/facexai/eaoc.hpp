#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facexai/attribution.hpp"
#include "facexai/dataset.hpp"
#include "facexai/embedder.hpp"
#include "facexai/image.hpp"

namespace facexai {

// Channel partition of the activation space.
struct ConceptGroups {
  int channels = 0;
  std::vector<std::vector<int>> groups;
  nlohmann::json metadata = nlohmann::json::object();

  std::size_t size() const { return groups.size(); }
  // Groups must be disjoint, nonempty and cover 0..channels-1.
  void validate() const;
};

nlohmann::json to_json(const ConceptGroups& groups);
ConceptGroups concept_groups_from_json(const nlohmann::json& doc);

// What the norm of an image is taken over.
enum class Representation { kEmbedding, kActivations };
std::string to_string(Representation r);
Representation parse_representation(std::string_view text);

// Per-image L2 norms over a calibration dataset, with the sorted order used
// for rank queries. Order is by decreasing norm, ties by ascending index.
class OutputSpace {
 public:
  explicit OutputSpace(std::vector<double> norms);

  std::size_t size() const { return norms_.size(); }
  const std::vector<double>& norms() const { return norms_; }
  RankSequence order() const { return order_; }
  std::size_t rank_of(std::size_t j) const { return rank_[j]; }
  // Rank image j would take if only its norm were replaced; O(log N).
  std::size_t rank_with_replacement(std::size_t j, double norm) const;

 private:
  std::vector<double> norms_;
  RankSequence order_;
  std::vector<std::size_t> rank_;
};

// Norms of the embeddings of every sample.
OutputSpace output_space(const Embedder& embedder, std::span<const Sample> dataset, int jobs = 1);
RankSequence order_sequence(std::span<const double> distances);

// |rank of j before - rank of j with its norm replaced by occluded_norm|.
std::size_t eaoc_score(const OutputSpace& space, std::size_t j, double occluded_norm);

struct EaocConfig {
  FillStrategy fill = FillStrategy::mid_gray();
  Representation representation = Representation::kEmbedding;
  int jobs = 1;
};

// Calibration state: one OutputSpace, or one per group when groups are set
// (group norms are taken over the group's activation channels).
struct EaocCalibration {
  Representation representation = Representation::kEmbedding;
  std::optional<ConceptGroups> groups;
  std::vector<OutputSpace> spaces;
};

EaocCalibration calibrate_eaoc(const Embedder& embedder, std::span<const Sample> dataset,
                               const EaocConfig& config,
                               const std::optional<ConceptGroups>& groups = std::nullopt);

struct EaocResult {
  Attribution attribution;
  // Per-group region rankings (one entry when ungrouped).
  std::vector<RankSequence> group_rankings;
};

// Scores every region of dataset[j]. Ungrouped: scores are the EaOC rank
// displacements. Grouped: per-group rankings are Borda-merged and region n
// scores s - position.
EaocResult eaoc_attribution(const Embedder& embedder, std::span<const Sample> dataset,
                            const EaocCalibration& calibration, std::size_t j,
                            const EaocConfig& config);

struct MageConfig {
  int k = 5;
  std::uint64_t seed = 0;
  int max_iterations = 100;
  int restarts = 4;
  int jobs = 1;
};

// Per-channel signature: the dataset mean of that channel's spatial map.
std::vector<std::vector<double>> channel_signatures(const Embedder& embedder,
                                                    std::span<const Sample> dataset,
                                                    int jobs = 1);
// k-means over channel signatures with seeded k-means++ initialization.
ConceptGroups cluster_channels(const std::vector<std::vector<double>>& signatures,
                               const MageConfig& config);
ConceptGroups mage_concept_groups(const Embedder& embedder, std::span<const Sample> dataset,
                                  const MageConfig& config);

}  // namespace facexai
