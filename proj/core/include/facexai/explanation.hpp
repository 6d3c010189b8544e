#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "facexai/dataset.hpp"
#include "facexai/embedder.hpp"
#include "facexai/image.hpp"

namespace facexai {

enum class AreaWeighting { kRelativeArea, kUniform };
std::string to_string(AreaWeighting w);
AreaWeighting parse_area_weighting(std::string_view text);

struct ExplainConfig {
  FillStrategy fill = FillStrategy::mid_gray();
  AreaWeighting area_weighting = AreaWeighting::kRelativeArea;
  int jobs = 1;
};

// Single Removal S0 result for one pair.
struct SimilarityExplanation {
  std::string pair_id;
  std::string image_a;
  std::string image_b;
  std::string set_id;
  std::vector<std::string> region_names;
  std::string ranking_source;
  FillStrategy fill;
  AreaWeighting area_weighting = AreaWeighting::kRelativeArea;

  double score = 0.0;                   // S_AB
  std::vector<double> occluded_score;   // S_A'(n)B'(n)
  std::vector<double> g;                // global weights
  std::vector<double> area_weight;      // W_n
  std::vector<double> delta;            // g_n (S_AB - S_A'(n)B'(n))
  std::vector<double> contribution;     // C_n = delta_n W_n
  std::vector<double> normalized;       // C_n / |sum of its sign group|
  std::vector<std::uint8_t> skipped;    // empty masks in both images
  std::vector<std::string> warnings;

  // S0_A, S0_B: sum over regions of normalized_n * M_n, row-major.
  int width_a = 0, height_a = 0, width_b = 0, height_b = 0;
  std::vector<double> map_a;
  std::vector<double> map_b;

  std::size_t size() const { return contribution.size(); }
};

// For each region n, occlude n in both images and rescore. `g` holds one
// positive weight per region (the global ranking weights, or all ones).
SimilarityExplanation single_removal_s0(const Embedder& embedder, const Sample& a, const Sample& b,
                                        std::span<const double> g,
                                        std::span<const std::string> region_names,
                                        const ExplainConfig& config);

// Splits contributions into sign groups (C >= 0 positive) and divides each
// by its absolute sum; an empty or all-zero group stays 0.
std::vector<double> normalize_contributions(std::span<const double> c);

// k regions with the largest |C_n|, ties by ascending index.
std::vector<std::size_t> top_k_select(std::span<const double> contributions, std::size_t k);
std::vector<std::size_t> top_k_select(const SimilarityExplanation& expl, std::size_t k);

struct Palette {
  std::array<std::uint8_t, 3> similar{255, 140, 0};    // saturated orange
  std::array<std::uint8_t, 3> dissimilar{128, 0, 160}; // saturated purple
  double max_alpha = 0.75;
  int legend_height = 16;
};

// Tints the selected regions of `base`: alpha is proportional to the map
// magnitude relative to the largest selected magnitude. A legend strip
// (purple ramp, then orange ramp) is appended below.
Image render_map(const Image& base, const RegionMaskStack& masks,
                 std::span<const double> normalized, std::span<const std::size_t> selected,
                 const Palette& palette = {});
std::pair<Image, Image> render_pair(const SimilarityExplanation& expl, const Sample& a,
                                    const Sample& b, std::size_t k, const Palette& palette = {});

struct TableRow {
  std::size_t region = 0;
  std::string name;
  double value = 0.0;
  double normalized = 0.0;
};

// Negative block (C < 0) and positive block (C >= 0), each ascending by value
// with ties by region index.
struct ContributionTable {
  std::vector<TableRow> negative;
  std::vector<TableRow> positive;
};

ContributionTable make_table(std::span<const std::string> names, std::span<const double> values,
                             std::span<const double> normalized = {});
// Restricted to the top-k regions when k is given.
ContributionTable contribution_table(const SimilarityExplanation& expl,
                                     std::optional<std::size_t> k = std::nullopt);

// Signed value at 4 decimals.
std::string format_value(double v);
std::string to_markdown(const ContributionTable& table);
std::string to_csv(const ContributionTable& table);
nlohmann::json to_json(const ContributionTable& table);
nlohmann::json to_json(const SimilarityExplanation& expl);

}  // namespace facexai
