#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "facexai/attribution.hpp"

namespace facexai {

// Global order of regions merged from many rankings.
struct GlobalConceptRanking {
  std::string set_id;
  std::string method;
  std::vector<std::string> region_names;
  RankSequence order;                 // order[p]: region at position p
  std::vector<std::size_t> position;  // O_n: position of region n
  std::vector<std::int64_t> points;   // Borda totals per region
  std::vector<int> weights;           // g_n = s - O_n
  nlohmann::json provenance = nlohmann::json::object();

  std::size_t size() const { return order.size(); }
};

// Position p of a ranking earns s - 1 - p points; totals sorted decreasing,
// ties by ascending region index. Throws ValidationError on an empty list or
// mixed lengths.
GlobalConceptRanking borda_aggregate(std::span<const RankSequence> rankings);

// Per image, merge its group rankings; then merge the per-image results.
GlobalConceptRanking two_level_borda(std::span<const std::vector<RankSequence>> per_image);

// g_n = s - O_n.
std::vector<int> weights_from_ranking(const GlobalConceptRanking& ranking);

// Rebuilds position and weights from order and checks consistency.
GlobalConceptRanking ranking_from_order(RankSequence order);

nlohmann::json to_json(const GlobalConceptRanking& ranking);
GlobalConceptRanking ranking_from_json(const nlohmann::json& doc);
// | Region | Rank | Points | Weight |, rows in rank order.
std::string to_markdown(const GlobalConceptRanking& ranking);

}  // namespace facexai
