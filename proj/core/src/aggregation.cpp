#include "facexai/aggregation.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "facexai/error.hpp"

namespace facexai {

GlobalConceptRanking borda_aggregate(std::span<const RankSequence> rankings) {
  if (rankings.empty()) throw ValidationError("borda: no rankings to aggregate");
  const auto s = rankings.front().size();
  std::vector<std::int64_t> points(s, 0);
  for (std::size_t r = 0; r < rankings.size(); ++r) {
    if (rankings[r].size() != s) {
      throw ValidationError("borda: ranking " + std::to_string(r) + " has " +
                            std::to_string(rankings[r].size()) + " entries, expected " +
                            std::to_string(s));
    }
    validate_permutation(rankings[r], s);
    for (std::size_t p = 0; p < s; ++p) {
      points[rankings[r][p]] += static_cast<std::int64_t>(s - 1 - p);
    }
  }
  RankSequence order(s);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a] > points[b]; });
  auto out = ranking_from_order(std::move(order));
  out.points = std::move(points);
  out.provenance["rankings"] = rankings.size();
  return out;
}

GlobalConceptRanking two_level_borda(std::span<const std::vector<RankSequence>> per_image) {
  if (per_image.empty()) throw ValidationError("borda: no images to aggregate");
  std::vector<RankSequence> merged;
  merged.reserve(per_image.size());
  for (std::size_t i = 0; i < per_image.size(); ++i) {
    if (per_image[i].empty()) {
      throw ValidationError("borda: image " + std::to_string(i) + " has no group rankings");
    }
    merged.push_back(borda_aggregate(per_image[i]).order);
  }
  auto out = borda_aggregate(merged);
  out.provenance["levels"] = 2;
  return out;
}

std::vector<int> weights_from_ranking(const GlobalConceptRanking& ranking) {
  const auto s = ranking.order.size();
  const auto pos = positions_of(ranking.order);
  std::vector<int> g(s);
  for (std::size_t n = 0; n < s; ++n) g[n] = static_cast<int>(s - pos[n]);
  return g;
}

GlobalConceptRanking ranking_from_order(RankSequence order) {
  validate_permutation(order, order.size());
  GlobalConceptRanking out;
  out.order = std::move(order);
  out.position = positions_of(out.order);
  out.weights = weights_from_ranking(out);
  out.points.assign(out.order.size(), 0);
  return out;
}

nlohmann::json to_json(const GlobalConceptRanking& ranking) {
  nlohmann::json regions = nlohmann::json::array();
  for (std::size_t p = 0; p < ranking.order.size(); ++p) {
    const auto n = ranking.order[p];
    nlohmann::json r = {{"index", n}, {"rank", p}, {"points", ranking.points.at(n)},
                        {"weight", ranking.weights.at(n)}};
    if (n < ranking.region_names.size()) r["name"] = ranking.region_names[n];
    regions.push_back(std::move(r));
  }
  return {{"set_id", ranking.set_id},   {"method", ranking.method},
          {"order", ranking.order},     {"points", ranking.points},
          {"weights", ranking.weights}, {"region_names", ranking.region_names},
          {"regions", regions},         {"provenance", ranking.provenance}};
}

GlobalConceptRanking ranking_from_json(const nlohmann::json& doc) {
  try {
    auto out = ranking_from_order(doc.at("order").get<RankSequence>());
    out.set_id = doc.value("set_id", "");
    out.method = doc.value("method", "");
    out.region_names = doc.value("region_names", std::vector<std::string>{});
    if (doc.contains("points")) out.points = doc.at("points").get<std::vector<std::int64_t>>();
    if (out.points.size() != out.order.size()) {
      throw ValidationError("ranking: points length does not match order");
    }
    if (!out.region_names.empty() && out.region_names.size() != out.order.size()) {
      throw ValidationError("ranking: region_names length does not match order");
    }
    out.provenance = doc.value("provenance", nlohmann::json::object());
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("ranking: ") + e.what());
  }
}

std::string to_markdown(const GlobalConceptRanking& ranking) {
  std::ostringstream md;
  md << "| Region | Rank | Points | Weight |\n|---|---:|---:|---:|\n";
  for (std::size_t p = 0; p < ranking.order.size(); ++p) {
    const auto n = ranking.order[p];
    const auto name =
        n < ranking.region_names.size() ? ranking.region_names[n] : "region " + std::to_string(n);
    md << "| " << name << " | " << p + 1 << " | " << ranking.points[n] << " | " << ranking.weights[n]
       << " |\n";
  }
  return md.str();
}

}  // namespace facexai
