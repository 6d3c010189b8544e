#include "facexai/attribution.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "facexai/embedder.hpp"
#include "facexai/error.hpp"
#include "facexai/parallel.hpp"

namespace facexai {

std::string to_string(Method method) {
  switch (method) {
    case Method::kEaoc: return "eaoc";
    case Method::kLime: return "lime";
    case Method::kKernelShap: return "kernelshap";
  }
  return "unknown";
}

Method parse_method(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "eaoc") return Method::kEaoc;
  if (lower == "lime") return Method::kLime;
  if (lower == "kernelshap" || lower == "kernel-shap" || lower == "shap") {
    return Method::kKernelShap;
  }
  throw ValidationError("unknown attribution method '" + std::string(text) +
                        "' (expected eaoc, lime or kernelshap)");
}

RankSequence rank_by_score(std::span<const double> scores) {
  RankSequence order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

void validate_permutation(std::span<const std::size_t> ranking, std::size_t s) {
  if (ranking.size() != s) {
    throw ValidationError("ranking has " + std::to_string(ranking.size()) + " entries, expected " +
                          std::to_string(s));
  }
  std::vector<bool> seen(s, false);
  for (auto r : ranking) {
    if (r >= s) throw ValidationError("ranking entry " + std::to_string(r) + " out of range");
    if (seen[r]) throw ValidationError("ranking repeats entry " + std::to_string(r));
    seen[r] = true;
  }
}

std::vector<std::size_t> positions_of(std::span<const std::size_t> ranking) {
  std::vector<std::size_t> pos(ranking.size());
  for (std::size_t p = 0; p < ranking.size(); ++p) pos[ranking[p]] = p;
  return pos;
}

double spearman_rho(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  validate_permutation(a, a.size());
  validate_permutation(b, a.size());
  const auto n = static_cast<double>(a.size());
  if (a.size() < 2) return 1.0;
  const auto pa = positions_of(a);
  const auto pb = positions_of(b);
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(pa[i]) - static_cast<double>(pb[i]);
    d2 += d * d;
  }
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

nlohmann::json to_json(const Attribution& attribution) {
  return {{"image_id", attribution.image_id},
          {"method", to_string(attribution.method)},
          {"set_id", attribution.set_id},
          {"scores", attribution.scores},
          {"ranking", attribution.ranking()},
          {"config", attribution.config}};
}

std::vector<std::size_t> absent_regions(Coalition z) {
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < z.size(); ++n) {
    if (!z[n]) out.push_back(n);
  }
  return out;
}

std::string to_string(NormKind kind) { return kind == NormKind::kL1 ? "l1" : "l2"; }

NormKind parse_norm(std::string_view text) {
  if (text == "l1") return NormKind::kL1;
  if (text == "l2") return NormKind::kL2;
  throw ValidationError("unknown norm '" + std::string(text) + "' (expected l1 or l2)");
}

double norm_of(std::span<const double> v, NormKind kind) {
  return kind == NormKind::kL1 ? l1_norm(v) : l2_norm(v);
}

std::vector<double> evaluate_coalitions(const CoalitionValueFn& fn,
                                        std::span<const std::uint8_t> coalitions, std::size_t s,
                                        int jobs) {
  const auto count = s == 0 ? 0 : coalitions.size() / s;
  std::vector<double> values(count);
  parallel_for(count, jobs, [&](std::size_t i) { values[i] = fn(coalitions.subspan(i * s, s)); });
  return values;
}

}  // namespace facexai
