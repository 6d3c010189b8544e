#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace facexai {

enum class Method { kEaoc, kLime, kKernelShap };

std::string to_string(Method method);
// Accepts "eaoc", "lime" and "kernelshap" (case-insensitive).
Method parse_method(std::string_view text);

// Region (or image) indices ordered from most to least important.
using RankSequence = std::vector<std::size_t>;

// Indices sorted by decreasing score; equal scores keep ascending index.
RankSequence rank_by_score(std::span<const double> scores);
// Throws ValidationError unless `ranking` is a permutation of 0..s-1.
void validate_permutation(std::span<const std::size_t> ranking, std::size_t s);
// positions[ranking[p]] = p.
std::vector<std::size_t> positions_of(std::span<const std::size_t> ranking);
// Spearman correlation between two rankings of the same items.
double spearman_rho(std::span<const std::size_t> a, std::span<const std::size_t> b);

// Per-region importance from one method on one image.
struct Attribution {
  std::string image_id;
  Method method = Method::kEaoc;
  std::string set_id;
  std::vector<double> scores;
  nlohmann::json config = nlohmann::json::object();

  RankSequence ranking() const { return rank_by_score(scores); }
};

nlohmann::json to_json(const Attribution& attribution);

// Region-presence vector: z[n] = 1 keeps region n, 0 removes it.
using Coalition = std::span<const std::uint8_t>;
// Value of a coalition. Called concurrently when jobs > 1.
using CoalitionValueFn = std::function<double(Coalition)>;

// Indices n with z[n] = 0.
std::vector<std::size_t> absent_regions(Coalition z);

// Norm used as a scalar target of an embedding.
enum class NormKind { kL1, kL2 };
std::string to_string(NormKind kind);
NormKind parse_norm(std::string_view text);
double norm_of(std::span<const double> v, NormKind kind);

// Evaluates `fn` on every coalition (row-major, s entries each).
std::vector<double> evaluate_coalitions(const CoalitionValueFn& fn,
                                        std::span<const std::uint8_t> coalitions, std::size_t s,
                                        int jobs);

}  // namespace facexai
