#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "facexai/attribution.hpp"
#include "facexai/dataset.hpp"
#include "facexai/embedder.hpp"
#include "facexai/image.hpp"

namespace facexai {

enum class CurveTarget { kRepresentation, kSimilarity };
std::string to_string(CurveTarget t);
CurveTarget parse_curve_target(std::string_view text);

// Mean displacement after occluding the top-k regions, k = 1..s.
struct OcclusionCurve {
  std::string method;
  std::string set_id;
  std::string model_id;
  CurveTarget target = CurveTarget::kRepresentation;
  RankSequence ranking;
  std::vector<double> mean;              // mean[k - 1]
  std::vector<std::vector<double>> raw;  // items x s

  std::size_t size() const { return mean.size(); }
};

struct EvalConfig {
  FillStrategy fill = FillStrategy::mid_gray();
  int jobs = 1;
};

// Representation: mean over images of |embed(I) - embed(I with top-k occluded)|_2.
OcclusionCurve representation_curve(const Embedder& embedder, std::span<const Sample> samples,
                                    std::span<const std::size_t> ranking, const EvalConfig& config);
// Similarity: mean over pairs of |S_AB - S_A(k)B(k)|.
OcclusionCurve similarity_curve(const Embedder& embedder, const Dataset& dataset,
                                std::span<const std::size_t> ranking, const EvalConfig& config);
OcclusionCurve occlusion_curve(const Embedder& embedder, const Dataset& dataset,
                               std::span<const std::size_t> ranking, CurveTarget target,
                               const EvalConfig& config);

struct RandomBaseline {
  std::uint64_t seed = 0;
  std::vector<RankSequence> orders;
  std::vector<OcclusionCurve> trials;
  std::vector<double> mean;
};

// One seeded uniform permutation per trial.
RandomBaseline random_baseline(const Embedder& embedder, const Dataset& dataset, int trials,
                               std::uint64_t seed, CurveTarget target, const EvalConfig& config);

struct Dominance {
  std::string method;
  // Fraction of k with method mean >= baseline mean (ties count).
  double fraction = 0.0;
  // sum over k of (method mean - baseline mean).
  double area_between = 0.0;
  std::vector<std::uint8_t> dominates;
};

std::vector<Dominance> dominance_report(std::span<const OcclusionCurve> methods,
                                        const RandomBaseline& baseline);

// Mean computed as x0 + sum(x - x0) / n, exact when all values agree.
double stable_mean(std::span<const double> values);

nlohmann::json to_json(const OcclusionCurve& curve);
nlohmann::json to_json(const RandomBaseline& baseline);
nlohmann::json to_json(std::span<const Dominance> report);
std::string dominance_markdown(std::span<const Dominance> report);

// Line plot of the method curves with the random mean (dashed).
std::string curves_svg(std::span<const OcclusionCurve> methods, const RandomBaseline& baseline,
                       const std::string& title);

}  // namespace facexai
