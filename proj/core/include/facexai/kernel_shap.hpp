#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "facexai/attribution.hpp"
#include "facexai/dataset.hpp"
#include "facexai/embedder.hpp"
#include "facexai/image.hpp"

namespace facexai {

inline constexpr std::size_t kExactShapleyMaxRegions = 15;

enum class ShapMode { kAuto, kExact, kSampled };
std::string to_string(ShapMode mode);
ShapMode parse_shap_mode(std::string_view text);

struct KernelShapConfig {
  ShapMode mode = ShapMode::kAuto;  // exact when s <= 15
  int samples = 0;                  // 0: 2s + 2048
  std::uint64_t seed = 0;
  NormKind target = NormKind::kL1;  // single-image value function
  FillStrategy fill = FillStrategy::mid_gray();
  int jobs = 1;
};

struct ShapleyValues {
  std::vector<double> phi;
  double empty_value = 0.0;  // v(no regions)
  double full_value = 0.0;   // v(all regions)
  std::size_t evaluations = 0;
  ShapMode mode = ShapMode::kExact;
};

// Exact Shapley values over all 2^s coalitions. Throws ValidationError for
// s > 15.
ShapleyValues exact_shapley(std::size_t s, const CoalitionValueFn& value, int jobs = 1);

// Kernel-weighted least squares with pi(z) = (s-1) / (C(s,|z|) |z| (s-|z|)).
// Complementary subset sizes are enumerated fully while the budget allows;
// the rest are sampled. Both efficiency constraints hold exactly.
ShapleyValues sampled_kernel_shap(std::size_t s, const CoalitionValueFn& value, int samples,
                                  std::uint64_t seed, int jobs = 1);

ShapleyValues kernel_shap(std::size_t s, const CoalitionValueFn& value,
                          const KernelShapConfig& config);

// v(z) = norm of the embedding with the regions outside z occluded.
Attribution kernelshap_attribution(const Embedder& embedder, const Sample& sample,
                                   const KernelShapConfig& config);
// v(z) = cosine similarity with the regions outside z occluded in both images.
// The attribution is reported under image A's id.
Attribution kernelshap_pair_attribution(const Embedder& embedder, const Sample& a,
                                        const Sample& b, const KernelShapConfig& config);

}  // namespace facexai
