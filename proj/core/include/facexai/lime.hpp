#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "facexai/attribution.hpp"
#include "facexai/dataset.hpp"
#include "facexai/embedder.hpp"
#include "facexai/image.hpp"

namespace facexai {

struct LimeConfig {
  int samples = 1000;
  double kernel_width = 0.25;
  double ridge = 1e-3;
  std::uint64_t seed = 0;
  NormKind target = NormKind::kL1;
  FillStrategy fill = FillStrategy::mid_gray();
  int jobs = 1;
};

struct LimeFit {
  std::vector<double> coefficients;
  double intercept = 0.0;
  std::size_t samples = 0;
};

// Row-major presence vectors: the all-ones vector first, then independent
// fair coins per region.
std::vector<std::uint8_t> lime_samples(std::size_t s, int samples, std::uint64_t seed);

// exp(-D^2 / width^2) with D the cosine distance between z and all-ones
// (D = 1 for the empty coalition).
double lime_kernel_weight(Coalition z, double kernel_width);

// argmin sum_i w_i (y_i - b - x_i.beta)^2 + ridge |beta|^2, intercept b
// unpenalized. Throws NumericError when the system is singular.
LimeFit weighted_ridge(std::span<const std::uint8_t> x, std::size_t s, std::span<const double> y,
                       std::span<const double> w, double ridge);

// Fits the surrogate to an arbitrary coalition value function.
LimeFit lime_surrogate(std::size_t s, const CoalitionValueFn& value, const LimeConfig& config);

// Surrogate of the embedding norm of one image; scores are the coefficients.
Attribution lime_attribution(const Embedder& embedder, const Sample& sample,
                             const LimeConfig& config);

}  // namespace facexai
