#include "facexai/lime.hpp"

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "facexai/error.hpp"

namespace facexai {

std::vector<std::uint8_t> lime_samples(std::size_t s, int samples, std::uint64_t seed) {
  std::vector<std::uint8_t> z(s * static_cast<std::size_t>(samples), 0);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t n = 0; n < s && samples > 0; ++n) z[n] = 1;
  for (std::size_t i = s; i < z.size(); ++i) z[i] = coin(rng) ? 1 : 0;
  return z;
}

double lime_kernel_weight(Coalition z, double kernel_width) {
  std::size_t on = 0;
  for (auto v : z) on += v ? 1 : 0;
  const double d = on == 0 ? 1.0
                           : 1.0 - std::sqrt(static_cast<double>(on) / static_cast<double>(z.size()));
  return std::exp(-(d * d) / (kernel_width * kernel_width));
}

LimeFit weighted_ridge(std::span<const std::uint8_t> x, std::size_t s, std::span<const double> y,
                       std::span<const double> w, double ridge) {
  const auto m = y.size();
  if (x.size() != m * s || w.size() != m) throw ValidationError("weighted_ridge: shape mismatch");
  if (ridge < 0.0) throw ValidationError("weighted_ridge: ridge must be nonnegative");
  const auto cols = static_cast<Eigen::Index>(s + 1);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m + s), cols);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m + s));
  for (std::size_t i = 0; i < m; ++i) {
    const double sw = std::sqrt(w[i]);
    const auto r = static_cast<Eigen::Index>(i);
    a(r, 0) = sw;
    for (std::size_t n = 0; n < s; ++n) a(r, static_cast<Eigen::Index>(n + 1)) = sw * x[i * s + n];
    b(r) = sw * y[i];
  }
  const double sl = std::sqrt(ridge);
  for (std::size_t n = 0; n < s; ++n) {
    a(static_cast<Eigen::Index>(m + n), static_cast<Eigen::Index>(n + 1)) = sl;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < cols) {
    throw NumericError("surrogate fit is singular (rank " + std::to_string(qr.rank()) + " of " +
                       std::to_string(cols) + "); increase the ridge penalty or the sample count");
  }
  const Eigen::VectorXd beta = qr.solve(b);
  LimeFit fit;
  fit.intercept = beta(0);
  fit.coefficients.resize(s);
  for (std::size_t n = 0; n < s; ++n) fit.coefficients[n] = beta(static_cast<Eigen::Index>(n + 1));
  fit.samples = m;
  return fit;
}

LimeFit lime_surrogate(std::size_t s, const CoalitionValueFn& value, const LimeConfig& config) {
  if (s < 2) throw ValidationError("lime: at least two regions are required");
  if (config.samples < static_cast<int>(s) + 1) {
    throw ValidationError("lime: " + std::to_string(config.samples) + " samples for " +
                          std::to_string(s) + " regions; at least " + std::to_string(s + 1) +
                          " are required");
  }
  if (!(config.kernel_width > 0.0)) throw ValidationError("lime: kernel_width must be positive");
  const auto z = lime_samples(s, config.samples, config.seed);
  const auto y = evaluate_coalitions(value, z, s, config.jobs);
  std::vector<double> w(y.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = lime_kernel_weight(Coalition(z).subspan(i * s, s), config.kernel_width);
  }
  return weighted_ridge(z, s, y, w, config.ridge);
}

Attribution lime_attribution(const Embedder& embedder, const Sample& sample,
                             const LimeConfig& config) {
  const auto s = sample.masks.size();
  auto value = [&](Coalition z) {
    const auto absent = absent_regions(z);
    return norm_of(embedder.embed(occlude_regions(sample.image, sample.masks, absent, config.fill)).values,
                   config.target);
  };
  const auto fit = lime_surrogate(s, value, config);
  Attribution out;
  out.image_id = sample.image_id;
  out.method = Method::kLime;
  out.set_id = sample.masks.set_id;
  out.scores = fit.coefficients;
  out.config = {{"samples", config.samples},     {"kernel_width", config.kernel_width},
                {"ridge", config.ridge},         {"seed", config.seed},
                {"target", to_string(config.target)}, {"fill", to_string(config.fill)},
                {"intercept", fit.intercept}};
  return out;
}

}  // namespace facexai
