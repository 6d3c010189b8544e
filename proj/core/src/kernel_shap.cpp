#include "facexai/kernel_shap.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "facexai/error.hpp"

namespace facexai {
namespace {

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return r;
}

void append(std::vector<std::uint8_t>& rows, const std::vector<std::uint8_t>& z) {
  rows.insert(rows.end(), z.begin(), z.end());
}

}  // namespace

std::string to_string(ShapMode mode) {
  switch (mode) {
    case ShapMode::kAuto: return "auto";
    case ShapMode::kExact: return "exact";
    case ShapMode::kSampled: return "sampled";
  }
  return "auto";
}

ShapMode parse_shap_mode(std::string_view text) {
  if (text == "auto") return ShapMode::kAuto;
  if (text == "exact") return ShapMode::kExact;
  if (text == "sampled") return ShapMode::kSampled;
  throw ValidationError("unknown KernelSHAP mode '" + std::string(text) +
                        "' (expected auto, exact or sampled)");
}

ShapleyValues exact_shapley(std::size_t s, const CoalitionValueFn& value, int jobs) {
  if (s < 1) throw ValidationError("kernelshap: at least one region is required");
  if (s > kExactShapleyMaxRegions) {
    throw ValidationError("kernelshap: exact mode supports at most " +
                          std::to_string(kExactShapleyMaxRegions) + " regions, got " +
                          std::to_string(s) + "; use sampled mode");
  }
  const std::size_t count = std::size_t{1} << s;
  std::vector<std::uint8_t> rows(count * s);
  for (std::size_t m = 0; m < count; ++m) {
    for (std::size_t n = 0; n < s; ++n) rows[m * s + n] = (m >> n) & 1U;
  }
  const auto v = evaluate_coalitions(value, rows, s, jobs);

  // weight[k] = k! (s-k-1)! / s! = 1 / (s * C(s-1, k))
  std::vector<double> weight(s);
  for (std::size_t k = 0; k < s; ++k) weight[k] = 1.0 / (static_cast<double>(s) * binomial(s - 1, k));

  ShapleyValues out;
  out.phi.assign(s, 0.0);
  for (std::size_t n = 0; n < s; ++n) {
    const std::size_t bit = std::size_t{1} << n;
    double acc = 0.0;
    for (std::size_t m = 0; m < count; ++m) {
      if (m & bit) continue;
      acc += weight[static_cast<std::size_t>(std::popcount(m))] * (v[m | bit] - v[m]);
    }
    out.phi[n] = acc;
  }
  out.empty_value = v.front();
  out.full_value = v.back();
  out.evaluations = count;
  out.mode = ShapMode::kExact;
  return out;
}

ShapleyValues sampled_kernel_shap(std::size_t s, const CoalitionValueFn& value, int samples,
                                  std::uint64_t seed, int jobs) {
  if (s < 2) throw ValidationError("kernelshap: at least two regions are required");
  if (samples < 1) throw ValidationError("kernelshap: samples must be positive");
  const std::vector<std::uint8_t> none(s, 0);
  const std::vector<std::uint8_t> all(s, 1);
  std::vector<std::uint8_t> ends;
  append(ends, none);
  append(ends, all);
  const auto end_values = evaluate_coalitions(value, ends, s, jobs);
  const double v_empty = end_values[0];
  const double v_full = end_values[1];

  const std::size_t sizes = (s - 1 + 1) / 2;  // ceil((s-1)/2)
  const std::size_t paired = (s - 1) / 2;
  std::vector<double> size_weight(sizes);
  for (std::size_t i = 0; i < sizes; ++i) {
    const auto k = static_cast<double>(i + 1);
    size_weight[i] = static_cast<double>(s - 1) / (k * (static_cast<double>(s) - k));
    if (i < paired) size_weight[i] *= 2.0;
  }
  const double total = std::accumulate(size_weight.begin(), size_weight.end(), 0.0);
  for (auto& w : size_weight) w /= total;

  std::vector<std::uint8_t> rows;
  std::vector<double> kernel;
  std::size_t full_sizes = 0;
  double left = static_cast<double>(samples);
  auto remaining = size_weight;
  for (std::size_t i = 0; i < sizes; ++i) {
    const std::size_t k = i + 1;
    double subsets = binomial(s, k);
    if (i < paired) subsets *= 2.0;
    if (left * remaining[i] / subsets < 1.0 - 1e-8) break;
    ++full_sizes;
    left -= subsets;
    if (remaining[i] < 1.0) {
      const double scale = 1.0 - remaining[i];
      for (auto& r : remaining) r /= scale;
    }
    double w = size_weight[i] / binomial(s, k);
    if (i < paired) w /= 2.0;
    // Enumerate k-subsets in lexicographic order.
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    while (true) {
      std::vector<std::uint8_t> z(s, 0);
      for (auto n : idx) z[n] = 1;
      append(rows, z);
      kernel.push_back(w);
      if (i < paired) {
        for (auto& b : z) b = 1 - b;
        append(rows, z);
        kernel.push_back(w);
      }
      std::size_t p = k;
      while (p > 0 && idx[p - 1] == s - k + p - 1) --p;
      if (p == 0) break;
      ++idx[p - 1];
      for (std::size_t q = p; q < k; ++q) idx[q] = idx[q - 1] + 1;
    }
  }
  const std::size_t fixed = kernel.size();

  auto samples_left = static_cast<long long>(samples) - static_cast<long long>(fixed);
  if (full_sizes != sizes && samples_left > 0) {
    std::vector<double> rest(size_weight.begin() + static_cast<std::ptrdiff_t>(full_sizes),
                             size_weight.end());
    for (std::size_t i = 0; i < rest.size(); ++i) {
      if (i + full_sizes < paired) rest[i] /= 2.0;
    }
    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::size_t> pick_size(rest.begin(), rest.end());
    std::map<std::vector<std::uint8_t>, std::size_t> seen;
    std::vector<std::size_t> perm(s);
    const long long draws = 4 * samples_left;
    auto add = [&](const std::vector<std::uint8_t>& z) {
      auto [it, inserted] = seen.emplace(z, kernel.size());
      if (inserted) {
        append(rows, z);
        kernel.push_back(1.0);
        --samples_left;
      } else {
        kernel[it->second] += 1.0;
      }
    };
    for (long long d = 0; d < draws && samples_left > 0; ++d) {
      const std::size_t i = pick_size(rng) + full_sizes;
      const std::size_t k = i + 1;
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<std::uint8_t> z(s, 0);
      for (std::size_t q = 0; q < k; ++q) z[perm[q]] = 1;
      add(z);
      if (samples_left > 0 && i < paired) {
        for (auto& b : z) b = 1 - b;
        add(z);
      }
    }
    double left_weight = 0.0;
    for (std::size_t i = full_sizes; i < sizes; ++i) left_weight += size_weight[i];
    double drawn = 0.0;
    for (std::size_t r = fixed; r < kernel.size(); ++r) drawn += kernel[r];
    if (drawn > 0.0) {
      for (std::size_t r = fixed; r < kernel.size(); ++r) kernel[r] *= left_weight / drawn;
    }
  }

  const auto y = evaluate_coalitions(value, rows, s, jobs);
  const std::size_t m = kernel.size();
  const double delta = v_full - v_empty;

  ShapleyValues out;
  out.empty_value = v_empty;
  out.full_value = v_full;
  out.evaluations = m + 2;
  out.mode = ShapMode::kSampled;
  out.phi.assign(s, 0.0);
  if (m == 0) {
    for (auto& p : out.phi) p = delta / static_cast<double>(s);
    return out;
  }

  // Eliminate the last region through sum(phi) = delta.
  const auto cols = static_cast<Eigen::Index>(s - 1);
  Eigen::MatrixXd a(static_cast<Eigen::Index>(m), cols);
  Eigen::VectorXd b(static_cast<Eigen::Index>(m));
  for (std::size_t r = 0; r < m; ++r) {
    const double sw = std::sqrt(kernel[r]);
    const double last = rows[r * s + s - 1];
    for (std::size_t n = 0; n + 1 < s; ++n) {
      a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(n)) = sw * (rows[r * s + n] - last);
    }
    b(static_cast<Eigen::Index>(r)) = sw * (y[r] - v_empty - last * delta);
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  const Eigen::VectorXd w = cod.solve(b);
  double sum = 0.0;
  for (std::size_t n = 0; n + 1 < s; ++n) {
    out.phi[n] = w(static_cast<Eigen::Index>(n));
    sum += out.phi[n];
  }
  out.phi[s - 1] = delta - sum;
  return out;
}

ShapleyValues kernel_shap(std::size_t s, const CoalitionValueFn& value,
                          const KernelShapConfig& config) {
  if (s < 2) throw ValidationError("kernelshap: at least two regions are required");
  auto mode = config.mode;
  if (mode == ShapMode::kAuto) {
    mode = s <= kExactShapleyMaxRegions ? ShapMode::kExact : ShapMode::kSampled;
  }
  if (mode == ShapMode::kExact) return exact_shapley(s, value, config.jobs);
  const int samples = config.samples > 0 ? config.samples : static_cast<int>(2 * s + 2048);
  return sampled_kernel_shap(s, value, samples, config.seed, config.jobs);
}

namespace {

nlohmann::json shap_config_json(const KernelShapConfig& config, const ShapleyValues& v,
                                 const char* value_fn) {
  return {{"mode", to_string(v.mode)},
          {"samples", config.samples},
          {"seed", config.seed},
          {"value_fn", value_fn},
          {"target", to_string(config.target)},
          {"fill", to_string(config.fill)},
          {"evaluations", v.evaluations},
          {"empty_value", v.empty_value},
          {"full_value", v.full_value}};
}

}  // namespace

Attribution kernelshap_attribution(const Embedder& embedder, const Sample& sample,
                                   const KernelShapConfig& config) {
  auto value = [&](Coalition z) {
    const auto absent = absent_regions(z);
    return norm_of(embedder.embed(occlude_regions(sample.image, sample.masks, absent, config.fill)).values,
                   config.target);
  };
  const auto v = kernel_shap(sample.masks.size(), value, config);
  Attribution out;
  out.image_id = sample.image_id;
  out.method = Method::kKernelShap;
  out.set_id = sample.masks.set_id;
  out.scores = v.phi;
  out.config = shap_config_json(config, v, "single");
  return out;
}

Attribution kernelshap_pair_attribution(const Embedder& embedder, const Sample& a,
                                        const Sample& b, const KernelShapConfig& config) {
  if (a.masks.size() != b.masks.size()) {
    throw ValidationError("kernelshap: pair images use different region counts");
  }
  auto value = [&](Coalition z) {
    const auto absent = absent_regions(z);
    const auto ea = embedder.embed(occlude_regions(a.image, a.masks, absent, config.fill));
    const auto eb = embedder.embed(occlude_regions(b.image, b.masks, absent, config.fill));
    return cosine_similarity(ea, eb);
  };
  const auto v = kernel_shap(a.masks.size(), value, config);
  Attribution out;
  out.image_id = a.image_id;
  out.method = Method::kKernelShap;
  out.set_id = a.masks.set_id;
  out.scores = v.phi;
  out.config = shap_config_json(config, v, "pair");
  out.config["pair"] = {a.image_id, b.image_id};
  return out;
}

}  // namespace facexai
