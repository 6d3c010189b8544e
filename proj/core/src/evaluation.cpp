#include "facexai/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "facexai/error.hpp"
#include "facexai/parallel.hpp"

namespace facexai {

std::string to_string(CurveTarget t) {
  return t == CurveTarget::kRepresentation ? "representation" : "similarity";
}

CurveTarget parse_curve_target(std::string_view text) {
  if (text == "representation") return CurveTarget::kRepresentation;
  if (text == "similarity") return CurveTarget::kSimilarity;
  throw ValidationError("unknown target '" + std::string(text) +
                        "' (expected representation or similarity)");
}

double stable_mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  double acc = 0.0;
  for (double x : v) acc += x - v.front();
  return v.front() + acc / static_cast<double>(v.size());
}

namespace {

// Occluded copies of `sample` for k = 1..s along `ranking`.
template <typename Fn>
void for_each_prefix(const Sample& sample, std::span<const std::size_t> ranking,
                     const FillStrategy& fill, Fn&& fn) {
  Mask acc(sample.masks.width, sample.masks.height, false);
  for (std::size_t k = 1; k <= ranking.size(); ++k) {
    acc |= sample.masks.masks.at(ranking[k - 1]);
    fn(k, occlude(sample.image, acc, fill));
  }
}

std::vector<double> column_means(const std::vector<std::vector<double>>& raw, std::size_t s) {
  std::vector<double> mean(s, 0.0);
  std::vector<double> col(raw.size());
  for (std::size_t k = 0; k < s; ++k) {
    for (std::size_t i = 0; i < raw.size(); ++i) col[i] = raw[i][k];
    mean[k] = stable_mean(col);
  }
  return mean;
}

void check_ranking(std::span<const std::size_t> ranking, std::size_t s) {
  validate_permutation(ranking, s);
}

}  // namespace

OcclusionCurve representation_curve(const Embedder& embedder, std::span<const Sample> samples,
                                    std::span<const std::size_t> ranking, const EvalConfig& config) {
  if (samples.empty()) throw ValidationError("representation curve: no images");
  const auto s = samples.front().masks.size();
  check_ranking(ranking, s);
  OcclusionCurve curve;
  curve.target = CurveTarget::kRepresentation;
  curve.set_id = samples.front().masks.set_id;
  curve.model_id = embedder.model_id();
  curve.ranking.assign(ranking.begin(), ranking.end());
  curve.raw.assign(samples.size(), std::vector<double>(s, 0.0));
  parallel_for(samples.size(), config.jobs, [&](std::size_t i) {
    const auto& sample = samples[i];
    if (sample.masks.size() != s) {
      throw ValidationError("image '" + sample.image_id + "' has a different region count");
    }
    try {
      const auto e0 = embedder.embed(sample.image);
      for_each_prefix(sample, ranking, config.fill, [&](std::size_t k, const Image& occluded) {
        curve.raw[i][k - 1] = euclidean_distance(e0.values, embedder.embed(occluded).values);
      });
    } catch (const ModelError& e) {
      throw ModelError("image '" + sample.image_id + "': " + e.what());
    }
  });
  curve.mean = column_means(curve.raw, s);
  return curve;
}

OcclusionCurve similarity_curve(const Embedder& embedder, const Dataset& dataset,
                                std::span<const std::size_t> ranking, const EvalConfig& config) {
  if (dataset.pairs.empty()) throw ValidationError("similarity curve: the dataset has no pairs");
  const auto s = dataset.region_count() > 0 ? dataset.region_count()
                                            : dataset.samples.front().masks.size();
  check_ranking(ranking, s);
  OcclusionCurve curve;
  curve.target = CurveTarget::kSimilarity;
  curve.set_id = dataset.set_id;
  curve.model_id = embedder.model_id();
  curve.ranking.assign(ranking.begin(), ranking.end());
  curve.raw.assign(dataset.pairs.size(), std::vector<double>(s, 0.0));
  parallel_for(dataset.pairs.size(), config.jobs, [&](std::size_t i) {
    const auto& pair = dataset.pairs[i];
    const auto& a = dataset.samples.at(pair.a);
    const auto& b = dataset.samples.at(pair.b);
    const double s0 = cosine_similarity(embedder.embed(a.image), embedder.embed(b.image));
    std::vector<Embedding> occluded_a(s);
    for_each_prefix(a, ranking, config.fill, [&](std::size_t k, const Image& img) {
      occluded_a[k - 1] = embedder.embed(img);
    });
    for_each_prefix(b, ranking, config.fill, [&](std::size_t k, const Image& img) {
      curve.raw[i][k - 1] = std::abs(s0 - cosine_similarity(occluded_a[k - 1], embedder.embed(img)));
    });
  });
  curve.mean = column_means(curve.raw, s);
  return curve;
}

OcclusionCurve occlusion_curve(const Embedder& embedder, const Dataset& dataset,
                               std::span<const std::size_t> ranking, CurveTarget target,
                               const EvalConfig& config) {
  if (target == CurveTarget::kRepresentation) {
    return representation_curve(embedder, dataset.samples, ranking, config);
  }
  return similarity_curve(embedder, dataset, ranking, config);
}

RandomBaseline random_baseline(const Embedder& embedder, const Dataset& dataset, int trials,
                               std::uint64_t seed, CurveTarget target, const EvalConfig& config) {
  if (trials < 1) throw ValidationError("random baseline: trials must be >= 1");
  if (dataset.samples.empty()) throw ValidationError("random baseline: no images");
  const auto s = dataset.samples.front().masks.size();
  RandomBaseline out;
  out.seed = seed;
  std::mt19937_64 rng(seed);
  for (int t = 0; t < trials; ++t) {
    RankSequence order(s);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    out.orders.push_back(std::move(order));
  }
  for (int t = 0; t < trials; ++t) {
    auto curve = occlusion_curve(embedder, dataset, out.orders[static_cast<std::size_t>(t)], target, config);
    curve.method = "random";
    out.trials.push_back(std::move(curve));
  }
  out.mean.assign(s, 0.0);
  std::vector<double> col(out.trials.size());
  for (std::size_t k = 0; k < s; ++k) {
    for (std::size_t t = 0; t < out.trials.size(); ++t) col[t] = out.trials[t].mean[k];
    out.mean[k] = stable_mean(col);
  }
  return out;
}

std::vector<Dominance> dominance_report(std::span<const OcclusionCurve> methods,
                                        const RandomBaseline& baseline) {
  std::vector<Dominance> out;
  for (const auto& curve : methods) {
    if (curve.mean.size() != baseline.mean.size()) {
      throw ValidationError("dominance: curve '" + curve.method + "' has " +
                            std::to_string(curve.mean.size()) + " points, baseline has " +
                            std::to_string(baseline.mean.size()));
    }
    Dominance d;
    d.method = curve.method;
    std::size_t wins = 0;
    for (std::size_t k = 0; k < curve.mean.size(); ++k) {
      const bool win = curve.mean[k] >= baseline.mean[k];
      d.dominates.push_back(win ? 1 : 0);
      wins += win ? 1 : 0;
      d.area_between += curve.mean[k] - baseline.mean[k];
    }
    d.fraction = curve.mean.empty() ? 0.0
                                    : static_cast<double>(wins) / static_cast<double>(curve.mean.size());
    out.push_back(std::move(d));
  }
  return out;
}

nlohmann::json to_json(const OcclusionCurve& curve) {
  std::vector<std::size_t> ks(curve.mean.size());
  std::iota(ks.begin(), ks.end(), std::size_t{1});
  return {{"method", curve.method},
          {"target", to_string(curve.target)},
          {"set_id", curve.set_id},
          {"model_id", curve.model_id},
          {"ranking", curve.ranking},
          {"k", ks},
          {"mean", curve.mean},
          {"raw_shape", {curve.raw.size(), curve.mean.size()}},
          {"raw", curve.raw}};
}

nlohmann::json to_json(const RandomBaseline& baseline) {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : baseline.trials) trials.push_back({{"ranking", t.ranking}, {"mean", t.mean}});
  return {{"seed", baseline.seed}, {"trials", trials}, {"mean", baseline.mean}};
}

nlohmann::json to_json(std::span<const Dominance> report) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& d : report) {
    out.push_back({{"method", d.method},
                   {"fraction", d.fraction},
                   {"area_between", d.area_between},
                   {"dominates", d.dominates}});
  }
  return out;
}

std::string dominance_markdown(std::span<const Dominance> report) {
  std::ostringstream md;
  md << "| Method | Dominance fraction | Area between curves |\n|---|---|---|\n";
  char buf[64];
  for (const auto& d : report) {
    md << "| " << d.method << " | ";
    std::snprintf(buf, sizeof buf, "%.4f", d.fraction);
    md << buf << " | ";
    std::snprintf(buf, sizeof buf, "%.6g", d.area_between);
    md << buf << " |\n";
  }
  return md.str();
}

}  // namespace facexai
