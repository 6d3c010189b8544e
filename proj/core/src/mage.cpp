#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "facexai/eaoc.hpp"
#include "facexai/error.hpp"
#include "facexai/parallel.hpp"

namespace facexai {

std::vector<std::vector<double>> channel_signatures(const Embedder& embedder,
                                                    std::span<const Sample> dataset, int jobs) {
  if (!embedder.has_activations()) {
    throw UnsupportedOperation("mage: model '" + embedder.model_id() + "' exposes no activations");
  }
  if (dataset.empty()) throw ValidationError("mage: dataset is empty");
  std::vector<FeatureMaps> maps(dataset.size());
  parallel_for(dataset.size(), jobs,
               [&](std::size_t i) { maps[i] = embedder.activations(dataset[i].image); });
  const auto& first = maps.front();
  const auto plane = static_cast<std::size_t>(first.height) * first.width;
  std::vector<std::vector<double>> sig(static_cast<std::size_t>(first.channels),
                                       std::vector<double>(plane, 0.0));
  for (const auto& fm : maps) {
    if (fm.channels != first.channels || fm.height != first.height || fm.width != first.width) {
      throw ModelError("mage: activation shape changed between images");
    }
    for (int c = 0; c < fm.channels; ++c) {
      auto ch = fm.channel(c);
      auto& dst = sig[static_cast<std::size_t>(c)];
      for (std::size_t p = 0; p < plane; ++p) dst[p] += ch[p];
    }
  }
  const double inv = 1.0 / static_cast<double>(maps.size());
  for (auto& row : sig) {
    for (auto& v : row) v *= inv;
  }
  return sig;
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return d;
}

struct KMeansRun {
  std::vector<int> label;
  double inertia = 0.0;
};

KMeansRun kmeans_once(const std::vector<std::vector<double>>& x, int k, std::mt19937_64& rng,
                      int max_iterations) {
  const auto n = x.size();
  std::vector<std::vector<double>> centers;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  centers.push_back(x[pick(rng)]);
  std::vector<double> d2(n);
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centers) best = std::min(best, sq_dist(x[i], c));
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0) {
      // Every point sits on a center; the empty-cluster refill sorts it out.
      while (static_cast<int>(centers.size()) < k) centers.push_back(x[centers.size() % n]);
      break;
    }
    std::uniform_real_distribution<double> u(0.0, total);
    double r = u(rng);
    std::size_t chosen = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      r -= d2[i];
      if (r < 0.0) {
        chosen = i;
        break;
      }
    }
    centers.push_back(x[chosen]);
  }

  KMeansRun run;
  run.label.assign(n, -1);
  for (int it = 0; it < max_iterations; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = sq_dist(x[i], centers[static_cast<std::size_t>(c)]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (run.label[i] != best) {
        run.label[i] = best;
        changed = true;
      }
    }
    // Refill empty clusters with the point farthest from its center.
    for (int c = 0; c < k; ++c) {
      if (std::find(run.label.begin(), run.label.end(), c) != run.label.end()) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = sq_dist(x[i], centers[static_cast<std::size_t>(run.label[i])]);
        const auto members = std::count(run.label.begin(), run.label.end(), run.label[i]);
        if (members > 1 && d > far_d) {
          far_d = d;
          far = i;
        }
      }
      run.label[far] = c;
      changed = true;
    }
    for (int c = 0; c < k; ++c) {
      std::vector<double> mean(x.front().size(), 0.0);
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (run.label[i] != c) continue;
        for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += x[i][d];
        ++count;
      }
      for (auto& v : mean) v /= static_cast<double>(count);
      centers[static_cast<std::size_t>(c)] = std::move(mean);
    }
    if (!changed) break;
  }
  for (std::size_t i = 0; i < n; ++i) {
    run.inertia += sq_dist(x[i], centers[static_cast<std::size_t>(run.label[i])]);
  }
  return run;
}

}  // namespace

ConceptGroups cluster_channels(const std::vector<std::vector<double>>& signatures,
                               const MageConfig& config) {
  const int channels = static_cast<int>(signatures.size());
  if (channels < 1) throw ValidationError("mage: no channels to cluster");
  if (config.k < 1 || config.k > channels) {
    throw ValidationError("mage: K = " + std::to_string(config.k) + " is outside [1, " +
                          std::to_string(channels) + "]");
  }
  std::mt19937_64 rng(config.seed);
  KMeansRun best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, config.restarts); ++r) {
    auto run = kmeans_once(signatures, config.k, rng, config.max_iterations);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  // Number groups by their smallest channel so the output is canonical.
  std::vector<int> first(static_cast<std::size_t>(config.k), channels);
  for (int c = 0; c < channels; ++c) {
    auto& f = first[static_cast<std::size_t>(best.label[static_cast<std::size_t>(c)])];
    f = std::min(f, c);
  }
  std::vector<int> cluster_order(static_cast<std::size_t>(config.k));
  std::iota(cluster_order.begin(), cluster_order.end(), 0);
  std::sort(cluster_order.begin(), cluster_order.end(),
            [&](int a, int b) { return first[static_cast<std::size_t>(a)] < first[static_cast<std::size_t>(b)]; });
  ConceptGroups out;
  out.channels = channels;
  for (int cl : cluster_order) {
    std::vector<int> members;
    for (int c = 0; c < channels; ++c) {
      if (best.label[static_cast<std::size_t>(c)] == cl) members.push_back(c);
    }
    out.groups.push_back(std::move(members));
  }
  out.metadata = {{"algorithm", "kmeans++"},
                  {"k", config.k},
                  {"seed", config.seed},
                  {"restarts", config.restarts},
                  {"inertia", best.inertia},
                  {"signature", "dataset-mean spatial activation"}};
  out.validate();
  return out;
}

ConceptGroups mage_concept_groups(const Embedder& embedder, std::span<const Sample> dataset,
                                  const MageConfig& config) {
  return cluster_channels(channel_signatures(embedder, dataset, config.jobs), config);
}

}  // namespace facexai
