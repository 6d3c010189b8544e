#include "facexai/synthetic_embedder.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "facexai/error.hpp"

namespace facexai {
namespace {

constexpr double kMidGray = 128.0 / 255.0;

}  // namespace

SyntheticRegionEmbedder::SyntheticRegionEmbedder(RegionMaskStack masks,
                                                 SyntheticEmbedderConfig config)
    : masks_(std::move(masks)), config_(std::move(config)) {
  const auto s = masks_.size();
  if (config_.weights.size() != s) {
    throw ValidationError("synthetic embedder: " + std::to_string(config_.weights.size()) +
                          " weights for " + std::to_string(s) + " regions");
  }
  if (config_.dim <= static_cast<int>(s)) {
    throw ValidationError("synthetic embedder: dim must exceed the region count");
  }
  if (config_.activation_channels < 0 || config_.activation_grid <= 0 ||
      config_.activation_families <= 0) {
    throw ValidationError("synthetic embedder: invalid activation configuration");
  }
  std::mt19937_64 rng(config_.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  offset_.resize(static_cast<std::size_t>(config_.dim) - s);
  const double scale = config_.offset_scale / std::sqrt(static_cast<double>(offset_.size()));
  for (auto& v : offset_) v = scale * normal(rng);
  std::uniform_real_distribution<double> gain(0.8, 1.2);
  gain_.resize(static_cast<std::size_t>(config_.activation_channels));
  for (auto& g : gain_) g = gain(rng);

  pixels_.resize(s);
  for (std::size_t n = 0; n < s; ++n) {
    auto bits = masks_.masks[n].data();
    for (std::size_t p = 0; p < bits.size(); ++p) {
      if (bits[p]) pixels_[n].push_back(static_cast<std::uint32_t>(p));
    }
  }

  std::ostringstream id;
  id << "synthetic-s" << s << "-d" << config_.dim << "-seed" << config_.seed;
  model_id_ = id.str();
}

std::vector<double> SyntheticRegionEmbedder::region_offsets(const Image& image) const {
  if (image.width() != masks_.width || image.height() != masks_.height) {
    throw ValidationError("synthetic embedder: image is " + std::to_string(image.width()) + "x" +
                          std::to_string(image.height()) + ", masks are " +
                          std::to_string(masks_.width) + "x" + std::to_string(masks_.height));
  }
  const auto s = masks_.size();
  const auto ch = static_cast<std::size_t>(image.channels());
  std::vector<double> sums(s, 0.0);
  std::vector<std::size_t> counts(s, 0);
  auto px = image.data();
  for (std::size_t n = 0; n < s; ++n) {
    std::uint64_t acc = 0;
    for (auto p : pixels_[n]) {
      for (std::size_t c = 0; c < ch; ++c) acc += px[p * ch + c];
    }
    sums[n] = static_cast<double>(acc);
    counts[n] = pixels_[n].size() * ch;
  }
  std::vector<double> out(s, 0.0);
  for (std::size_t n = 0; n < s; ++n) {
    if (counts[n] == 0) continue;
    out[n] = sums[n] / (255.0 * static_cast<double>(counts[n])) - kMidGray;
  }
  return out;
}

Embedding SyntheticRegionEmbedder::embed(const Image& image) const {
  const auto r = region_offsets(image);
  Embedding e;
  e.model_id = model_id_;
  e.values.resize(static_cast<std::size_t>(config_.dim));
  for (std::size_t n = 0; n < r.size(); ++n) e.values[n] = config_.weights[n] * r[n];
  std::copy(offset_.begin(), offset_.end(), e.values.begin() + static_cast<std::ptrdiff_t>(r.size()));
  return e;
}

int SyntheticRegionEmbedder::family_of(int channel) const {
  return channel * config_.activation_families / config_.activation_channels;
}

FeatureMaps SyntheticRegionEmbedder::activations(const Image& image) const {
  if (!has_activations()) return Embedder::activations(image);
  const int g = config_.activation_grid;
  // Mean intensity per grid cell.
  std::vector<double> cell(static_cast<std::size_t>(g) * g, 0.0);
  std::vector<std::size_t> count(cell.size(), 0);
  const int ch = image.channels();
  for (int y = 0; y < image.height(); ++y) {
    const int cy = y * g / image.height();
    for (int x = 0; x < image.width(); ++x) {
      const int cx = x * g / image.width();
      const auto idx = static_cast<std::size_t>(cy) * g + cx;
      for (int c = 0; c < ch; ++c) cell[idx] += image.at(x, y, c);
      count[idx] += static_cast<std::size_t>(ch);
    }
  }
  for (std::size_t i = 0; i < cell.size(); ++i) {
    if (count[i]) cell[i] /= 255.0 * static_cast<double>(count[i]);
  }

  FeatureMaps fm;
  fm.channels = config_.activation_channels;
  fm.height = g;
  fm.width = g;
  fm.values.resize(static_cast<std::size_t>(fm.channels) * g * g);
  const int families = config_.activation_families;
  for (int k = 0; k < fm.channels; ++k) {
    const int fam = family_of(k);
    for (int cy = 0; cy < g; ++cy) {
      const bool in_band = cy * families / g == fam;
      const double pattern = in_band ? 1.0 : 0.05;
      for (int cx = 0; cx < g; ++cx) {
        const auto idx = static_cast<std::size_t>(cy) * g + cx;
        fm.values[static_cast<std::size_t>(k) * g * g + idx] = gain_[k] * pattern * cell[idx];
      }
    }
  }
  return fm;
}

}  // namespace facexai
