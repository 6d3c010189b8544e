#include "facexai/embedder.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "facexai/error.hpp"

namespace facexai {

FeatureMaps Embedder::activations(const Image&) const {
  throw UnsupportedOperation("model '" + model_id() + "' does not expose activations");
}

std::vector<Embedding> Embedder::embed_batch(std::span<const Image> images) const {
  std::vector<Embedding> out;
  out.reserve(images.size());
  for (const auto& img : images) out.push_back(embed(img));
  return out;
}

double l1_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("euclidean distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ValidationError("cosine similarity: dimensions " + std::to_string(a.size()) + " and " +
                          std::to_string(b.size()) + " differ");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw NumericError("cosine similarity of a zero-norm vector");
  // Exactly 1 for identical inputs: sqrt(fl(x * x)) == x.
  const double c = dot / std::sqrt(na * nb);
  return std::clamp(c, -1.0, 1.0);
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
  return cosine_similarity(std::span<const double>(a.values), std::span<const double>(b.values));
}

CachedEmbedder::CachedEmbedder(std::shared_ptr<const Embedder> inner, std::size_t capacity)
    : inner_(std::move(inner)), capacity_(capacity) {
  if (!inner_) throw ValidationError("CachedEmbedder: null embedder");
}

Embedding CachedEmbedder::embed(const Image& image) const {
  const auto key = content_hash(image);
  {
    std::shared_lock lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) {
      ++hits_;
      return it->second;
    }
  }
  Embedding e = inner_->embed(image);
  ++misses_;
  std::unique_lock lock(mutex_);
  if (cache_.size() >= capacity_) return e;
  return cache_.try_emplace(key, std::move(e)).first->second;
}

FeatureMaps CachedEmbedder::activations(const Image& image) const {
  return inner_->activations(image);
}

std::size_t CachedEmbedder::hits() const { return hits_.load(); }

std::size_t CachedEmbedder::misses() const { return misses_.load(); }

std::size_t CachedEmbedder::size() const {
  std::shared_lock lock(mutex_);
  return cache_.size();
}

}  // namespace facexai
