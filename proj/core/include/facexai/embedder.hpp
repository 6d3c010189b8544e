#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "facexai/image.hpp"

namespace facexai {

struct Embedding {
  std::vector<double> values;
  std::string model_id;

  std::size_t dim() const { return values.size(); }
  bool operator==(const Embedding&) const = default;
};

// channels x height x width, row-major per channel.
struct FeatureMaps {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> values;

  std::span<const double> channel(int c) const {
    const auto plane = static_cast<std::size_t>(height) * width;
    return std::span<const double>(values).subspan(static_cast<std::size_t>(c) * plane, plane);
  }
};

// The black-box model: image -> embedding, optionally exposing the last
// convolutional feature maps. Implementations must be deterministic and
// callable from several threads at once.
class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual std::string model_id() const = 0;
  virtual Embedding embed(const Image& image) const = 0;

  virtual bool has_activations() const { return false; }
  // Throws UnsupportedOperation unless has_activations().
  virtual FeatureMaps activations(const Image& image) const;

  std::vector<Embedding> embed_batch(std::span<const Image> images) const;
};

double l1_norm(std::span<const double> v);
double l2_norm(std::span<const double> v);
double euclidean_distance(std::span<const double> a, std::span<const double> b);

// Exact cosine similarity. Throws ValidationError on a dimension mismatch and
// NumericError when either vector has zero norm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);
double cosine_similarity(const Embedding& a, const Embedding& b);

// Memoizes embeddings by content hash (one cache per model). Safe under
// concurrent lookup/insert. Once `capacity` entries are stored, new results
// are returned without being cached.
class CachedEmbedder final : public Embedder {
 public:
  explicit CachedEmbedder(std::shared_ptr<const Embedder> inner,
                          std::size_t capacity = std::size_t{1} << 16);

  std::string model_id() const override { return inner_->model_id(); }
  Embedding embed(const Image& image) const override;
  bool has_activations() const override { return inner_->has_activations(); }
  FeatureMaps activations(const Image& image) const override;

  std::size_t hits() const;
  std::size_t misses() const;
  std::size_t size() const;

 private:
  std::shared_ptr<const Embedder> inner_;
  std::size_t capacity_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<std::string, Embedding> cache_;
  mutable std::atomic<std::size_t> hits_{0};
  mutable std::atomic<std::size_t> misses_{0};
};

}  // namespace facexai
