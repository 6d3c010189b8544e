#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "facexai/embedder.hpp"

namespace facexai {

// Opaque ONNX face model. Preprocessing must match whatever the model was
// trained with; reproduced scores depend on it.
struct OnnxEmbedderConfig {
  std::filesystem::path model_path;
  std::string input_name;  // empty: the model's only input
  std::string output_name;
  std::optional<std::string> activation_name;
  int input_width = 0;   // 0: accept any size (no resize check)
  int input_height = 0;
  // Per-channel (RGB) value = (pixel - mean) * scale, pixel in [0, 255].
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  std::array<double, 3> scale{1.0 / 255.0, 1.0 / 255.0, 1.0 / 255.0};
  bool bgr = false;  // feed channels in BGR order
  std::string model_id;  // defaults to the file stem
};

// Runs the model through OpenCV's DNN module. Inference is serialized
// internally; the adapter is safe to call from several threads.
class OnnxEmbedder final : public Embedder {
 public:
  explicit OnnxEmbedder(OnnxEmbedderConfig config);
  ~OnnxEmbedder() override;
  OnnxEmbedder(const OnnxEmbedder&) = delete;
  OnnxEmbedder& operator=(const OnnxEmbedder&) = delete;

  std::string model_id() const override { return config_.model_id; }
  Embedding embed(const Image& image) const override;
  bool has_activations() const override { return config_.activation_name.has_value(); }
  FeatureMaps activations(const Image& image) const override;

  const OnnxEmbedderConfig& config() const { return config_; }

 private:
  struct Impl;
  OnnxEmbedderConfig config_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace facexai
