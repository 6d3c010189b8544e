#include "facexai/onnx_embedder.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <opencv2/core.hpp>
#include <opencv2/dnn.hpp>

#include "facexai/error.hpp"

namespace facexai {

struct OnnxEmbedder::Impl {
  cv::dnn::Net net;
  std::mutex mutex;
};

OnnxEmbedder::OnnxEmbedder(OnnxEmbedderConfig config)
    : config_(std::move(config)), impl_(std::make_unique<Impl>()) {
  if (config_.output_name.empty()) {
    throw ValidationError("onnx model: output tensor name is required");
  }
  if (!std::filesystem::exists(config_.model_path)) {
    throw ValidationError("onnx model '" + config_.model_path.string() + "' does not exist");
  }
  if (config_.model_id.empty()) config_.model_id = config_.model_path.stem().string();
  try {
    impl_->net = cv::dnn::readNetFromONNX(config_.model_path.string());
    impl_->net.setPreferableBackend(cv::dnn::DNN_BACKEND_OPENCV);
    impl_->net.setPreferableTarget(cv::dnn::DNN_TARGET_CPU);
  } catch (const cv::Exception& e) {
    throw ModelError("onnx model '" + config_.model_path.string() + "': " + e.what());
  }
  if (impl_->net.empty()) {
    throw ModelError("onnx model '" + config_.model_path.string() + "' could not be loaded");
  }
  auto names = impl_->net.getLayerNames();
  auto known = [&](const std::string& n) {
    return std::find(names.begin(), names.end(), n) != names.end();
  };
  if (!known(config_.output_name)) {
    throw ValidationError("onnx model: no tensor named '" + config_.output_name + "'");
  }
  if (config_.activation_name && !known(*config_.activation_name)) {
    throw ValidationError("onnx model: no tensor named '" + *config_.activation_name + "'");
  }
}

OnnxEmbedder::~OnnxEmbedder() = default;

namespace {

cv::Mat to_blob(const Image& image, const OnnxEmbedderConfig& cfg) {
  if (cfg.input_width > 0 &&
      (image.width() != cfg.input_width || image.height() != cfg.input_height)) {
    throw ValidationError("onnx model expects " + std::to_string(cfg.input_width) + "x" +
                          std::to_string(cfg.input_height) + " input, got " +
                          std::to_string(image.width()) + "x" + std::to_string(image.height()));
  }
  const int h = image.height();
  const int w = image.width();
  const int sizes[] = {1, 3, h, w};
  cv::Mat blob(4, sizes, CV_32F);
  auto* dst = blob.ptr<float>();
  const auto plane = static_cast<std::size_t>(h) * w;
  for (int c = 0; c < 3; ++c) {
    const int src_c = image.channels() == 1 ? 0 : (cfg.bgr ? 2 - c : c);
    const int stat_c = cfg.bgr ? 2 - c : c;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double v = (image.at(x, y, src_c) - cfg.mean[stat_c]) * cfg.scale[stat_c];
        dst[c * plane + static_cast<std::size_t>(y) * w + x] = static_cast<float>(v);
      }
    }
  }
  return blob;
}

}  // namespace

Embedding OnnxEmbedder::embed(const Image& image) const {
  cv::Mat blob = to_blob(image, config_);
  cv::Mat out;
  {
    std::lock_guard lock(impl_->mutex);
    try {
      if (config_.input_name.empty()) {
        impl_->net.setInput(blob);
      } else {
        impl_->net.setInput(blob, config_.input_name);
      }
      out = impl_->net.forward(config_.output_name).clone();
    } catch (const cv::Exception& e) {
      throw ModelError("onnx inference failed: " + std::string(e.what()));
    }
  }
  Embedding e;
  e.model_id = config_.model_id;
  e.values.reserve(out.total());
  const auto* p = out.ptr<float>();
  for (std::size_t i = 0; i < out.total(); ++i) {
    if (!std::isfinite(p[i])) throw ModelError("onnx model produced a non-finite embedding");
    e.values.push_back(p[i]);
  }
  return e;
}

FeatureMaps OnnxEmbedder::activations(const Image& image) const {
  if (!has_activations()) return Embedder::activations(image);
  cv::Mat blob = to_blob(image, config_);
  cv::Mat out;
  {
    std::lock_guard lock(impl_->mutex);
    try {
      if (config_.input_name.empty()) {
        impl_->net.setInput(blob);
      } else {
        impl_->net.setInput(blob, config_.input_name);
      }
      out = impl_->net.forward(*config_.activation_name).clone();
    } catch (const cv::Exception& e) {
      throw ModelError("onnx inference failed: " + std::string(e.what()));
    }
  }
  FeatureMaps fm;
  // Accept NCHW (batch 1), CHW or a flat vector.
  if (out.dims == 4) {
    fm.channels = out.size[1];
    fm.height = out.size[2];
    fm.width = out.size[3];
  } else if (out.dims == 3) {
    fm.channels = out.size[0];
    fm.height = out.size[1];
    fm.width = out.size[2];
  } else {
    fm.channels = static_cast<int>(out.total());
    fm.height = 1;
    fm.width = 1;
  }
  const auto* p = out.ptr<float>();
  fm.values.assign(p, p + out.total());
  return fm;
}

}  // namespace facexai
