#include "facexai/image.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <memory>
#include <numeric>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "facexai/error.hpp"

namespace facexai {

Image::Image(int width, int height, int channels, std::uint8_t value)
    : width_(width), height_(height), channels_(channels) {
  if (width <= 0 || height <= 0 || (channels != 1 && channels != 3)) {
    throw ValidationError("image dimensions must be positive with 1 or 3 channels");
  }
  pixels_.assign(static_cast<std::size_t>(width) * height * channels, value);
}

Image::Image(int width, int height, int channels, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), channels_(channels), pixels_(std::move(pixels)) {
  if (width <= 0 || height <= 0 || (channels != 1 && channels != 3)) {
    throw ValidationError("image dimensions must be positive with 1 or 3 channels");
  }
  if (pixels_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw ValidationError("pixel buffer size does not match image dimensions");
  }
}

Mask::Mask(int width, int height, bool value) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw ValidationError("mask dimensions must be positive");
  }
  bits_.assign(static_cast<std::size_t>(width) * height, value ? 1 : 0);
}

std::size_t Mask::area() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

Mask& Mask::operator|=(const Mask& other) {
  if (other.width_ != width_ || other.height_ != height_) {
    throw ValidationError("mask union: dimension mismatch");
  }
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
  return *this;
}

Mask Mask::complement() const {
  Mask out = *this;
  for (auto& b : out.bits_) b = b ? 0 : 1;
  return out;
}

std::string to_string(const FillStrategy& fill) {
  switch (fill.kind) {
    case FillKind::kMidGray:
      return "mid-gray";
    case FillKind::kChannelMean:
      return "channel-mean";
    case FillKind::kBlack:
      return "black";
    case FillKind::kConstant:
      return "constant:" + std::to_string(fill.value);
  }
  return "mid-gray";
}

FillStrategy parse_fill_strategy(std::string_view text) {
  if (text == "mid-gray") return FillStrategy::mid_gray();
  if (text == "black") return FillStrategy::black();
  if (text == "channel-mean") return FillStrategy::channel_mean();
  constexpr std::string_view kPrefix = "constant:";
  if (text.starts_with(kPrefix)) {
    auto digits = text.substr(kPrefix.size());
    int v = -1;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && v >= 0 && v <= 255) {
      return FillStrategy::constant(static_cast<std::uint8_t>(v));
    }
  }
  throw ValidationError("unknown fill strategy '" + std::string(text) +
                        "' (expected mid-gray, black, channel-mean or constant:<0-255>)");
}

Image occlude(const Image& image, const Mask& mask, const FillStrategy& fill) {
  if (image.width() != mask.width() || image.height() != mask.height()) {
    throw ValidationError("occlude: image is " + std::to_string(image.width()) + "x" +
                          std::to_string(image.height()) + " but mask is " +
                          std::to_string(mask.width()) + "x" + std::to_string(mask.height()));
  }
  const int channels = image.channels();
  std::array<std::uint8_t, 3> value{};
  switch (fill.kind) {
    case FillKind::kMidGray:
      value.fill(128);
      break;
    case FillKind::kBlack:
      value.fill(0);
      break;
    case FillKind::kConstant:
      value.fill(fill.value);
      break;
    case FillKind::kChannelMean: {
      std::array<std::uint64_t, 3> sums{};
      auto px = image.data();
      for (std::size_t i = 0; i < px.size(); ++i) sums[i % channels] += px[i];
      for (int c = 0; c < channels; ++c) {
        value[c] = static_cast<std::uint8_t>(
            std::lround(static_cast<double>(sums[c]) / static_cast<double>(image.pixel_count())));
      }
      break;
    }
  }

  Image out = image;
  auto dst = out.data();
  auto bits = mask.data();
  for (std::size_t p = 0; p < bits.size(); ++p) {
    if (!bits[p]) continue;
    for (int c = 0; c < channels; ++c) dst[p * channels + c] = value[c];
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                               &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw Error("sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string content_hash(const Image& image) {
  std::string buf = std::to_string(image.width()) + "x" + std::to_string(image.height()) +
                    "x" + std::to_string(image.channels()) + ":";
  auto px = image.data();
  buf.append(reinterpret_cast<const char*>(px.data()), px.size());
  return sha256_hex(buf);
}

Image load_image(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) {
    throw ValidationError("cannot decode image '" + path.string() + "'");
  }
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  std::vector<std::uint8_t> pixels(rgb.total() * 3);
  for (int y = 0; y < rgb.rows; ++y) {
    std::copy_n(rgb.ptr<std::uint8_t>(y), rgb.cols * 3,
                pixels.begin() + static_cast<std::ptrdiff_t>(y) * rgb.cols * 3);
  }
  return Image(rgb.cols, rgb.rows, 3, std::move(pixels));
}

void save_png(const Image& image, const std::filesystem::path& path) {
  const int type = image.channels() == 3 ? CV_8UC3 : CV_8UC1;
  cv::Mat view(image.height(), image.width(), type, const_cast<std::uint8_t*>(image.data().data()));
  cv::Mat out;
  if (image.channels() == 3) {
    cv::cvtColor(view, out, cv::COLOR_RGB2BGR);
  } else {
    out = view;
  }
  if (!cv::imwrite(path.string(), out)) {
    throw Error("cannot write PNG '" + path.string() + "'");
  }
}

void save_mask_png(const Mask& mask, const std::filesystem::path& path) {
  std::vector<std::uint8_t> px(mask.data().begin(), mask.data().end());
  for (auto& v : px) v = v ? 255 : 0;
  save_png(Image(mask.width(), mask.height(), 1, std::move(px)), path);
}

}  // namespace facexai
