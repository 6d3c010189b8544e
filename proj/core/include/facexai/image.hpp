#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace facexai {

// 8-bit interleaved raster, 1 or 3 channels (RGB order).
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, std::uint8_t value = 0);
  Image(int width, int height, int channels, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return pixels_.empty(); }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * height_;
  }

  std::uint8_t at(int x, int y, int c) const {
    return pixels_[index(x, y, c)];
  }
  std::uint8_t& at(int x, int y, int c) { return pixels_[index(x, y, c)]; }

  std::span<const std::uint8_t> data() const { return pixels_; }
  std::span<std::uint8_t> data() { return pixels_; }

  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> pixels_;
};

// Strictly binary single-channel raster (values 0 or 1).
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height, bool value = false);

  int width() const { return width_; }
  int height() const { return height_; }

  bool at(int x, int y) const {
    return bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  void set(int x, int y, bool v) {
    bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0;
  }
  std::span<const std::uint8_t> data() const { return bits_; }

  std::size_t area() const;
  Mask& operator|=(const Mask& other);
  Mask complement() const;

  bool operator==(const Mask&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

enum class FillKind { kMidGray, kChannelMean, kBlack, kConstant };

// Pixel replacement rule used when a region is removed.
struct FillStrategy {
  FillKind kind = FillKind::kMidGray;
  std::uint8_t value = 128;  // used by kConstant

  static FillStrategy mid_gray() { return {FillKind::kMidGray, 128}; }
  static FillStrategy black() { return {FillKind::kBlack, 0}; }
  static FillStrategy channel_mean() { return {FillKind::kChannelMean, 0}; }
  static FillStrategy constant(std::uint8_t v) { return {FillKind::kConstant, v}; }

  bool operator==(const FillStrategy&) const = default;
};

std::string to_string(const FillStrategy& fill);
// Accepts "mid-gray", "black", "channel-mean" and "constant:<0-255>".
FillStrategy parse_fill_strategy(std::string_view text);

// Replaces the pixels under `mask` per `fill`; everything else is copied
// bit-identically. Throws ValidationError on a dimension mismatch.
Image occlude(const Image& image, const Mask& mask, const FillStrategy& fill);

// Hex SHA-256 over the dimensions and pixel bytes.
std::string content_hash(const Image& image);
std::string sha256_hex(std::string_view bytes);

Image load_image(const std::filesystem::path& path);
void save_png(const Image& image, const std::filesystem::path& path);
void save_mask_png(const Mask& mask, const std::filesystem::path& path);

}  // namespace facexai
