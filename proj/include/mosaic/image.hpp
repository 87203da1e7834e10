#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mosaic/error.hpp"

namespace mosaic {

/// Interleaved raster, row-major, `channels` samples per pixel.
template <typename T>
class Image {
 public:
  using value_type = T;

  Image() = default;

  Image(int width, int height, int channels = 1, T fill = T{})
      : width_(width), height_(height), channels_(channels) {
    if (width < 1 || height < 1 || channels < 1) {
      throw Error(ErrorCode::InvalidArgument,
                  "image dimensions must be positive, got " + std::to_string(width) + "x" +
                      std::to_string(height) + "x" + std::to_string(channels));
    }
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  Image(int width, int height, int channels, std::vector<T> data)
      : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    if (width < 1 || height < 1 || channels < 1 ||
        data_.size() != static_cast<std::size_t>(width) * height * channels) {
      throw Error(ErrorCode::InvalidArgument, "pixel buffer does not match image dimensions");
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& at(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }
  const T& at(int x, int y, int c = 0) const noexcept { return data_[index(x, y, c)]; }

  /// Edge-replicating accessor.
  const T& clamped(int x, int y, int c = 0) const noexcept {
    return at(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1), c);
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  std::vector<T>& buffer() noexcept { return data_; }
  const std::vector<T>& buffer() const noexcept { return data_; }

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

/// Single channel, values in [0,1].
using GrayImage = Image<double>;
/// Real-valued raster used inside the pipeline (gray or RGB). Signed values
/// are legal here, pyramids store band-pass levels in it.
using RealImage = Image<double>;
using Rgb8Image = Image<std::uint8_t>;

/// One ingested video frame: 8-bit RGB plus its position in the sequence.
struct Frame {
  std::size_t index = 0;
  Rgb8Image rgb;

  Frame() = default;
  Frame(std::size_t idx, Rgb8Image pixels) : index(idx), rgb(std::move(pixels)) {
    if (rgb.channels() != 3) {
      throw Error(ErrorCode::InvalidArgument, "frames must be 3-channel RGB");
    }
  }

  int width() const noexcept { return rgb.width(); }
  int height() const noexcept { return rgb.height(); }
};

inline RealImage to_real(const Rgb8Image& img, double scale = 1.0 / 255.0) {
  RealImage out(img.width(), img.height(), img.channels());
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] * scale;
  return out;
}

/// Clamp-then-round quantization; the only place real rasters become 8-bit.
inline Rgb8Image quantize(const RealImage& img, double scale = 255.0) {
  Rgb8Image out(img.width(), img.height(), img.channels());
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double v = std::clamp(src[i] * scale, 0.0, 255.0);
    dst[i] = static_cast<std::uint8_t>(v + 0.5);
  }
  return out;
}

inline GrayImage extract_channel(const RealImage& img, int channel) {
  GrayImage out(img.width(), img.height(), 1);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out.at(x, y) = img.at(x, y, channel);
  return out;
}

/// Bilinear sample; caller guarantees (x, y) lies within [0,w-1]x[0,h-1].
template <typename T>
double sample_bilinear(const Image<T>& img, double x, double y, int c = 0) {
  const int x0 = std::clamp(static_cast<int>(x), 0, img.width() - 1);
  const int y0 = std::clamp(static_cast<int>(y), 0, img.height() - 1);
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = (1.0 - fx) * img.at(x0, y0, c) + fx * img.at(x1, y0, c);
  const double bottom = (1.0 - fx) * img.at(x0, y1, c) + fx * img.at(x1, y1, c);
  return (1.0 - fy) * top + fy * bottom;
}

}  // namespace mosaic
