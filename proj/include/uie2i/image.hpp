#pragma once

// 8-bit RGB raster with PNG codec (libpng simplified API).

#include <png.h>

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "uie2i/io.hpp"

namespace uie2i {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int width, int height, Rgb fill = {}) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) throw InvalidInput("image dimensions must be positive");
    pixels_.resize(static_cast<std::size_t>(width) * height * 3);
    for (std::size_t i = 0; i < pixels_.size(); i += 3) {
      pixels_[i] = fill.r;
      pixels_[i + 1] = fill.g;
      pixels_[i + 2] = fill.b;
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  ScreenDims dims() const { return {width_, height_}; }
  const std::vector<std::uint8_t>& bytes() const { return pixels_; }
  std::vector<std::uint8_t>& bytes() { return pixels_; }

  Rgb at(int x, int y) const {
    const std::size_t i = index(x, y);
    return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
  }
  void set(int x, int y, Rgb c) {
    const std::size_t i = index(x, y);
    pixels_[i] = c.r;
    pixels_[i + 1] = c.g;
    pixels_[i + 2] = c.b;
  }
  /// Fills [x1, x2) x [y1, y2), clipped to the image.
  void fill_rect(int x1, int y1, int x2, int y2, Rgb c) {
    x1 = std::max(x1, 0);
    y1 = std::max(y1, 0);
    x2 = std::min(x2, width_);
    y2 = std::min(y2, height_);
    for (int y = y1; y < y2; ++y)
      for (int x = x1; x < x2; ++x) set(x, y, c);
  }

  bool operator==(const RgbImage&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * width_ + x) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Content hash of dimensions plus raw pixels; independent of PNG encoder settings.
inline std::string pixel_hash(const RgbImage& img) {
  std::string buf = std::to_string(img.width()) + "x" + std::to_string(img.height()) + ":";
  buf.append(reinterpret_cast<const char*>(img.bytes().data()), img.bytes().size());
  return sha256_hex(buf);
}

namespace detail {
struct PngImage {
  png_image img{};
  PngImage() {
    img.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&img); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};
}  // namespace detail

inline ScreenDims png_dimensions(const fs::path& path) {
  detail::PngImage png;
  if (!png_image_begin_read_from_file(&png.img, path.string().c_str()))
    throw DataError("cannot read PNG " + path.string() + ": " + png.img.message);
  return {static_cast<int>(png.img.width), static_cast<int>(png.img.height)};
}

inline RgbImage decode_png(const std::string& data, const std::string& name = "<memory>") {
  detail::PngImage png;
  if (!png_image_begin_read_from_memory(&png.img, data.data(), data.size()))
    throw DataError("cannot decode PNG " + name + ": " + png.img.message);
  png.img.format = PNG_FORMAT_RGB;
  RgbImage out(static_cast<int>(png.img.width), static_cast<int>(png.img.height));
  if (!png_image_finish_read(&png.img, nullptr, out.bytes().data(), 0, nullptr))
    throw DataError("cannot decode PNG " + name + ": " + png.img.message);
  return out;
}

inline RgbImage read_png(const fs::path& path) { return decode_png(read_file(path), path.string()); }

inline std::string encode_png(const RgbImage& img) {
  detail::PngImage png;
  png.img.width = static_cast<png_uint_32>(img.width());
  png.img.height = static_cast<png_uint_32>(img.height());
  png.img.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(png.img, size, 0, img.bytes().data(), 0, nullptr))
    throw Error(std::string("PNG encode failed: ") + png.img.message);
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&png.img, out.data(), &size, 0, img.bytes().data(), 0, nullptr))
    throw Error(std::string("PNG encode failed: ") + png.img.message);
  out.resize(size);
  return out;
}

inline void write_png(const fs::path& path, const RgbImage& img) { write_file(path, encode_png(img)); }

}  // namespace uie2i
