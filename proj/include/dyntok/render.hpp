#ifndef DYNTOK_RENDER_HPP
#define DYNTOK_RENDER_HPP

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "analysis.hpp"
#include "byteio.hpp"
#include "error.hpp"
#include "grouping.hpp"

namespace dyntok {

inline constexpr std::uint8_t kMergedGray = 128;
inline constexpr std::uint8_t kKeptWhite = 255;
inline constexpr std::uint8_t kGutterWhite = 255;

/// 8-bit raster, 1 channel (grayscale) or 3 (RGB), row-major, interleaved.
struct MaskImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t channels = 1;
  std::vector<std::uint8_t> pixels;

  MaskImage() = default;
  MaskImage(std::uint32_t w, std::uint32_t h, std::uint32_t c, std::uint8_t fill)
      : width(w), height(h), channels(c), pixels(std::size_t{w} * h * c, fill) {}

  std::uint8_t* at(std::uint32_t x, std::uint32_t y) { return pixels.data() + (std::size_t{y} * width + x) * channels; }
  const std::uint8_t* at(std::uint32_t x, std::uint32_t y) const {
    return pixels.data() + (std::size_t{y} * width + x) * channels;
  }

  friend bool operator==(const MaskImage&, const MaskImage&) = default;
};

namespace detail {

inline void check_scale(std::uint32_t scale) {
  if (scale == 0) throw Error(ErrorKind::invalid_argument, "render scale must be positive");
}

// Paints one frame's mask with its top-left corner at pixel column x0.
inline void paint_mask(const GroupMap& map, std::uint32_t frame, std::uint32_t scale, std::uint32_t x0,
                       MaskImage& img) {
  const auto& shape = map.shape();
  for (std::uint32_t r = 0; r < shape.rows; ++r) {
    std::vector<bool> start(shape.cols, false);
    for (std::uint32_t s : map.starts(frame, r)) start[s] = true;
    for (std::uint32_t c = 0; c < shape.cols; ++c) {
      const std::uint8_t v = start[c] ? kKeptWhite : kMergedGray;
      for (std::uint32_t y = r * scale; y < (r + 1) * scale; ++y)
        for (std::uint32_t x = x0 + c * scale; x < x0 + (c + 1) * scale; ++x)
          for (std::uint32_t ch = 0; ch < img.channels; ++ch) img.at(x, y)[ch] = v;
    }
  }
}

}  // namespace detail

/// One grayscale image per frame, (w*scale) x (h*scale). A patch is gray when
/// it merged into its left neighbour's group, white when it starts a group.
inline std::vector<MaskImage> render_mask(const GroupMap& map, std::uint32_t scale) {
  detail::check_scale(scale);
  const auto& shape = map.shape();
  std::vector<MaskImage> frames;
  for (std::uint32_t f = 0; f < shape.frames; ++f) {
    MaskImage img(shape.cols * scale, shape.rows * scale, 1, kKeptWhite);
    detail::paint_mask(map, f, scale, 0, img);
    frames.push_back(std::move(img));
  }
  return frames;
}

/// Blends the mask of one frame over an RGB raster of the same pixel size:
/// merged patches become the average of the source pixel and gray 128,
/// group starts keep the source pixel.
inline MaskImage render_overlay(const GroupMap& map, std::uint32_t frame, std::uint32_t scale, const MaskImage& base) {
  detail::check_scale(scale);
  const auto& shape = map.shape();
  if (frame >= shape.frames) throw Error(ErrorKind::invalid_argument, "overlay frame index out of range");
  if (base.channels != 3 || base.width != shape.cols * scale || base.height != shape.rows * scale)
    throw Error(ErrorKind::shape_mismatch, "overlay raster must be RGB " + std::to_string(shape.cols * scale) + "x" +
                                               std::to_string(shape.rows * scale));
  MaskImage out = base;
  for (std::uint32_t r = 0; r < shape.rows; ++r) {
    std::vector<bool> start(shape.cols, false);
    for (std::uint32_t s : map.starts(frame, r)) start[s] = true;
    for (std::uint32_t c = 0; c < shape.cols; ++c) {
      if (start[c]) continue;
      for (std::uint32_t y = r * scale; y < (r + 1) * scale; ++y)
        for (std::uint32_t x = c * scale; x < (c + 1) * scale; ++x)
          for (std::uint32_t ch = 0; ch < 3; ++ch)
            out.at(x, y)[ch] = static_cast<std::uint8_t>((base.at(x, y)[ch] + kMergedGray) / 2);
    }
  }
  return out;
}

/// Tiles the masks of several thresholds left to right (in ascending
/// threshold order), separated by a white gutter one patch wide.
inline std::vector<MaskImage> render_sweep(std::span<const GroupMap> maps, std::uint32_t scale) {
  detail::check_scale(scale);
  if (maps.empty()) throw Error(ErrorKind::invalid_argument, "render_sweep needs at least one group map");
  const auto& shape = maps.front().shape();
  for (const auto& m : maps)
    if (!(m.shape() == shape)) throw Error(ErrorKind::shape_mismatch, "sweep group maps differ in shape");
  std::vector<const GroupMap*> ordered;
  for (const auto& m : maps) ordered.push_back(&m);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const GroupMap* a, const GroupMap* b) { return a->threshold().value() < b->threshold().value(); });

  const auto n = static_cast<std::uint32_t>(maps.size());
  const std::uint32_t tile = shape.cols * scale;
  const std::uint32_t width = n * tile + (n - 1) * scale;
  std::vector<MaskImage> frames;
  for (std::uint32_t f = 0; f < shape.frames; ++f) {
    MaskImage img(width, shape.rows * scale, 1, kGutterWhite);
    for (std::uint32_t i = 0; i < n; ++i) detail::paint_mask(*ordered[i], f, scale, i * (tile + scale), img);
    frames.push_back(std::move(img));
  }
  return frames;
}

inline std::size_t count_gray_pixels(const MaskImage& img) {
  std::size_t n = 0;
  for (std::uint8_t p : img.pixels) n += p == kMergedGray;
  return n / img.channels;
}

/// Binary PGM (P5) for 1-channel images, PPM (P6) for RGB; maxval 255.
inline std::string encode_pnm(const MaskImage& img) {
  if (img.channels != 1 && img.channels != 3)
    throw Error(ErrorKind::invalid_argument, "images must have 1 or 3 channels");
  std::string out = (img.channels == 1 ? "P5\n" : "P6\n") + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
  return out;
}

/// Reads binary P5/P6 with maxval 255 (comments allowed in the header).
inline MaskImage decode_pnm(std::string_view data) {
  std::size_t pos = 0;
  auto token = [&]() -> std::string {
    while (pos < data.size()) {
      if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t begin = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    if (begin == pos) throw Error(ErrorKind::malformed_header, "truncated PNM header at byte offset " + std::to_string(pos));
    return std::string(data.substr(begin, pos - begin));
  };
  auto number = [&](const char* what) -> std::uint32_t {
    const std::size_t at = pos;
    const std::string t = token();
    if (t.find_first_not_of("0123456789") != std::string::npos || t.size() > 9)
      throw Error(ErrorKind::malformed_header, std::string("bad PNM ") + what + " at byte offset " + std::to_string(at));
    return static_cast<std::uint32_t>(std::stoul(t));
  };
  const std::string magic = token();
  if (magic != "P5" && magic != "P6")
    throw Error(ErrorKind::malformed_header, "expected P5 or P6 magic at byte offset 0");
  const std::uint32_t width = number("width");
  const std::uint32_t height = number("height");
  if (number("maxval") != 255) throw Error(ErrorKind::malformed_header, "only maxval 255 is supported");
  ++pos;  // single whitespace byte before the raster
  MaskImage img(width, height, magic == "P5" ? 1 : 3, 0);
  if (data.size() < pos || data.size() - pos != img.pixels.size())
    throw Error(ErrorKind::shape_mismatch, "PNM raster at byte offset " + std::to_string(pos) + " has wrong length");
  std::copy(data.begin() + static_cast<std::ptrdiff_t>(pos), data.end(), img.pixels.begin());
  return img;
}

/// `<stem>_f<frame>_t<threshold>.pgm`, threshold with two decimals.
inline std::string mask_filename(std::string_view stem, std::uint32_t frame, float threshold,
                                 std::string_view extension = "pgm") {
  return std::string(stem) + "_f" + std::to_string(frame) + "_t" + format_threshold(threshold) + "." +
         std::string(extension);
}

inline void save_image(const MaskImage& img, const std::filesystem::path& path) {
  byteio::write_file_atomic(path, encode_pnm(img));
}

inline MaskImage load_image(const std::filesystem::path& path) { return decode_pnm(byteio::read_file(path)); }

}  // namespace dyntok

#endif  // DYNTOK_RENDER_HPP
