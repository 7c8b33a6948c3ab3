#ifndef DYNTOK_GRID_IO_HPP
#define DYNTOK_GRID_IO_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "byteio.hpp"
#include "error.hpp"
#include "grid.hpp"

// DTG v1 feature-grid file. All integers are u32 little-endian.
//
//   offset  size  field
//   0       4     magic "DTGR"
//   4       4     version (1)
//   8       4     flags (bit 0: embedding equals vision, other bits must be 0)
//   12      4     t  (frames, >= 1)
//   16      4     h  (rows, >= 1)
//   20      4     w  (cols, >= 1)
//   24      4     d_clip (>= 1)
//   28      4     d_emb  (>= 1; equals d_clip when bit 0 is set)
//   32      ...   vision payload,    t*h*w*d_clip float32 LE, row-major (t, h, w, d)
//   ...     ...   embedding payload, t*h*w*d_emb float32 LE, omitted when bit 0 is set
//
// The file ends exactly after the last payload byte.

namespace dyntok {

inline constexpr std::string_view kGridMagic = "DTGR";
inline constexpr std::uint32_t kGridVersion = 1;
inline constexpr std::uint32_t kGridFlagShared = 1u;
inline constexpr std::size_t kGridHeaderBytes = 32;

inline std::string encode_grid(const FrameGridPair& grid) {
  std::string out;
  const std::size_t payload_floats =
      grid.vision().size() + (grid.embedding_is_vision() ? 0 : grid.embedding().size());
  out.reserve(kGridHeaderBytes + payload_floats * 4);
  out.append(kGridMagic);
  byteio::put_u32(out, kGridVersion);
  byteio::put_u32(out, grid.embedding_is_vision() ? kGridFlagShared : 0u);
  byteio::put_u32(out, grid.frames());
  byteio::put_u32(out, grid.rows());
  byteio::put_u32(out, grid.cols());
  byteio::put_u32(out, grid.d_clip());
  byteio::put_u32(out, grid.d_emb());
  byteio::put_f32s(out, grid.vision());
  if (!grid.embedding_is_vision()) byteio::put_f32s(out, grid.embedding());
  return out;
}

namespace detail {

inline std::vector<float> read_payload(byteio::Reader& in, std::size_t count, const char* tensor) {
  const std::size_t start = in.offset();
  std::vector<float> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = in.f32(tensor);
    if (!std::isfinite(values[i]))
      throw Error(ErrorKind::non_finite, std::string(tensor) + " element " + std::to_string(i) +
                                             " at byte offset " + std::to_string(start + 4 * i) +
                                             " is not finite");
  }
  return values;
}

}  // namespace detail

inline FrameGridPair decode_grid(std::string_view data) {
  byteio::Reader in(data);
  if (in.bytes(4, "magic") != kGridMagic)
    throw Error(ErrorKind::malformed_header, "bad magic at byte offset 0, expected \"DTGR\"");
  const std::uint32_t version = in.u32("version");
  if (version != kGridVersion)
    throw Error(ErrorKind::malformed_header,
                "unsupported version " + std::to_string(version) + " at byte offset 4");
  const std::uint32_t flags = in.u32("flags");
  if ((flags & ~kGridFlagShared) != 0)
    throw Error(ErrorKind::malformed_header,
                "unknown flag bits " + std::to_string(flags) + " at byte offset 8");
  GridShape shape;
  shape.frames = in.u32("t");
  shape.rows = in.u32("h");
  shape.cols = in.u32("w");
  const std::uint32_t d_clip = in.u32("d_clip");
  const std::uint32_t d_emb = in.u32("d_emb");
  const char* names[] = {"t", "h", "w", "d_clip", "d_emb"};
  const std::uint32_t dims[] = {shape.frames, shape.rows, shape.cols, d_clip, d_emb};
  for (int i = 0; i < 5; ++i) {
    if (dims[i] == 0)
      throw Error(ErrorKind::malformed_header, std::string(names[i]) + " is 0 at byte offset " +
                                                   std::to_string(12 + 4 * i));
  }
  const bool shared = (flags & kGridFlagShared) != 0;
  if (shared && d_emb != d_clip)
    throw Error(ErrorKind::malformed_header,
                "shared-embedding flag set but d_emb != d_clip at byte offset 28");

  const std::size_t vision_floats = shape.patches() * d_clip;
  const std::size_t emb_floats = shared ? 0 : shape.patches() * d_emb;
  const std::size_t expected = (vision_floats + emb_floats) * 4;
  if (in.remaining() != expected)
    throw Error(ErrorKind::shape_mismatch,
                "payload at byte offset 32 is " + std::to_string(in.remaining()) +
                    " bytes, header declares " + std::to_string(expected));

  std::vector<float> vision = detail::read_payload(in, vision_floats, "vision");
  if (shared) return FrameGridPair::shared(shape, d_clip, std::move(vision));
  std::vector<float> embedding = detail::read_payload(in, emb_floats, "embedding");
  return FrameGridPair(shape, d_clip, std::move(vision), d_emb, std::move(embedding));
}

inline FrameGridPair load_grid(const std::filesystem::path& path) {
  return decode_grid(byteio::read_file(path));
}

inline void save_grid(const FrameGridPair& grid, const std::filesystem::path& path) {
  byteio::write_file_atomic(path, encode_grid(grid));
}

}  // namespace dyntok

#endif  // DYNTOK_GRID_IO_HPP
