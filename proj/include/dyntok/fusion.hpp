#ifndef DYNTOK_FUSION_HPP
#define DYNTOK_FUSION_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "byteio.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "grid_io.hpp"
#include "grouping.hpp"
#include "parallel.hpp"

namespace dyntok {

enum class EntryKind : std::uint32_t { fused = 0, row_marker = 1 };

/// One element of the compressed sequence. Fused entries cover columns
/// [first, last] (inclusive) of their row; row markers carry kMarkerColumn in
/// both column fields.
struct SequenceEntry {
  EntryKind kind = EntryKind::fused;
  std::uint32_t frame = 0;
  std::uint32_t row = 0;
  std::uint32_t first = 0;
  std::uint32_t last = 0;

  friend bool operator==(const SequenceEntry&, const SequenceEntry&) = default;
};

inline constexpr std::uint32_t kMarkerColumn = 0xffffffffu;

/// Fused tokens interleaved with one row marker after each row, in raster
/// order (frame, row, left to right). Fused vectors live in a flat
/// (fused_count, d_emb) buffer in the same order as the fused entries.
class CompressedSequence {
 public:
  CompressedSequence(GridShape shape, std::uint32_t d_emb, std::vector<SequenceEntry> entries,
                     std::vector<float> fused)
      : shape_(shape), d_emb_(d_emb), entries_(std::move(entries)), fused_(std::move(fused)) {
    validate();
  }

  const GridShape& shape() const { return shape_; }
  std::uint32_t d_emb() const { return d_emb_; }
  std::span<const SequenceEntry> entries() const { return entries_; }
  std::span<const float> fused() const { return fused_; }

  std::size_t size() const { return entries_.size(); }
  std::size_t fused_count() const { return fused_.size() / d_emb_; }
  std::size_t marker_count() const { return shape_.row_count(); }

  std::span<const float> fused_vector(std::size_t i) const {
    return std::span<const float>(fused_).subspan(i * d_emb_, d_emb_);
  }

  friend bool operator==(const CompressedSequence&, const CompressedSequence&) = default;

 private:
  // Replays the raster walk the entries must follow; any gap, overlap or
  // misplaced marker is rejected.
  void validate() const {
    if (d_emb_ < 1) throw Error(ErrorKind::invalid_argument, "d_emb must be >= 1");
    std::size_t i = 0, fused_seen = 0;
    auto fail = [&](const std::string& why) {
      throw Error(ErrorKind::shape_mismatch, "sequence entry " + std::to_string(i) + ": " + why);
    };
    for (std::uint32_t f = 0; f < shape_.frames; ++f) {
      for (std::uint32_t r = 0; r < shape_.rows; ++r) {
        std::uint32_t next = 0;
        while (next < shape_.cols) {
          if (i >= entries_.size()) fail("sequence ends inside a row");
          const auto& e = entries_[i];
          if (e.kind != EntryKind::fused || e.frame != f || e.row != r || e.first != next ||
              e.last < e.first || e.last >= shape_.cols)
            fail("expected fused token for frame " + std::to_string(f) + " row " + std::to_string(r) +
                 " starting at column " + std::to_string(next));
          next = e.last + 1;
          ++fused_seen;
          ++i;
        }
        if (i >= entries_.size() || entries_[i] != SequenceEntry{EntryKind::row_marker, f, r, kMarkerColumn, kMarkerColumn})
          fail("expected row marker for frame " + std::to_string(f) + " row " + std::to_string(r));
        ++i;
      }
    }
    if (i != entries_.size()) fail("trailing entries after the last row marker");
    if (fused_.size() != fused_seen * d_emb_)
      throw Error(ErrorKind::shape_mismatch, "fused payload holds " + std::to_string(fused_.size()) +
                                                 " floats, expected " + std::to_string(fused_seen * d_emb_));
  }

  GridShape shape_;
  std::uint32_t d_emb_;
  std::vector<SequenceEntry> entries_;
  std::vector<float> fused_;
};

/// Averages the embedding vectors of every group (double accumulation) and
/// appends a row marker after each row. Frames are fused independently and
/// land at precomputed offsets, so output is identical for any thread count.
inline CompressedSequence fuse(const FrameGridPair& grid, const GroupMap& map, const Exec& exec = {}) {
  if (!(grid.shape() == map.shape()))
    throw Error(ErrorKind::shape_mismatch, "group map shape " + to_string(map.shape()) +
                                               " does not match grid shape " + to_string(grid.shape()));
  const GridShape& shape = grid.shape();
  const std::uint32_t d = grid.d_emb();

  std::vector<std::size_t> fused_before(shape.frames + 1, 0);
  for (std::uint32_t f = 0; f < shape.frames; ++f) {
    std::size_t n = 0;
    for (std::uint32_t r = 0; r < shape.rows; ++r) n += map.group_count(f, r);
    fused_before[f + 1] = fused_before[f] + n;
  }
  const std::size_t total = fused_before.back();
  std::vector<SequenceEntry> entries(total + shape.row_count());
  std::vector<float> fused(total * d);

  parallel_for(shape.frames, exec, [&](std::size_t fi) {
    const auto f = static_cast<std::uint32_t>(fi);
    std::size_t token = fused_before[f];
    std::size_t slot = token + std::size_t{f} * shape.rows;
    std::vector<double> acc(d);
    for (std::uint32_t r = 0; r < shape.rows; ++r) {
      const auto starts = map.starts(f, r);
      for (std::size_t g = 0; g < starts.size(); ++g) {
        const std::uint32_t first = starts[g];
        const std::uint32_t last = g + 1 < starts.size() ? starts[g + 1] - 1 : shape.cols - 1;
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::uint32_t c = first; c <= last; ++c) {
          const auto v = grid.embedding_at(f, r, c);
          for (std::uint32_t k = 0; k < d; ++k) acc[k] += v[k];
        }
        const double n = static_cast<double>(last - first + 1);
        float* out = fused.data() + token * d;
        for (std::uint32_t k = 0; k < d; ++k) out[k] = static_cast<float>(acc[k] / n);
        entries[slot++] = {EntryKind::fused, f, r, first, last};
        ++token;
      }
      entries[slot++] = {EntryKind::row_marker, f, r, kMarkerColumn, kMarkerColumn};
    }
  });
  return CompressedSequence(shape, d, std::move(entries), std::move(fused));
}

/// The uncompressed sequence: every patch kept, still terminated per row.
inline CompressedSequence flatten_baseline(const FrameGridPair& grid, const Exec& exec = {}) {
  return fuse(grid, identity_groups(grid.shape()), exec);
}

// DTCS v1 compressed-sequence file. All integers are u32 little-endian.
//
//   offset  size  field
//   0       4     magic "DTCS"
//   4       4     version (1)
//   8       4     flags (0)
//   12      4     t
//   16      4     h
//   20      4     w
//   24      4     d_emb
//   28      4     fused_count l
//   32      4     entry_count (= l + t*h)
//   36      ...   fused payload, l*d_emb float32 LE, in sequence order
//   ...     ...   entry table, entry_count records of 5 u32:
//                 kind (0 fused, 1 row marker), frame, row, first, last
//                 (row markers store 0xffffffff in first and last)
inline constexpr std::string_view kSequenceMagic = "DTCS";
inline constexpr std::uint32_t kSequenceVersion = 1;
inline constexpr std::size_t kSequenceHeaderBytes = 36;

inline std::string encode_sequence(const CompressedSequence& seq) {
  std::string out;
  out.reserve(kSequenceHeaderBytes + seq.fused().size_bytes() + seq.size() * 20);
  out.append(kSequenceMagic);
  byteio::put_u32(out, kSequenceVersion);
  byteio::put_u32(out, 0);
  byteio::put_u32(out, seq.shape().frames);
  byteio::put_u32(out, seq.shape().rows);
  byteio::put_u32(out, seq.shape().cols);
  byteio::put_u32(out, seq.d_emb());
  byteio::put_u32(out, static_cast<std::uint32_t>(seq.fused_count()));
  byteio::put_u32(out, static_cast<std::uint32_t>(seq.size()));
  byteio::put_f32s(out, seq.fused());
  for (const auto& e : seq.entries()) {
    byteio::put_u32(out, static_cast<std::uint32_t>(e.kind));
    byteio::put_u32(out, e.frame);
    byteio::put_u32(out, e.row);
    byteio::put_u32(out, e.first);
    byteio::put_u32(out, e.last);
  }
  return out;
}

inline CompressedSequence decode_sequence(std::string_view data) {
  byteio::Reader in(data);
  if (in.bytes(4, "magic") != kSequenceMagic)
    throw Error(ErrorKind::malformed_header, "bad magic at byte offset 0, expected \"DTCS\"");
  const std::uint32_t version = in.u32("version");
  if (version != kSequenceVersion)
    throw Error(ErrorKind::malformed_header, "unsupported version " + std::to_string(version) + " at byte offset 4");
  if (in.u32("flags") != 0) throw Error(ErrorKind::malformed_header, "nonzero flags at byte offset 8");
  GridShape shape;
  shape.frames = in.u32("t");
  shape.rows = in.u32("h");
  shape.cols = in.u32("w");
  const std::uint32_t d_emb = in.u32("d_emb");
  const std::uint32_t fused_count = in.u32("fused_count");
  const std::uint32_t entry_count = in.u32("entry_count");
  if (d_emb == 0) throw Error(ErrorKind::malformed_header, "d_emb is 0 at byte offset 24");
  const std::size_t expected = std::size_t{fused_count} * d_emb * 4 + std::size_t{entry_count} * 20;
  if (in.remaining() != expected)
    throw Error(ErrorKind::shape_mismatch, "payload at byte offset 36 is " + std::to_string(in.remaining()) +
                                               " bytes, header declares " + std::to_string(expected));
  std::vector<float> fused = detail::read_payload(in, std::size_t{fused_count} * d_emb, "fused");
  std::vector<SequenceEntry> entries(entry_count);
  for (auto& e : entries) {
    const std::uint32_t kind = in.u32("entry");
    if (kind > 1)
      throw Error(ErrorKind::malformed_header, "unknown entry kind at byte offset " + std::to_string(in.offset() - 4));
    e.kind = static_cast<EntryKind>(kind);
    e.frame = in.u32("entry");
    e.row = in.u32("entry");
    e.first = in.u32("entry");
    e.last = in.u32("entry");
  }
  return CompressedSequence(shape, d_emb, std::move(entries), std::move(fused));
}

inline void save_sequence(const CompressedSequence& seq, const std::filesystem::path& path) {
  byteio::write_file_atomic(path, encode_sequence(seq));
}

inline CompressedSequence load_sequence(const std::filesystem::path& path) {
  return decode_sequence(byteio::read_file(path));
}

/// Counts-only summary: {"frames", "rows", "cols", "d_emb", "fused", "markers", "entries"}.
inline nlohmann::ordered_json sequence_summary(const CompressedSequence& seq) {
  nlohmann::ordered_json doc;
  doc["frames"] = seq.shape().frames;
  doc["rows"] = seq.shape().rows;
  doc["cols"] = seq.shape().cols;
  doc["d_emb"] = seq.d_emb();
  doc["fused"] = seq.fused_count();
  doc["markers"] = seq.marker_count();
  doc["entries"] = seq.size();
  return doc;
}

}  // namespace dyntok

#endif  // DYNTOK_FUSION_HPP
