#ifndef DYNTOK_GRID_HPP
#define DYNTOK_GRID_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace dyntok {

/// Leading (frames, rows, cols) shape shared by every per-patch tensor.
struct GridShape {
  std::uint32_t frames = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;

  std::size_t patches() const { return std::size_t{frames} * rows * cols; }
  std::size_t row_count() const { return std::size_t{frames} * rows; }

  friend bool operator==(const GridShape&, const GridShape&) = default;
};

inline std::string to_string(const GridShape& s) {
  return "(" + std::to_string(s.frames) + ", " + std::to_string(s.rows) + ", " +
         std::to_string(s.cols) + ")";
}

namespace detail {

inline void check_finite(std::span<const float> values, const char* tensor) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      throw Error(ErrorKind::non_finite,
                  std::string(tensor) + " element " + std::to_string(i) + " is not finite");
  }
}

}  // namespace detail

/// Paired per-patch tensors of one clip: vision-space features (t, h, w, d_clip)
/// used for similarity, and embedding-space tokens (t, h, w, d_emb) used for
/// fusion. Both are row-major. When the caller only has one tensor the pair is
/// built with `shared`, and embedding() aliases vision().
class FrameGridPair {
 public:
  FrameGridPair(GridShape shape, std::uint32_t d_clip, std::vector<float> vision,
                std::uint32_t d_emb, std::vector<float> embedding)
      : shape_(shape), d_clip_(d_clip), d_emb_(d_emb), vision_(std::move(vision)),
        embedding_(std::move(embedding)), shared_(false) {
    validate();
  }

  static FrameGridPair shared(GridShape shape, std::uint32_t dim, std::vector<float> vision) {
    return FrameGridPair(shape, dim, std::move(vision));
  }

  const GridShape& shape() const { return shape_; }
  std::uint32_t frames() const { return shape_.frames; }
  std::uint32_t rows() const { return shape_.rows; }
  std::uint32_t cols() const { return shape_.cols; }
  std::uint32_t d_clip() const { return d_clip_; }
  std::uint32_t d_emb() const { return d_emb_; }
  bool embedding_is_vision() const { return shared_; }

  std::span<const float> vision() const { return vision_; }
  std::span<const float> embedding() const { return shared_ ? vision() : std::span<const float>(embedding_); }

  std::size_t patch_index(std::uint32_t frame, std::uint32_t row, std::uint32_t col) const {
    return (std::size_t{frame} * shape_.rows + row) * shape_.cols + col;
  }

  std::span<const float> vision_at(std::uint32_t frame, std::uint32_t row, std::uint32_t col) const {
    return vision().subspan(patch_index(frame, row, col) * d_clip_, d_clip_);
  }

  std::span<const float> embedding_at(std::uint32_t frame, std::uint32_t row, std::uint32_t col) const {
    return embedding().subspan(patch_index(frame, row, col) * d_emb_, d_emb_);
  }

  /// Bitwise equality of shapes, flag and payloads.
  friend bool operator==(const FrameGridPair& a, const FrameGridPair& b) {
    auto same = [](std::span<const float> x, std::span<const float> y) {
      return x.size() == y.size() &&
             (x.empty() || std::memcmp(x.data(), y.data(), x.size_bytes()) == 0);
    };
    return a.shape_ == b.shape_ && a.d_clip_ == b.d_clip_ && a.d_emb_ == b.d_emb_ &&
           a.shared_ == b.shared_ && same(a.vision(), b.vision()) &&
           same(a.embedding(), b.embedding());
  }

 private:
  FrameGridPair(GridShape shape, std::uint32_t dim, std::vector<float> vision)
      : shape_(shape), d_clip_(dim), d_emb_(dim), vision_(std::move(vision)), shared_(true) {
    validate();
  }

  void validate() const {
    if (shape_.frames < 1) throw Error(ErrorKind::invalid_argument, "frame count must be >= 1");
    if (shape_.rows < 1 || shape_.cols < 1)
      throw Error(ErrorKind::invalid_argument, "grid rows and cols must be >= 1");
    if (d_clip_ < 1 || d_emb_ < 1)
      throw Error(ErrorKind::invalid_argument, "feature dimensions must be >= 1");
    if (vision_.size() != shape_.patches() * d_clip_)
      throw Error(ErrorKind::shape_mismatch,
                  "vision tensor holds " + std::to_string(vision_.size()) + " floats, expected " +
                      std::to_string(shape_.patches() * d_clip_));
    if (!shared_ && embedding_.size() != shape_.patches() * d_emb_)
      throw Error(ErrorKind::shape_mismatch,
                  "embedding tensor holds " + std::to_string(embedding_.size()) +
                      " floats, expected " + std::to_string(shape_.patches() * d_emb_));
    detail::check_finite(vision_, "vision");
    if (!shared_) detail::check_finite(embedding_, "embedding");
  }

  GridShape shape_;
  std::uint32_t d_clip_;
  std::uint32_t d_emb_;
  std::vector<float> vision_;
  std::vector<float> embedding_;
  bool shared_;
};

}  // namespace dyntok

#endif  // DYNTOK_GRID_HPP
