#ifndef DYNTOK_SIMILARITY_HPP
#define DYNTOK_SIMILARITY_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "grid.hpp"
#include "parallel.hpp"

namespace dyntok {

/// Cosine similarity of horizontally adjacent patches, shape (t, h, w-1).
/// Entry (f, r, k) compares columns k and k+1 of row r in frame f.
struct SimilarityGrid {
  GridShape shape;
  std::vector<float> values;

  std::size_t row_width() const { return shape.cols - 1; }

  std::span<const float> row(std::uint32_t frame, std::uint32_t r) const {
    const std::size_t width = row_width();
    return std::span<const float>(values).subspan((std::size_t{frame} * shape.rows + r) * width, width);
  }

  float at(std::uint32_t frame, std::uint32_t r, std::uint32_t k) const { return row(frame, r)[k]; }
};

/// Cosine of two vectors accumulated in double. A zero-norm operand yields 0,
/// which lies below every usable threshold and so always opens a new group.
inline float cosine(std::span<const float> a, std::span<const float> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i], y = b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) return 0.0f;
  double s = dot / (std::sqrt(na) * std::sqrt(nb));
  if (s > 1.0) s = 1.0;
  if (s < -1.0) s = -1.0;
  return static_cast<float>(s);
}

/// Single pass over the vision tensor; the embedding tensor is never read.
inline SimilarityGrid adjacent_cosine(const FrameGridPair& grid, const Exec& exec = {}) {
  SimilarityGrid sims;
  sims.shape = grid.shape();
  const std::size_t width = grid.cols() - 1;
  sims.values.resize(grid.shape().row_count() * width);
  const std::uint32_t rows = grid.rows();
  parallel_for(grid.frames(), exec, [&](std::size_t f) {
    const auto frame = static_cast<std::uint32_t>(f);
    for (std::uint32_t r = 0; r < rows; ++r) {
      float* out = sims.values.data() + (std::size_t{frame} * rows + r) * width;
      for (std::uint32_t k = 0; k < width; ++k)
        out[k] = cosine(grid.vision_at(frame, r, k), grid.vision_at(frame, r, k + 1));
    }
  });
  return sims;
}

}  // namespace dyntok

#endif  // DYNTOK_SIMILARITY_HPP
