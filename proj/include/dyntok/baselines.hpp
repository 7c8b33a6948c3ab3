#ifndef DYNTOK_BASELINES_HPP
#define DYNTOK_BASELINES_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "fusion.hpp"
#include "grid.hpp"
#include "parallel.hpp"

namespace dyntok {

enum class PoolMode { bilinear, mean };

/// Static spatial pooling window. The default is the 2x2, stride-2 bilinear
/// reduction that turns a 28x28 patch grid into 14x14.
struct PoolSpec {
  std::uint32_t kernel_rows = 2;
  std::uint32_t kernel_cols = 2;
  std::uint32_t stride_rows = 2;
  std::uint32_t stride_cols = 2;
  PoolMode mode = PoolMode::bilinear;

  static PoolSpec bilinear2() { return {}; }
  static PoolSpec mean(std::uint32_t k) { return {k, k, k, k, PoolMode::mean}; }
};

namespace detail {

inline std::uint32_t pooled_extent(std::uint32_t in, std::uint32_t kernel, std::uint32_t stride, const char* axis) {
  if (in < kernel || (in - kernel) % stride != 0)
    throw Error(ErrorKind::invalid_argument, std::string(axis) + " extent " + std::to_string(in) +
                                                 " is not divisible by kernel " + std::to_string(kernel) +
                                                 " / stride " + std::to_string(stride));
  return (in - kernel) / stride + 1;
}

inline std::vector<float> pool_tensor(std::span<const float> in, const GridShape& from, const GridShape& to,
                                      std::uint32_t d, const PoolSpec& spec, const Exec& exec) {
  std::vector<float> out(to.patches() * d);
  const double area = static_cast<double>(spec.kernel_rows) * spec.kernel_cols;
  parallel_for(to.frames, exec, [&](std::size_t f) {
    std::vector<double> acc(d);
    for (std::uint32_t r = 0; r < to.rows; ++r) {
      for (std::uint32_t c = 0; c < to.cols; ++c) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::uint32_t i = 0; i < spec.kernel_rows; ++i) {
          for (std::uint32_t j = 0; j < spec.kernel_cols; ++j) {
            const std::size_t src =
                ((f * from.rows + r * spec.stride_rows + i) * from.cols + c * spec.stride_cols + j) * d;
            for (std::uint32_t k = 0; k < d; ++k) acc[k] += in[src + k];
          }
        }
        float* dst = out.data() + ((f * to.rows + r) * to.cols + c) * d;
        for (std::uint32_t k = 0; k < d; ++k) dst[k] = static_cast<float>(acc[k] / area);
      }
    }
  });
  return out;
}

}  // namespace detail

/// Pools vision and embedding tensors with the same window. Bilinear mode is
/// only defined for kernel 2 / stride 2, where aligned-corner bilinear weights
/// are uniform and the result equals the 2x2 window mean.
inline FrameGridPair pool(const FrameGridPair& grid, const PoolSpec& spec, const Exec& exec = {}) {
  if (spec.kernel_rows == 0 || spec.kernel_cols == 0 || spec.stride_rows == 0 || spec.stride_cols == 0)
    throw Error(ErrorKind::invalid_argument, "pool kernel and stride must be positive");
  if (spec.mode == PoolMode::bilinear &&
      (spec.kernel_rows != 2 || spec.kernel_cols != 2 || spec.stride_rows != 2 || spec.stride_cols != 2))
    throw Error(ErrorKind::invalid_argument, "bilinear pooling is only defined for kernel 2, stride 2; use mean mode");
  const GridShape from = grid.shape();
  const GridShape to{from.frames, detail::pooled_extent(from.rows, spec.kernel_rows, spec.stride_rows, "row"),
                     detail::pooled_extent(from.cols, spec.kernel_cols, spec.stride_cols, "column")};
  auto vision = detail::pool_tensor(grid.vision(), from, to, grid.d_clip(), spec, exec);
  if (grid.embedding_is_vision()) return FrameGridPair::shared(to, grid.d_clip(), std::move(vision));
  auto embedding = detail::pool_tensor(grid.embedding(), from, to, grid.d_emb(), spec, exec);
  return FrameGridPair(to, grid.d_clip(), std::move(vision), grid.d_emb(), std::move(embedding));
}

/// Fixed-budget comparison baseline: pool, then keep every pooled token.
inline CompressedSequence static_compress(const FrameGridPair& grid, const PoolSpec& spec, const Exec& exec = {}) {
  return flatten_baseline(pool(grid, spec, exec), exec);
}

}  // namespace dyntok

#endif  // DYNTOK_BASELINES_HPP
