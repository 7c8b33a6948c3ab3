#ifndef DYNTOK_PIPELINE_HPP
#define DYNTOK_PIPELINE_HPP

#include <optional>

#include "analysis.hpp"
#include "baselines.hpp"
#include "fusion.hpp"
#include "grid.hpp"
#include "grouping.hpp"
#include "parallel.hpp"
#include "similarity.hpp"

namespace dyntok {

/// Everything one compression run produces, kept together so callers can
/// render or analyse without recomputing similarities.
struct Compression {
  FrameGridPair grid;  // the grid actually compressed (pooled when requested)
  SimilarityGrid similarity;
  GroupMap groups;
  CompressedSequence sequence;
  CompressionStats stats;
};

/// Optional pooling, then similarity -> grouping -> fusion.
inline Compression compress(const FrameGridPair& input, Threshold threshold,
                            const std::optional<PoolSpec>& pooling = std::nullopt, const Exec& exec = {}) {
  FrameGridPair grid = pooling ? pool(input, *pooling, exec) : input;
  SimilarityGrid sims = adjacent_cosine(grid, exec);
  GroupMap groups = build_groups(sims, threshold);
  CompressedSequence seq = fuse(grid, groups, exec);
  CompressionStats stats = compute_stats(seq, grid.shape(), threshold.value());
  return {std::move(grid), std::move(sims), std::move(groups), std::move(seq), std::move(stats)};
}

}  // namespace dyntok

#endif  // DYNTOK_PIPELINE_HPP
