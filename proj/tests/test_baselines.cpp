#include <gtest/gtest.h>

#include <random>

#include "dyntok/baselines.hpp"
#include "dyntok/pipeline.hpp"
#include "dyntok/synthetic.hpp"
#include "test_support.hpp"

namespace {

using dyntok::FrameGridPair;
using dyntok::PoolSpec;

TEST(Pool, TwentyEightToFourteen) {
  auto grid = FrameGridPair::shared({2, 28, 28}, 3, std::vector<float>(2 * 784 * 3, 0.5f));
  auto pooled = dyntok::pool(grid, PoolSpec::bilinear2());
  EXPECT_EQ(pooled.shape(), (dyntok::GridShape{2, 14, 14}));
  EXPECT_EQ(pooled.rows() * pooled.cols(), 196u);
}

TEST(Pool, WindowMean) {
  // [(0,0),(2,0); (0,2),(2,2)] -> (1,1)
  auto grid = FrameGridPair::shared({1, 2, 2}, 2, {0, 0, 2, 0, 0, 2, 2, 2});
  auto pooled = dyntok::pool(grid, PoolSpec::mean(2));
  ASSERT_EQ(pooled.vision().size(), 2u);
  EXPECT_EQ(pooled.vision()[0], 1.0f);
  EXPECT_EQ(pooled.vision()[1], 1.0f);
}

TEST(Pool, IdenticalWindowReturnsVector) {
  auto grid = FrameGridPair::shared({1, 2, 2}, 2, {0.3f, -9.1f, 0.3f, -9.1f, 0.3f, -9.1f, 0.3f, -9.1f});
  auto pooled = dyntok::pool(grid, PoolSpec::bilinear2());
  EXPECT_EQ(pooled.vision()[0], 0.3f);
  EXPECT_EQ(pooled.vision()[1], -9.1f);
}

TEST(Pool, BilinearEqualsMeanAtStrideTwo) {
  std::mt19937_64 rng(51);
  auto grid = dyntok::testing::random_grid(rng, {3, 8, 6}, 5, 7);
  EXPECT_EQ(dyntok::pool(grid, PoolSpec::bilinear2()), dyntok::pool(grid, PoolSpec::mean(2)));
}

TEST(Pool, PoolsBothTensors) {
  FrameGridPair grid({1, 2, 2}, 1, {1, 2, 3, 4}, 2, {0, 4, 0, 4, 8, 4, 8, 4});
  auto pooled = dyntok::pool(grid, PoolSpec::bilinear2());
  EXPECT_EQ(pooled.vision()[0], 2.5f);
  EXPECT_EQ(pooled.embedding()[0], 4.0f);
  EXPECT_EQ(pooled.embedding()[1], 4.0f);
}

TEST(Pool, CommutesWithPositiveScaling) {
  std::mt19937_64 rng(52);
  auto grid = dyntok::testing::random_grid(rng, {1, 4, 4}, 3, 1);
  std::vector<float> doubled(grid.vision().begin(), grid.vision().end());
  for (auto& v : doubled) v *= 4.0f;  // power of two keeps the check exact
  auto a = dyntok::pool(FrameGridPair::shared(grid.shape(), 3, doubled), PoolSpec::mean(2));
  auto b = dyntok::pool(FrameGridPair::shared(grid.shape(), 3, {grid.vision().begin(), grid.vision().end()}),
                        PoolSpec::mean(2));
  for (std::size_t i = 0; i < a.vision().size(); ++i) EXPECT_EQ(a.vision()[i], 4.0f * b.vision()[i]);
}

TEST(Pool, IndivisibleAndUnsupported) {
  auto grid = FrameGridPair::shared({1, 3, 4}, 1, std::vector<float>(12, 1.0f));
  EXPECT_THROW(dyntok::pool(grid, PoolSpec::bilinear2()), dyntok::Error);
  EXPECT_THROW(dyntok::pool(grid, PoolSpec{3, 3, 3, 3, dyntok::PoolMode::bilinear}), dyntok::Error);
  EXPECT_THROW(dyntok::pool(grid, PoolSpec{0, 1, 1, 1, dyntok::PoolMode::mean}), dyntok::Error);
  auto three = dyntok::pool(FrameGridPair::shared({1, 3, 3}, 1, std::vector<float>(9, 1.0f)), PoolSpec::mean(3));
  EXPECT_EQ(three.shape(), (dyntok::GridShape{1, 1, 1}));
}

TEST(StaticCompress, FixedCount) {
  std::mt19937_64 rng(53);
  auto a = dyntok::static_compress(dyntok::testing::random_grid(rng, {1, 14, 14}, 4, 4), PoolSpec::mean(2));
  auto b = dyntok::static_compress(FrameGridPair::shared({1, 14, 14}, 4, std::vector<float>(196 * 4, 1.0f)),
                                   PoolSpec::mean(2));
  EXPECT_EQ(a.size(), 56u);  // 7*7 fused + 7 markers
  EXPECT_EQ(b.size(), a.size());
}

TEST(StaticCompress, DynamicBeatsStaticOnConstantFrame) {
  dyntok::SceneSpec scene;
  scene.shape = {1, 14, 14};
  scene.d_clip = 8;
  scene.rows = {{{14, dyntok::SegmentMode::constant}}};
  auto grid = dyntok::generate_synthetic(scene, 1);
  auto dynamic = dyntok::compress(grid, dyntok::Threshold(0.6f));
  auto fixed = dyntok::static_compress(grid, PoolSpec::mean(2));
  EXPECT_EQ(dynamic.sequence.size(), 28u);  // 14 fused + 14 markers
  EXPECT_EQ(fixed.size(), 56u);
  EXPECT_LE(dynamic.sequence.size(), fixed.size());
}

TEST(Pipeline, PoolThenCompressOrdering) {
  std::mt19937_64 rng(54);
  auto grid = dyntok::testing::correlated_grid(rng, {2, 28, 28}, 8, 4);
  auto run = dyntok::compress(grid, dyntok::Threshold(0.6f), PoolSpec::bilinear2());
  auto pooled = dyntok::pool(grid, PoolSpec::bilinear2());
  EXPECT_EQ(run.grid, pooled);
  EXPECT_EQ(run.groups, dyntok::build_groups(dyntok::adjacent_cosine(pooled), dyntok::Threshold(0.6f)));
  EXPECT_EQ(run.sequence, dyntok::fuse(pooled, run.groups));
  EXPECT_EQ(run.stats.original, 2u * 196u);
}

}  // namespace
