// Builds a 28x28 synthetic clip, pools it to 14x14 and compresses it at each
// training threshold, printing the kept-token ratio and a budget estimate.

#include <cstdio>

#include "dyntok/dyntok.hpp"

int main() {
  dyntok::SceneSpec scene;
  scene.shape = {4, 28, 28};
  scene.d_clip = 3;  // low dimension spreads neighbour similarities across the ladder
  scene.d_emb = 32;
  // A flat background on the left, textured content on the right.
  scene.rows = {{
      {12, dyntok::SegmentMode::constant, 0.0, 0},
      {8, dyntok::SegmentMode::jitter, 0.9, std::nullopt},
      {8, dyntok::SegmentMode::random, 0.0, std::nullopt},
  }};
  const auto grid = dyntok::pool(dyntok::generate_synthetic(scene, 2024), dyntok::PoolSpec::bilinear2());

  for (float t : dyntok::kTrainingThresholds) {
    const auto run = dyntok::compress(grid, dyntok::Threshold(t));
    std::printf("S_th %.2f: %zu fused + %zu markers, ratio %.3f\n", t, run.sequence.fused_count(),
                run.sequence.marker_count(), run.stats.ratio);
  }

  const std::uint32_t frames[] = {96, 160};
  const double ratios[] = {1.0, 0.444};
  for (const auto& p : dyntok::budget_curve(14, 14, frames, ratios))
    std::printf("%u frames at ratio %.3f -> %llu tokens\n", p.frames, p.ratio,
                static_cast<unsigned long long>(p.total_tokens));
  return 0;
}
