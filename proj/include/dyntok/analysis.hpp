#ifndef DYNTOK_ANALYSIS_HPP
#define DYNTOK_ANALYSIS_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "fusion.hpp"
#include "grid.hpp"
#include "grouping.hpp"
#include "parallel.hpp"
#include "similarity.hpp"

namespace dyntok {

/// Token accounting for one compressed clip. Markers count on both sides of
/// the ratio: the uncompressed sequence is t*(h*w + h) long, which is the
/// 96*(196 + 14) = 20160 baseline budget at 96 frames of 14x14.
struct CompressionStats {
  std::uint64_t original = 0;  // t*h*w
  std::uint64_t fused = 0;     // l
  std::uint64_t markers = 0;   // t*h
  double ratio = 1.0;          // (fused + markers) / (original + markers)
  std::map<std::uint32_t, std::uint64_t> histogram;  // h' -> number of rows
  std::optional<float> threshold;

  std::uint64_t total() const { return fused + markers; }

  friend bool operator==(const CompressionStats&, const CompressionStats&) = default;
};

namespace detail {

inline CompressionStats finish_stats(const GridShape& shape, std::map<std::uint32_t, std::uint64_t> histogram,
                                     std::optional<float> threshold) {
  CompressionStats s;
  s.original = shape.patches();
  s.markers = shape.row_count();
  for (const auto& [groups, rows] : histogram) s.fused += std::uint64_t{groups} * rows;
  s.ratio = static_cast<double>(s.fused + s.markers) / static_cast<double>(s.original + s.markers);
  s.histogram = std::move(histogram);
  s.threshold = threshold;
  return s;
}

}  // namespace detail

/// Stats straight from a compressed sequence. `original` must be the grid
/// shape the sequence was produced from.
inline CompressionStats compute_stats(const CompressedSequence& seq, const GridShape& original,
                                      std::optional<float> threshold = std::nullopt) {
  if (!(seq.shape() == original))
    throw Error(ErrorKind::shape_mismatch, "sequence shape " + to_string(seq.shape()) +
                                               " does not match original " + to_string(original));
  std::map<std::uint32_t, std::uint64_t> histogram;
  std::uint32_t in_row = 0;
  for (const auto& e : seq.entries()) {
    if (e.kind == EntryKind::fused) {
      ++in_row;
    } else {
      ++histogram[in_row];
      in_row = 0;
    }
  }
  return detail::finish_stats(original, std::move(histogram), threshold);
}

inline CompressionStats compute_stats(const GroupMap& map) {
  std::map<std::uint32_t, std::uint64_t> histogram;
  for (std::uint32_t count : group_counts(map)) ++histogram[count];
  return detail::finish_stats(map.shape(), std::move(histogram), map.threshold().value());
}

/// One stats record per threshold, all derived from the same similarity grid.
inline std::vector<CompressionStats> threshold_sweep(const SimilarityGrid& sims, std::span<const float> thresholds,
                                                     const Exec& exec = {}) {
  for (std::size_t i = 1; i < thresholds.size(); ++i)
    if (!(thresholds[i] > thresholds[i - 1]))
      throw Error(ErrorKind::invalid_argument, "sweep thresholds must be strictly ascending");
  std::vector<Threshold> checked;
  for (float t : thresholds) checked.emplace_back(t);

  std::vector<CompressionStats> out(checked.size());
  parallel_for(checked.size(), exec, [&](std::size_t i) { out[i] = compute_stats(build_groups(sims, checked[i])); });
  return out;
}

inline std::vector<CompressionStats> threshold_sweep(const FrameGridPair& grid, std::span<const float> thresholds,
                                                     const Exec& exec = {}) {
  return threshold_sweep(adjacent_cosine(grid, exec), thresholds, exec);
}

/// Point on the frames-versus-compression token budget curve.
struct BudgetPoint {
  std::uint32_t frames = 0;
  double ratio = 1.0;
  std::uint64_t total_tokens = 0;
};

/// total = frames * round(ratio*h*w + h): per-frame kept tokens plus one
/// marker per row. Ratios apply to the patch count only.
inline std::vector<BudgetPoint> budget_curve(std::uint32_t rows, std::uint32_t cols,
                                             std::span<const std::uint32_t> frame_counts,
                                             std::span<const double> ratios) {
  std::vector<BudgetPoint> points;
  for (double ratio : ratios)
    if (!(ratio > 0.0 && ratio <= 1.0))
      throw Error(ErrorKind::invalid_argument, "budget ratio " + std::to_string(ratio) + " outside (0, 1]");
  for (std::uint32_t frames : frame_counts) {
    if (frames == 0) throw Error(ErrorKind::invalid_argument, "frame counts must be positive");
    for (double ratio : ratios) {
      const double per_frame = ratio * rows * cols + rows;
      points.push_back({frames, ratio, std::uint64_t{frames} * static_cast<std::uint64_t>(std::llround(per_frame))});
    }
  }
  return points;
}

// Stats JSON, keys in fixed order:
//   {"original": 392, "fused": 98, "markers": 28, "ratio": 0.2979,
//    "histogram": {"3": 20, "4": 8}, "threshold": 0.6}
// "threshold" is null for stats not tied to one threshold.
inline nlohmann::ordered_json stats_to_json(const CompressionStats& s) {
  nlohmann::ordered_json doc;
  doc["original"] = s.original;
  doc["fused"] = s.fused;
  doc["markers"] = s.markers;
  doc["ratio"] = s.ratio;
  auto hist = nlohmann::ordered_json::object();
  for (const auto& [groups, rows] : s.histogram) hist[std::to_string(groups)] = rows;
  doc["histogram"] = std::move(hist);
  if (s.threshold) doc["threshold"] = *s.threshold;
  else doc["threshold"] = nullptr;
  return doc;
}

inline std::string format_threshold(float t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", static_cast<double>(t));
  return buf;
}

/// Sweep CSV: header "threshold,ratio,fused,total", one line per record.
inline std::string sweep_to_csv(std::span<const CompressionStats> sweep) {
  std::string out = "threshold,ratio,fused,total\n";
  char buf[128];
  for (const auto& s : sweep) {
    std::snprintf(buf, sizeof buf, "%s,%.6f,%llu,%llu\n", s.threshold ? format_threshold(*s.threshold).c_str() : "",
                  s.ratio, static_cast<unsigned long long>(s.fused), static_cast<unsigned long long>(s.total()));
    out += buf;
  }
  return out;
}

/// Budget CSV: header "frames,ratio,total_tokens".
inline std::string budget_to_csv(std::span<const BudgetPoint> points) {
  std::string out = "frames,ratio,total_tokens\n";
  char buf[128];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%u,%.4f,%llu\n", p.frames, p.ratio, static_cast<unsigned long long>(p.total_tokens));
    out += buf;
  }
  return out;
}

}  // namespace dyntok

#endif  // DYNTOK_ANALYSIS_HPP
