#ifndef DYNTOK_GROUPING_HPP
#define DYNTOK_GROUPING_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "grid.hpp"
#include "similarity.hpp"

namespace dyntok {

/// Merge threshold S_th. A patch joins its left neighbour's group only when
/// their similarity is strictly greater than this value.
class Threshold {
 public:
  explicit Threshold(float value) : value_(value) {
    if (!(value > -1.0f && value <= 1.0f))
      throw Error(ErrorKind::invalid_argument,
                  "threshold " + std::to_string(value) + " outside (-1, 1]");
  }

  float value() const { return value_; }

  friend bool operator==(const Threshold&, const Threshold&) = default;

 private:
  float value_;
};

/// Threshold values sampled during training; also the default sweep ladder.
inline constexpr std::array<float, 5> kTrainingThresholds = {0.4f, 0.45f, 0.5f, 0.55f, 0.6f};
inline constexpr float kDefaultThreshold = 0.6f;

/// Per-row partition of [0, w) into contiguous groups, stored as group-start
/// columns in CSR layout: row (f, r) owns starts[offsets[i]..offsets[i+1]) with
/// i = f*h + r. Every row's list is strictly increasing and begins with 0.
class GroupMap {
 public:
  GroupMap(GridShape shape, Threshold threshold, std::vector<std::uint32_t> offsets,
           std::vector<std::uint32_t> starts)
      : shape_(shape), threshold_(threshold), offsets_(std::move(offsets)), starts_(std::move(starts)) {
    validate();
  }

  const GridShape& shape() const { return shape_; }
  Threshold threshold() const { return threshold_; }

  std::span<const std::uint32_t> starts(std::uint32_t frame, std::uint32_t row) const {
    const std::size_t i = std::size_t{frame} * shape_.rows + row;
    return std::span<const std::uint32_t>(starts_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
  }

  std::uint32_t group_count(std::uint32_t frame, std::uint32_t row) const {
    return static_cast<std::uint32_t>(starts(frame, row).size());
  }

  /// Total number of groups over all rows (the fused-token count l).
  std::size_t total_groups() const { return starts_.size(); }

  /// True when column `col` begins a group in row (frame, row).
  bool is_start(std::uint32_t frame, std::uint32_t row, std::uint32_t col) const {
    for (std::uint32_t s : starts(frame, row))
      if (s == col) return true;
    return false;
  }

  friend bool operator==(const GroupMap&, const GroupMap&) = default;

 private:
  void validate() const {
    const std::size_t rows = shape_.row_count();
    if (offsets_.size() != rows + 1 || offsets_.front() != 0 || offsets_.back() != starts_.size())
      throw Error(ErrorKind::shape_mismatch, "group offsets do not cover " + std::to_string(rows) + " rows");
    for (std::size_t i = 0; i < rows; ++i) {
      const std::uint32_t b = offsets_[i], e = offsets_[i + 1];
      if (e <= b || starts_[b] != 0)
        throw Error(ErrorKind::invalid_argument, "row " + std::to_string(i) + " must start a group at column 0");
      for (std::uint32_t j = b + 1; j < e; ++j) {
        if (starts_[j] <= starts_[j - 1] || starts_[j] >= shape_.cols)
          throw Error(ErrorKind::invalid_argument,
                      "row " + std::to_string(i) + " group starts not strictly increasing within [0, w)");
      }
    }
  }

  GridShape shape_;
  Threshold threshold_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> starts_;
};

/// Dynamic merging: column 0 opens a group; column k >= 1 joins the group of
/// k-1 when s(k-1, k) > threshold and opens a new group otherwise. Ties split.
inline GroupMap build_groups(const SimilarityGrid& sims, Threshold threshold) {
  const GridShape& shape = sims.shape;
  const float th = threshold.value();
  std::vector<std::uint32_t> offsets;
  std::vector<std::uint32_t> starts;
  offsets.reserve(shape.row_count() + 1);
  offsets.push_back(0);
  for (std::uint32_t f = 0; f < shape.frames; ++f) {
    for (std::uint32_t r = 0; r < shape.rows; ++r) {
      starts.push_back(0);
      const auto row = sims.row(f, r);
      for (std::uint32_t k = 1; k < shape.cols; ++k)
        if (!(row[k - 1] > th)) starts.push_back(k);
      offsets.push_back(static_cast<std::uint32_t>(starts.size()));
    }
  }
  return GroupMap(shape, threshold, std::move(offsets), std::move(starts));
}

/// Every column its own group; fusion under it is the uncompressed baseline.
/// Threshold 1 is the value whose merge rule reproduces it on any input.
inline GroupMap identity_groups(const GridShape& shape, Threshold threshold = Threshold(1.0f)) {
  std::vector<std::uint32_t> offsets;
  std::vector<std::uint32_t> starts;
  offsets.reserve(shape.row_count() + 1);
  offsets.push_back(0);
  for (std::size_t i = 0; i < shape.row_count(); ++i) {
    for (std::uint32_t k = 0; k < shape.cols; ++k) starts.push_back(k);
    offsets.push_back(static_cast<std::uint32_t>(starts.size()));
  }
  return GroupMap(shape, threshold, std::move(offsets), std::move(starts));
}

/// Group count h' per row, laid out (t, h) row-major.
inline std::vector<std::uint32_t> group_counts(const GroupMap& map) {
  std::vector<std::uint32_t> counts;
  counts.reserve(map.shape().row_count());
  for (std::uint32_t f = 0; f < map.shape().frames; ++f)
    for (std::uint32_t r = 0; r < map.shape().rows; ++r) counts.push_back(map.group_count(f, r));
  return counts;
}

// GroupMap JSON: {"threshold": 0.6, "frames": t, "rows": h, "cols": w,
//                 "starts": [[[0, 2], ...one array per row], ...one array per frame]}
inline nlohmann::ordered_json groups_to_json(const GroupMap& map) {
  nlohmann::ordered_json doc;
  doc["threshold"] = map.threshold().value();
  doc["frames"] = map.shape().frames;
  doc["rows"] = map.shape().rows;
  doc["cols"] = map.shape().cols;
  auto frames = nlohmann::ordered_json::array();
  for (std::uint32_t f = 0; f < map.shape().frames; ++f) {
    auto rows = nlohmann::ordered_json::array();
    for (std::uint32_t r = 0; r < map.shape().rows; ++r) {
      const auto s = map.starts(f, r);
      rows.push_back(std::vector<std::uint32_t>(s.begin(), s.end()));
    }
    frames.push_back(std::move(rows));
  }
  doc["starts"] = std::move(frames);
  return doc;
}

inline GroupMap groups_from_json(const nlohmann::json& doc) {
  try {
    GridShape shape{doc.at("frames").get<std::uint32_t>(), doc.at("rows").get<std::uint32_t>(),
                    doc.at("cols").get<std::uint32_t>()};
    const auto& frames = doc.at("starts");
    if (frames.size() != shape.frames)
      throw Error(ErrorKind::shape_mismatch, "group map lists " + std::to_string(frames.size()) + " frames");
    std::vector<std::uint32_t> offsets{0};
    std::vector<std::uint32_t> starts;
    for (const auto& rows : frames) {
      if (rows.size() != shape.rows)
        throw Error(ErrorKind::shape_mismatch, "group map frame lists " + std::to_string(rows.size()) + " rows");
      for (const auto& row : rows) {
        for (const auto& s : row) starts.push_back(s.get<std::uint32_t>());
        offsets.push_back(static_cast<std::uint32_t>(starts.size()));
      }
    }
    return GroupMap(shape, Threshold(doc.at("threshold").get<float>()), std::move(offsets), std::move(starts));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::invalid_argument, std::string("group map: ") + e.what());
  }
}

}  // namespace dyntok

#endif  // DYNTOK_GROUPING_HPP
