#ifndef DYNTOK_SYNTHETIC_HPP
#define DYNTOK_SYNTHETIC_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "grid.hpp"

namespace dyntok {

/// How one run of columns within a row is filled.
///
/// - constant: every column holds the same vector (exact repeats). The vector
///   is the unit basis vector `basis` when given, else a random unit vector.
/// - jitter: columns are u + e with u a unit vector (chosen like constant)
///   and |e| <= epsilon < 1. Any two columns of the segment then have cosine
///   similarity >= 1 - 2*epsilon^2.
/// - random: independent isotropic Gaussian vectors (pairwise cosine ~ 0 for
///   large d_clip).
/// - orthogonal: column c of the segment is the basis vector e_{c mod d_clip},
///   so neighbours inside the segment have similarity exactly 0. Needs d_clip >= 2.
enum class SegmentMode { constant, jitter, random, orthogonal };

struct Segment {
  std::uint32_t length = 0;
  SegmentMode mode = SegmentMode::constant;
  double epsilon = 0.0;
  std::optional<std::uint32_t> basis;
};

/// Lower bound on pairwise cosine similarity inside a jitter segment.
inline double jitter_similarity_bound(double epsilon) { return 1.0 - 2.0 * epsilon * epsilon; }

struct SceneSpec {
  GridShape shape{1, 1, 1};
  std::uint32_t d_clip = 1;
  /// 0 means the embedding tensor is the vision tensor.
  std::uint32_t d_emb = 0;
  /// Either one segment list applied to every row, or exactly one list per row.
  std::vector<std::vector<Segment>> rows;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// std::mt19937_64 output is fully specified by the standard, unlike the
// std::*_distribution adaptors, so the transforms below keep generated grids
// identical across standard libraries.
class SceneRng {
 public:
  explicit SceneRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (spare_) {
      double v = *spare_;
      spare_.reset();
      return v;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::vector<double> unit_vector(std::uint32_t d) {
    std::vector<double> v(d);
    double norm = 0.0;
    while (norm == 0.0) {
      norm = 0.0;
      for (auto& x : v) {
        x = normal();
        norm += x * x;
      }
    }
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
    return v;
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

inline void validate_scene(const SceneSpec& spec) {
  const auto& s = spec.shape;
  if (s.frames < 1 || s.rows < 1 || s.cols < 1 || spec.d_clip < 1)
    throw Error(ErrorKind::invalid_argument, "scene dimensions must be >= 1");
  if (spec.rows.size() != 1 && spec.rows.size() != s.rows)
    throw Error(ErrorKind::invalid_argument,
                "scene lists " + std::to_string(spec.rows.size()) +
                    " row specs, expected 1 or " + std::to_string(s.rows));
  for (std::size_t r = 0; r < spec.rows.size(); ++r) {
    std::uint64_t total = 0;
    for (const auto& seg : spec.rows[r]) {
      if (seg.length == 0)
        throw Error(ErrorKind::invalid_argument, "row spec " + std::to_string(r) + " has an empty segment");
      if (seg.mode == SegmentMode::jitter && !(seg.epsilon >= 0.0 && seg.epsilon < 1.0))
        throw Error(ErrorKind::invalid_argument, "jitter epsilon must lie in [0, 1)");
      if (seg.mode == SegmentMode::orthogonal && spec.d_clip < 2)
        throw Error(ErrorKind::invalid_argument, "orthogonal segments need d_clip >= 2");
      if (seg.basis && *seg.basis >= spec.d_clip)
        throw Error(ErrorKind::invalid_argument, "segment basis index exceeds d_clip");
      total += seg.length;
    }
    if (total != s.cols)
      throw Error(ErrorKind::invalid_argument, "row spec " + std::to_string(r) + " segment lengths sum to " +
                                                   std::to_string(total) + ", expected w = " +
                                                   std::to_string(s.cols));
  }
}

inline std::vector<double> direction(const Segment& seg, std::uint32_t d, SceneRng& rng) {
  if (seg.basis) {
    std::vector<double> e(d, 0.0);
    e[*seg.basis] = 1.0;
    return e;
  }
  return rng.unit_vector(d);
}

inline void fill_row(const std::vector<Segment>& segments, std::uint32_t d, SceneRng& rng, float* out) {
  std::uint32_t col = 0;
  for (const auto& seg : segments) {
    switch (seg.mode) {
      case SegmentMode::constant: {
        const auto u = direction(seg, d, rng);
        for (std::uint32_t c = 0; c < seg.length; ++c)
          for (std::uint32_t k = 0; k < d; ++k) out[(col + c) * d + k] = static_cast<float>(u[k]);
        break;
      }
      case SegmentMode::jitter: {
        const auto u = direction(seg, d, rng);
        for (std::uint32_t c = 0; c < seg.length; ++c) {
          const auto e = rng.unit_vector(d);
          // Scaled slightly below epsilon so float rounding cannot push |e| past it.
          const double mag = seg.epsilon * rng.uniform() * (1.0 - 1e-6);
          for (std::uint32_t k = 0; k < d; ++k)
            out[(col + c) * d + k] = static_cast<float>(u[k] + mag * e[k]);
        }
        break;
      }
      case SegmentMode::random: {
        for (std::uint32_t c = 0; c < seg.length; ++c)
          for (std::uint32_t k = 0; k < d; ++k) out[(col + c) * d + k] = static_cast<float>(rng.normal());
        break;
      }
      case SegmentMode::orthogonal: {
        for (std::uint32_t c = 0; c < seg.length; ++c)
          for (std::uint32_t k = 0; k < d; ++k) out[(col + c) * d + k] = (k == c % d) ? 1.0f : 0.0f;
        break;
      }
    }
    col += seg.length;
  }
}

}  // namespace detail

/// Deterministic synthetic clip. Each (frame, row) draws from its own stream
/// derived from the seed; the embedding tensor, when separate, is a fixed
/// random linear projection of the vision tensor (a stand-in for the
/// connector), so constant vision runs stay constant in embedding space.
inline FrameGridPair generate_synthetic(const SceneSpec& spec, std::uint64_t seed) {
  detail::validate_scene(spec);
  const auto& s = spec.shape;
  const std::uint32_t d = spec.d_clip;
  std::vector<float> vision(s.patches() * d);
  for (std::uint32_t f = 0; f < s.frames; ++f) {
    for (std::uint32_t r = 0; r < s.rows; ++r) {
      const std::uint64_t stream = detail::splitmix64(seed ^ detail::splitmix64((std::uint64_t{f} << 32) | r));
      detail::SceneRng rng(stream);
      const auto& segments = spec.rows.size() == 1 ? spec.rows[0] : spec.rows[r];
      detail::fill_row(segments, d, rng, vision.data() + (std::size_t{f} * s.rows + r) * s.cols * d);
    }
  }
  if (spec.d_emb == 0) return FrameGridPair::shared(s, d, std::move(vision));

  const std::uint32_t e = spec.d_emb;
  detail::SceneRng proj_rng(detail::splitmix64(seed ^ 0x70726f6a656374ull));
  std::vector<double> proj(std::size_t{e} * d);
  const double gain = 1.0 / std::sqrt(static_cast<double>(d));
  for (auto& p : proj) p = proj_rng.normal() * gain;

  std::vector<float> embedding(s.patches() * e);
  for (std::size_t p = 0; p < s.patches(); ++p) {
    const float* x = vision.data() + p * d;
    for (std::uint32_t i = 0; i < e; ++i) {
      double acc = 0.0;
      for (std::uint32_t k = 0; k < d; ++k) acc += proj[std::size_t{i} * d + k] * x[k];
      embedding[p * e + i] = static_cast<float>(acc);
    }
  }
  return FrameGridPair(s, d, std::move(vision), e, std::move(embedding));
}

// Scene-spec JSON:
//   {"frames": 1, "rows": 14, "cols": 14, "d_clip": 32, "d_emb": 16,
//    "segments": [[{"length": 6, "mode": "constant", "basis": 0},
//                  {"length": 8, "mode": "jitter", "epsilon": 0.2}]]}
// "segments" holds one list for all rows or one list per row. "d_emb" may be
// omitted (or 0) to share the vision tensor.
inline SceneSpec scene_from_json(const nlohmann::json& doc) {
  try {
    SceneSpec spec;
    spec.shape.frames = doc.at("frames").get<std::uint32_t>();
    spec.shape.rows = doc.at("rows").get<std::uint32_t>();
    spec.shape.cols = doc.at("cols").get<std::uint32_t>();
    spec.d_clip = doc.at("d_clip").get<std::uint32_t>();
    spec.d_emb = doc.value("d_emb", 0u);
    for (const auto& row : doc.at("segments")) {
      std::vector<Segment> segments;
      for (const auto& item : row) {
        Segment seg;
        seg.length = item.at("length").get<std::uint32_t>();
        const auto mode = item.at("mode").get<std::string>();
        if (mode == "constant") seg.mode = SegmentMode::constant;
        else if (mode == "jitter") seg.mode = SegmentMode::jitter;
        else if (mode == "random") seg.mode = SegmentMode::random;
        else if (mode == "orthogonal") seg.mode = SegmentMode::orthogonal;
        else throw Error(ErrorKind::invalid_argument, "unknown segment mode \"" + mode + "\"");
        seg.epsilon = item.value("epsilon", 0.0);
        if (item.contains("basis")) seg.basis = item.at("basis").get<std::uint32_t>();
        segments.push_back(seg);
      }
      spec.rows.push_back(std::move(segments));
    }
    detail::validate_scene(spec);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::invalid_argument, std::string("scene spec: ") + e.what());
  }
}

}  // namespace dyntok

#endif  // DYNTOK_SYNTHETIC_HPP
