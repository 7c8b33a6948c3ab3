#ifndef DYNTOK_DYNTOK_HPP
#define DYNTOK_DYNTOK_HPP

#include "analysis.hpp"
#include "baselines.hpp"
#include "error.hpp"
#include "fusion.hpp"
#include "grid.hpp"
#include "grid_io.hpp"
#include "grouping.hpp"
#include "parallel.hpp"
#include "pipeline.hpp"
#include "render.hpp"
#include "similarity.hpp"
#include "synthetic.hpp"

namespace dyntok {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace dyntok

#endif  // DYNTOK_DYNTOK_HPP
