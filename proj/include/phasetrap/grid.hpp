#pragma once

#include <cmath>
#include <vector>

#include "phasetrap/errors.hpp"

namespace phasetrap {

// Uniform grid {g_min, g_min + step, ..., g_max}, endpoint inclusive.
// Used both as optimization grid and (with finer step) as detection grid.
struct Grid {
  double g_min = 0.0;
  double g_max = 0.0;
  double step = 0.0;

  int size() const {
    require(step > 0.0, "grid step must be positive");
    require(g_min < g_max, "grid requires g_min < g_max");
    double raw = (g_max - g_min) / step;
    long long count = std::llround(raw);
    require(std::abs(raw - static_cast<double>(count)) < 1e-9,
            "grid endpoints must be an integer number of steps apart");
    return static_cast<int>(count) + 1;
  }

  double point(int i) const { return g_min + step * i; }

  std::vector<double> points() const {
    int m = size();
    std::vector<double> out(m);
    for (int i = 0; i < m; ++i) out[i] = point(i);
    // Guard against accumulated rounding on the last point.
    out.back() = std::abs(out.back() - g_max) < 1e-12 ? g_max : out.back();
    return out;
  }

  friend bool operator==(const Grid&, const Grid&) = default;
};

}  // namespace phasetrap
