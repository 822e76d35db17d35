#pragma once

#include <span>
#include <utility>
#include <vector>

// Finite-depth / finite-size extrapolation fits and the Pearson correlation
// diagnostic.

namespace phasetrap {

enum class FitModel { Exponential, Power, Size };

struct ExtrapolationFit {
  FitModel model = FitModel::Exponential;
  double g_inf = 0.0;     // extrapolated critical point
  double amplitude = 0.0; // c (or b for the size model)
  double exponent = 0.0;  // nu (or mu), > 0
  double mse = 0.0;       // mean-square fitting error
  std::vector<std::pair<double, double>> inputs;
};

// g(p) = g_inf + c * exp(-nu p). Dense grid over nu in [0.01, 5] with a
// closed-form linear solve per nu, then local refinement.
ExtrapolationFit fit_exponential(std::span<const std::pair<double, double>> points);

// g(p) = g_inf + c * p^-nu.
ExtrapolationFit fit_power(std::span<const std::pair<double, double>> points);

// g(n) = g_inf + b * n^-mu (the finite-size variant of the power fit).
ExtrapolationFit fit_size(std::span<const std::pair<double, double>> points);

double pearson(std::span<const double> xs, std::span<const double> ys);

}  // namespace phasetrap
