#include "phasetrap/scaling.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "phasetrap/errors.hpp"

namespace phasetrap {

namespace {

struct LinearSolve {
  double g_inf;
  double amplitude;
  double sse;
};

// For fixed exponent the model is linear in (g_inf, amplitude); solve the
// 2-column least squares exactly.
LinearSolve solve_at(std::span<const std::pair<double, double>> points,
                     FitModel model, double exponent) {
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = points[i].first;
    design(i, 0) = 1.0;
    design(i, 1) = model == FitModel::Exponential ? std::exp(-exponent * p)
                                                  : std::pow(p, -exponent);
    target[i] = points[i].second;
  }
  Eigen::Vector2d coeffs = design.colPivHouseholderQr().solve(target);
  const double sse = (design * coeffs - target).squaredNorm();
  return {coeffs[0], coeffs[1], sse};
}

ExtrapolationFit fit_with_model(std::span<const std::pair<double, double>> points,
                                FitModel model) {
  require(points.size() >= 3, "extrapolation fit requires at least 3 points");
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      require(points[i].first != points[j].first,
              "extrapolation fit requires distinct abscissae");
  if (model != FitModel::Exponential)
    for (const auto& [p, _] : points)
      require(p > 0.0, "power-law fit requires positive abscissae");

  const double nu_min = 0.01, nu_max = 5.0, step = 0.001;
  double best_nu = nu_min;
  double best_sse = std::numeric_limits<double>::infinity();
  for (double nu = nu_min; nu <= nu_max + 1e-12; nu += step) {
    const double sse = solve_at(points, model, nu).sse;
    if (sse < best_sse) {
      best_sse = sse;
      best_nu = nu;
    }
  }

  // Golden-section refinement in the winning grid cell.
  double lo = std::max(nu_min, best_nu - step);
  double hi = std::min(nu_max, best_nu + step);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
  double fa = solve_at(points, model, a).sse;
  double fb = solve_at(points, model, b).sse;
  for (int iter = 0; iter < 80 && hi - lo > 1e-12; ++iter) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - phi * (hi - lo);
      fa = solve_at(points, model, a).sse;
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + phi * (hi - lo);
      fb = solve_at(points, model, b).sse;
    }
  }
  const double nu = 0.5 * (lo + hi);
  const LinearSolve solved = solve_at(points, model, nu);

  ExtrapolationFit fit;
  fit.model = model;
  fit.g_inf = solved.g_inf;
  fit.amplitude = solved.amplitude;
  fit.exponent = nu;
  fit.mse = solved.sse / static_cast<double>(points.size());
  fit.inputs.assign(points.begin(), points.end());
  return fit;
}

}  // namespace

ExtrapolationFit fit_exponential(
    std::span<const std::pair<double, double>> points) {
  return fit_with_model(points, FitModel::Exponential);
}

ExtrapolationFit fit_power(std::span<const std::pair<double, double>> points) {
  return fit_with_model(points, FitModel::Power);
}

ExtrapolationFit fit_size(std::span<const std::pair<double, double>> points) {
  ExtrapolationFit fit = fit_with_model(points, FitModel::Power);
  fit.model = FitModel::Size;
  return fit;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  require(xs.size() == ys.size(), "pearson requires equal lengths");
  require(xs.size() >= 2, "pearson requires at least 2 samples");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0)
    throw numeric_error("pearson undefined for zero-variance input");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace phasetrap
