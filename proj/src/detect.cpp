#include "phasetrap/detect.hpp"

#include <algorithm>
#include <cmath>

#include "phasetrap/errors.hpp"
#include "phasetrap/parallel.hpp"

namespace phasetrap {

std::string regressor_tag(const RegressorChoice& choice) {
  if (const auto* l = std::get_if<LassoChoice>(&choice)) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "lasso(lambda=%.10g)", l->lambda);
    return buf;
  }
  const auto& t = std::get<TransformerChoice>(choice).cfg;
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "transformer(heads=%d,fc=%d,epochs=%d,lr=%g,seed=%llu)",
                t.heads, t.fc_dim, t.epochs, t.lr,
                static_cast<unsigned long long>(t.seed));
  return buf;
}

namespace {

WindowDataset window_at(const FeatureTable& table, int center, int w,
                        const std::vector<int>* active_columns) {
  const int cols = active_columns ? static_cast<int>(active_columns->size())
                                  : table.set.size();
  WindowDataset data;
  data.w = w;
  data.center_g = table.grid.point(center);
  data.features.resize(2 * w, cols);
  data.labels.resize(2 * w);
  for (int i = 0; i < 2 * w; ++i) {
    // Rows below the center then rows above; the center row is excluded.
    const int row = i < w ? center - w + i : center + 1 + (i - w);
    if (active_columns) {
      for (int j = 0; j < cols; ++j)
        data.features(i, j) = table.values(row, (*active_columns)[j]);
    } else {
      data.features.row(i) = table.values.row(row);
    }
    data.labels[i] = i < w ? -1.0 : 1.0;
  }
  return data;
}

std::vector<double> min_max_normalize(const std::vector<double>& raw) {
  std::vector<double> out(raw.size(), 0.0);
  if (raw.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
  const double lo = *lo_it, hi = *hi_it;
  if (hi - lo <= 0.0) return out;  // flat landscape normalizes to zero
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - lo) / (hi - lo);
  return out;
}

}  // namespace

LossLandscape scan(const FeatureTable& table, const RegressorChoice& regressor,
                   int w, int threads, const std::vector<int>* active_columns) {
  require(w >= 1, "scan requires w >= 1");
  const int rows = table.rows();
  require(rows >= 2 * w + 1, "detection grid too small for the window size");

  LossLandscape landscape;
  landscape.w = w;
  landscape.regressor_tag = regressor_tag(regressor);
  const int first = w, last = rows - 1 - w;
  const int count = last - first + 1;
  landscape.centers.resize(count);
  landscape.raw.resize(count);

  parallel_for(
      count,
      [&](int idx) {
        const int center = first + idx;
        WindowDataset data = window_at(table, center, w, active_columns);
        double loss;
        if (const auto* l = std::get_if<LassoChoice>(&regressor)) {
          loss = lasso_fit(data, l->lambda).final_cost;
        } else {
          const auto& cfg = std::get<TransformerChoice>(regressor).cfg;
          loss = st_train(data, cfg).second;
        }
        landscape.centers[idx] = data.center_g;
        landscape.raw[idx] = loss;
      },
      threads);

  landscape.normalized = min_max_normalize(landscape.raw);
  landscape.smoothed = landscape.normalized;
  return landscape;
}

LossLandscape smooth(LossLandscape landscape, double sigma_points) {
  require(sigma_points >= 0.0, "smoothing sigma must be >= 0");
  if (sigma_points == 0.0 || landscape.normalized.empty()) {
    landscape.smoothed = landscape.normalized;
    return landscape;
  }
  const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma_points)));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    kernel[t + radius] =
        std::exp(-0.5 * (t / sigma_points) * (t / sigma_points));
    total += kernel[t + radius];
  }
  for (double& k : kernel) k /= total;

  const int size = static_cast<int>(landscape.normalized.size());
  auto reflect = [size](int i) {
    // scipy-style 'reflect': (c b a | a b c | c b a)
    while (i < 0 || i >= size) {
      if (i < 0) i = -i - 1;
      if (i >= size) i = 2 * size - 1 - i;
    }
    return i;
  };
  std::vector<double> out(size, 0.0);
  for (int i = 0; i < size; ++i) {
    double acc = 0.0;
    for (int t = -radius; t <= radius; ++t)
      acc += kernel[t + radius] * landscape.normalized[reflect(i + t)];
    out[i] = acc;
  }
  landscape.smoothed = std::move(out);
  return landscape;
}

std::vector<Valley> find_valleys(const LossLandscape& landscape,
                                 double min_prominence) {
  const auto& y = landscape.active();
  const int size = static_cast<int>(y.size());
  std::vector<Valley> valleys;
  if (size < 3) return valleys;

  for (int i = 1; i + 1 < size; ++i) {
    // Flat runs count once, anchored at the run's argmin-first index.
    if (!(y[i] < y[i - 1])) continue;
    int j = i;
    while (j + 1 < size && y[j + 1] == y[i]) ++j;
    if (j + 1 >= size || !(y[i] < y[j + 1])) continue;

    const double v = y[i];
    double left_peak = v;
    for (int t = i - 1; t >= 0; --t) {
      if (y[t] < v) break;
      left_peak = std::max(left_peak, y[t]);
    }
    double right_peak = v;
    for (int t = j + 1; t < size; ++t) {
      if (y[t] < v) break;
      right_peak = std::max(right_peak, y[t]);
    }
    const double prominence = std::min(left_peak, right_peak) - v;
    if (prominence < min_prominence) continue;

    Valley valley;
    valley.index = i;
    valley.center = landscape.centers[i];
    valley.depth = v;
    valley.prominence = prominence;
    valley.boundary_suspect = (i < landscape.w) || (size - 1 - i < landscape.w);

    const double cut = v + 0.5 * prominence;
    int lo = i, hi = j;
    while (lo > 0 && y[lo - 1] <= cut) --lo;
    while (hi + 1 < size && y[hi + 1] <= cut) ++hi;
    valley.width = landscape.centers[hi] - landscape.centers[lo];
    valleys.push_back(valley);
  }
  return valleys;
}

std::optional<Valley> deepest_valley(std::span<const Valley> valleys,
                                     bool exclude_boundary_suspect) {
  std::optional<Valley> best;
  for (const auto& v : valleys) {
    if (exclude_boundary_suspect && v.boundary_suspect) continue;
    if (!best || v.depth < best->depth) best = v;
  }
  return best;
}

std::vector<double> default_lambda_grid() {
  // Log-spaced, descending, spanning the useful range for features in [-1,1].
  std::vector<double> grid;
  const double hi = 0.5, lo = 1e-4;
  const int count = 40;
  for (int i = 0; i < count; ++i)
    grid.push_back(hi * std::pow(lo / hi, static_cast<double>(i) / (count - 1)));
  return grid;
}

namespace {

struct LambdaScan {
  double lambda;
  LossLandscape landscape;
  Valley valley;
  int dominant;
};

// Evaluates one lambda against the selection rule; nullopt when it fails.
std::optional<LambdaScan> try_lambda(const FeatureTable& table, int w,
                                     double lambda, int threads,
                                     const std::vector<int>* active_columns) {
  LossLandscape landscape =
      scan(table, LassoChoice{lambda}, w, threads, active_columns);
  auto valleys = find_valleys(landscape, 0.2);
  auto best = deepest_valley(valleys);
  if (!best) return std::nullopt;

  const int center_index =
      best->index + w;  // landscape index -> grid row
  WindowDataset data = window_at(table, center_index, w, active_columns);
  LassoModel model = lasso_fit(data, lambda);
  auto dominant = lasso_dominant_feature(model);
  if (!dominant) return std::nullopt;
  // Uniqueness: no second coefficient ties the maximum.
  const double top = std::abs(model.coeffs[*dominant]);
  int ties = 0;
  for (Eigen::Index j = 0; j < model.coeffs.size(); ++j)
    if (std::abs(model.coeffs[j]) == top) ++ties;
  if (ties != 1) return std::nullopt;

  LambdaScan out;
  out.lambda = lambda;
  out.landscape = std::move(landscape);
  out.valley = *best;
  out.dominant = active_columns ? (*active_columns)[*dominant] : *dominant;
  return out;
}

}  // namespace

double select_lambda(const FeatureTable& table, int w,
                     std::span<const double> lambda_grid, int threads,
                     const std::vector<int>* active_columns) {
  require(!lambda_grid.empty(), "lambda grid must be non-empty");
  for (std::size_t i = 0; i + 1 < lambda_grid.size(); ++i)
    require(lambda_grid[i] > lambda_grid[i + 1],
            "lambda grid must be strictly descending");
  for (double lambda : lambda_grid)
    if (try_lambda(table, w, lambda, threads, active_columns)) return lambda;
  throw numeric_error(
      "no lambda in the grid produced a prominent valley with a unique "
      "dominant feature; widen the grid");
}

std::vector<MinedParameter> mine_order_parameters(
    const FeatureTable& table, std::span<const double> lambda_grid, int w,
    int max_rounds, int threads) {
  std::vector<int> active(table.set.size());
  for (int j = 0; j < table.set.size(); ++j) active[j] = j;

  std::vector<MinedParameter> mined;
  for (int round = 0; round < max_rounds && !active.empty(); ++round) {
    std::optional<LambdaScan> hit;
    for (double lambda : lambda_grid) {
      hit = try_lambda(table, w, lambda, threads, &active);
      if (hit) break;
    }
    if (!hit) break;  // no stable valley remains

    MinedParameter parameter;
    parameter.round = round + 1;
    parameter.lambda = hit->lambda;
    parameter.g_c = hit->valley.center;
    parameter.dominant_index = hit->dominant;
    parameter.op = symmetrize(hit->dominant, table.set);
    mined.push_back(parameter);

    // Remove the dominant feature's whole symmetry orbit.
    const auto& orbits = table.set.symmetry_orbits;
    const std::vector<int>* orbit = nullptr;
    for (const auto& o : orbits)
      if (std::find(o.begin(), o.end(), hit->dominant) != o.end()) {
        orbit = &o;
        break;
      }
    std::vector<int> next;
    for (int j : active)
      if (!orbit || std::find(orbit->begin(), orbit->end(), j) == orbit->end())
        next.push_back(j);
    active = std::move(next);
  }
  return mined;
}

std::vector<double> derivative_estimate(std::span<const double> xs,
                                        std::span<const double> ys) {
  require(xs.size() == ys.size(), "derivative series length mismatch");
  require(xs.size() >= 3, "derivative requires at least 3 points");
  const std::size_t n = xs.size();
  std::vector<double> out(n);
  out[0] = (ys[1] - ys[0]) / (xs[1] - xs[0]);
  out[n - 1] = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i)
    out[i] = (ys[i + 1] - ys[i - 1]) / (xs[i + 1] - xs[i - 1]);
  return out;
}

double derivative_peak(std::span<const double> xs, std::span<const double> ys) {
  const auto deriv = derivative_estimate(xs, ys);
  std::size_t best = 0;
  for (std::size_t i = 1; i < deriv.size(); ++i)
    if (std::abs(deriv[i]) > std::abs(deriv[best])) best = i;
  return xs[best];
}

LossLandscape compose_essh(const LossLandscape& trivial,
                           const LossLandscape& topological, double split_at) {
  require(trivial.w == topological.w, "composite requires equal window sizes");
  require(trivial.centers == topological.centers,
          "composite requires matching scan centers");
  LossLandscape out;
  out.w = trivial.w;
  out.regressor_tag = trivial.regressor_tag + " | " + topological.regressor_tag;
  out.centers = trivial.centers;
  out.raw.resize(out.centers.size());
  for (std::size_t i = 0; i < out.centers.size(); ++i)
    out.raw[i] = out.centers[i] <= split_at ? trivial.raw[i]
                                            : topological.raw[i];
  out.normalized = min_max_normalize(out.raw);
  out.smoothed = out.normalized;
  return out;
}

}  // namespace phasetrap
