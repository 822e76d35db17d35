#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "phasetrap/features.hpp"
#include "phasetrap/regressors.hpp"

// Sliding-window boundary detection: label the w samples below a candidate
// boundary -1 and the w above +1, fit a regressor, and record its training
// loss per candidate. Valleys of the normalized loss mark phase transitions.

namespace phasetrap {

struct LassoChoice {
  double lambda = 0.0;
};
struct TransformerChoice {
  TransformerConfig cfg;
};
using RegressorChoice = std::variant<LassoChoice, TransformerChoice>;

std::string regressor_tag(const RegressorChoice& choice);

struct LossLandscape {
  std::vector<double> centers;
  std::vector<double> raw;
  std::vector<double> normalized;  // min-max over the scan, in [0, 1]
  std::vector<double> smoothed;    // equals normalized when no filter ran
  std::string regressor_tag;
  int w = 0;

  const std::vector<double>& active() const { return smoothed; }
};

struct Valley {
  int index = 0;  // into centers
  double center = 0.0;
  double depth = 0.0;       // normalized loss at the minimum
  double width = 0.0;       // g-extent below depth + prominence/2
  double prominence = 0.0;
  bool boundary_suspect = false;  // within w points of a scan edge
};

// Landscape over all admissible centers. `active_columns` restricts the
// features (used by the mining loop); null means all.
LossLandscape scan(const FeatureTable& table, const RegressorChoice& regressor,
                   int w, int threads = 0,
                   const std::vector<int>* active_columns = nullptr);

// Discrete Gaussian smoothing with reflected boundary; sigma in grid points,
// sigma = 0 is the identity.
LossLandscape smooth(LossLandscape landscape, double sigma_points);

std::vector<Valley> find_valleys(const LossLandscape& landscape,
                                 double min_prominence);

std::optional<Valley> deepest_valley(std::span<const Valley> valleys,
                                     bool exclude_boundary_suspect = true);

// Largest lambda in the (descending, log-spaced) grid whose landscape has a
// valley of prominence >= 0.2 and a unique dominant feature at the deepest
// valley's minimum. Throws numeric_error when no lambda qualifies.
double select_lambda(const FeatureTable& table, int w,
                     std::span<const double> lambda_grid, int threads = 0,
                     const std::vector<int>* active_columns = nullptr);
std::vector<double> default_lambda_grid();

struct MinedParameter {
  int round = 0;
  double lambda = 0.0;
  double g_c = 0.0;
  int dominant_index = 0;  // into the table's observable set
  SymmetrizedObservable op;
};

// LASSO round loop: scan, take the deepest valley's dominant feature,
// symmetrize it over its orbit, drop the orbit's columns and repeat until no
// valley of prominence >= 0.2 remains (or max_rounds).
std::vector<MinedParameter> mine_order_parameters(
    const FeatureTable& table, std::span<const double> lambda_grid, int w,
    int max_rounds, int threads = 0);

// Central differences on a uniform grid (one-sided at the ends).
std::vector<double> derivative_estimate(std::span<const double> xs,
                                        std::span<const double> ys);
// Location of max |dy/dx|, the derivative-based critical estimate.
double derivative_peak(std::span<const double> xs, std::span<const double> ys);

// Composite landscape: trivial-initialization losses for centers <= 0.5,
// topological ones above, concatenated then jointly normalized.
LossLandscape compose_essh(const LossLandscape& trivial,
                           const LossLandscape& topological,
                           double split_at = 0.5);

}  // namespace phasetrap
