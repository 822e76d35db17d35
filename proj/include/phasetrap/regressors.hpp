#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include <Eigen/Dense>

// The two per-window learners: coordinate-descent LASSO and a Set
// Transformer regressor with hand-derived backpropagation and Adam.

namespace phasetrap {

struct WindowDataset {
  Eigen::MatrixXd features;  // 2w x l, rows ordered by g ascending
  Eigen::VectorXd labels;    // first w entries -1, last w entries +1
  double center_g = 0.0;
  int w = 0;

  void validate() const;
};

// --- LASSO -------------------------------------------------------------------

struct LassoModel {
  double intercept = 0.0;
  Eigen::VectorXd coeffs;
  double lambda = 0.0;
  double final_cost = 0.0;
};

double soft_threshold(double rho, double lambda);

// Cyclic coordinate descent on
//   C = (1/4w) sum_i (l_i - k0 - sum_j k_j f_ij)^2 + lambda sum_j |k_j|
// with the intercept refit each sweep; stops when the largest coefficient
// change in a sweep drops below 1e-8 (or after 10*l sweeps).
LassoModel lasso_fit(const WindowDataset& data, double lambda);

double lasso_training_loss(const LassoModel& model, const WindowDataset& data);

// Index of max |k_j|; empty when every coefficient is zero. Ties break to
// the smallest index.
std::optional<int> lasso_dominant_feature(const LassoModel& model);

// --- Set Transformer -----------------------------------------------------------

struct TransformerConfig {
  int heads = 4;
  int fc_dim = 128;
  double dropout = 0.1;
  double lr = 1e-3;
  int epochs = 200;
  std::uint64_t seed = 0;
  // Stop once the best MSE improved by less than this over the trailing
  // window of epochs.
  double early_stop_improvement = 1e-6;
  int early_stop_window = 20;
};

// One self-attention block over the window samples followed by the
// prediction head. The layer norm is shared between its two uses and runs
// with no variance epsilon (plus an exact zero-variance guard) so that the
// forward pass is invariant under a uniform rescaling of the features.
struct SetTransformerModel {
  int d_model = 0;
  int heads = 4;
  int fc_dim = 128;
  double dropout_rate = 0.1;
  std::uint64_t seed = 0;

  Eigen::VectorXd ln_scale, ln_shift;
  Eigen::MatrixXd wq, wk, wv, wo;  // d_model x d_model, output-major
  Eigen::VectorXd bq, bk, bv, bo;
  Eigen::MatrixXd w1;  // fc_dim x d_model
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // 1 x fc_dim
  double b2 = 0.0;

  static SetTransformerModel init(int d_model, const TransformerConfig& cfg);
};

// Feature width padded with zero columns to a multiple of `heads`.
int padded_width(int width, int heads);
Eigen::MatrixXd pad_features(const Eigen::MatrixXd& features, int d_model);

// Forward pass over the 2w x d_model matrix. Dropout applies only in train
// mode and is keyed deterministically by (model.seed, dropout_key).
Eigen::VectorXd st_forward(const SetTransformerModel& model,
                           const Eigen::MatrixXd& features, bool train_mode,
                           std::uint64_t dropout_key = 0);

// Flat gradient interface used by training and the finite-difference checks.
Eigen::VectorXd st_pack(const SetTransformerModel& model);
void st_unpack(SetTransformerModel& model, const Eigen::VectorXd& flat);
double st_loss(const SetTransformerModel& model, const Eigen::MatrixXd& x,
               const Eigen::VectorXd& labels, bool train_mode,
               std::uint64_t dropout_key);
std::pair<double, Eigen::VectorXd> st_loss_and_gradient(
    const SetTransformerModel& model, const Eigen::MatrixXd& x,
    const Eigen::VectorXd& labels, bool train_mode, std::uint64_t dropout_key);

// Full-batch Adam on the MSE; returns the trained model and the final
// training MSE evaluated with dropout off.
std::pair<SetTransformerModel, double> st_train(const WindowDataset& data,
                                                const TransformerConfig& cfg);

}  // namespace phasetrap
