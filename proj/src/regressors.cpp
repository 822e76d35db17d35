#include "phasetrap/regressors.hpp"

#include <cmath>
#include <random>

#include "phasetrap/errors.hpp"
#include "phasetrap/rng.hpp"

namespace phasetrap {

void WindowDataset::validate() const {
  require(w >= 1, "window requires w >= 1");
  require(features.rows() == 2 * w, "window requires 2w feature rows");
  require(labels.size() == features.rows(), "label count mismatch");
  for (int i = 0; i < w; ++i) require(labels[i] == -1.0, "first w labels must be -1");
  for (int i = w; i < 2 * w; ++i) require(labels[i] == 1.0, "last w labels must be +1");
  require(features.allFinite(), "window features must be finite");
}

// --- LASSO -------------------------------------------------------------------

double soft_threshold(double rho, double lambda) {
  if (rho > lambda) return rho - lambda;
  if (rho < -lambda) return rho + lambda;
  return 0.0;
}

LassoModel lasso_fit(const WindowDataset& data, double lambda) {
  data.validate();
  require(lambda >= 0.0, "lambda must be non-negative");
  const Eigen::Index n = data.features.rows();
  const Eigen::Index l = data.features.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  Eigen::VectorXd kappa = Eigen::VectorXd::Zero(l);
  double kappa0 = 0.0;
  Eigen::VectorXd residual = data.labels;  // l - k0 - F k
  Eigen::VectorXd z(l);
  for (Eigen::Index j = 0; j < l; ++j)
    z[j] = data.features.col(j).squaredNorm() * inv_n;

  const long max_sweeps = 10 * std::max<Eigen::Index>(l, 1);
  for (long sweep = 0; sweep < max_sweeps; ++sweep) {
    const double shift = residual.mean();
    kappa0 += shift;
    residual.array() -= shift;

    double max_change = 0.0;
    for (Eigen::Index j = 0; j < l; ++j) {
      if (z[j] == 0.0) continue;
      const double rho =
          data.features.col(j).dot(residual) * inv_n + z[j] * kappa[j];
      const double updated = soft_threshold(rho, lambda) / z[j];
      const double change = updated - kappa[j];
      if (change != 0.0) {
        residual -= change * data.features.col(j);
        kappa[j] = updated;
        max_change = std::max(max_change, std::abs(change));
      }
    }
    if (max_change < 1e-8) break;
  }

  LassoModel model;
  model.intercept = kappa0;
  model.coeffs = std::move(kappa);
  model.lambda = lambda;
  model.final_cost = lasso_training_loss(model, data);
  return model;
}

double lasso_training_loss(const LassoModel& model, const WindowDataset& data) {
  const Eigen::Index n = data.features.rows();
  Eigen::VectorXd residual = data.labels -
                             Eigen::VectorXd::Constant(n, model.intercept) -
                             data.features * model.coeffs;
  return residual.squaredNorm() / (2.0 * static_cast<double>(n)) +
         model.lambda * model.coeffs.lpNorm<1>();
}

std::optional<int> lasso_dominant_feature(const LassoModel& model) {
  int best = -1;
  double best_abs = 0.0;
  for (Eigen::Index j = 0; j < model.coeffs.size(); ++j) {
    const double a = std::abs(model.coeffs[j]);
    if (a > best_abs) {
      best_abs = a;
      best = static_cast<int>(j);
    }
  }
  if (best < 0 || best_abs == 0.0) return std::nullopt;
  return best;
}

// --- Set Transformer -----------------------------------------------------------

int padded_width(int width, int heads) {
  require(width >= 1, "feature width must be >= 1");
  return ((width + heads - 1) / heads) * heads;
}

Eigen::MatrixXd pad_features(const Eigen::MatrixXd& features, int d_model) {
  require(features.cols() <= d_model, "cannot pad down");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(features.rows(), d_model);
  out.leftCols(features.cols()) = features;
  return out;
}

SetTransformerModel SetTransformerModel::init(int d_model,
                                              const TransformerConfig& cfg) {
  require(d_model >= cfg.heads && d_model % cfg.heads == 0,
          "d_model must be a positive multiple of the head count");
  SetTransformerModel m;
  m.d_model = d_model;
  m.heads = cfg.heads;
  m.fc_dim = cfg.fc_dim;
  m.dropout_rate = cfg.dropout;
  m.seed = cfg.seed;

  std::mt19937_64 rng(splitmix64(cfg.seed ^ 0x7ab5));
  auto xavier = [&](Eigen::Index rows, Eigen::Index cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> uni(-limit, limit);
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = uni(rng);
    return w;
  };
  auto fan_in_uniform = [&](Eigen::Index rows, Eigen::Index cols) {
    const double limit = 1.0 / std::sqrt(static_cast<double>(cols));
    std::uniform_real_distribution<double> uni(-limit, limit);
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = uni(rng);
    return w;
  };

  m.ln_scale = Eigen::VectorXd::Ones(d_model);
  m.ln_shift = Eigen::VectorXd::Zero(d_model);
  m.wq = xavier(d_model, d_model);
  m.wk = xavier(d_model, d_model);
  m.wv = xavier(d_model, d_model);
  m.wo = xavier(d_model, d_model);
  m.bq = Eigen::VectorXd::Zero(d_model);
  m.bk = Eigen::VectorXd::Zero(d_model);
  m.bv = Eigen::VectorXd::Zero(d_model);
  m.bo = Eigen::VectorXd::Zero(d_model);
  auto fan_in_bias = [&](Eigen::Index size, Eigen::Index fan_in) {
    const double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> uni(-limit, limit);
    Eigen::VectorXd b(size);
    for (Eigen::Index i = 0; i < size; ++i) b[i] = uni(rng);
    return b;
  };
  m.w1 = fan_in_uniform(cfg.fc_dim, d_model);
  m.b1 = fan_in_bias(cfg.fc_dim, d_model);
  m.w2 = fan_in_uniform(1, cfg.fc_dim);
  m.b2 = fan_in_bias(1, cfg.fc_dim)[0];
  return m;
}

namespace {

// Row-wise layer norm with zero variance epsilon. A relative guard maps
// exactly-constant rows to zero so the transform stays invariant under a
// uniform rescaling of the inputs.
struct LayerNormCache {
  Eigen::MatrixXd xhat;
  Eigen::VectorXd inv_std;  // 0 for guarded rows
};

Eigen::MatrixXd layer_norm(const Eigen::MatrixXd& x,
                           const Eigen::VectorXd& scale,
                           const Eigen::VectorXd& shift,
                           LayerNormCache* cache) {
  const Eigen::Index rows = x.rows(), cols = x.cols();
  Eigen::MatrixXd xhat(rows, cols);
  Eigen::VectorXd inv_std(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double mu = x.row(i).mean();
    Eigen::RowVectorXd centered = x.row(i).array() - mu;
    const double var = centered.squaredNorm() / static_cast<double>(cols);
    const double scale_ref = x.row(i).squaredNorm() / static_cast<double>(cols);
    if (var <= 1e-24 * scale_ref || var == 0.0) {
      xhat.row(i).setZero();
      inv_std[i] = 0.0;
    } else {
      inv_std[i] = 1.0 / std::sqrt(var);
      xhat.row(i) = centered * inv_std[i];
    }
  }
  if (cache) {
    cache->xhat = xhat;
    cache->inv_std = inv_std;
  }
  Eigen::MatrixXd out = xhat;
  out.array().rowwise() *= scale.transpose().array();
  out.array().rowwise() += shift.transpose().array();
  return out;
}

// dL/dx for y = xhat .* scale + shift given dL/dy; also accumulates the
// parameter gradients.
Eigen::MatrixXd layer_norm_backward(const Eigen::MatrixXd& dy,
                                    const LayerNormCache& cache,
                                    const Eigen::VectorXd& scale,
                                    Eigen::VectorXd& dscale,
                                    Eigen::VectorXd& dshift) {
  const Eigen::Index rows = dy.rows(), cols = dy.cols();
  dscale += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
  dshift += dy.colwise().sum();
  Eigen::MatrixXd dx(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (cache.inv_std[i] == 0.0) {
      dx.row(i).setZero();
      continue;
    }
    Eigen::RowVectorXd t = dy.row(i).array() * scale.transpose().array();
    const double mean_t = t.mean();
    const double mean_tx = (t.array() * cache.xhat.row(i).array()).mean();
    dx.row(i) =
        (t.array() - mean_t - cache.xhat.row(i).array() * mean_tx) *
        cache.inv_std[i];
  }
  return dx;
}

Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate,
                             std::uint64_t seed, std::uint64_t key) {
  Eigen::MatrixXd mask(rows, cols);
  const double keep = 1.0 - rate;
  std::uint64_t base = hash_combine(seed, key);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      const std::uint64_t k =
          base + static_cast<std::uint64_t>(i) * 0x100000001b3ULL +
          static_cast<std::uint64_t>(j);
      mask(i, j) = hash_unit(k) >= rate ? 1.0 / keep : 0.0;
    }
  return mask;
}

struct ForwardCache {
  Eigen::MatrixXd x;      // raw input
  LayerNormCache ln1;
  Eigen::MatrixXd y1;     // normalized input
  Eigen::MatrixXd q, k, v;
  std::vector<Eigen::MatrixXd> attn;  // per-head softmax matrices
  Eigen::MatrixXd concat;             // heads' outputs, N x d
  Eigen::MatrixXd attn_out;           // after output projection
  Eigen::MatrixXd mask;               // dropout mask (empty when off)
  Eigen::MatrixXd resid;              // y1 + dropped attention
  LayerNormCache ln2;
  Eigen::MatrixXd y2;
  Eigen::MatrixXd h1pre, h1;
  Eigen::VectorXd pred;
};

void st_forward_cached(const SetTransformerModel& m, const Eigen::MatrixXd& x,
                       bool train_mode, std::uint64_t dropout_key,
                       ForwardCache& c) {
  require(x.cols() == m.d_model, "feature width must equal d_model");
  const Eigen::Index n = x.rows();
  const int dk = m.d_model / m.heads;
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dk));

  c.x = x;
  c.y1 = layer_norm(x, m.ln_scale, m.ln_shift, &c.ln1);
  c.q = (c.y1 * m.wq.transpose()).rowwise() + m.bq.transpose();
  c.k = (c.y1 * m.wk.transpose()).rowwise() + m.bk.transpose();
  c.v = (c.y1 * m.wv.transpose()).rowwise() + m.bv.transpose();

  c.attn.assign(m.heads, Eigen::MatrixXd());
  c.concat.resize(n, m.d_model);
  for (int h = 0; h < m.heads; ++h) {
    const auto qh = c.q.middleCols(h * dk, dk);
    const auto kh = c.k.middleCols(h * dk, dk);
    const auto vh = c.v.middleCols(h * dk, dk);
    Eigen::MatrixXd scores = qh * kh.transpose() * inv_sqrt_dk;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double peak = scores.row(i).maxCoeff();
      Eigen::RowVectorXd e = (scores.row(i).array() - peak).exp();
      scores.row(i) = e / e.sum();
    }
    c.attn[h] = scores;
    c.concat.middleCols(h * dk, dk) = scores * vh;
  }
  c.attn_out = (c.concat * m.wo.transpose()).rowwise() + m.bo.transpose();

  if (train_mode && m.dropout_rate > 0.0) {
    c.mask = dropout_mask(n, m.d_model, m.dropout_rate, m.seed, dropout_key);
    c.attn_out = c.attn_out.cwiseProduct(c.mask);
  } else {
    c.mask.resize(0, 0);
  }

  c.resid = c.y1 + c.attn_out;
  c.y2 = layer_norm(c.resid, m.ln_scale, m.ln_shift, &c.ln2);
  c.h1pre = (c.y2 * m.w1.transpose()).rowwise() + m.b1.transpose();
  c.h1 = c.h1pre.cwiseMax(0.0);
  c.pred = (c.h1 * m.w2.transpose()).col(0).array() + m.b2;
}

struct Gradients {
  Eigen::VectorXd ln_scale, ln_shift;
  Eigen::MatrixXd wq, wk, wv, wo;
  Eigen::VectorXd bq, bk, bv, bo;
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  double b2 = 0.0;
};

Gradients st_backward(const SetTransformerModel& m, const ForwardCache& c,
                      const Eigen::VectorXd& labels) {
  const Eigen::Index n = c.x.rows();
  const int dk = m.d_model / m.heads;
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dk));

  Gradients g;
  g.ln_scale = Eigen::VectorXd::Zero(m.d_model);
  g.ln_shift = Eigen::VectorXd::Zero(m.d_model);

  Eigen::VectorXd dpred =
      2.0 / static_cast<double>(n) * (c.pred - labels);
  g.b2 = dpred.sum();
  g.w2 = dpred.transpose() * c.h1;
  Eigen::MatrixXd dh1 = dpred * m.w2;
  Eigen::MatrixXd dh1pre =
      dh1.cwiseProduct((c.h1pre.array() > 0.0).cast<double>().matrix());
  g.w1 = dh1pre.transpose() * c.y2;
  g.b1 = dh1pre.colwise().sum();
  Eigen::MatrixXd dy2 = dh1pre * m.w1;

  Eigen::MatrixXd dresid =
      layer_norm_backward(dy2, c.ln2, m.ln_scale, g.ln_scale, g.ln_shift);

  Eigen::MatrixXd dy1 = dresid;
  Eigen::MatrixXd dattn_out = dresid;
  if (c.mask.size() > 0) dattn_out = dattn_out.cwiseProduct(c.mask);

  g.wo = dattn_out.transpose() * c.concat;
  g.bo = dattn_out.colwise().sum();
  Eigen::MatrixXd dconcat = dattn_out * m.wo;

  Eigen::MatrixXd dq(n, m.d_model), dkm(n, m.d_model), dv(n, m.d_model);
  for (int h = 0; h < m.heads; ++h) {
    const auto qh = c.q.middleCols(h * dk, dk);
    const auto kh = c.k.middleCols(h * dk, dk);
    const auto vh = c.v.middleCols(h * dk, dk);
    const auto docat = dconcat.middleCols(h * dk, dk);
    const auto& a = c.attn[h];

    dv.middleCols(h * dk, dk) = a.transpose() * docat;
    Eigen::MatrixXd da = docat * vh.transpose();
    // softmax rows: ds = a .* (da - rowsum(da .* a))
    Eigen::MatrixXd ds(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double dot = da.row(i).dot(a.row(i));
      ds.row(i) = a.row(i).array() * (da.row(i).array() - dot);
    }
    dq.middleCols(h * dk, dk) = ds * kh * inv_sqrt_dk;
    dkm.middleCols(h * dk, dk) = ds.transpose() * qh * inv_sqrt_dk;
  }

  g.wq = dq.transpose() * c.y1;
  g.bq = dq.colwise().sum();
  g.wk = dkm.transpose() * c.y1;
  g.bk = dkm.colwise().sum();
  g.wv = dv.transpose() * c.y1;
  g.bv = dv.colwise().sum();

  dy1 += dq * m.wq + dkm * m.wk + dv * m.wv;
  // The input gradient is discarded, but the first layer-norm use still
  // contributes to the shared scale/shift gradients.
  (void)layer_norm_backward(dy1, c.ln1, m.ln_scale, g.ln_scale, g.ln_shift);
  return g;
}

Eigen::VectorXd pack_gradients(const Gradients& g) {
  std::vector<const Eigen::MatrixXd*> mats = {&g.wq, &g.wk, &g.wv, &g.wo,
                                              &g.w1, &g.w2};
  Eigen::Index total = g.ln_scale.size() + g.ln_shift.size() + g.bq.size() +
                       g.bk.size() + g.bv.size() + g.bo.size() + g.b1.size() +
                       1;
  for (auto* m : mats) total += m->size();
  Eigen::VectorXd flat(total);
  Eigen::Index at = 0;
  auto put_vec = [&](const Eigen::VectorXd& v) {
    flat.segment(at, v.size()) = v;
    at += v.size();
  };
  auto put_mat = [&](const Eigen::MatrixXd& m) {
    flat.segment(at, m.size()) =
        Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
    at += m.size();
  };
  put_vec(g.ln_scale);
  put_vec(g.ln_shift);
  put_mat(g.wq);
  put_vec(g.bq);
  put_mat(g.wk);
  put_vec(g.bk);
  put_mat(g.wv);
  put_vec(g.bv);
  put_mat(g.wo);
  put_vec(g.bo);
  put_mat(g.w1);
  put_vec(g.b1);
  put_mat(g.w2);
  flat[at++] = g.b2;
  return flat;
}

}  // namespace

Eigen::VectorXd st_pack(const SetTransformerModel& m) {
  Gradients g;
  g.ln_scale = m.ln_scale;
  g.ln_shift = m.ln_shift;
  g.wq = m.wq;
  g.bq = m.bq;
  g.wk = m.wk;
  g.bk = m.bk;
  g.wv = m.wv;
  g.bv = m.bv;
  g.wo = m.wo;
  g.bo = m.bo;
  g.w1 = m.w1;
  g.b1 = m.b1;
  g.w2 = m.w2;
  g.b2 = m.b2;
  return pack_gradients(g);
}

void st_unpack(SetTransformerModel& m, const Eigen::VectorXd& flat) {
  Eigen::Index at = 0;
  auto take_vec = [&](Eigen::VectorXd& v) {
    v = flat.segment(at, v.size());
    at += v.size();
  };
  auto take_mat = [&](Eigen::MatrixXd& mat) {
    mat = Eigen::Map<const Eigen::MatrixXd>(flat.data() + at, mat.rows(),
                                            mat.cols());
    at += mat.size();
  };
  take_vec(m.ln_scale);
  take_vec(m.ln_shift);
  take_mat(m.wq);
  take_vec(m.bq);
  take_mat(m.wk);
  take_vec(m.bk);
  take_mat(m.wv);
  take_vec(m.bv);
  take_mat(m.wo);
  take_vec(m.bo);
  take_mat(m.w1);
  take_vec(m.b1);
  take_mat(m.w2);
  m.b2 = flat[at++];
  require(at == flat.size(), "parameter vector size mismatch");
}

Eigen::VectorXd st_forward(const SetTransformerModel& model,
                           const Eigen::MatrixXd& features, bool train_mode,
                           std::uint64_t dropout_key) {
  ForwardCache cache;
  st_forward_cached(model, features, train_mode, dropout_key, cache);
  return cache.pred;
}

double st_loss(const SetTransformerModel& model, const Eigen::MatrixXd& x,
               const Eigen::VectorXd& labels, bool train_mode,
               std::uint64_t dropout_key) {
  const Eigen::VectorXd pred = st_forward(model, x, train_mode, dropout_key);
  return (pred - labels).squaredNorm() / static_cast<double>(labels.size());
}

std::pair<double, Eigen::VectorXd> st_loss_and_gradient(
    const SetTransformerModel& model, const Eigen::MatrixXd& x,
    const Eigen::VectorXd& labels, bool train_mode,
    std::uint64_t dropout_key) {
  ForwardCache cache;
  st_forward_cached(model, x, train_mode, dropout_key, cache);
  const double loss =
      (cache.pred - labels).squaredNorm() / static_cast<double>(labels.size());
  Gradients grads = st_backward(model, cache, labels);
  return {loss, pack_gradients(grads)};
}

std::pair<SetTransformerModel, double> st_train(const WindowDataset& data,
                                                const TransformerConfig& cfg) {
  data.validate();
  const int d_model = padded_width(static_cast<int>(data.features.cols()),
                                   cfg.heads);
  const Eigen::MatrixXd x = pad_features(data.features, d_model);
  SetTransformerModel model = SetTransformerModel::init(d_model, cfg);

  Eigen::VectorXd theta = st_pack(model);
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(theta.size());
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  std::vector<double> best_history;
  double best = std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    st_unpack(model, theta);
    auto [loss, grad] = st_loss_and_gradient(
        model, x, data.labels, cfg.dropout > 0.0,
        static_cast<std::uint64_t>(epoch));
    if (!std::isfinite(loss))
      throw numeric_error("transformer training diverged at epoch " +
                          std::to_string(epoch));

    m1 = beta1 * m1 + (1.0 - beta1) * grad;
    m2 = beta2 * m2.array().matrix() +
         (1.0 - beta2) * grad.array().square().matrix();
    const double bc1 = 1.0 - std::pow(beta1, epoch + 1);
    const double bc2 = 1.0 - std::pow(beta2, epoch + 1);
    theta -= (cfg.lr * (m1 / bc1).array() /
              ((m2 / bc2).array().sqrt() + eps))
                 .matrix();

    best = std::min(best, loss);
    best_history.push_back(best);
    const int lag = cfg.early_stop_window;
    if (lag > 0 && static_cast<int>(best_history.size()) > lag) {
      const double before = best_history[best_history.size() - 1 - lag];
      if (before - best < cfg.early_stop_improvement) break;
    }
  }

  st_unpack(model, theta);
  const double final_mse = st_loss(model, x, data.labels, false, 0);
  return {std::move(model), final_mse};
}

}  // namespace phasetrap
