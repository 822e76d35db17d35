#include "phasetrap/vqopt.hpp"

#include <cmath>

#include "phasetrap/errors.hpp"
#include "phasetrap/parallel.hpp"

namespace phasetrap {

EnergyObjective::EnergyObjective(HamiltonianSpec proto, AnsatzSpec aspec,
                                 Grid grid, NoiseSpec noise, int threads)
    : proto_(proto), aspec_(aspec), noise_(noise), threads_(threads) {
  require(proto_.n == aspec_.n, "model and ansatz sizes must agree");
  aspec_.validate();
  noise_.validate();
  gs_ = grid.points();
  hams_.reserve(gs_.size());
  for (double g : gs_) {
    HamiltonianSpec at = proto_;
    at.g = g;
    hams_.push_back(build_hamiltonian(at));
  }
}

double EnergyObjective::point_energy(const GlobalParams& params,
                                     int gi) const {
  const auto angles = fourier_to_angles(params, aspec_, gs_[gi]);
  if (noise_.kind == NoiseKind::None) {
    PureState psi = prepare_from_angles(aspec_, angles);
    PureState hpsi = apply_terms(hams_[gi], psi);
    return psi.amps.dot(hpsi.amps).real();
  }
  MixedState rho = prepare_density_from_angles(aspec_, angles, noise_);
  return expectation(rho, std::span<const PauliString>(hams_[gi]));
}

double EnergyObjective::value(const GlobalParams& params,
                              std::vector<double>* per_g) const {
  const int m = static_cast<int>(gs_.size());
  std::vector<double> energies(m);
  parallel_for(
      m, [&](int gi) { energies[gi] = point_energy(params, gi); }, threads_);
  double sum = 0.0;
  for (double e : energies) sum += e;  // fixed reduction order
  if (per_g) *per_g = std::move(energies);
  return sum;
}

// Reverse-sweep derivative of E(g) = <psi|H|psi> with respect to every
// group/layer angle: after the forward pass keep phi = H|psi>, then walking
// the circuit backwards the derivative of the factor exp(-i theta/2 G) is
// Im <phi| G |psi> evaluated just after that factor.
Eigen::VectorXd EnergyObjective::adjoint_gradient(
    const GlobalParams& params) const {
  const auto& layout = circuit_layout(aspec_);
  const int groups = static_cast<int>(layout.groups.size());
  const int p = aspec_.p;
  const int m = static_cast<int>(gs_.size());

  std::vector<std::vector<PauliString>> generators(groups);
  for (int q = 0; q < groups; ++q) generators[q] = group_generator(aspec_, q);

  // Per grid point: d(energy)/d(angle), shape groups x p, then chain rule to
  // the polynomial coefficients.
  std::vector<Eigen::VectorXd> partials(m);
  parallel_for(
      m,
      [&](int gi) {
        const double g = gs_[gi];
        const auto angles = fourier_to_angles(params, aspec_, g);
        PureState psi = prepare_from_angles(aspec_, angles);
        PureState phi{aspec_.n, VectorXcd()};
        phi = apply_terms(hams_[gi], psi);

        Eigen::MatrixXd dE(groups, p);
        for (int layer = p - 1; layer >= 0; --layer) {
          for (auto it = layout.layer_order.rbegin();
               it != layout.layer_order.rend(); ++it) {
            const int q = *it;
            PureState gpsi{aspec_.n, VectorXcd::Zero(psi.dim())};
            for (const auto& term : generators[q])
              accumulate_pauli(term, psi.amps, gpsi.amps);
            dE(q, layer) = phi.amps.dot(gpsi.amps).imag();
            apply_group_inplace(psi, aspec_, q, -angles[q][layer]);
            apply_group_inplace(phi, aspec_, q, -angles[q][layer]);
          }
        }

        // d(angle_j)/d(coeff(m,k)) = basis(j,k) * g^m
        Eigen::VectorXd flat(params.parameter_count());
        Eigen::Index at = 0;
        for (int q = 0; q < groups; ++q) {
          const bool sine = layout.groups[q].basis == AngleBasis::Sine;
          Eigen::VectorXd dmode = Eigen::VectorXd::Zero(p);
          for (int k = 1; k <= p; ++k) {
            double acc = 0.0;
            for (int j = 1; j <= p; ++j) {
              const double arg = (k - 0.5) * (j - 0.5) * std::numbers::pi /
                                 static_cast<double>(p);
              acc += dE(q, j - 1) * (sine ? std::sin(arg) : std::cos(arg));
            }
            dmode[k - 1] = acc;
          }
          for (int k = 0; k < p; ++k) {
            double gp = 1.0;
            for (int deg = 0; deg <= params.degree; ++deg, gp *= g)
              flat[at + k * (params.degree + 1) + deg] = dmode[k] * gp;
          }
          at += static_cast<Eigen::Index>(p) * (params.degree + 1);
        }
        partials[gi] = std::move(flat);
      },
      threads_);

  Eigen::VectorXd total = Eigen::VectorXd::Zero(params.parameter_count());
  for (const auto& part : partials) total += part;
  return total;
}

Eigen::VectorXd EnergyObjective::finite_difference_gradient(
    const GlobalParams& params, double step) const {
  const Eigen::VectorXd x = params.pack();
  Eigen::VectorXd grad(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    const double fp = value(GlobalParams::unpack(aspec_, params.degree, xp));
    const double fm = value(GlobalParams::unpack(aspec_, params.degree, xm));
    grad[i] = (fp - fm) / (2.0 * step);
  }
  return grad;
}

Eigen::VectorXd EnergyObjective::gradient(const GlobalParams& params,
                                          const BfgsConfig& cfg) const {
  if (noise_.kind != NoiseKind::None ||
      cfg.gradient == GradientMode::FiniteDifference)
    return finite_difference_gradient(params, cfg.fd_step);
  return adjoint_gradient(params);
}

double energy_sum(const GlobalParams& params, const HamiltonianSpec& proto,
                  const AnsatzSpec& aspec, const Grid& grid,
                  const NoiseSpec& noise, std::vector<double>* per_g) {
  EnergyObjective objective(proto, aspec, grid, noise);
  return objective.value(params, per_g);
}

OptResult optimize_from(const HamiltonianSpec& proto, const AnsatzSpec& aspec,
                        const Grid& grid, GlobalParams init,
                        std::uint64_t seed, const BfgsConfig& cfg,
                        const NoiseSpec& noise) {
  EnergyObjective objective(proto, aspec, grid, noise, cfg.threads);
  const int degree = init.degree;
  const Eigen::Index dim = init.parameter_count();

  auto unpack = [&](const Eigen::VectorXd& x) {
    return GlobalParams::unpack(aspec, degree, x);
  };
  auto eval_f = [&](const Eigen::VectorXd& x) {
    return objective.value(unpack(x));
  };
  auto eval_g = [&](const Eigen::VectorXd& x) {
    return objective.gradient(unpack(x), cfg);
  };

  Eigen::VectorXd x = init.pack();
  double f = eval_f(x);
  Eigen::VectorXd grad = eval_g(x);

  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(dim, dim);
  std::vector<double> trace{f};
  bool converged = false;
  int iterations = 0;
  bool first_update = true;

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    if (grad.norm() <= cfg.grad_tolerance) {
      converged = true;
      break;
    }
    Eigen::VectorXd direction = -(hinv * grad);
    double slope0 = direction.dot(grad);
    if (slope0 >= 0.0) {
      hinv.setIdentity();
      direction = -grad;
      slope0 = direction.dot(grad);
    }

    // Strong Wolfe line search (bracketing phase then zoom).
    const double c1 = cfg.wolfe_c1, c2 = cfg.wolfe_c2;
    struct Probe {
      double alpha, f, slope;
      Eigen::VectorXd x, grad;
    };
    auto probe = [&](double alpha) {
      Probe p;
      p.alpha = alpha;
      p.x = x + alpha * direction;
      p.f = eval_f(p.x);
      p.grad = eval_g(p.x);
      p.slope = p.grad.dot(direction);
      return p;
    };

    Probe accepted;
    bool have_accept = false;

    auto zoom = [&](Probe lo, Probe hi) {
      for (int z = 0; z < 40; ++z) {
        double alpha;
        const double d = hi.alpha - lo.alpha;
        const double denom = 2.0 * (hi.f - lo.f - lo.slope * d);
        alpha = std::abs(denom) > 1e-300
                    ? lo.alpha - lo.slope * d * d / denom
                    : 0.5 * (lo.alpha + hi.alpha);
        const double a_min = std::min(lo.alpha, hi.alpha);
        const double a_max = std::max(lo.alpha, hi.alpha);
        const double margin = 0.1 * (a_max - a_min);
        if (!(alpha > a_min + margin && alpha < a_max - margin))
          alpha = 0.5 * (lo.alpha + hi.alpha);

        Probe mid = probe(alpha);
        if (mid.f > f + c1 * alpha * slope0 || mid.f >= lo.f) {
          hi = mid;
        } else {
          if (std::abs(mid.slope) <= -c2 * slope0) {
            accepted = std::move(mid);
            have_accept = true;
            return;
          }
          if (mid.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
          lo = mid;
        }
        if (std::abs(hi.alpha - lo.alpha) < 1e-14) return;
      }
    };

    Probe prev;
    prev.alpha = 0.0;
    prev.f = f;
    prev.slope = slope0;
    prev.x = x;
    prev.grad = grad;
    double alpha = 1.0;
    for (int trial = 0; trial < 30 && !have_accept; ++trial) {
      Probe cur = probe(alpha);
      if (cur.f > f + c1 * alpha * slope0 || (trial > 0 && cur.f >= prev.f)) {
        zoom(prev, cur);
        break;
      }
      if (std::abs(cur.slope) <= -c2 * slope0) {
        accepted = std::move(cur);
        have_accept = true;
        break;
      }
      if (cur.slope >= 0.0) {
        zoom(cur, prev);
        break;
      }
      prev = std::move(cur);
      alpha *= 2.0;
      if (alpha > 1e6) break;
    }

    if (!have_accept) break;  // line-search failure: return best iterate

    Eigen::VectorXd s = accepted.x - x;
    Eigen::VectorXd y = accepted.grad - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (first_update) {
        hinv *= sy / y.squaredNorm();
        first_update = false;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = hinv * y;
      // BFGS inverse update, written to avoid forming rank-one matrices twice.
      hinv.noalias() -= rho * (hy * s.transpose());
      hinv.noalias() -= rho * (s * hy.transpose());
      hinv.noalias() += rho * rho * (y.dot(hy)) * (s * s.transpose());
      hinv.noalias() += rho * (s * s.transpose());
    }

    x = std::move(accepted.x);
    f = accepted.f;
    grad = std::move(accepted.grad);
    trace.push_back(f);
    iterations = iter + 1;
  }

  if (grad.norm() <= cfg.grad_tolerance) converged = true;

  OptResult result;
  result.ansatz = aspec;
  result.params = unpack(x);
  result.per_g_energies.clear();
  result.energy_sum = objective.value(result.params, &result.per_g_energies);
  result.iterations = iterations;
  result.converged = converged;
  result.seed = seed;
  result.trace = std::move(trace);
  return result;
}

OptResult optimize(const HamiltonianSpec& proto, const AnsatzSpec& aspec,
                   const Grid& grid, double init_range, std::uint64_t seed,
                   const BfgsConfig& cfg, const NoiseSpec& noise) {
  GlobalParams init = GlobalParams::random_init(aspec, init_range, seed);
  return optimize_from(proto, aspec, grid, std::move(init), seed, cfg, noise);
}

std::vector<OptResult> recurse_depth(const OptResult& first,
                                     HamiltonianSpec proto, const Grid& grid,
                                     int p_max, const BfgsConfig& cfg,
                                     const NoiseSpec& noise) {
  std::vector<OptResult> stages{first};
  AnsatzSpec aspec = first.ansatz;
  GlobalParams params = first.params;
  while (aspec.p < p_max) {
    auto [next_params, next_spec] = extend_depth(params, aspec);
    proto.n = next_spec.n;
    OptResult stage = optimize_from(proto, next_spec, grid,
                                    std::move(next_params), first.seed, cfg,
                                    noise);
    aspec = next_spec;
    params = stage.params;
    stages.push_back(std::move(stage));
  }
  return stages;
}

}  // namespace phasetrap
