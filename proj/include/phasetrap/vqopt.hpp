#pragma once

#include <cstdint>
#include <vector>

#include "phasetrap/ansatz.hpp"
#include "phasetrap/grid.hpp"

// Global optimization of the coefficient tables: minimize the energy summed
// over the optimization grid with BFGS and a strong-Wolfe line search,
// including the recursive depth-extension protocol.

namespace phasetrap {

enum class GradientMode { Adjoint, FiniteDifference };

struct BfgsConfig {
  int max_iterations = 500;
  double grad_tolerance = 1e-6;  // 2-norm of the gradient
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  double fd_step = 1e-6;
  GradientMode gradient = GradientMode::Adjoint;
  int threads = 0;
};

struct OptResult {
  AnsatzSpec ansatz;
  GlobalParams params;
  double energy_sum = 0.0;
  std::vector<double> per_g_energies;
  int iterations = 0;
  bool converged = false;
  std::uint64_t seed = 0;
  std::vector<double> trace;  // energy at accepted iterates, non-increasing
};

// Energy objective over a grid of Hamiltonian parameters; noisy mode
// evaluates Tr(H rho) on a density matrix with channels after each two-qubit
// rotation and always differentiates by finite differences.
class EnergyObjective {
 public:
  EnergyObjective(HamiltonianSpec proto, AnsatzSpec aspec, Grid grid,
                  NoiseSpec noise = {}, int threads = 0);

  double value(const GlobalParams& params,
               std::vector<double>* per_g = nullptr) const;
  Eigen::VectorXd gradient(const GlobalParams& params,
                           const BfgsConfig& cfg) const;
  Eigen::VectorXd adjoint_gradient(const GlobalParams& params) const;
  Eigen::VectorXd finite_difference_gradient(const GlobalParams& params,
                                             double step) const;

  const AnsatzSpec& ansatz() const { return aspec_; }
  const std::vector<double>& grid_points() const { return gs_; }

 private:
  HamiltonianSpec proto_;
  AnsatzSpec aspec_;
  std::vector<double> gs_;
  std::vector<std::vector<PauliString>> hams_;  // per grid point
  NoiseSpec noise_;
  int threads_ = 0;

  double point_energy(const GlobalParams& params, int gi) const;
};

double energy_sum(const GlobalParams& params, const HamiltonianSpec& proto,
                  const AnsatzSpec& aspec, const Grid& grid,
                  const NoiseSpec& noise = {},
                  std::vector<double>* per_g = nullptr);

OptResult optimize(const HamiltonianSpec& proto, const AnsatzSpec& aspec,
                   const Grid& grid, double init_range, std::uint64_t seed,
                   const BfgsConfig& cfg = {}, const NoiseSpec& noise = {});

// Warm-started variant used by the recursion.
OptResult optimize_from(const HamiltonianSpec& proto, const AnsatzSpec& aspec,
                        const Grid& grid, GlobalParams init,
                        std::uint64_t seed, const BfgsConfig& cfg = {},
                        const NoiseSpec& noise = {});

// Repeatedly extend depth (zero-padded Fourier column), re-optimize
// warm-started, and collect the per-depth results. The 1D chain family grows
// n by 2 per stage; the result list starts with `first` itself.
std::vector<OptResult> recurse_depth(const OptResult& first,
                                     HamiltonianSpec proto, const Grid& grid,
                                     int p_max, const BfgsConfig& cfg = {},
                                     const NoiseSpec& noise = {});

}  // namespace phasetrap
