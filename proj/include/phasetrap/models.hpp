#pragma once

#include <cstdint>
#include <vector>

#include "phasetrap/qsim.hpp"

// The three spin models, exact low-lying spectra (matrix-free Lanczos) and
// the physics diagnostics used as baselines: x-magnetization, relative
// spectral gap, central-site entanglement entropy and the partial-reflection
// invariant.
//
// 2D sites are numbered row-major, so the 3x3 grid has Q4 in the center.

namespace phasetrap {

enum class ModelKind { Tfim1D, Tfim2D, Essh, TEssh };
enum class Boundary { Open, Periodic };

struct HamiltonianSpec {
  ModelKind kind = ModelKind::Tfim1D;
  int n = 0;
  double g = 0.0;
  double J = 1.0;
  double delta = 0.0;  // eSSH z-anisotropy
  double h = 0.0;      // transverse field of the T-eSSH variant
  Boundary boundary = Boundary::Periodic;
  int rows = 0, cols = 0;  // 2D geometry, rows*cols == n

  void validate() const;
};

std::vector<PauliString> build_hamiltonian(const HamiltonianSpec& spec);

// H|psi> (unnormalized), summed matrix-free over the term list.
PureState apply_hamiltonian(const HamiltonianSpec& spec, const PureState& s);
PureState apply_terms(std::span<const PauliString> terms, const PureState& s);

struct Spectrum {
  std::vector<double> energies;   // ascending
  std::vector<PureState> states;  // matching, orthonormal
  int ground_degeneracy = 0;

  // Energies within 1e-8 * max(1, |E0|) of E0 count as the ground level.
  static int degeneracy_of(const std::vector<double>& energies);
};

struct LanczosOptions {
  int max_krylov = 300;
  double tol = 1e-8;  // residual ||H x - E x||
  std::uint64_t seed = 0x5eed;
  int max_restarts = 16;
};

// k lowest eigenpairs via Lanczos with full reorthogonalization; degenerate
// levels are resolved by restarting with deflation against converged pairs.
Spectrum lowest_eigenpairs(const HamiltonianSpec& spec, int k,
                           const LanczosOptions& opts = {});

// The full (near-)degenerate ground level, grown until the next level is
// strictly above the degeneracy tolerance.
Spectrum ground_space(const HamiltonianSpec& spec, int max_degeneracy = 8,
                      const LanczosOptions& opts = {});

double relative_gap_value(double e_gs, double e_1);
// |(E_1 - E_gs)/E_gs| with E_1 the first level strictly above the ground one.
double relative_gap(const HamiltonianSpec& spec,
                    const LanczosOptions& opts = {});

double magnetization_x(const PureState& s);

// Tr(rho_I R_I) / sqrt((Tr rho_I1^2 + Tr rho_I2^2)/2) with I the middle half
// of the chain and R_I the site-reversal within I. Requires n = 4q.
double partial_reflection_invariant(const PureState& s);

// Literature values of the transverse-field Ising critical points in the
// thermodynamic limit (2D value from quantum cluster Monte Carlo studies).
inline constexpr double kTfim1DCriticalField = 1.0;
inline constexpr double kTfim2DCriticalField = 3.04438;

}  // namespace phasetrap
