#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

#include "phasetrap/pauli.hpp"

// Exact simulation of n-qubit pure states and density matrices with the gate
// set and noise channels used by the variational circuits.
//
// Bit convention: qubit 0 is the least-significant bit of the basis index.
// All operations preserve the norm (trace) to 1e-10 and are pure in the
// value-semantics sense: *_inplace variants mutate, the rest return copies.

namespace phasetrap {

using Complex = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

struct PureState {
  int n = 0;
  VectorXcd amps;

  static PureState zero(int n);  // |0...0>
  static PureState from_amplitudes(int n, VectorXcd a);

  Eigen::Index dim() const { return amps.size(); }
  double norm_error() const;  // | ||amps||^2 - 1 |
};

struct MixedState {
  int n = 0;
  MatrixXcd rho;

  static MixedState from_pure(const PureState& s);
  Eigen::Index dim() const { return rho.rows(); }
  double trace_error() const;
};

enum class NoiseKind { None, AmplitudeDamping, LocalDepolarizing };

// Channel attached after each two-qubit rotation, acting on both of the
// participating qubits as independent single-qubit channels.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::None;
  double rate = 0.0;  // in [0, 1]

  void validate() const;
};

// --- gates on pure states -------------------------------------------------

void rx_inplace(PureState& s, int site, double theta);
void zz_inplace(PureState& s, int site_a, int site_b, double gamma);
// Rotation generated by (XX+YY)/2 on the {|01>,|10>} block; beta = pi maps
// |01> to -i|10>. The |00> and |11> blocks are untouched.
void xy_pair_inplace(PureState& s, int site_a, int site_b, double beta);

PureState apply_rx(PureState s, int site, double theta);
PureState apply_zz(PureState s, int site_a, int site_b, double gamma);
PureState apply_xy_pair(PureState s, int site_a, int site_b, double beta);

// --- gates on density matrices (rho -> U rho U^dagger) ---------------------

void rx_inplace(MixedState& m, int site, double theta);
void zz_inplace(MixedState& m, int site_a, int site_b, double gamma);
void xy_pair_inplace(MixedState& m, int site_a, int site_b, double beta);

// --- channels ---------------------------------------------------------------

void noise_inplace(MixedState& m, const NoiseSpec& spec,
                   std::span<const int> sites);
MixedState apply_noise(MixedState m, const NoiseSpec& spec,
                       std::span<const int> sites);
// (1-eps) rho + eps I/2^n, the reference channel of the uniform-attenuation
// robustness argument.
MixedState global_depolarize(MixedState m, double eps);

// --- measurement ------------------------------------------------------------

double expectation(const PureState& s, const PauliString& obs);
double expectation(const MixedState& m, const PauliString& obs);
double expectation(const PureState& s, std::span<const PauliString> sum);
double expectation(const MixedState& m, std::span<const PauliString> sum);

// P|psi> (norm not preserved unless P is unitary with unit coefficient).
void accumulate_pauli(const PauliString& p, const VectorXcd& in,
                      VectorXcd& out);

// Projector fidelity sum_k |<b_k|a>|^2; b_space must be orthonormal to 1e-8.
double fidelity(const PureState& a, std::span<const PureState> b_space);

// Reduced density matrix on `sites`; sites[0] becomes the least-significant
// bit of the reduced index.
MatrixXcd reduced_density(const PureState& s, std::span<const int> sites);

// Von Neumann entropy of the reduced state, in bits; subsystem must be a
// nonempty proper subset.
double entanglement_entropy(const PureState& s, std::span<const int> subsystem);

// Relabels sites: amplitude of basis state b moves to the index whose bit
// perm[q] equals bit q of b.
PureState permute_sites(const PureState& s, std::span<const int> perm);

}  // namespace phasetrap
