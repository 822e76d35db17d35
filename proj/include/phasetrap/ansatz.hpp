#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phasetrap/models.hpp"
#include "phasetrap/qsim.hpp"

// Circuit families and the global parameterization: per-layer angles are
// Fourier series over the layer index, and each Fourier coefficient is a
// polynomial in the Hamiltonian parameter g. Optimizing the polynomial
// tables once yields circuit angles for every g.
//
// Convention: angle groups that exponentiate ZZ-type terms use the sine
// basis (gamma-type); X/XY-type groups use the cosine basis (beta-type).

namespace phasetrap {

enum class AnsatzFamily {
  HvaTfim1D,
  HvaTfim2DSymmetric,
  EsshTrivial,
  EsshTopological,
};

enum class AngleBasis { Sine, Cosine };

enum class GateKind { Rx, Zz, XyPair };

struct Gate {
  GateKind kind;
  int a = 0;
  int b = 0;  // unused for Rx
};

struct GroupSpec {
  std::string name;
  AngleBasis basis;
  std::vector<Gate> gates;
};

struct AnsatzSpec {
  AnsatzFamily family = AnsatzFamily::HvaTfim1D;
  int n = 0;
  int p = 1;

  void validate() const;
};

// Gate groups in canonical (parameter-table) order plus the within-layer
// application order. Cached per (family, n).
struct CircuitLayout {
  std::vector<GroupSpec> groups;
  std::vector<int> layer_order;
};
const CircuitLayout& circuit_layout(const AnsatzSpec& spec);

ModelKind default_model(AnsatzFamily family);
std::string family_name(AnsatzFamily family);
AnsatzFamily family_from_name(const std::string& name);

// Polynomial coefficient tables, one (degree+1) x p matrix per angle group;
// entry (j, k) multiplies g^j in Fourier mode k+1.
struct GlobalParams {
  int degree = 4;
  int layers = 0;
  std::vector<Eigen::MatrixXd> coeffs;

  static GlobalParams zero(const AnsatzSpec& spec, int degree = 4);
  static GlobalParams random_init(const AnsatzSpec& spec, double range,
                                  std::uint64_t seed, int degree = 4);

  Eigen::VectorXd pack() const;
  static GlobalParams unpack(const AnsatzSpec& spec, int degree,
                             const Eigen::VectorXd& flat);
  Eigen::Index parameter_count() const;
};

// Per-group, per-layer angles at Hamiltonian parameter g.
std::vector<std::vector<double>> fourier_to_angles(const GlobalParams& params,
                                                   const AnsatzSpec& spec,
                                                   double g);

PureState initial_state(const AnsatzSpec& spec);
PureState prepare_from_angles(const AnsatzSpec& spec,
                              const std::vector<std::vector<double>>& angles);
PureState prepare_state(const AnsatzSpec& spec, const GlobalParams& params,
                        double g);

// Density-matrix evolution; the noise channel acts on both qubits after each
// two-qubit rotation.
MixedState prepare_density_from_angles(
    const AnsatzSpec& spec, const std::vector<std::vector<double>>& angles,
    const NoiseSpec& noise);
MixedState prepare_density(const AnsatzSpec& spec, const GlobalParams& params,
                           double g, const NoiseSpec& noise);

// p -> p+1 with a zero-padded Fourier column; the 1D chain family also grows
// n by 2 so the light cone stays boundary-free.
std::pair<GlobalParams, AnsatzSpec> extend_depth(const GlobalParams& params,
                                                 const AnsatzSpec& spec);
// Inverse of extend_depth on the coefficient tables (drops the last column).
GlobalParams truncate_depth(const GlobalParams& params);

// Generator terms G of the group's factor exp(-i theta/2 G), unit coefficients.
std::vector<PauliString> group_generator(const AnsatzSpec& spec,
                                         int group_index);
void apply_group_inplace(PureState& s, const AnsatzSpec& spec, int group_index,
                         double angle);

// Total gates applied by prepare_state, for bookkeeping and tests.
long gate_count(const AnsatzSpec& spec);

}  // namespace phasetrap
