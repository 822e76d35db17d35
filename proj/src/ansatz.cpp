#include "phasetrap/ansatz.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>

#include "phasetrap/errors.hpp"

namespace phasetrap {

void AnsatzSpec::validate() const {
  require(p >= 1, "ansatz requires p >= 1");
  switch (family) {
    case AnsatzFamily::HvaTfim1D:
      require(n >= 3, "1D chain family requires n >= 3");
      break;
    case AnsatzFamily::HvaTfim2DSymmetric:
      require(n == 9, "symmetric 2D family is defined on the 3x3 grid");
      break;
    case AnsatzFamily::EsshTrivial:
    case AnsatzFamily::EsshTopological:
      require(n % 4 == 0 && n >= 4, "eSSH families require n = 4q");
      break;
  }
}

ModelKind default_model(AnsatzFamily family) {
  switch (family) {
    case AnsatzFamily::HvaTfim1D: return ModelKind::Tfim1D;
    case AnsatzFamily::HvaTfim2DSymmetric: return ModelKind::Tfim2D;
    default: return ModelKind::Essh;
  }
}

std::string family_name(AnsatzFamily family) {
  switch (family) {
    case AnsatzFamily::HvaTfim1D: return "hva_tfim1d";
    case AnsatzFamily::HvaTfim2DSymmetric: return "hva_tfim2d_symmetric";
    case AnsatzFamily::EsshTrivial: return "essh_trivial";
    case AnsatzFamily::EsshTopological: return "essh_topological";
  }
  return "?";
}

AnsatzFamily family_from_name(const std::string& name) {
  if (name == "hva_tfim1d") return AnsatzFamily::HvaTfim1D;
  if (name == "hva_tfim2d_symmetric") return AnsatzFamily::HvaTfim2DSymmetric;
  if (name == "essh_trivial") return AnsatzFamily::EsshTrivial;
  if (name == "essh_topological") return AnsatzFamily::EsshTopological;
  throw std::invalid_argument("unknown ansatz family: " + name);
}

namespace {

CircuitLayout make_layout(AnsatzFamily family, int n) {
  CircuitLayout layout;
  switch (family) {
    case AnsatzFamily::HvaTfim1D: {
      GroupSpec zz{"zz", AngleBasis::Sine, {}};
      for (int j = 0; j < n; ++j)
        zz.gates.push_back({GateKind::Zz, j, (j + 1) % n});
      GroupSpec x{"x", AngleBasis::Cosine, {}};
      for (int j = 0; j < n; ++j) x.gates.push_back({GateKind::Rx, j});
      layout.groups = {std::move(zz), std::move(x)};
      layout.layer_order = {0, 1};
      break;
    }
    case AnsatzFamily::HvaTfim2DSymmetric: {
      // 3x3 grid, row-major sites, Q4 central. Bond and site partitions
      // follow the lattice's reflection/rotation orbits.
      const int center = 4;
      GroupSpec zz_outer{"zz_outer", AngleBasis::Sine, {}};
      GroupSpec zz_center{"zz_center", AngleBasis::Sine, {}};
      auto add_bond = [&](int a, int b) {
        Gate gate{GateKind::Zz, a, b};
        if (a == center || b == center)
          zz_center.gates.push_back(gate);
        else
          zz_outer.gates.push_back(gate);
      };
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
          if (c + 1 < 3) add_bond(3 * r + c, 3 * r + c + 1);
          if (r + 1 < 3) add_bond(3 * r + c, 3 * (r + 1) + c);
        }
      GroupSpec x_corner{"x_corner", AngleBasis::Cosine, {}};
      for (int j : {0, 2, 6, 8}) x_corner.gates.push_back({GateKind::Rx, j});
      GroupSpec x_edge{"x_edge", AngleBasis::Cosine, {}};
      for (int j : {1, 3, 5, 7}) x_edge.gates.push_back({GateKind::Rx, j});
      GroupSpec x_center{"x_center", AngleBasis::Cosine, {}};
      x_center.gates.push_back({GateKind::Rx, center});
      layout.groups = {std::move(zz_outer), std::move(zz_center),
                       std::move(x_corner), std::move(x_edge),
                       std::move(x_center)};
      // Rightmost printed factor acts first: zz_center, zz_outer, then the
      // single-qubit rotations from the central site outward.
      layout.layer_order = {1, 0, 4, 3, 2};
      break;
    }
    case AnsatzFamily::EsshTrivial:
    case AnsatzFamily::EsshTopological: {
      GroupSpec zz_odd{"zz_odd", AngleBasis::Sine, {}};
      GroupSpec xy_odd{"xy_odd", AngleBasis::Cosine, {}};
      for (int j = 0; j < n / 2; ++j) {
        zz_odd.gates.push_back({GateKind::Zz, 2 * j, 2 * j + 1});
        xy_odd.gates.push_back({GateKind::XyPair, 2 * j, 2 * j + 1});
      }
      GroupSpec zz_even{"zz_even", AngleBasis::Sine, {}};
      GroupSpec xy_even{"xy_even", AngleBasis::Cosine, {}};
      for (int j = 1; j < n / 2; ++j) {
        zz_even.gates.push_back({GateKind::Zz, 2 * j - 1, 2 * j});
        xy_even.gates.push_back({GateKind::XyPair, 2 * j - 1, 2 * j});
      }
      layout.groups = {std::move(zz_odd), std::move(xy_odd),
                       std::move(zz_even), std::move(xy_even)};
      layout.layer_order = family == AnsatzFamily::EsshTrivial
                               ? std::vector<int>{2, 3, 0, 1}
                               : std::vector<int>{0, 1, 2, 3};
      break;
    }
  }
  return layout;
}

}  // namespace

const CircuitLayout& circuit_layout(const AnsatzSpec& spec) {
  spec.validate();
  static std::mutex mutex;
  static std::map<std::pair<AnsatzFamily, int>, CircuitLayout> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto key = std::make_pair(spec.family, spec.n);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, make_layout(spec.family, spec.n)).first;
  return it->second;
}

GlobalParams GlobalParams::zero(const AnsatzSpec& spec, int degree) {
  const auto& layout = circuit_layout(spec);
  GlobalParams params;
  params.degree = degree;
  params.layers = spec.p;
  for (std::size_t q = 0; q < layout.groups.size(); ++q)
    params.coeffs.push_back(Eigen::MatrixXd::Zero(degree + 1, spec.p));
  return params;
}

GlobalParams GlobalParams::random_init(const AnsatzSpec& spec, double range,
                                       std::uint64_t seed, int degree) {
  GlobalParams params = zero(spec, degree);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-range, range);
  for (auto& table : params.coeffs)
    for (Eigen::Index k = 0; k < table.cols(); ++k)
      for (Eigen::Index j = 0; j < table.rows(); ++j) table(j, k) = uni(rng);
  return params;
}

Eigen::Index GlobalParams::parameter_count() const {
  Eigen::Index count = 0;
  for (const auto& t : coeffs) count += t.size();
  return count;
}

Eigen::VectorXd GlobalParams::pack() const {
  Eigen::VectorXd flat(parameter_count());
  Eigen::Index at = 0;
  for (const auto& t : coeffs) {
    flat.segment(at, t.size()) =
        Eigen::Map<const Eigen::VectorXd>(t.data(), t.size());
    at += t.size();
  }
  return flat;
}

GlobalParams GlobalParams::unpack(const AnsatzSpec& spec, int degree,
                                  const Eigen::VectorXd& flat) {
  GlobalParams params = zero(spec, degree);
  Eigen::Index at = 0;
  for (auto& t : params.coeffs) {
    require(at + t.size() <= flat.size(), "parameter vector too short");
    t = Eigen::Map<const Eigen::MatrixXd>(flat.data() + at, t.rows(), t.cols());
    at += t.size();
  }
  require(at == flat.size(), "parameter vector size mismatch");
  return params;
}

std::vector<std::vector<double>> fourier_to_angles(const GlobalParams& params,
                                                   const AnsatzSpec& spec,
                                                   double g) {
  const auto& layout = circuit_layout(spec);
  require(params.layers == spec.p, "parameter table layer count mismatch");
  require(params.coeffs.size() == layout.groups.size(),
          "parameter table group count mismatch");
  const int p = spec.p;

  // Fourier mode amplitudes: c_k = sum_j coeff(j, k) g^j.
  std::vector<std::vector<double>> out(layout.groups.size());
  std::vector<double> modes(p);
  for (std::size_t q = 0; q < layout.groups.size(); ++q) {
    const auto& table = params.coeffs[q];
    for (int k = 0; k < p; ++k) {
      double acc = 0.0, gp = 1.0;
      for (int j = 0; j <= params.degree; ++j, gp *= g) acc += table(j, k) * gp;
      modes[k] = acc;
    }
    out[q].resize(p);
    const bool sine = layout.groups[q].basis == AngleBasis::Sine;
    for (int j = 1; j <= p; ++j) {
      double angle = 0.0;
      for (int k = 1; k <= p; ++k) {
        const double arg =
            (k - 0.5) * (j - 0.5) * std::numbers::pi / static_cast<double>(p);
        angle += modes[k - 1] * (sine ? std::sin(arg) : std::cos(arg));
      }
      out[q][j - 1] = angle;
    }
  }
  return out;
}

PureState initial_state(const AnsatzSpec& spec) {
  spec.validate();
  switch (spec.family) {
    case AnsatzFamily::HvaTfim1D:
    case AnsatzFamily::HvaTfim2DSymmetric:
      return PureState::zero(spec.n);
    case AnsatzFamily::EsshTrivial:
    case AnsatzFamily::EsshTopological: {
      // Product of singlets (|01> - |10>)/sqrt(2) over the listed pairs.
      std::vector<std::pair<int, int>> pairs;
      if (spec.family == AnsatzFamily::EsshTrivial) {
        for (int j = 0; j < spec.n / 2; ++j) pairs.push_back({2 * j, 2 * j + 1});
      } else {
        pairs.push_back({0, spec.n - 1});
        for (int j = 0; j + 1 < spec.n / 2; ++j)
          pairs.push_back({2 * j + 1, 2 * j + 2});
      }
      const std::size_t dim = std::size_t(1) << spec.n;
      const double amp = std::pow(1.0 / std::sqrt(2.0), pairs.size());
      PureState s;
      s.n = spec.n;
      s.amps = VectorXcd::Zero(dim);
      for (std::size_t b = 0; b < dim; ++b) {
        double value = amp;
        for (const auto& [lo, hi] : pairs) {
          const bool bl = b & (std::size_t(1) << lo);
          const bool bh = b & (std::size_t(1) << hi);
          if (bl == bh) {
            value = 0.0;
            break;
          }
          if (bl) value = -value;  // |1>_lo |0>_hi carries the minus sign
        }
        if (value != 0.0) s.amps[b] = value;
      }
      return s;
    }
  }
  throw std::logic_error("unreachable");
}

namespace {

void apply_gate(PureState& s, const Gate& gate, double angle) {
  switch (gate.kind) {
    case GateKind::Rx: rx_inplace(s, gate.a, angle); break;
    case GateKind::Zz: zz_inplace(s, gate.a, gate.b, angle); break;
    // exp(-i angle/2 (XX+YY)) realized by the block rotation at twice the
    // nominal angle.
    case GateKind::XyPair: xy_pair_inplace(s, gate.a, gate.b, 2.0 * angle); break;
  }
}

void apply_gate(MixedState& m, const Gate& gate, double angle,
                const NoiseSpec& noise) {
  switch (gate.kind) {
    case GateKind::Rx:
      rx_inplace(m, gate.a, angle);
      return;
    case GateKind::Zz:
      zz_inplace(m, gate.a, gate.b, angle);
      break;
    case GateKind::XyPair:
      xy_pair_inplace(m, gate.a, gate.b, 2.0 * angle);
      break;
  }
  const int sites[2] = {gate.a, gate.b};
  noise_inplace(m, noise, sites);
}

}  // namespace

void apply_group_inplace(PureState& s, const AnsatzSpec& spec, int group_index,
                         double angle) {
  const auto& layout = circuit_layout(spec);
  for (const auto& gate : layout.groups[group_index].gates)
    apply_gate(s, gate, angle);
}

std::vector<PauliString> group_generator(const AnsatzSpec& spec,
                                         int group_index) {
  const auto& layout = circuit_layout(spec);
  std::vector<PauliString> terms;
  for (const auto& gate : layout.groups[group_index].gates) {
    switch (gate.kind) {
      case GateKind::Rx:
        terms.push_back(PauliString::single(Axis::X, gate.a));
        break;
      case GateKind::Zz:
        terms.push_back(PauliString::pair(Axis::Z, gate.a, Axis::Z, gate.b));
        break;
      case GateKind::XyPair:
        terms.push_back(PauliString::pair(Axis::X, gate.a, Axis::X, gate.b));
        terms.push_back(PauliString::pair(Axis::Y, gate.a, Axis::Y, gate.b));
        break;
    }
  }
  return terms;
}

PureState prepare_from_angles(const AnsatzSpec& spec,
                              const std::vector<std::vector<double>>& angles) {
  const auto& layout = circuit_layout(spec);
  require(angles.size() == layout.groups.size(), "angle group count mismatch");
  for (const auto& a : angles)
    require(static_cast<int>(a.size()) == spec.p, "angle layer count mismatch");
  PureState s = initial_state(spec);
  for (int layer = 0; layer < spec.p; ++layer)
    for (int q : layout.layer_order)
      for (const auto& gate : layout.groups[q].gates)
        apply_gate(s, gate, angles[q][layer]);
  return s;
}

PureState prepare_state(const AnsatzSpec& spec, const GlobalParams& params,
                        double g) {
  return prepare_from_angles(spec, fourier_to_angles(params, spec, g));
}

MixedState prepare_density_from_angles(
    const AnsatzSpec& spec, const std::vector<std::vector<double>>& angles,
    const NoiseSpec& noise) {
  noise.validate();
  const auto& layout = circuit_layout(spec);
  require(angles.size() == layout.groups.size(), "angle group count mismatch");
  MixedState m = MixedState::from_pure(initial_state(spec));
  for (int layer = 0; layer < spec.p; ++layer)
    for (int q : layout.layer_order)
      for (const auto& gate : layout.groups[q].gates)
        apply_gate(m, gate, angles[q][layer], noise);
  return m;
}

MixedState prepare_density(const AnsatzSpec& spec, const GlobalParams& params,
                           double g, const NoiseSpec& noise) {
  return prepare_density_from_angles(spec, fourier_to_angles(params, spec, g),
                                     noise);
}

std::pair<GlobalParams, AnsatzSpec> extend_depth(const GlobalParams& params,
                                                 const AnsatzSpec& spec) {
  AnsatzSpec next = spec;
  next.p = spec.p + 1;
  if (spec.family == AnsatzFamily::HvaTfim1D) next.n = spec.n + 2;
  GlobalParams out;
  out.degree = params.degree;
  out.layers = next.p;
  for (const auto& table : params.coeffs) {
    Eigen::MatrixXd bigger = Eigen::MatrixXd::Zero(table.rows(), next.p);
    bigger.leftCols(table.cols()) = table;
    out.coeffs.push_back(std::move(bigger));
  }
  return {std::move(out), next};
}

GlobalParams truncate_depth(const GlobalParams& params) {
  require(params.layers >= 2, "cannot truncate below one layer");
  GlobalParams out;
  out.degree = params.degree;
  out.layers = params.layers - 1;
  for (const auto& table : params.coeffs)
    out.coeffs.push_back(table.leftCols(params.layers - 1));
  return out;
}

long gate_count(const AnsatzSpec& spec) {
  const auto& layout = circuit_layout(spec);
  long per_layer = 0;
  for (const auto& g : layout.groups)
    per_layer += static_cast<long>(g.gates.size());
  return per_layer * spec.p;
}

}  // namespace phasetrap
