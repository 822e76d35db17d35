#include "phasetrap/qsim.hpp"

#include <bit>
#include <cmath>

#include "phasetrap/errors.hpp"

namespace phasetrap {

namespace {

void check_qubit_count(int n) {
  require(n >= 1 && n <= 26, "qubit count must be in [1, 26]");
}

void check_site(int n, int site) {
  if (site < 0 || site >= n) throw std::out_of_range("site index out of range");
}

void check_pair(int n, int a, int b) {
  check_site(n, a);
  check_site(n, b);
  if (a == b) throw std::out_of_range("two-qubit gate requires distinct sites");
}

void check_obs_sites(int n, const PauliString& p) {
  if (p.max_site() >= n) throw std::out_of_range("observable site out of range");
}

// i^k for k mod 4
Complex i_power(int k) {
  switch (k & 3) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

}  // namespace

// --- states -----------------------------------------------------------------

PureState PureState::zero(int n) {
  check_qubit_count(n);
  PureState s;
  s.n = n;
  s.amps = VectorXcd::Zero(Eigen::Index(1) << n);
  s.amps[0] = 1.0;
  return s;
}

PureState PureState::from_amplitudes(int n, VectorXcd a) {
  check_qubit_count(n);
  require(a.size() == (Eigen::Index(1) << n),
          "amplitude array length must be 2^n");
  PureState s;
  s.n = n;
  s.amps = std::move(a);
  return s;
}

double PureState::norm_error() const {
  return std::abs(amps.squaredNorm() - 1.0);
}

MixedState MixedState::from_pure(const PureState& s) {
  MixedState m;
  m.n = s.n;
  m.rho = s.amps * s.amps.adjoint();
  return m;
}

double MixedState::trace_error() const {
  return std::abs(rho.trace().real() - 1.0) + std::abs(rho.trace().imag());
}

void NoiseSpec::validate() const {
  require(rate >= 0.0 && rate <= 1.0, "noise rate must be in [0, 1]");
}

// --- pure-state gates -------------------------------------------------------

void rx_inplace(PureState& s, int site, double theta) {
  check_site(s.n, site);
  const double c = std::cos(0.5 * theta);
  const Complex mis(0.0, -std::sin(0.5 * theta));
  const std::size_t dim = static_cast<std::size_t>(s.dim());
  const std::size_t bit = std::size_t(1) << site;
  Complex* a = s.amps.data();
  for (std::size_t base = 0; base < dim; base += 2 * bit) {
    for (std::size_t i = base; i < base + bit; ++i) {
      const Complex a0 = a[i];
      const Complex a1 = a[i | bit];
      a[i] = c * a0 + mis * a1;
      a[i | bit] = mis * a0 + c * a1;
    }
  }
}

void zz_inplace(PureState& s, int site_a, int site_b, double gamma) {
  check_pair(s.n, site_a, site_b);
  const Complex minus = std::polar(1.0, -0.5 * gamma);  // equal bits
  const Complex plus = std::polar(1.0, 0.5 * gamma);    // differing bits
  const std::size_t dim = static_cast<std::size_t>(s.dim());
  const std::size_t mask =
      (std::size_t(1) << site_a) | (std::size_t(1) << site_b);
  Complex* a = s.amps.data();
  for (std::size_t i = 0; i < dim; ++i)
    a[i] *= (std::popcount(i & mask) == 1) ? plus : minus;
}

void xy_pair_inplace(PureState& s, int site_a, int site_b, double beta) {
  check_pair(s.n, site_a, site_b);
  const double c = std::cos(0.5 * beta);
  const Complex mis(0.0, -std::sin(0.5 * beta));
  const std::size_t dim = static_cast<std::size_t>(s.dim());
  const std::size_t bit_a = std::size_t(1) << site_a;
  const std::size_t bit_b = std::size_t(1) << site_b;
  const std::size_t mask = bit_a | bit_b;
  Complex* a = s.amps.data();
  for (std::size_t i = 0; i < dim; ++i) {
    if ((i & mask) != bit_b) continue;  // visit each {|01>,|10>} block once
    const std::size_t j = i ^ mask;
    const Complex a01 = a[i];
    const Complex a10 = a[j];
    a[i] = c * a01 + mis * a10;
    a[j] = mis * a01 + c * a10;
  }
}

PureState apply_rx(PureState s, int site, double theta) {
  rx_inplace(s, site, theta);
  return s;
}

PureState apply_zz(PureState s, int site_a, int site_b, double gamma) {
  zz_inplace(s, site_a, site_b, gamma);
  return s;
}

PureState apply_xy_pair(PureState s, int site_a, int site_b, double beta) {
  xy_pair_inplace(s, site_a, site_b, beta);
  return s;
}

// --- density-matrix gates ---------------------------------------------------

namespace {

// rho -> U rho with U acting on one site: mixes row pairs inside each column.
template <typename Update>
void left_apply_single(MatrixXcd& rho, int site, Update update) {
  const Eigen::Index dim = rho.rows();
  const std::size_t bit = std::size_t(1) << site;
  for (Eigen::Index col = 0; col < dim; ++col) {
    Complex* a = rho.col(col).data();
    for (std::size_t base = 0; base < static_cast<std::size_t>(dim);
         base += 2 * bit)
      for (std::size_t i = base; i < base + bit; ++i) update(a[i], a[i | bit]);
  }
}

// rho -> rho U^dagger: mixes column pairs (whole-column vector ops).
template <typename UpdateCols>
void right_apply_single(MatrixXcd& rho, int site, UpdateCols update) {
  const std::size_t dim = static_cast<std::size_t>(rho.rows());
  const std::size_t bit = std::size_t(1) << site;
  for (std::size_t base = 0; base < dim; base += 2 * bit)
    for (std::size_t j = base; j < base + bit; ++j)
      update(rho.col(j), rho.col(j | bit));
}

}  // namespace

void rx_inplace(MixedState& m, int site, double theta) {
  check_site(m.n, site);
  const double c = std::cos(0.5 * theta);
  const Complex mis(0.0, -std::sin(0.5 * theta));
  left_apply_single(m.rho, site, [&](Complex& r0, Complex& r1) {
    const Complex a0 = r0, a1 = r1;
    r0 = c * a0 + mis * a1;
    r1 = mis * a0 + c * a1;
  });
  const Complex pis = std::conj(mis);
  right_apply_single(m.rho, site, [&](auto c0, auto c1) {
    VectorXcd t0 = c * c0 + pis * c1;
    c1 = pis * c0.eval() + c * c1;
    c0 = t0;
  });
}

void zz_inplace(MixedState& m, int site_a, int site_b, double gamma) {
  check_pair(m.n, site_a, site_b);
  // Diagonal gate: rho_ij *= d_i conj(d_j); only cross-parity entries rotate.
  const Complex plus = std::polar(1.0, gamma);
  const Complex minus = std::polar(1.0, -gamma);
  const std::size_t dim = static_cast<std::size_t>(m.dim());
  const std::size_t mask =
      (std::size_t(1) << site_a) | (std::size_t(1) << site_b);
  for (std::size_t j = 0; j < dim; ++j) {
    const bool pj = std::popcount(j & mask) == 1;
    Complex* col = m.rho.col(j).data();
    for (std::size_t i = 0; i < dim; ++i) {
      const bool pi = std::popcount(i & mask) == 1;
      if (pi != pj) col[i] *= pi ? plus : minus;
    }
  }
}

void xy_pair_inplace(MixedState& m, int site_a, int site_b, double beta) {
  check_pair(m.n, site_a, site_b);
  const double c = std::cos(0.5 * beta);
  const Complex mis(0.0, -std::sin(0.5 * beta));
  const std::size_t dim = static_cast<std::size_t>(m.dim());
  const std::size_t bit_a = std::size_t(1) << site_a;
  const std::size_t bit_b = std::size_t(1) << site_b;
  const std::size_t mask = bit_a | bit_b;
  // Left: U rho
  for (std::size_t col = 0; col < dim; ++col) {
    Complex* a = m.rho.col(col).data();
    for (std::size_t i = 0; i < dim; ++i) {
      if ((i & mask) != bit_b) continue;
      const std::size_t j = i ^ mask;
      const Complex a01 = a[i], a10 = a[j];
      a[i] = c * a01 + mis * a10;
      a[j] = mis * a01 + c * a10;
    }
  }
  // Right: rho U^dagger
  const Complex pis = std::conj(mis);
  for (std::size_t j = 0; j < dim; ++j) {
    if ((j & mask) != bit_b) continue;
    const std::size_t k = j ^ mask;
    VectorXcd t = c * m.rho.col(j) + pis * m.rho.col(k);
    m.rho.col(k) = pis * m.rho.col(j).eval() + c * m.rho.col(k);
    m.rho.col(j) = t;
  }
}

// --- channels ---------------------------------------------------------------

namespace {

void amplitude_damp_site(MatrixXcd& rho, int site, double eps) {
  const double keep = std::sqrt(1.0 - eps);
  const std::size_t dim = static_cast<std::size_t>(rho.rows());
  const std::size_t bit = std::size_t(1) << site;
  for (std::size_t cj = 0; cj < dim; ++cj) {
    if (cj & bit) continue;
    const std::size_t cj1 = cj | bit;
    for (std::size_t ri = 0; ri < dim; ++ri) {
      if (ri & bit) continue;
      const std::size_t ri1 = ri | bit;
      // 2x2 block over the site bit in (row, col)
      rho(ri, cj) += eps * rho(ri1, cj1);
      rho(ri, cj1) *= keep;
      rho(ri1, cj) *= keep;
      rho(ri1, cj1) *= 1.0 - eps;
    }
  }
}

void depolarize_site(MatrixXcd& rho, int site, double eps) {
  const std::size_t dim = static_cast<std::size_t>(rho.rows());
  const std::size_t bit = std::size_t(1) << site;
  for (std::size_t cj = 0; cj < dim; ++cj) {
    if (cj & bit) continue;
    const std::size_t cj1 = cj | bit;
    for (std::size_t ri = 0; ri < dim; ++ri) {
      if (ri & bit) continue;
      const std::size_t ri1 = ri | bit;
      const Complex mixed = 0.5 * (rho(ri, cj) + rho(ri1, cj1));
      rho(ri, cj) = (1.0 - eps) * rho(ri, cj) + eps * mixed;
      rho(ri1, cj1) = (1.0 - eps) * rho(ri1, cj1) + eps * mixed;
      rho(ri, cj1) *= 1.0 - eps;
      rho(ri1, cj) *= 1.0 - eps;
    }
  }
}

}  // namespace

void noise_inplace(MixedState& m, const NoiseSpec& spec,
                   std::span<const int> sites) {
  spec.validate();
  if (spec.kind == NoiseKind::None || spec.rate == 0.0) return;
  for (int site : sites) {
    check_site(m.n, site);
    if (spec.kind == NoiseKind::AmplitudeDamping)
      amplitude_damp_site(m.rho, site, spec.rate);
    else
      depolarize_site(m.rho, site, spec.rate);
  }
}

MixedState apply_noise(MixedState m, const NoiseSpec& spec,
                       std::span<const int> sites) {
  noise_inplace(m, spec, sites);
  return m;
}

MixedState global_depolarize(MixedState m, double eps) {
  require(eps >= 0.0 && eps <= 1.0, "noise rate must be in [0, 1]");
  const double dim = static_cast<double>(m.dim());
  m.rho *= (1.0 - eps);
  m.rho.diagonal().array() += eps / dim;
  return m;
}

// --- measurement ------------------------------------------------------------

double expectation(const PureState& s, const PauliString& obs) {
  check_obs_sites(s.n, obs);
  const std::uint64_t flip = obs.flip_mask();
  const std::uint64_t phase = obs.phase_mask();
  const Complex yph = i_power(obs.y_count());
  const std::size_t dim = static_cast<std::size_t>(s.dim());
  const Complex* a = s.amps.data();
  Complex acc(0.0, 0.0);
  for (std::size_t b = 0; b < dim; ++b) {
    const double sign = (std::popcount(b & phase) & 1) ? -1.0 : 1.0;
    acc += std::conj(a[b ^ flip]) * (sign * a[b]);
  }
  acc *= yph * obs.coeff();
  return acc.real();
}

double expectation(const MixedState& m, const PauliString& obs) {
  check_obs_sites(m.n, obs);
  const std::uint64_t flip = obs.flip_mask();
  const std::uint64_t phase = obs.phase_mask();
  const Complex yph = i_power(obs.y_count());
  const std::size_t dim = static_cast<std::size_t>(m.dim());
  Complex acc(0.0, 0.0);
  for (std::size_t b = 0; b < dim; ++b) {
    const double sign = (std::popcount(b & phase) & 1) ? -1.0 : 1.0;
    acc += sign * m.rho(b ^ flip, b);
  }
  acc *= yph * obs.coeff();
  return acc.real();
}

double expectation(const PureState& s, std::span<const PauliString> sum) {
  double acc = 0.0;
  for (const auto& p : sum) acc += expectation(s, p);
  return acc;
}

double expectation(const MixedState& m, std::span<const PauliString> sum) {
  double acc = 0.0;
  for (const auto& p : sum) acc += expectation(m, p);
  return acc;
}

void accumulate_pauli(const PauliString& p, const VectorXcd& in,
                      VectorXcd& out) {
  const std::uint64_t flip = p.flip_mask();
  const std::uint64_t phase = p.phase_mask();
  const std::size_t dim = static_cast<std::size_t>(in.size());
  const Complex* src = in.data();
  Complex* dst = out.data();
  if (flip == 0) {
    const double c = p.coeff();
    for (std::size_t b = 0; b < dim; ++b) {
      const double sign = (std::popcount(b & phase) & 1) ? -c : c;
      dst[b] += sign * src[b];
    }
    return;
  }
  const Complex scale = i_power(p.y_count()) * p.coeff();
  for (std::size_t b = 0; b < dim; ++b) {
    const double sign = (std::popcount(b & phase) & 1) ? -1.0 : 1.0;
    dst[b ^ flip] += scale * (sign * src[b]);
  }
}

double fidelity(const PureState& a, std::span<const PureState> b_space) {
  require(!b_space.empty(), "fidelity requires a non-empty reference space");
  for (const auto& b : b_space)
    require(b.n == a.n, "fidelity requires matching qubit counts");
  for (std::size_t i = 0; i < b_space.size(); ++i) {
    for (std::size_t j = i; j < b_space.size(); ++j) {
      const Complex g = b_space[i].amps.dot(b_space[j].amps);
      const double target = (i == j) ? 1.0 : 0.0;
      require(std::abs(g - target) < 1e-8,
              "fidelity reference space must be orthonormal");
    }
  }
  double f = 0.0;
  for (const auto& b : b_space) f += std::norm(b.amps.dot(a.amps));
  return f;
}

MatrixXcd reduced_density(const PureState& s, std::span<const int> sites) {
  require(!sites.empty(), "reduced_density requires a nonempty site set");
  std::vector<int> sub(sites.begin(), sites.end());
  std::vector<bool> in_sub(s.n, false);
  for (int q : sub) {
    check_site(s.n, q);
    require(!in_sub[q], "reduced_density sites must be distinct");
    in_sub[q] = true;
  }
  std::vector<int> env;
  for (int q = 0; q < s.n; ++q)
    if (!in_sub[q]) env.push_back(q);

  const std::size_t da = std::size_t(1) << sub.size();
  const std::size_t db = std::size_t(1) << env.size();

  auto scatter = [](const std::vector<int>& qs, std::size_t bits) {
    std::size_t out = 0;
    for (std::size_t t = 0; t < qs.size(); ++t)
      if (bits & (std::size_t(1) << t)) out |= std::size_t(1) << qs[t];
    return out;
  };
  std::vector<std::size_t> offset_a(da), offset_b(db);
  for (std::size_t x = 0; x < da; ++x) offset_a[x] = scatter(sub, x);
  for (std::size_t x = 0; x < db; ++x) offset_b[x] = scatter(env, x);

  MatrixXcd rho = MatrixXcd::Zero(da, da);
  VectorXcd slice(da);
  for (std::size_t b = 0; b < db; ++b) {
    for (std::size_t x = 0; x < da; ++x)
      slice[x] = s.amps[offset_a[x] | offset_b[b]];
    rho.noalias() += slice * slice.adjoint();
  }
  return rho;
}

double entanglement_entropy(const PureState& s,
                            std::span<const int> subsystem) {
  require(!subsystem.empty() &&
              static_cast<int>(subsystem.size()) < s.n,
          "entropy subsystem must be a nonempty proper subset");
  MatrixXcd rho = reduced_density(s, subsystem);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho,
                                              Eigen::EigenvaluesOnly);
  double entropy = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = es.eigenvalues()[i];
    require(lam > -1e-9, "reduced density matrix has a negative eigenvalue");
    if (lam > 1e-14) entropy -= lam * std::log2(lam);
  }
  return entropy;
}

PureState permute_sites(const PureState& s, std::span<const int> perm) {
  require(static_cast<int>(perm.size()) == s.n,
          "permutation must cover all sites");
  PureState out;
  out.n = s.n;
  out.amps = VectorXcd::Zero(s.dim());
  const std::size_t dim = static_cast<std::size_t>(s.dim());
  for (std::size_t b = 0; b < dim; ++b) {
    std::size_t target = 0;
    for (int q = 0; q < s.n; ++q)
      if (b & (std::size_t(1) << q)) target |= std::size_t(1) << perm[q];
    out.amps[target] = s.amps[b];
  }
  return out;
}

}  // namespace phasetrap
