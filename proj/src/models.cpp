#include "phasetrap/models.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "phasetrap/errors.hpp"

namespace phasetrap {

void HamiltonianSpec::validate() const {
  require(n >= 1, "model requires n >= 1");
  switch (kind) {
    case ModelKind::Tfim1D:
      break;
    case ModelKind::Tfim2D:
      require(rows >= 1 && cols >= 1 && rows * cols == n,
              "2D geometry requires rows*cols == n");
      break;
    case ModelKind::Essh:
    case ModelKind::TEssh:
      require(n % 4 == 0 && n >= 4, "eSSH requires n = 4q");
      break;
  }
}

std::vector<PauliString> build_hamiltonian(const HamiltonianSpec& spec) {
  spec.validate();
  std::vector<PauliString> terms;
  const int n = spec.n;
  switch (spec.kind) {
    case ModelKind::Tfim1D: {
      const int bonds = spec.boundary == Boundary::Periodic ? n : n - 1;
      for (int j = 0; j < bonds; ++j)
        terms.push_back(
            PauliString::pair(Axis::Z, j, Axis::Z, (j + 1) % n, -spec.J));
      for (int j = 0; j < n; ++j)
        terms.push_back(PauliString::single(Axis::X, j, -spec.g));
      break;
    }
    case ModelKind::Tfim2D: {
      const int R = spec.rows, C = spec.cols;
      auto site = [C](int r, int c) { return r * C + c; };
      const bool wrap = spec.boundary == Boundary::Periodic;
      for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c) {
          if (c + 1 < C || (wrap && C > 2))
            terms.push_back(PauliString::pair(Axis::Z, site(r, c), Axis::Z,
                                              site(r, (c + 1) % C), -spec.J));
          if (r + 1 < R || (wrap && R > 2))
            terms.push_back(PauliString::pair(Axis::Z, site(r, c), Axis::Z,
                                              site((r + 1) % R, c), -spec.J));
        }
      if (wrap && C == 2)
        for (int r = 0; r < R; ++r)
          terms.push_back(PauliString::pair(Axis::Z, site(r, 0), Axis::Z,
                                            site(r, 1), -spec.J));
      if (wrap && R == 2)
        for (int c = 0; c < C; ++c)
          terms.push_back(PauliString::pair(Axis::Z, site(0, c), Axis::Z,
                                            site(1, c), -spec.J));
      for (int j = 0; j < n; ++j)
        terms.push_back(PauliString::single(Axis::X, j, -spec.g));
      break;
    }
    case ModelKind::Essh:
    case ModelKind::TEssh: {
      auto bond = [&](int a, int b, double w) {
        terms.push_back(PauliString::pair(Axis::X, a, Axis::X, b, w));
        terms.push_back(PauliString::pair(Axis::Y, a, Axis::Y, b, w));
        terms.push_back(PauliString::pair(Axis::Z, a, Axis::Z, b, w * spec.delta));
      };
      for (int j = 0; j < n / 2; ++j) bond(2 * j, 2 * j + 1, 1.0 - spec.g);
      for (int j = 1; j < n / 2; ++j) bond(2 * j - 1, 2 * j, spec.g);
      if (spec.kind == ModelKind::TEssh)
        for (int j = 0; j < n; ++j)
          terms.push_back(PauliString::single(Axis::X, j, -spec.h));
      break;
    }
  }
  return terms;
}

PureState apply_terms(std::span<const PauliString> terms, const PureState& s) {
  PureState out;
  out.n = s.n;
  out.amps = VectorXcd::Zero(s.dim());
  for (const auto& t : terms) {
    if (t.max_site() >= s.n)
      throw std::out_of_range("Hamiltonian term site out of range");
    accumulate_pauli(t, s.amps, out.amps);
  }
  return out;
}

PureState apply_hamiltonian(const HamiltonianSpec& spec, const PureState& s) {
  require(spec.n == s.n, "Hamiltonian and state sizes must agree");
  auto terms = build_hamiltonian(spec);
  return apply_terms(terms, s);
}

int Spectrum::degeneracy_of(const std::vector<double>& energies) {
  if (energies.empty()) return 0;
  const double tol = 1e-8 * std::max(1.0, std::abs(energies.front()));
  int d = 1;
  while (d < static_cast<int>(energies.size()) &&
         energies[d] - energies.front() <= tol)
    ++d;
  return d;
}

namespace {

VectorXcd random_start(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXcd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = Complex(normal(rng), normal(rng));
  return v;
}

void project_out(VectorXcd& w, const std::vector<VectorXcd>& basis) {
  for (const auto& u : basis) w -= u.dot(w) * u;
}

struct RitzPair {
  double value;
  VectorXcd vector;
  double residual;
};

// One Lanczos pass with full two-pass reorthogonalization against the Krylov
// basis and the supplied deflation vectors. Returns Ritz pairs whose true
// residual meets tol, lowest first.
std::vector<RitzPair> lanczos_pass(const std::vector<PauliString>& terms,
                                   int n, VectorXcd v0,
                                   const std::vector<VectorXcd>& deflate,
                                   int want, const LanczosOptions& opts) {
  const Eigen::Index dim = v0.size();
  const int m_max = std::min<Eigen::Index>(dim, opts.max_krylov);

  std::vector<VectorXcd> basis;
  basis.push_back(std::move(v0));
  std::vector<double> alpha, beta;

  PureState tmp{n, VectorXcd()};
  auto matvec = [&](const VectorXcd& x) {
    tmp.amps = x;
    return apply_terms(terms, tmp).amps;
  };

  auto harvest = [&](int m) {
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      tri(i, i) = alpha[i];
      if (i + 1 < m) tri(i, i + 1) = tri(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    std::vector<RitzPair> out;
    const int take = std::min(want + 2, m);
    for (int r = 0; r < take; ++r) {
      RitzPair pair;
      pair.value = es.eigenvalues()[r];
      pair.vector = VectorXcd::Zero(dim);
      for (int i = 0; i < m; ++i)
        pair.vector += es.eigenvectors()(i, r) * basis[i];
      pair.vector.normalize();
      pair.residual = (matvec(pair.vector) - pair.value * pair.vector).norm();
      out.push_back(std::move(pair));
    }
    return out;
  };

  double last_beta = 0.0;
  for (int j = 0; j < m_max; ++j) {
    VectorXcd w = matvec(basis[j]);
    if (j > 0) w -= beta[j - 1] * basis[j - 1];
    const double a = basis[j].dot(w).real();
    alpha.push_back(a);
    w -= a * basis[j];
    for (int pass = 0; pass < 2; ++pass) {
      project_out(w, deflate);
      project_out(w, basis);
    }
    last_beta = w.norm();
    const bool exhausted = last_beta < 1e-13;
    const bool last = exhausted || j + 1 == m_max;

    if ((j + 1) % 8 == 0 || last) {
      // Cheap estimate first: |beta * last tridiagonal eigvec component|.
      const int m = j + 1;
      Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        tri(i, i) = alpha[i];
        if (i + 1 < m) tri(i, i + 1) = tri(i + 1, i) = beta[i];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
      bool all_ok = m >= want;
      for (int r = 0; r < std::min(want, m) && all_ok; ++r)
        if (last_beta * std::abs(es.eigenvectors()(m - 1, r)) > 0.25 * opts.tol)
          all_ok = false;
      if (all_ok || last) {
        auto pairs = harvest(m);
        std::vector<RitzPair> good;
        for (auto& p : pairs)
          if (p.residual <= opts.tol) good.push_back(std::move(p));
        if (static_cast<int>(good.size()) >= std::min<int>(want, m) || last)
          return good;
      }
    }
    if (exhausted) break;
    beta.push_back(last_beta);
    basis.push_back(w / last_beta);
  }
  return {};
}

}  // namespace

Spectrum lowest_eigenpairs(const HamiltonianSpec& spec, int k,
                           const LanczosOptions& opts) {
  spec.validate();
  require(k >= 1, "lowest_eigenpairs requires k >= 1");
  const Eigen::Index dim = Eigen::Index(1) << spec.n;
  require(k <= dim, "requested more eigenpairs than the dimension");
  auto terms = build_hamiltonian(spec);

  std::mt19937_64 rng(opts.seed);
  std::vector<double> values;
  std::vector<VectorXcd> vectors;

  for (int restart = 0; restart < opts.max_restarts &&
                        static_cast<int>(values.size()) < k;
       ++restart) {
    VectorXcd v0;
    for (int tries = 0; tries < 8; ++tries) {
      v0 = random_start(dim, rng);
      project_out(v0, vectors);
      const double nrm = v0.norm();
      if (nrm > 1e-6) {
        v0 /= nrm;
        break;
      }
      v0.resize(0);
    }
    if (v0.size() == 0) break;  // deflated space exhausted

    const int want = k - static_cast<int>(values.size());
    auto pairs = lanczos_pass(terms, spec.n, std::move(v0), vectors, want, opts);
    for (auto& p : pairs) {
      if (static_cast<int>(values.size()) >= k + 4) break;
      project_out(p.vector, vectors);
      const double nrm = p.vector.norm();
      if (nrm < 0.5) continue;  // duplicate of an already-found pair
      p.vector /= nrm;
      PureState candidate{spec.n, p.vector};
      const double res =
          (apply_terms(terms, candidate).amps - p.value * p.vector).norm();
      if (res > opts.tol) continue;
      values.push_back(p.value);
      vectors.push_back(std::move(p.vector));
    }
  }

  if (static_cast<int>(values.size()) < k)
    throw numeric_error("Lanczos failed to converge " + std::to_string(k) +
                        " eigenpairs (got " + std::to_string(values.size()) +
                        ")");

  std::vector<int> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return values[a] < values[b]; });

  Spectrum out;
  for (int i = 0; i < k; ++i) {
    out.energies.push_back(values[order[i]]);
    out.states.push_back(PureState{spec.n, vectors[order[i]]});
  }
  out.ground_degeneracy = Spectrum::degeneracy_of(out.energies);
  return out;
}

Spectrum ground_space(const HamiltonianSpec& spec, int max_degeneracy,
                      const LanczosOptions& opts) {
  const Eigen::Index dim = Eigen::Index(1) << spec.n;
  int k = std::min<Eigen::Index>(2, dim);
  for (;;) {
    Spectrum s = lowest_eigenpairs(spec, k, opts);
    if (s.ground_degeneracy < k || k >= max_degeneracy || k == dim) {
      const int d = std::min(s.ground_degeneracy, max_degeneracy);
      s.energies.resize(d);
      s.states.resize(d);
      s.ground_degeneracy = d;
      return s;
    }
    k = std::min<Eigen::Index>(std::min(k + 2, max_degeneracy + 1), dim);
  }
}

double relative_gap_value(double e_gs, double e_1) {
  if (e_gs == 0.0)
    throw numeric_error("relative gap undefined for zero ground energy");
  return std::abs((e_1 - e_gs) / e_gs);
}

double relative_gap(const HamiltonianSpec& spec, const LanczosOptions& opts) {
  const Eigen::Index dim = Eigen::Index(1) << spec.n;
  int k = std::min<Eigen::Index>(2, dim);
  for (;;) {
    Spectrum s = lowest_eigenpairs(spec, k, opts);
    if (s.ground_degeneracy < k)
      return relative_gap_value(s.energies.front(),
                                s.energies[s.ground_degeneracy]);
    require(k < dim, "no level above the ground space exists");
    k = std::min<Eigen::Index>(k + 2, dim);
  }
}

double magnetization_x(const PureState& s) {
  double acc = 0.0;
  for (int j = 0; j < s.n; ++j)
    acc += expectation(s, PauliString::single(Axis::X, j));
  return acc / s.n;
}

double partial_reflection_invariant(const PureState& s) {
  require(s.n % 4 == 0, "partial reflection invariant requires n = 4q");
  const int q = s.n / 4;
  std::vector<int> region(2 * q);
  for (int t = 0; t < 2 * q; ++t) region[t] = q + t;

  MatrixXcd rho_i = reduced_density(s, region);
  const std::size_t bits = region.size();
  const std::size_t da = std::size_t(1) << bits;

  // Tr(rho R) with R the bit-reversal permutation of the region.
  auto reverse_bits = [bits](std::size_t x) {
    std::size_t out = 0;
    for (std::size_t t = 0; t < bits; ++t)
      if (x & (std::size_t(1) << t)) out |= std::size_t(1) << (bits - 1 - t);
    return out;
  };
  Complex numerator(0.0, 0.0);
  for (std::size_t a = 0; a < da; ++a) numerator += rho_i(a, reverse_bits(a));

  std::vector<int> half1(region.begin(), region.begin() + q);
  std::vector<int> half2(region.begin() + q, region.end());
  const double p1 = reduced_density(s, half1).squaredNorm();
  const double p2 = reduced_density(s, half2).squaredNorm();

  require(std::abs(numerator.imag()) < 1e-8,
          "partial reflection trace unexpectedly complex");
  return numerator.real() / std::sqrt(0.5 * (p1 + p2));
}

}  // namespace phasetrap
