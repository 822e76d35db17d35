#include "phasetrap/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "phasetrap/errors.hpp"
#include "phasetrap/parallel.hpp"
#include "phasetrap/rng.hpp"

namespace phasetrap {

namespace {

std::vector<PauliFactor> permuted_factors(const PauliString& p,
                                          const std::vector<int>& perm) {
  std::vector<PauliFactor> out;
  out.reserve(p.factors().size());
  for (const auto& f : p.factors()) out.push_back({perm[f.site], f.axis});
  std::sort(out.begin(), out.end());
  return out;
}

std::map<std::vector<PauliFactor>, int> index_map(
    const std::vector<PauliString>& observables) {
  std::map<std::vector<PauliFactor>, int> map;
  for (std::size_t i = 0; i < observables.size(); ++i)
    map[observables[i].factors()] = static_cast<int>(i);
  return map;
}

// Orbit partition generated by the permutations (images outside the set are
// simply not part of the partition).
void compute_orbits(ObservableSet& set) {
  const auto lookup = index_map(set.observables);
  std::vector<int> orbit_of(set.size(), -1);
  set.symmetry_orbits.clear();
  for (int i = 0; i < set.size(); ++i) {
    if (orbit_of[i] >= 0) continue;
    std::vector<int> orbit;
    std::vector<int> stack{i};
    orbit_of[i] = static_cast<int>(set.symmetry_orbits.size());
    while (!stack.empty()) {
      int cur = stack.back();
      stack.pop_back();
      orbit.push_back(cur);
      for (const auto& perm : set.symmetry_permutations) {
        auto factors = permuted_factors(set.observables[cur], perm);
        auto it = lookup.find(factors);
        if (it == lookup.end() || orbit_of[it->second] >= 0) continue;
        orbit_of[it->second] = orbit_of[i];
        stack.push_back(it->second);
      }
    }
    std::sort(orbit.begin(), orbit.end());
    set.symmetry_orbits.push_back(std::move(orbit));
  }
}

void canonical_sort(std::vector<PauliString>& observables) {
  std::sort(observables.begin(), observables.end(),
            PauliString::canonical_less);
}

// Basis pattern: site -> required measurement axis. An observable fits a
// pattern when every factor's axis matches the pattern at its site.
using Pattern = std::vector<Axis>;

bool pattern_covers(const Pattern& pattern, const PauliString& p) {
  for (const auto& f : p.factors())
    if (pattern[f.site] != f.axis) return false;
  return true;
}

void assign_groups(ObservableSet& set, const std::vector<Pattern>& patterns) {
  set.measurement_group.assign(set.size(), -1);
  std::vector<int> used(patterns.size(), 0);
  for (int i = 0; i < set.size(); ++i) {
    for (std::size_t g = 0; g < patterns.size(); ++g) {
      if (pattern_covers(patterns[g], set.observables[i])) {
        set.measurement_group[i] = static_cast<int>(g);
        used[g] = 1;
        break;
      }
    }
    require(set.measurement_group[i] >= 0,
            "observable " + set.observables[i].name() +
                " not coverable by the measurement protocols");
  }
  // Renumber so group ids are consecutive over non-empty patterns.
  std::vector<int> renumber(patterns.size(), -1);
  int next = 0;
  for (std::size_t g = 0; g < patterns.size(); ++g)
    if (used[g]) renumber[g] = next++;
  for (auto& g : set.measurement_group) g = renumber[g];
  set.group_count = next;
}

// Patterns for chain sets: three uniform bases, then for each mixed axis
// pair (a, b) one pattern per address bit and polarity; any two distinct
// sites differ in some bit, so every mixed pair is covered.
std::vector<Pattern> chain_patterns(int n) {
  std::vector<Pattern> patterns;
  patterns.push_back(Pattern(n, Axis::X));
  patterns.push_back(Pattern(n, Axis::Y));
  patterns.push_back(Pattern(n, Axis::Z));
  int bits = 1;
  while ((1 << bits) < n) ++bits;
  const std::pair<Axis, Axis> mixed[3] = {
      {Axis::X, Axis::Y}, {Axis::Y, Axis::Z}, {Axis::Z, Axis::X}};
  for (const auto& [a, b] : mixed)
    for (int t = 0; t < bits; ++t)
      for (int polarity = 0; polarity < 2; ++polarity) {
        Pattern pat(n);
        for (int s = 0; s < n; ++s)
          pat[s] = (((s >> t) & 1) == polarity) ? a : b;
        patterns.push_back(std::move(pat));
      }
  return patterns;
}

std::vector<PauliString> weight_le2_strings(int n) {
  std::vector<PauliString> obs;
  for (int s = 0; s < n; ++s)
    for (Axis a : {Axis::X, Axis::Y, Axis::Z})
      obs.push_back(PauliString::single(a, s));
  const std::pair<Axis, Axis> types[6] = {{Axis::X, Axis::X}, {Axis::Y, Axis::Y},
                                          {Axis::Z, Axis::Z}, {Axis::X, Axis::Y},
                                          {Axis::Y, Axis::Z}, {Axis::Z, Axis::X}};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (const auto& [ai, aj] : types)
        obs.push_back(PauliString::pair(ai, i, aj, j));
  canonical_sort(obs);
  return obs;
}

std::vector<int> reflection_perm(int n) {
  std::vector<int> perm(n);
  for (int s = 0; s < n; ++s) perm[s] = n - 1 - s;
  return perm;
}

}  // namespace

std::optional<int> ObservableSet::index_of(const PauliString& p) const {
  for (int i = 0; i < size(); ++i)
    if (observables[i].factors() == p.factors()) return i;
  return std::nullopt;
}

ObservableSet build_set_tfim1d(int n) {
  require(n >= 3, "tfim1d set requires n >= 3");
  ObservableSet set;
  set.name = "tfim1d_weight2";
  set.n = n;
  set.observables = weight_le2_strings(n);
  // Dihedral group of the ring: n translations x {identity, reflection}.
  for (int t = 0; t < n; ++t) {
    std::vector<int> shift(n), reflected(n);
    for (int s = 0; s < n; ++s) {
      shift[s] = (s + t) % n;
      reflected[s] = ((t - s) % n + n) % n;
    }
    set.symmetry_permutations.push_back(std::move(shift));
    set.symmetry_permutations.push_back(std::move(reflected));
  }
  compute_orbits(set);
  assign_groups(set, chain_patterns(n));
  return set;
}

ObservableSet build_set_2local(int n) {
  require(n >= 3, "2-local set requires n >= 3");
  ObservableSet set;
  set.name = "chain_2local";
  set.n = n;
  set.observables = weight_le2_strings(n);
  set.symmetry_permutations.push_back([n] {
    std::vector<int> id(n);
    for (int s = 0; s < n; ++s) id[s] = s;
    return id;
  }());
  set.symmetry_permutations.push_back(reflection_perm(n));
  compute_orbits(set);
  assign_groups(set, chain_patterns(n));
  return set;
}

ObservableSet build_set_essh_reflection(int n) {
  require(n % 4 == 0 && n >= 4, "reflection set requires n = 4q");
  ObservableSet set;
  set.name = "essh_reflection";
  set.n = n;
  const int q = n / 4;
  // Mirror pairs (n/4+t, 3n/4-1-t); a symmetric string carries the same axis
  // on both halves of every pair it touches.
  const int pairs = 2 * q / 2;
  std::vector<std::pair<int, int>> mirror(pairs);
  for (int t = 0; t < pairs; ++t) mirror[t] = {q + t, 3 * q - 1 - t};

  const int options = 4;  // I, X, Y, Z per mirror pair
  long combos = 1;
  for (int t = 0; t < pairs; ++t) combos *= options;
  for (long code = 1; code < combos; ++code) {
    std::vector<PauliFactor> factors;
    long rest = code;
    for (int t = 0; t < pairs; ++t) {
      const int choice = rest % options;
      rest /= options;
      if (choice == 0) continue;
      const Axis axis = static_cast<Axis>(choice - 1);
      factors.push_back({mirror[t].first, axis});
      factors.push_back({mirror[t].second, axis});
    }
    set.observables.emplace_back(1.0, std::move(factors));
  }
  canonical_sort(set.observables);

  set.symmetry_permutations.push_back([n] {
    std::vector<int> id(n);
    for (int s = 0; s < n; ++s) id[s] = s;
    return id;
  }());
  set.symmetry_permutations.push_back(reflection_perm(n));
  compute_orbits(set);
  // One Bell measurement per mirrored pair acquires every symmetric string
  // simultaneously, so the whole set shares a single shot budget.
  set.measurement_group.assign(set.size(), 0);
  set.group_count = 1;
  return set;
}

ObservableSet build_set_tfim2d(int rows, int cols) {
  require(rows == 3 && cols == 3, "2D protocol set is defined on the 3x3 grid");
  const int n = rows * cols;
  ObservableSet set;
  set.name = "tfim2d_protocols";
  set.n = n;

  auto parity_even = [cols](int s) { return ((s / cols) + (s % cols)) % 2 == 0; };

  std::vector<Pattern> patterns;
  patterns.push_back(Pattern(n, Axis::Z));
  patterns.push_back(Pattern(n, Axis::X));
  patterns.push_back(Pattern(n, Axis::Y));
  Pattern mixed(n);
  for (int s = 0; s < n; ++s) mixed[s] = parity_even(s) ? Axis::X : Axis::Z;
  patterns.push_back(std::move(mixed));

  // The feature set is exactly the weight-<=2 strings those four protocols
  // can measure.
  for (const auto& p : weight_le2_strings(n)) {
    bool covered = false;
    for (const auto& pat : patterns) covered = covered || pattern_covers(pat, p);
    if (covered) set.observables.push_back(p);
  }
  canonical_sort(set.observables);

  // D4: rotations and reflections of the square grid.
  std::vector<std::vector<int>> perms;
  auto site = [cols](int r, int c) { return r * cols + c; };
  for (int flip = 0; flip < 2; ++flip)
    for (int rot = 0; rot < 4; ++rot) {
      std::vector<int> perm(n);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
          int rr = r, cc = c;
          if (flip) cc = cols - 1 - cc;
          for (int k = 0; k < rot; ++k) {
            const int nr = cc, nc = rows - 1 - rr;
            rr = nr;
            cc = nc;
          }
          perm[site(r, c)] = site(rr, cc);
        }
      perms.push_back(std::move(perm));
    }
  set.symmetry_permutations = std::move(perms);
  compute_orbits(set);
  assign_groups(set, patterns);
  require(set.group_count == 4, "expected exactly four measurement protocols");
  return set;
}

ObservableSet build_set_by_name(const std::string& name,
                                const HamiltonianSpec& spec) {
  if (name == "tfim1d_weight2") return build_set_tfim1d(spec.n);
  if (name == "chain_2local") return build_set_2local(spec.n);
  if (name == "essh_reflection") return build_set_essh_reflection(spec.n);
  if (name == "tfim2d_protocols") return build_set_tfim2d(spec.rows, spec.cols);
  throw std::invalid_argument("unknown observable set: " + name);
}

std::vector<std::vector<int>> measurement_groups_2d(const ObservableSet& set) {
  require(set.name == "tfim2d_protocols" && set.group_count == 4,
          "measurement_groups_2d expects the 3x3 protocol set");
  std::vector<std::vector<int>> groups(set.group_count);
  for (int i = 0; i < set.size(); ++i)
    groups[set.measurement_group[i]].push_back(i);
  return groups;
}

SymmetrizedObservable symmetrize(int index, const ObservableSet& set) {
  require(index >= 0 && index < set.size(), "observable index out of range");
  const double weight = 1.0 / static_cast<double>(set.symmetry_permutations.size());
  std::map<std::vector<PauliFactor>, double> acc;
  for (const auto& perm : set.symmetry_permutations)
    acc[permuted_factors(set.observables[index], perm)] += weight;

  SymmetrizedObservable out;
  std::vector<PauliString> terms;
  for (const auto& [factors, coeff] : acc)
    terms.emplace_back(coeff, factors);
  canonical_sort(terms);
  out.terms = std::move(terms);

  std::string label;
  for (const auto& t : out.terms) {
    if (!label.empty()) label += " + ";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", t.coeff());
    label += std::string(buf) + "*" + t.name();
  }
  out.label = label;
  return out;
}

double expectation(const PureState& s, const SymmetrizedObservable& op) {
  return expectation(s, std::span<const PauliString>(op.terms));
}

double sampled_expectation(double exact, long shots, std::uint64_t key) {
  require(shots >= 1, "shot count must be >= 1");
  const double p = std::clamp(0.5 * (1.0 + exact), 0.0, 1.0);
  std::mt19937_64 engine(splitmix64(key));
  std::binomial_distribution<long> binomial(shots, p);
  const long ones = binomial(engine);
  return 2.0 * static_cast<double>(ones) / static_cast<double>(shots) - 1.0;
}

FeatureTable evaluate_table(const HamiltonianSpec& proto,
                            const AnsatzSpec* aspec, const GlobalParams* params,
                            const ObservableSet& set, const Grid& grid,
                            const TableProvenance& mode, int threads) {
  using Mode = TableProvenance::Mode;
  using Source = TableProvenance::Source;
  if (mode.source == Source::Ansatz)
    require(aspec != nullptr && params != nullptr,
            "ansatz source requires ansatz spec and parameters");
  if (mode.mode == Mode::Shots) require(mode.shots >= 1, "shot count must be >= 1");
  if (mode.mode == Mode::Noisy) {
    mode.noise.validate();
    require(mode.source == Source::Ansatz,
            "noisy evaluation requires the ansatz source");
  }

  const auto gs = grid.points();
  const int rows = static_cast<int>(gs.size());
  const int cols = set.size();
  FeatureTable table;
  table.grid = grid;
  table.set = set;
  table.provenance = mode;
  table.values.resize(rows, cols);

  const long shots_per_group =
      mode.mode == Mode::Shots ? std::max<long>(1, mode.shots / set.group_count)
                               : 0;

  parallel_for(
      rows,
      [&](int gi) {
        HamiltonianSpec at = proto;
        at.g = gs[gi];

        Eigen::VectorXd row(cols);
        if (mode.mode == Mode::Noisy) {
          MixedState rho = prepare_density(*aspec, *params, gs[gi], mode.noise);
          for (int j = 0; j < cols; ++j)
            row[j] = expectation(rho, set.observables[j]);
        } else {
          PureState psi;
          if (mode.source == Source::GroundState)
            psi = lowest_eigenpairs(at, 1).states.front();
          else
            psi = prepare_state(*aspec, *params, gs[gi]);
          for (int j = 0; j < cols; ++j)
            row[j] = expectation(psi, set.observables[j]);
        }

        if (mode.mode == Mode::Shots)
          for (int j = 0; j < cols; ++j)
            row[j] = sampled_expectation(
                row[j], shots_per_group,
                hash_combine(mode.seed,
                             hash_combine(static_cast<std::uint64_t>(gi),
                                          static_cast<std::uint64_t>(j))));

        table.values.row(gi) = row;
      },
      threads);

  return table;
}

}  // namespace phasetrap
