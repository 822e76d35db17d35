#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phasetrap/ansatz.hpp"
#include "phasetrap/grid.hpp"
#include "phasetrap/models.hpp"

// Observable sets, feature-table evaluation over the detection grid, and the
// finite-shot measurement model. Feature ordering is canonical (weight, then
// sites, then axes) so tables from different runs align.

namespace phasetrap {

// Observables with unit coefficients plus the lattice-symmetry machinery:
// site permutations generate the orbit partition and orbit averages.
struct ObservableSet {
  std::string name;
  int n = 0;
  std::vector<PauliString> observables;
  std::vector<std::vector<int>> symmetry_permutations;  // site maps, id first
  std::vector<std::vector<int>> symmetry_orbits;        // partition of indices
  std::vector<int> measurement_group;                   // group id per index
  int group_count = 0;

  int size() const { return static_cast<int>(observables.size()); }
  std::optional<int> index_of(const PauliString& p) const;
};

// All weight-1 strings plus the six weight-2 axis patterns (xx, yy, zz, xy,
// yz, zx) over pairs i < j; ring translation+reflection orbits.
ObservableSet build_set_tfim1d(int n);

// Same strings with open-chain (reflection-only) orbit metadata.
ObservableSet build_set_2local(int n);

// Non-identity Pauli strings on the middle half of the chain that are
// invariant under its site reversal (matching axes on mirrored sites); all
// jointly measurable through Bell measurements on mirrored pairs.
ObservableSet build_set_essh_reflection(int n);

// Weight-1 and weight-2 strings on the 3x3 grid coverable by the four
// measurement protocols (all-X, all-Y, all-Z, and X/Z on the two site-parity
// classes); D4 orbit metadata.
ObservableSet build_set_tfim2d(int rows, int cols);

ObservableSet build_set_by_name(const std::string& name,
                                const HamiltonianSpec& spec);

// The four protocol groups of the 2D set; throws if an observable is not
// coverable.
std::vector<std::vector<int>> measurement_groups_2d(const ObservableSet& set);

// Uniform average of a member over the set's symmetry group, e.g. the ring
// orbit of X0X2 becomes (1/n) sum_j Xj Xj+2.
struct SymmetrizedObservable {
  std::string label;
  std::vector<PauliString> terms;
};
SymmetrizedObservable symmetrize(int index, const ObservableSet& set);

struct TableProvenance {
  enum class Mode { Exact, Shots, Noisy } mode = Mode::Exact;
  enum class Source { Ansatz, GroundState } source = Source::Ansatz;
  long shots = 0;
  std::uint64_t seed = 0;
  NoiseSpec noise;
};

struct FeatureTable {
  Grid grid;
  ObservableSet set;
  Eigen::MatrixXd values;  // grid.size() x set.size()
  TableProvenance provenance;

  int rows() const { return static_cast<int>(values.rows()); }
};

// Evaluates the per-g feature vectors. `params` may be null only for the
// ground-state source. Shot mode draws one binomial per observable with the
// budget split evenly across measurement groups; sampling is keyed by
// (seed, g index, observable index) so parallel and serial runs agree.
FeatureTable evaluate_table(const HamiltonianSpec& proto,
                            const AnsatzSpec* aspec, const GlobalParams* params,
                            const ObservableSet& set, const Grid& grid,
                            const TableProvenance& mode, int threads = 0);

// Binomial estimate of a single expectation from `shots` samples.
double sampled_expectation(double exact, long shots, std::uint64_t key);

double expectation(const PureState& s, const SymmetrizedObservable& op);

}  // namespace phasetrap
