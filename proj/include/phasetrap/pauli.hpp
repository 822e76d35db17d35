#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace phasetrap {

enum class Axis : std::uint8_t { X = 0, Y = 1, Z = 2 };

char axis_char(Axis a);
Axis axis_from_char(char c);

struct PauliFactor {
  int site = 0;
  Axis axis = Axis::X;

  friend bool operator==(const PauliFactor&, const PauliFactor&) = default;
  friend auto operator<=>(const PauliFactor&, const PauliFactor&) = default;
};

// Sparse product of single-site Pauli factors with a real coefficient.
// Factors are stored sorted by site with no repeats; an empty factor list is
// the identity. This is the atom of Hamiltonians, observables and feature
// sets.
class PauliString {
 public:
  PauliString() = default;
  PauliString(double coeff, std::vector<PauliFactor> factors);

  static PauliString identity(double coeff = 1.0);
  static PauliString single(Axis a, int site, double coeff = 1.0);
  static PauliString pair(Axis ai, int i, Axis aj, int j, double coeff = 1.0);

  double coeff() const { return coeff_; }
  void set_coeff(double c) { coeff_ = c; }
  const std::vector<PauliFactor>& factors() const { return factors_; }
  int weight() const { return static_cast<int>(factors_.size()); }
  int max_site() const;

  // Bit masks over basis indices (qubit 0 = least-significant bit).
  std::uint64_t flip_mask() const;   // sites with X or Y factors
  std::uint64_t phase_mask() const;  // sites with Y or Z factors
  int y_count() const;

  // Name like "X0Z3" built from the factors; "I" for the identity.
  std::string name() const;

  // Sorts identically-named strings together: weight, then sites, then axes.
  static bool canonical_less(const PauliString& a, const PauliString& b);

  friend bool operator==(const PauliString&, const PauliString&) = default;

 private:
  double coeff_ = 1.0;
  std::vector<PauliFactor> factors_;
};

}  // namespace phasetrap
