#include "phasetrap/pauli.hpp"

#include <algorithm>

#include "phasetrap/errors.hpp"

namespace phasetrap {

char axis_char(Axis a) {
  switch (a) {
    case Axis::X: return 'X';
    case Axis::Y: return 'Y';
    case Axis::Z: return 'Z';
  }
  return '?';
}

Axis axis_from_char(char c) {
  switch (c) {
    case 'X': case 'x': return Axis::X;
    case 'Y': case 'y': return Axis::Y;
    case 'Z': case 'z': return Axis::Z;
  }
  throw std::invalid_argument(std::string("unknown Pauli axis: ") + c);
}

PauliString::PauliString(double coeff, std::vector<PauliFactor> factors)
    : coeff_(coeff), factors_(std::move(factors)) {
  std::sort(factors_.begin(), factors_.end());
  for (std::size_t i = 0; i + 1 < factors_.size(); ++i)
    require(factors_[i].site != factors_[i + 1].site,
            "PauliString factors may not repeat a site");
  if (!factors_.empty())
    require(factors_.front().site >= 0, "PauliString sites must be >= 0");
}

PauliString PauliString::identity(double coeff) { return PauliString(coeff, {}); }

PauliString PauliString::single(Axis a, int site, double coeff) {
  return PauliString(coeff, {{site, a}});
}

PauliString PauliString::pair(Axis ai, int i, Axis aj, int j, double coeff) {
  return PauliString(coeff, {{i, ai}, {j, aj}});
}

int PauliString::max_site() const {
  return factors_.empty() ? -1 : factors_.back().site;
}

std::uint64_t PauliString::flip_mask() const {
  std::uint64_t m = 0;
  for (const auto& f : factors_)
    if (f.axis != Axis::Z) m |= std::uint64_t(1) << f.site;
  return m;
}

std::uint64_t PauliString::phase_mask() const {
  std::uint64_t m = 0;
  for (const auto& f : factors_)
    if (f.axis != Axis::X) m |= std::uint64_t(1) << f.site;
  return m;
}

int PauliString::y_count() const {
  int c = 0;
  for (const auto& f : factors_)
    if (f.axis == Axis::Y) ++c;
  return c;
}

std::string PauliString::name() const {
  if (factors_.empty()) return "I";
  std::string out;
  for (const auto& f : factors_) {
    out += axis_char(f.axis);
    out += std::to_string(f.site);
  }
  return out;
}

bool PauliString::canonical_less(const PauliString& a, const PauliString& b) {
  if (a.weight() != b.weight()) return a.weight() < b.weight();
  const auto& fa = a.factors();
  const auto& fb = b.factors();
  for (std::size_t i = 0; i < fa.size(); ++i)
    if (fa[i].site != fb[i].site) return fa[i].site < fb[i].site;
  for (std::size_t i = 0; i < fa.size(); ++i)
    if (fa[i].axis != fb[i].axis) return fa[i].axis < fb[i].axis;
  return false;
}

}  // namespace phasetrap
