#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dalloy/errors.hpp"
#include "dalloy/matrix.hpp"

namespace dalloy {

// Lattice site in Z^d.  std::vector's operator< is exactly the lexicographic
// order used for all site enumerations.
using Site = std::vector<int>;

inline std::string site_to_string(const Site& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  out += ")";
  return out;
}

// Finitely supported single-site potential u : Z^d -> R.  Entries equal to
// zero are dropped so that supp u, rank and the diameter are unambiguous.
class SingleSitePotential {
 public:
  SingleSitePotential(int dim, std::map<Site, double> entries) : dim_(dim) {
    if (dim < 1) fail(ErrorKind::Validation, "potential dimension must be >= 1");
    for (auto& [site, value] : entries) {
      if (static_cast<int>(site.size()) != dim)
        fail(ErrorKind::Validation, "potential entry " + site_to_string(site) +
                                        " does not have dimension " + std::to_string(dim));
      if (value != 0.0) entries_.emplace(site, value);
    }
    if (entries_.empty())
      fail(ErrorKind::Validation, "single-site potential must have nonempty support");
  }

  // u = delta_0, the simplest admissible choice.
  static SingleSitePotential delta(int dim) {
    return SingleSitePotential(dim, {{Site(dim, 0), 1.0}});
  }

  int dim() const noexcept { return dim_; }
  const std::map<Site, double>& entries() const noexcept { return entries_; }

  double value(const Site& k) const {
    auto it = entries_.find(k);
    return it == entries_.end() ? 0.0 : it->second;
  }

  int rank() const noexcept { return static_cast<int>(entries_.size()); }

  // ubar = sum_k u(k)
  double ubar() const {
    double s = 0.0;
    for (const auto& [site, v] : entries_) s += v;
    return s;
  }

  double l1_norm() const {
    double s = 0.0;
    for (const auto& [site, v] : entries_) s += std::abs(v);
    return s;
  }

  // sup-norm diameter of the support: n such that supp u fits a cube of side
  // n+1 after translation.
  int diameter() const {
    int best = 0;
    for (int axis = 0; axis < dim_; ++axis) {
      int lo = entries_.begin()->first[axis];
      int hi = lo;
      for (const auto& [site, v] : entries_) {
        lo = std::min(lo, site[axis]);
        hi = std::max(hi, site[axis]);
      }
      best = std::max(best, hi - lo);
    }
    return best;
  }

  // d = 1 and supp u is a gap-free integer interval (after translation).
  bool contiguous_1d() const {
    if (dim_ != 1) return false;
    int expected = entries_.begin()->first[0];
    for (const auto& [site, v] : entries_) {
      if (site[0] != expected) return false;
      ++expected;
    }
    return true;
  }

  std::vector<Site> support() const {
    std::vector<Site> out;
    out.reserve(entries_.size());
    for (const auto& [site, v] : entries_) out.push_back(site);
    return out;
  }

 private:
  int dim_;
  std::map<Site, double> entries_;
};

inline constexpr int kMaxBoxSites = 4096;

// Box Lambda_L = [0,L]^d with its influence region Lambda^+ (filled in by
// support_dilate).  Sites are enumerated lexicographically; positions inside
// the box are indexed arithmetically.
class BoxRegion {
 public:
  static BoxRegion box(int side_length, int dim) {
    if (dim < 1) fail(ErrorKind::Validation, "box dimension must be >= 1");
    if (side_length < 0) fail(ErrorKind::Validation, "box side length must be >= 0");
    std::int64_t count = 1;
    for (int axis = 0; axis < dim; ++axis) {
      count *= side_length + 1;
      if (count > kMaxBoxSites)
        fail(ErrorKind::Capacity, "box has more than " + std::to_string(kMaxBoxSites) +
                                      " sites (L=" + std::to_string(side_length) +
                                      ", d=" + std::to_string(dim) + ")");
    }
    BoxRegion region;
    region.dim_ = dim;
    region.side_length_ = side_length;
    region.sites_.reserve(static_cast<std::size_t>(count));
    Site current(dim, 0);
    for (;;) {
      region.sites_.push_back(current);
      int axis = dim - 1;
      while (axis >= 0 && current[axis] == side_length) {
        current[axis] = 0;
        --axis;
      }
      if (axis < 0) break;
      ++current[axis];
    }
    return region;
  }

  int dim() const noexcept { return dim_; }
  int side_length() const noexcept { return side_length_; }
  int size() const noexcept { return static_cast<int>(sites_.size()); }

  const std::vector<Site>& sites() const noexcept { return sites_; }

  bool contains(const Site& s) const {
    if (static_cast<int>(s.size()) != dim_) return false;
    for (int v : s)
      if (v < 0 || v > side_length_) return false;
    return true;
  }

  // Position of a box site in the lexicographic enumeration.
  int index_of(const Site& s) const {
    if (!contains(s)) fail(ErrorKind::Validation, "site " + site_to_string(s) + " not in box");
    int idx = 0;
    for (int axis = 0; axis < dim_; ++axis) idx = idx * (side_length_ + 1) + s[axis];
    return idx;
  }

  bool dilated() const noexcept { return !plus_sites_.empty(); }

  const std::vector<Site>& plus_sites() const {
    if (!dilated())
      fail(ErrorKind::Validation, "region has no influence set; call support_dilate first");
    return plus_sites_;
  }

  int plus_index(const Site& s) const {
    auto it = plus_index_.find(s);
    if (it == plus_index_.end())
      fail(ErrorKind::Validation, "site " + site_to_string(s) + " not in influence set");
    return it->second;
  }

  friend BoxRegion support_dilate(const BoxRegion& region, const SingleSitePotential& u);

 private:
  int dim_ = 0;
  int side_length_ = 0;
  std::vector<Site> sites_;
  std::vector<Site> plus_sites_;
  std::map<Site, int> plus_index_;
};

// Lambda^+ = {k : supp u(. - k) meets Lambda} = {x - s : x in Lambda, s in supp u}.
inline BoxRegion support_dilate(const BoxRegion& region, const SingleSitePotential& u) {
  if (u.dim() != region.dim())
    fail(ErrorKind::Validation, "potential dimension does not match box dimension");
  BoxRegion out = region;
  std::map<Site, int> index;
  for (const Site& x : region.sites()) {
    Site k(region.dim());
    for (const Site& s : u.support()) {
      for (int axis = 0; axis < region.dim(); ++axis) k[axis] = x[axis] - s[axis];
      index.emplace(k, 0);
    }
  }
  out.plus_sites_.clear();
  out.plus_sites_.reserve(index.size());
  int next = 0;
  for (auto& [site, idx] : index) {
    idx = next++;
    out.plus_sites_.push_back(site);
  }
  out.plus_index_ = std::move(index);
  return out;
}

// Couplings omega_k for k in Lambda^+, stored in the lexicographic order of
// plus_sites().  seed/sample_index record provenance for manifests.
struct DisorderConfiguration {
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::uint64_t sample_index = 0;
};

// V(x) = sum_k omega_k u(x-k) for x in Lambda, as a vector aligned with
// region.sites().  Rewritten as sum over s in supp u of u(s) * omega_{x-s}.
inline std::vector<double> assemble_potential(const SingleSitePotential& u,
                                              const DisorderConfiguration& omega,
                                              const BoxRegion& region) {
  if (!region.dilated())
    fail(ErrorKind::Validation, "assemble_potential needs a dilated region");
  if (omega.values.size() != region.plus_sites().size())
    fail(ErrorKind::Validation, "disorder configuration size does not match influence set");
  std::vector<double> v(region.sites().size(), 0.0);
  Site k(region.dim());
  for (std::size_t i = 0; i < region.sites().size(); ++i) {
    const Site& x = region.sites()[i];
    double acc = 0.0;
    for (const auto& [s, us] : u.entries()) {
      for (int axis = 0; axis < region.dim(); ++axis) k[axis] = x[axis] - s[axis];
      acc += us * omega.values[static_cast<std::size_t>(region.plus_index(k))];
    }
    v[i] = acc;
  }
  return v;
}

// H restricted to the box with simple truncation: hopping -1 between nearest
// neighbours inside the box, potential on the diagonal.
class Hamiltonian {
 public:
  Hamiltonian(BoxRegion region, DenseMatrix<double> matrix)
      : region_(std::move(region)), matrix_(std::move(matrix)), inf_norm_(matrix_.inf_norm()) {}

  const BoxRegion& region() const noexcept { return region_; }
  const DenseMatrix<double>& matrix() const noexcept { return matrix_; }
  int size() const noexcept { return matrix_.rows(); }
  double inf_norm() const noexcept { return inf_norm_; }
  bool one_dimensional() const noexcept { return region_.dim() == 1; }

 private:
  BoxRegion region_;
  DenseMatrix<double> matrix_;
  double inf_norm_;
};

inline Hamiltonian assemble_hamiltonian(const BoxRegion& region, const std::vector<double>& v) {
  const int n = region.size();
  if (static_cast<int>(v.size()) != n)
    fail(ErrorKind::Validation, "potential vector size does not match region");
  DenseMatrix<double> h(n, n, 0.0);
  for (int i = 0; i < n; ++i) {
    h(i, i) = v[static_cast<std::size_t>(i)];
    Site neighbor = region.sites()[static_cast<std::size_t>(i)];
    for (int axis = 0; axis < region.dim(); ++axis) {
      for (int step : {-1, 1}) {
        neighbor[axis] += step;
        if (region.contains(neighbor)) h(i, region.index_of(neighbor)) = -1.0;
        neighbor[axis] -= step;
      }
    }
  }
  return Hamiltonian(region, std::move(h));
}

}  // namespace dalloy
