#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "pdefdi/errors.hpp"

namespace pdefdi {

/// Samples of a 1-D spatial function on a uniform grid over [z1, z2].
/// The interval count must be even so composite Simpson quadrature applies.
struct SpatialField {
  double z1 = 0.0;
  double z2 = 0.0;
  std::vector<double> values;  // N_z + 1 samples

  SpatialField() = default;
  SpatialField(double z1_, double z2_, std::vector<double> v) : z1(z1_), z2(z2_), values(std::move(v)) {
    if (z2 <= z1) throw ConfigError("SpatialField: z2 must exceed z1");
    if (values.size() < 3) throw ConfigError("SpatialField: need at least 3 grid points");
    if ((values.size() - 1) % 2 != 0)
      throw ConfigError("SpatialField: interval count must be even for Simpson quadrature");
  }

  std::size_t intervals() const { return values.size() - 1; }
  double dz() const { return (z2 - z1) / static_cast<double>(intervals()); }
  double z(std::size_t i) const { return z1 + static_cast<double>(i) * dz(); }

  template <class F>
  static SpatialField sample(double z1_, double z2_, std::size_t n_intervals, F&& f) {
    std::vector<double> v(n_intervals + 1);
    const double h = (z2_ - z1_) / static_cast<double>(n_intervals);
    for (std::size_t i = 0; i <= n_intervals; ++i) v[i] = f(z1_ + static_cast<double>(i) * h);
    return SpatialField(z1_, z2_, std::move(v));
  }
};

inline bool same_grid(const SpatialField& f, const SpatialField& g) {
  return f.z1 == g.z1 && f.z2 == g.z2 && f.values.size() == g.values.size();
}

/// Composite Simpson integral of the sample vector (weights 1,4,2,...,4,1).
inline double simpson(const std::vector<double>& v, double dz) {
  double acc = v.front() + v.back();
  double four = 0.0, two = 0.0;
  for (std::size_t i = 1; i + 1 < v.size(); i += 2) four += v[i];
  for (std::size_t i = 2; i + 1 < v.size(); i += 2) two += v[i];
  return dz / 3.0 * (acc + 4.0 * four + 2.0 * two);
}

/// <f, g> = integral of f(z) g(z) dz over the shared grid.
inline double inner_product(const SpatialField& f, const SpatialField& g) {
  if (!same_grid(f, g)) throw ConfigError("inner_product: mismatched grids");
  std::vector<double> prod(f.values.size());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = f.values[i] * g.values[i];
  return simpson(prod, f.dz());
}

inline double l2_norm(const SpatialField& f) { return std::sqrt(inner_product(f, f)); }

}  // namespace pdefdi
