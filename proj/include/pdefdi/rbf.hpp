#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pdefdi/errors.hpp"

namespace pdefdi {

/// Gaussian RBF network on a regular lattice over the joint input (x_s, u).
/// Centers are enumerated row-major over dimensions in declaration order
/// (last dimension fastest); weight persistence depends on this order.
struct RbfLattice {
  std::vector<std::array<double, 2>> bounds;  // per-dim [lo, hi]
  std::vector<int> counts;                    // per-dim node counts, >= 2
  double width = 0.5;                         // shared Gaussian width

  void validate() const {
    if (bounds.empty() || bounds.size() != counts.size())
      throw ConfigError("RbfLattice: bounds/counts mismatch");
    if (width <= 0.0) throw ConfigError("RbfLattice: width must be positive");
    for (std::size_t d = 0; d < bounds.size(); ++d) {
      if (counts[d] < 2) throw ConfigError("RbfLattice: need >= 2 nodes per dimension");
      if (bounds[d][1] <= bounds[d][0]) throw ConfigError("RbfLattice: hi must exceed lo");
    }
  }

  int dims() const { return static_cast<int>(bounds.size()); }

  std::int64_t node_count() const {
    std::int64_t n = 1;
    for (int c : counts) n *= c;
    return n;
  }

  double node_coord(int dim, int j) const {
    const auto& b = bounds[dim];
    return b[0] + (b[1] - b[0]) * static_cast<double>(j) / static_cast<double>(counts[dim] - 1);
  }

  std::vector<double> center(std::int64_t index) const {
    std::vector<double> c(dims());
    for (int d = dims() - 1; d >= 0; --d) {
      c[d] = node_coord(d, static_cast<int>(index % counts[d]));
      index /= counts[d];
    }
    return c;
  }

  /// Per-dimension Gaussian factors exp(-(Z_d - c)^2 / nu^2); the basis vector
  /// is their row-major outer product.
  std::vector<std::vector<double>> dim_factors(const std::vector<double>& Z) const {
    if (static_cast<int>(Z.size()) != dims()) throw ConfigError("RbfLattice: input dimension mismatch");
    std::vector<std::vector<double>> f(dims());
    const double inv_nu2 = 1.0 / (width * width);
    for (int d = 0; d < dims(); ++d) {
      f[d].resize(counts[d]);
      for (int j = 0; j < counts[d]; ++j) {
        const double r = Z[d] - node_coord(d, j);
        f[d][j] = std::exp(-r * r * inv_nu2);
      }
    }
    return f;
  }

  void eval_basis_into(const std::vector<double>& Z, std::vector<double>& out) const {
    const auto f = dim_factors(Z);
    out.assign(static_cast<std::size_t>(node_count()), 1.0);
    std::int64_t block = node_count();
    for (int d = 0; d < dims(); ++d) {
      block /= counts[d];
      std::int64_t idx = 0;
      while (idx < node_count()) {
        for (int j = 0; j < counts[d]; ++j)
          for (std::int64_t r = 0; r < block; ++r, ++idx) out[idx] *= f[d][j];
      }
    }
  }
};

inline std::vector<double> eval_basis(const RbfLattice& lat, const std::vector<double>& Z) {
  std::vector<double> s;
  lat.eval_basis_into(Z, s);
  return s;
}

struct WeightVector {
  int state_index = 0;  // i
  int mode = 0;         // k (0 = normal)
  std::vector<double> w;
};

/// W^T S(Z) via dimension-wise contraction of the weight tensor; avoids
/// materializing the full basis vector.
inline double eval_network(const std::vector<double>& w, const RbfLattice& lat,
                           const std::vector<double>& Z) {
  if (static_cast<std::int64_t>(w.size()) != lat.node_count())
    throw ConfigError("eval_network: weight length mismatch");
  const auto f = lat.dim_factors(Z);
  std::vector<double> acc(w);
  std::vector<double> next;
  std::int64_t rows = lat.node_count();
  for (int d = lat.dims() - 1; d >= 0; --d) {
    const int n = lat.counts[d];
    rows /= n;
    next.assign(rows, 0.0);
    for (std::int64_t r = 0; r < rows; ++r) {
      double sum = 0.0;
      const double* block = acc.data() + r * n;
      for (int j = 0; j < n; ++j) sum += block[j] * f[d][j];
      next[r] = sum;
    }
    acc.swap(next);
  }
  return acc[0];
}

inline double eval_network(const WeightVector& w, const RbfLattice& lat,
                           const std::vector<double>& Z) {
  return eval_network(w.w, lat, Z);
}

inline std::vector<std::int64_t> localized_indices(const RbfLattice& lat,
                                                   const std::vector<double>& Z, double theta) {
  if (theta <= 0.0 || theta >= 1.0) throw ConfigError("localized_indices: theta must be in (0,1)");
  const auto s = eval_basis(lat, Z);
  std::vector<std::int64_t> idx;
  for (std::size_t j = 0; j < s.size(); ++j)
    if (s[j] > theta) idx.push_back(static_cast<std::int64_t>(j));
  return idx;
}

/// Empirical excitation summary along a trajectory of lattice inputs; a proxy
/// for checking which receptive fields the orbit actually visits.
struct ExcitationSummary {
  std::vector<double> visit_fraction;  // fraction of samples with s_i > theta
  std::vector<double> max_activation;
  std::vector<std::int64_t> excited;   // indices with visit fraction > floor
  double observed_max_basis_norm = 0.0;
};

inline ExcitationSummary excitation_diagnostic(const RbfLattice& lat,
                                               const std::vector<std::vector<double>>& trajectory,
                                               double theta, double visit_floor = 0.01) {
  if (trajectory.empty()) throw ConfigError("excitation_diagnostic: empty trajectory");
  const std::size_t n = static_cast<std::size_t>(lat.node_count());
  ExcitationSummary sum;
  sum.visit_fraction.assign(n, 0.0);
  sum.max_activation.assign(n, 0.0);
  std::vector<double> s;
  for (const auto& Z : trajectory) {
    lat.eval_basis_into(Z, s);
    double norm2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      norm2 += s[j] * s[j];
      if (s[j] > theta) sum.visit_fraction[j] += 1.0;
      if (s[j] > sum.max_activation[j]) sum.max_activation[j] = s[j];
    }
    sum.observed_max_basis_norm = std::max(sum.observed_max_basis_norm, std::sqrt(norm2));
  }
  const double inv = 1.0 / static_cast<double>(trajectory.size());
  for (std::size_t j = 0; j < n; ++j) {
    sum.visit_fraction[j] *= inv;
    if (sum.visit_fraction[j] > visit_floor) sum.excited.push_back(static_cast<std::int64_t>(j));
  }
  return sum;
}

}  // namespace pdefdi
