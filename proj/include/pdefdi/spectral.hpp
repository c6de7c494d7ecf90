#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "pdefdi/errors.hpp"
#include "pdefdi/spatial.hpp"

namespace pdefdi {

struct RobinBc {
  double m = 1.0;  // value coefficient
  double n = 0.0;  // derivative coefficient
  double d = 0.0;  // boundary datum (only the homogeneous case is supported)
  bool dirichlet() const { return n == 0.0; }
};

/// Spatial operator a1 d/dz + a2 d2/dz2 on [z1, z2] with Robin boundary data.
struct OperatorSpec {
  double a1 = 0.0;
  double a2 = 1.0;
  double z1 = 0.0;
  double z2 = std::numbers::pi;
  RobinBc left, right;

  void validate() const {
    if (z2 <= z1) throw ConfigError("OperatorSpec: z2 must exceed z1");
    for (const RobinBc& bc : {left, right}) {
      if (bc.m == 0.0 && bc.n == 0.0) throw ConfigError("OperatorSpec: degenerate boundary triple");
      if (bc.d != 0.0)
        throw ConfigError("OperatorSpec: nonhomogeneous boundary data is not supported");
    }
  }

  bool pure_diffusion_dirichlet() const {
    return a1 == 0.0 && left.dirichlet() && right.dirichlet();
  }
};

using ModalState = std::vector<double>;

/// Slow eigenpairs of the spatial operator plus trailing eigenvalues for gap checks.
struct EigenSystem {
  int m = 0;                          // slow-subspace dimension
  std::vector<double> eigenvalues;    // size >= m, non-increasing real parts
  std::vector<SpatialField> modes;    // first m eigenfunctions, L2-normalized
  std::vector<double> norm_error;     // | ||phi_j||_2 - 1 | per slow mode
  bool analytic = false;
};

namespace detail {

inline void fix_sign_and_normalize(SpatialField& phi) {
  double norm = l2_norm(phi);
  if (norm == 0.0) throw NumericError("eigenfunction with zero norm");
  double maxabs = 0.0;
  for (double v : phi.values) maxabs = std::max(maxabs, std::abs(v));
  double sign = 1.0;
  for (std::size_t i = 1; i + 1 < phi.values.size(); ++i) {
    if (std::abs(phi.values[i]) > 1e-9 * maxabs) {
      sign = phi.values[i] > 0.0 ? 1.0 : -1.0;
      break;
    }
  }
  const double scale = sign / norm;
  for (double& v : phi.values) v *= scale;
}

}  // namespace detail

/// Solve the operator eigenproblem. The pure-diffusion Dirichlet case uses the
/// analytic sine family; otherwise a second-order finite-difference matrix is
/// eigendecomposed. Eigenvalues are sorted by descending real part and the
/// first m eigenfunctions are L2-normalized with the first nonzero interior
/// sample positive.
inline EigenSystem solve_eigenproblem(const OperatorSpec& op, int m, int grid_size,
                                      int extra_eigenvalues = 5, bool allow_analytic = true) {
  op.validate();
  if (m < 1) throw ConfigError("solve_eigenproblem: m must be >= 1");
  if (grid_size < 4 * m) throw ConfigError("solve_eigenproblem: grid_size must exceed 4m");
  if (grid_size % 2 != 0) throw ConfigError("solve_eigenproblem: grid_size must be even");

  const double length = op.z2 - op.z1;
  EigenSystem sys;
  sys.m = m;

  if (allow_analytic && op.pure_diffusion_dirichlet()) {
    sys.analytic = true;
    const int total = m + std::max(extra_eigenvalues, 1);
    for (int j = 1; j <= total; ++j) {
      const double wavenum = static_cast<double>(j) * std::numbers::pi / length;
      sys.eigenvalues.push_back(-op.a2 * wavenum * wavenum);
    }
    const double amp = std::sqrt(2.0 / length);
    for (int j = 1; j <= m; ++j) {
      const double wavenum = static_cast<double>(j) * std::numbers::pi / length;
      const double z1 = op.z1;
      sys.modes.push_back(SpatialField::sample(op.z1, op.z2, grid_size, [=](double z) {
        return amp * std::sin(wavenum * (z - z1));
      }));
      sys.norm_error.push_back(std::abs(l2_norm(sys.modes.back()) - 1.0));
    }
    return sys;
  }

  // Finite-difference matrix over the non-Dirichlet nodes; Robin ends are
  // handled by ghost-node elimination through the boundary condition.
  const int nz = grid_size;
  const double dz = length / nz;
  const int lo = op.left.dirichlet() ? 1 : 0;
  const int hi = op.right.dirichlet() ? nz - 1 : nz;
  const int dim = hi - lo + 1;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
  const double c2 = op.a2 / (dz * dz);
  const double c1 = op.a1 / (2.0 * dz);
  for (int node = lo; node <= hi; ++node) {
    const int r = node - lo;
    if (node == 0) {
      const double slope = -op.left.m / op.left.n;  // x'(z1) = slope * x(z1)
      A(r, r) += c2 * (2.0 * dz * slope - 2.0) + op.a1 * slope;
      A(r, r + 1) += 2.0 * c2;
    } else if (node == nz) {
      const double slope = -op.right.m / op.right.n;
      A(r, r) += c2 * (-2.0 * dz * slope - 2.0) + op.a1 * slope;
      A(r, r - 1) += 2.0 * c2;
    } else {
      A(r, r) += -2.0 * c2;
      if (node - 1 >= lo) A(r, r - 1) += c2 - c1;
      if (node + 1 <= hi) A(r, r + 1) += c2 + c1;
    }
  }

  Eigen::EigenSolver<Eigen::MatrixXd> solver(A);
  if (solver.info() != Eigen::Success) throw NumericError("eigendecomposition failed");

  std::vector<int> order(dim);
  for (int j = 0; j < dim; ++j) order[j] = j;
  const auto& vals = solver.eigenvalues();
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return vals(a).real() > vals(b).real(); });

  const int total = std::min(dim, m + std::max(extra_eigenvalues, 1));
  for (int j = 0; j < total; ++j) {
    const auto lambda = vals(order[j]);
    if (j < m && std::abs(lambda.imag()) > 1e-8 * std::max(1.0, std::abs(lambda.real())))
      throw NumericError("complex slow spectrum");
    sys.eigenvalues.push_back(lambda.real());
  }

  const Eigen::MatrixXcd vecs = solver.eigenvectors();  // materialize: col() must not dangle
  for (int j = 0; j < m; ++j) {
    std::vector<double> full(nz + 1, 0.0);
    for (int node = lo; node <= hi; ++node) full[node] = vecs(node - lo, order[j]).real();
    SpatialField phi(op.z1, op.z2, std::move(full));
    detail::fix_sign_and_normalize(phi);
    sys.norm_error.push_back(std::abs(l2_norm(phi) - 1.0));
    sys.modes.push_back(std::move(phi));
  }
  return sys;
}

/// Modal measurement x_s with component i = <phi_i, field>.
inline ModalState project(const SpatialField& field, const EigenSystem& eig) {
  ModalState xs(eig.m);
  for (int i = 0; i < eig.m; ++i) xs[i] = inner_product(field, eig.modes[i]);
  return xs;
}

/// Slow-subspace reconstruction sum_i x_si phi_i(z).
inline SpatialField reconstruct(const ModalState& xs, const EigenSystem& eig) {
  if (static_cast<int>(xs.size()) != eig.m) throw ConfigError("reconstruct: dimension mismatch");
  SpatialField out = eig.modes.front();
  std::fill(out.values.begin(), out.values.end(), 0.0);
  for (int i = 0; i < eig.m; ++i)
    for (std::size_t p = 0; p < out.values.size(); ++p)
      out.values[p] += xs[i] * eig.modes[i].values[p];
  return out;
}

struct GapReport {
  double iota = 0.0;           // |Re lambda_1 / Re lambda_{m+1}|
  double slow_fast_ratio = 0;  // Re lambda_m / Re lambda_{m+1}
  double threshold = 0.2;
  bool satisfied = false;
};

inline GapReport check_spectral_gap(const EigenSystem& eig, double threshold = 0.2) {
  if (static_cast<int>(eig.eigenvalues.size()) < eig.m + 1)
    throw ConfigError("check_spectral_gap: need at least m+1 eigenvalues");
  const double fast = eig.eigenvalues[eig.m];
  if (fast >= 0.0) throw NumericError("fast complement unstable");
  GapReport rep;
  rep.threshold = threshold;
  rep.iota = std::abs(eig.eigenvalues.front() / fast);
  rep.slow_fast_ratio = eig.eigenvalues[eig.m - 1] / fast;
  rep.satisfied = rep.iota < threshold;
  return rep;
}

}  // namespace pdefdi
