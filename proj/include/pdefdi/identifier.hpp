#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "pdefdi/errors.hpp"
#include "pdefdi/pdesim.hpp"
#include "pdefdi/rbf.hpp"

namespace pdefdi {

struct IdentifierGains {
  double a = 4.0;       // estimator gain
  double gamma = 0.35;  // learning rate (scalar Gamma)
  double sigma = 0.001; // leakage
};

struct TrainOptions {
  double avg_t1 = 0.0;
  double avg_t2 = 0.0;
  double snapshot_stride = 0.0;  // seconds between weight snapshots, 0 disables
  double blowup_guard = 1e6;
};

struct WeightHistory {
  std::vector<double> times;
  std::vector<std::vector<double>> snapshots;
};

struct TrainResult {
  std::vector<double> times;
  std::vector<std::vector<double>> xhat;         // per state component
  std::vector<std::vector<double>> xs;           // measured states, for convenience
  std::vector<std::vector<double>> weight_norm;  // per state component
  std::vector<std::vector<double>> w_avg;        // time-averaged weights over [t1, t2]
  std::vector<std::vector<double>> w_final;
  std::vector<WeightHistory> history;            // per state component
};

/// Materialized basis vector with dot products against stored weight vectors.
class BasisCache {
 public:
  explicit BasisCache(const RbfLattice& lat) : lat_(&lat) {}
  void at(const std::vector<double>& Z) { lat_->eval_basis_into(Z, s_); }
  const std::vector<double>& basis() const { return s_; }

  double dot(const std::vector<double>& w) const {
    double acc = 0.0;
    const double* a = w.data();
    const double* b = s_.data();
    for (std::size_t j = 0; j < s_.size(); ++j) acc += a[j] * b[j];
    return acc;
  }

 private:
  const RbfLattice* lat_;
  std::vector<double> s_;
};

namespace detail {

inline std::vector<double> lattice_input(const ModalState& xs, const std::vector<double>& u) {
  std::vector<double> Z(xs.size() + u.size());
  std::copy(xs.begin(), xs.end(), Z.begin());
  std::copy(u.begin(), u.end(), Z.begin() + xs.size());
  return Z;
}

inline std::vector<double> lattice_input_mid(const ModalState& xs0, const std::vector<double>& u0,
                                             const ModalState& xs1, const std::vector<double>& u1) {
  std::vector<double> Z(xs0.size() + u0.size());
  for (std::size_t j = 0; j < xs0.size(); ++j) Z[j] = 0.5 * (xs0[j] + xs1[j]);
  for (std::size_t j = 0; j < u0.size(); ++j) Z[xs0.size() + j] = 0.5 * (u0[j] + u1[j]);
  return Z;
}

}  // namespace detail

/// Integrate the coupled estimator/weight-update ODEs along a measured modal
/// trajectory, for all state components at once (they share the regressor).
/// Initial conditions are W(0) = 0 and xhat(0) = xs(0); the signals (x_s, u)
/// are treated as piecewise linear between samples.
inline TrainResult train_identifier(const ModalTrajectory& traj, const std::vector<double>& eigvals,
                                    const RbfLattice& lat, const std::vector<IdentifierGains>& gains,
                                    const TrainOptions& opt) {
  lat.validate();
  const std::size_t n_samples = traj.times.size();
  if (n_samples < 2) throw ConfigError("train_identifier: trajectory too short");
  const std::size_t m = traj.states.front().size();
  if (eigvals.size() < m || gains.size() != m)
    throw ConfigError("train_identifier: eigenvalue/gain dimensions do not match trajectory");
  if (static_cast<std::size_t>(lat.dims()) != m + traj.inputs.front().size())
    throw ConfigError("train_identifier: lattice dimension != m + q");
  const double dt = traj.dt;
  if (opt.avg_t2 <= opt.avg_t1) throw ConfigError("train_identifier: bad averaging window");

  const std::size_t nn = static_cast<std::size_t>(lat.node_count());
  TrainResult res;
  res.times = traj.times;
  res.xhat.assign(m, std::vector<double>(n_samples));
  res.xs.assign(m, std::vector<double>(n_samples));
  res.weight_norm.assign(m, std::vector<double>(n_samples));
  res.w_avg.assign(m, std::vector<double>(nn, 0.0));
  res.w_final.assign(m, std::vector<double>(nn, 0.0));
  res.history.assign(m, {});

  std::vector<std::vector<double>> W(m, std::vector<double>(nn, 0.0));
  std::vector<std::vector<double>> Wst(m, std::vector<double>(nn, 0.0));  // stage state
  std::vector<std::vector<double>> acc(m, std::vector<double>(nn, 0.0));  // RK4 accumulator
  std::vector<double> xhat(m);
  for (std::size_t i = 0; i < m; ++i) {
    xhat[i] = traj.states[0][i];
    res.xhat[i][0] = xhat[i];
    res.xs[i][0] = traj.states[0][i];
    res.weight_norm[i][0] = 0.0;
  }

  // trapezoid coefficients for the online weight average over [t1, t2]
  const std::size_t n1 = static_cast<std::size_t>(std::llround(opt.avg_t1 / dt));
  const std::size_t n2 = static_cast<std::size_t>(std::llround(opt.avg_t2 / dt));
  if (n2 >= n_samples || n1 >= n2) throw ConfigError("train_identifier: averaging window outside trajectory");

  BasisCache S0(lat), Smid(lat), Send(lat);
  S0.at(detail::lattice_input(traj.states[0], traj.inputs[0]));

  const double snap_every = opt.snapshot_stride;
  auto maybe_snapshot = [&](std::size_t n) {
    if (snap_every <= 0.0) return;
    const std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(snap_every / dt)));
    if (n % stride == 0)
      for (std::size_t i = 0; i < m; ++i) {
        res.history[i].times.push_back(traj.times[n]);
        res.history[i].snapshots.push_back(W[i]);
      }
  };
  auto accumulate_average = [&](std::size_t n) {
    if (n < n1 || n > n2) return;
    const double c = (n == n1 || n == n2) ? 0.5 * dt : dt;
    for (std::size_t i = 0; i < m; ++i) {
      double* av = res.w_avg[i].data();
      const double* w = W[i].data();
      for (std::size_t j = 0; j < nn; ++j) av[j] += c * w[j];
    }
  };
  maybe_snapshot(0);
  accumulate_average(0);

  for (std::size_t n = 0; n + 1 < n_samples; ++n) {
    Smid.at(detail::lattice_input_mid(traj.states[n], traj.inputs[n], traj.states[n + 1],
                                      traj.inputs[n + 1]));
    Send.at(detail::lattice_input(traj.states[n + 1], traj.inputs[n + 1]));

    for (std::size_t i = 0; i < m; ++i) {
      const IdentifierGains& g = gains[i];
      const double lam = eigvals[i];
      const double xs0 = traj.states[n][i];
      const double xs1 = traj.states[n + 1][i];
      const double xsm = 0.5 * (xs0 + xs1);
      const double sg = g.sigma * g.gamma;

      double x = xhat[i];
      double xacc = 0.0;
      double dot = S0.dot(W[i]);  // W^T S at the stage state

      // Each RK4 stage is one fused pass over the weight vector: weight
      // derivative, accumulator update, next stage state, and the next
      // stage's W^T S.

      // stage 1 (state = current solution)
      {
        const double e = x - xs0;
        const double dx = -g.a * e + lam * xs0 + dot;
        xacc += dx;
        const double ge = g.gamma * e;
        const double* s = S0.basis().data();
        const double* sn = Smid.basis().data();
        const double* wbase = W[i].data();
        double* wstage = Wst[i].data();
        double* ac = acc[i].data();
        double dot_next = 0.0;
        const double c = 0.5 * dt;
        for (std::size_t j = 0; j < nn; ++j) {
          const double kw = -sg * wbase[j] - ge * s[j];
          ac[j] = kw;
          const double wn = wbase[j] + c * kw;
          wstage[j] = wn;
          dot_next += wn * sn[j];
        }
        x = xhat[i] + c * dx;
        dot = dot_next;
      }
      // stage 2
      {
        const double e = x - xsm;
        const double dx = -g.a * e + lam * xsm + dot;
        xacc += 2.0 * dx;
        const double ge = g.gamma * e;
        const double* s = Smid.basis().data();
        const double* wbase = W[i].data();
        double* wstage = Wst[i].data();
        double* ac = acc[i].data();
        double dot_next = 0.0;
        const double c = 0.5 * dt;
        for (std::size_t j = 0; j < nn; ++j) {
          const double kw = -sg * wstage[j] - ge * s[j];
          ac[j] += 2.0 * kw;
          const double wn = wbase[j] + c * kw;
          wstage[j] = wn;
          dot_next += wn * s[j];  // stage 3 also uses S at the midpoint
        }
        x = xhat[i] + c * dx;
        dot = dot_next;
      }
      // stage 3
      {
        const double e = x - xsm;
        const double dx = -g.a * e + lam * xsm + dot;
        xacc += 2.0 * dx;
        const double ge = g.gamma * e;
        const double* s = Smid.basis().data();
        const double* sn = Send.basis().data();
        const double* wbase = W[i].data();
        double* wstage = Wst[i].data();
        double* ac = acc[i].data();
        double dot_next = 0.0;
        const double c = dt;
        for (std::size_t j = 0; j < nn; ++j) {
          const double kw = -sg * wstage[j] - ge * s[j];
          ac[j] += 2.0 * kw;
          const double wn = wbase[j] + c * kw;
          wstage[j] = wn;
          dot_next += wn * sn[j];
        }
        x = xhat[i] + c * dx;
        dot = dot_next;
      }
      // stage 4 and solution update
      {
        const double e = x - xs1;
        const double dx = -g.a * e + lam * xs1 + dot;
        xacc += dx;
        const double ge = g.gamma * e;
        const double* s = Send.basis().data();
        double* wstage = Wst[i].data();
        double* wbase = W[i].data();
        double* ac = acc[i].data();
        double norm2 = 0.0;
        const double c = dt / 6.0;
        for (std::size_t j = 0; j < nn; ++j) {
          const double kw = -sg * wstage[j] - ge * s[j];
          const double wnew = wbase[j] + c * (ac[j] + kw);
          wbase[j] = wnew;
          norm2 += wnew * wnew;
        }
        xhat[i] += dt / 6.0 * xacc;
        res.xhat[i][n + 1] = xhat[i];
        res.xs[i][n + 1] = xs1;
        res.weight_norm[i][n + 1] = std::sqrt(norm2);
        if (!std::isfinite(xhat[i]) || !std::isfinite(norm2) || std::abs(xhat[i]) > opt.blowup_guard ||
            norm2 > opt.blowup_guard * opt.blowup_guard)
          throw NumericError("identifier diverged (reduce Gamma or dt)");
      }
    }

    std::swap(S0, Send);
    maybe_snapshot(n + 1);
    accumulate_average(n + 1);
  }

  const double inv_len = 1.0 / (static_cast<double>(n2 - n1) * dt);
  for (std::size_t i = 0; i < m; ++i) {
    for (double& v : res.w_avg[i]) v *= inv_len;
    res.w_final[i] = W[i];
  }
  return res;
}

/// Trapezoidal time average of a weight snapshot history over [t1, t2].
inline std::vector<double> average_weights(const WeightHistory& history, double t1, double t2) {
  if (t1 >= t2) throw ConfigError("average_weights: t1 must precede t2");
  if (history.times.empty() || t1 < history.times.front() - 1e-12 ||
      t2 > history.times.back() + 1e-12)
    throw ConfigError("average_weights: window outside history");
  std::vector<std::size_t> in;
  for (std::size_t n = 0; n < history.times.size(); ++n)
    if (history.times[n] >= t1 - 1e-12 && history.times[n] <= t2 + 1e-12) in.push_back(n);
  if (in.empty()) throw ConfigError("average_weights: window contains no snapshots");
  const std::size_t nn = history.snapshots.front().size();
  std::vector<double> avg(nn, 0.0);
  if (in.size() == 1) return history.snapshots[in.front()];
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < in.size(); ++s) {
    const double h = history.times[in[s + 1]] - history.times[in[s]];
    total += h;
    for (std::size_t j = 0; j < nn; ++j)
      avg[j] += 0.5 * h * (history.snapshots[in[s]][j] + history.snapshots[in[s + 1]][j]);
  }
  for (double& v : avg) v /= total;
  return avg;
}

/// Bundle of learned models: mode 0 is the normal regime, modes 1..N the
/// trained fault regimes. weights[k][i] is the averaged weight vector for
/// state component i under mode k.
struct TrainedModel {
  RbfLattice lattice;
  std::vector<double> eigenvalues;                       // slow eigenvalues, size m
  std::vector<double> xi_star;                           // per component
  std::vector<std::vector<std::vector<double>>> weights; // [mode][component][node]

  int m() const { return static_cast<int>(eigenvalues.size()); }
  int num_fault_modes() const { return static_cast<int>(weights.size()) - 1; }

  void validate() const {
    lattice.validate();
    if (eigenvalues.empty() || weights.empty()) throw ConfigError("TrainedModel: empty model");
    if (xi_star.size() != eigenvalues.size()) throw ConfigError("TrainedModel: xi* dimension mismatch");
    const std::size_t nn = static_cast<std::size_t>(lattice.node_count());
    for (const auto& mode : weights) {
      if (mode.size() != eigenvalues.size()) throw ConfigError("TrainedModel: component count mismatch");
      for (const auto& w : mode)
        if (w.size() != nn) throw ConfigError("TrainedModel: weight length mismatch");
    }
  }
};

struct XiStarEstimate {
  std::vector<double> xi;        // per state component
  double settle_time = 5.0;
  int modes_scanned = 0;
  std::vector<std::vector<double>> max_error;  // [k][i] steady probe error per mode
};

/// Empirical approximation-error bound: run unit-gain probe estimators with the
/// averaged models over each mode's validation trajectory and take the worst
/// steady-state tracking error per component, inflated by `margin` to cover
/// the neighborhood of the orbit rather than the orbit line alone.
/// probe_start (optional, per mode): absolute trajectory time from which probe
/// errors count. Defaults to settle_time for every mode; fault modes should
/// start after the fault occurrence so the probe scans the dynamics the model
/// was actually trained on.
inline XiStarEstimate estimate_xi_star(const std::vector<std::vector<std::vector<double>>>& w_bar,
                                       const std::vector<ModalTrajectory>& validation,
                                       const std::vector<double>& eigvals, const RbfLattice& lat,
                                       double settle_time = 5.0,
                                       const std::vector<double>& probe_start = {},
                                       double margin = 1.0) {
  if (w_bar.empty() || w_bar.size() != validation.size())
    throw ConfigError("estimate_xi_star: need one validation trajectory per mode");
  if (!probe_start.empty() && probe_start.size() != w_bar.size())
    throw ConfigError("estimate_xi_star: probe_start must match the number of modes");
  if (margin < 1.0) throw ConfigError("estimate_xi_star: margin must be >= 1");
  const std::size_t m = w_bar.front().size();
  XiStarEstimate est;
  est.settle_time = settle_time;
  est.modes_scanned = static_cast<int>(w_bar.size());
  est.xi.assign(m, 0.0);
  est.max_error.assign(w_bar.size(), std::vector<double>(m, 0.0));

  for (std::size_t k = 0; k < w_bar.size(); ++k) {
    const ModalTrajectory& traj = validation[k];
    if (traj.times.size() < 2) throw ConfigError("estimate_xi_star: trajectory too short");
    const double t_start = probe_start.empty() ? settle_time : probe_start[k];
    const double dt = traj.dt;
    BasisCache S0(lat), Smid(lat), Send(lat);
    S0.at(detail::lattice_input(traj.states[0], traj.inputs[0]));
    std::vector<double> xbar(m);
    for (std::size_t i = 0; i < m; ++i) xbar[i] = traj.states[0][i];

    for (std::size_t n = 0; n + 1 < traj.times.size(); ++n) {
      Smid.at(detail::lattice_input_mid(traj.states[n], traj.inputs[n], traj.states[n + 1],
                                        traj.inputs[n + 1]));
      Send.at(detail::lattice_input(traj.states[n + 1], traj.inputs[n + 1]));
      for (std::size_t i = 0; i < m; ++i) {
        const double lam = eigvals[i];
        const double xs0 = traj.states[n][i];
        const double xs1 = traj.states[n + 1][i];
        const double xsm = 0.5 * (xs0 + xs1);
        const double f0 = S0.dot(w_bar[k][i]);
        const double fm = Smid.dot(w_bar[k][i]);
        const double f1 = Send.dot(w_bar[k][i]);
        // probe gain b = 1
        auto deriv = [&](double xs_st, double fnn, double xv) {
          return -(xv - xs_st) + lam * xs_st + fnn;
        };
        const double k1 = deriv(xs0, f0, xbar[i]);
        const double k2 = deriv(xsm, fm, xbar[i] + 0.5 * dt * k1);
        const double k3 = deriv(xsm, fm, xbar[i] + 0.5 * dt * k2);
        const double k4 = deriv(xs1, f1, xbar[i] + dt * k3);
        xbar[i] += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!std::isfinite(xbar[i])) throw NumericError("xi* probe diverged");
        const double err = std::abs(xbar[i] - xs1);
        if (traj.times[n + 1] >= t_start && err > est.max_error[k][i]) est.max_error[k][i] = err;
      }
      std::swap(S0, Send);
    }
    // The probe measures error on the validation orbit itself; xi* must also
    // cover the band of state space a similar-but-not-identical fault visits,
    // so the reported bound carries a configurable headroom factor.
    for (std::size_t i = 0; i < m; ++i)
      est.xi[i] = std::max(est.xi[i], margin * est.max_error[k][i]);
  }
  return est;
}

}  // namespace pdefdi
