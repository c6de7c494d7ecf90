#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "pdefdi/errors.hpp"
#include "pdefdi/identifier.hpp"
#include "pdefdi/pdesim.hpp"
#include "pdefdi/spectral.hpp"

namespace pdefdi {

struct FdConfig {
  std::vector<double> b0;       // FD estimator gains, per component
  std::vector<double> varrho;   // robustness margins, per component
  std::vector<double> xi_star;  // approximation-error bounds, per component
  double window = 2.5;          // L1 window length T
  double start_time = 0.0;      // crossings before this time are treated as warmup

  void validate() const {
    if (start_time < 0.0) throw ConfigError("FdConfig: start time must be nonnegative");
    if (b0.empty() || b0.size() != varrho.size() || b0.size() != xi_star.size())
      throw ConfigError("FdConfig: per-component vectors must have equal nonzero size");
    if (window <= 0.0) throw ConfigError("FdConfig: window length must be positive");
    for (std::size_t i = 0; i < b0.size(); ++i) {
      if (b0[i] <= 0.0) throw ConfigError("FdConfig: estimator gains must be positive");
      if (varrho[i] < 0.0) throw ConfigError("FdConfig: robustness margins must be nonnegative");
      if (xi_star[i] + varrho[i] <= 0.0) throw ConfigError("FdConfig: thresholds must be positive");
    }
  }
};

inline double fd_threshold(double xi_star, double varrho, double b0) {
  if (b0 <= 0.0) throw ConfigError("fd_threshold: gain must be positive");
  return (xi_star + varrho) / b0;
}

inline double fi_constant_threshold(double xi_star, double rho_bar, double b) {
  if (b <= 0.0) throw ConfigError("fi_constant_threshold: gain must be positive");
  if (rho_bar < 0.0) throw ConfigError("fi_constant_threshold: bound must be nonnegative");
  return (xi_star + rho_bar) / b;
}

/// Trailing trapezoidal moving average of |x| over a window of n_w intervals.
/// The value is defined once the window has filled (n_w + 1 samples seen).
class L1Window {
 public:
  L1Window(double T, double dt) : T_(T) {
    if (T <= 0.0 || dt <= 0.0) throw ConfigError("L1Window: T and dt must be positive");
    n_w_ = std::llround(T / dt);
    if (n_w_ < 1 || std::abs(static_cast<double>(n_w_) * dt - T) > 1e-9 * T)
      throw ConfigError("L1Window: T must be an integer multiple of dt");
    dt_ = dt;
    ring_.assign(static_cast<std::size_t>(n_w_) + 1, 0.0);
  }

  void push(double value) {
    const double v = std::abs(value);
    if (count_ > 0) {
      const double prev = ring_[(head_ + ring_.size() - 1) % ring_.size()];
      sum_ += 0.5 * dt_ * (prev + v);
    }
    if (count_ >= ring_.size()) {
      // drop the oldest interval
      const double old0 = ring_[head_];
      const double old1 = ring_[(head_ + 1) % ring_.size()];
      sum_ -= 0.5 * dt_ * (old0 + old1);
    }
    ring_[head_] = v;
    head_ = (head_ + 1) % ring_.size();
    if (count_ < ring_.size()) ++count_;
  }

  bool ready() const { return count_ == ring_.size(); }
  double value() const { return ready() ? sum_ / T_ : std::numeric_limits<double>::quiet_NaN(); }

 private:
  double T_ = 0.0;
  double dt_ = 0.0;
  long long n_w_ = 0;
  std::vector<double> ring_;
  std::size_t head_ = 0;
  std::size_t count_ = 0;
  double sum_ = 0.0;
};

/// Batch form: windowed norm per stamp; warmup stamps are NaN.
inline std::vector<double> l1_window(const std::vector<double>& residual, double T, double dt) {
  L1Window win(T, dt);
  std::vector<double> out(residual.size());
  for (std::size_t n = 0; n < residual.size(); ++n) {
    win.push(residual[n]);
    out[n] = win.value();
  }
  return out;
}

/// Scalar FD/FI estimator x_bar' = -b (x_bar - x_s) + lambda x_s + f, stepped
/// with RK4 over piecewise-linear (x_s, f) samples.
struct ScalarEstimator {
  double b = 1.0;
  double lambda = 0.0;
  double x = 0.0;

  void step(double dt, double xs0, double xs1, double f0, double f1) {
    const double xsm = 0.5 * (xs0 + xs1);
    const double fm = 0.5 * (f0 + f1);
    auto deriv = [&](double xs, double f, double xv) { return -b * (xv - xs) + lambda * xs + f; };
    const double k1 = deriv(xs0, f0, x);
    const double k2 = deriv(xsm, fm, x + 0.5 * dt * k1);
    const double k3 = deriv(xsm, fm, x + 0.5 * dt * k2);
    const double k4 = deriv(xs1, f1, x + dt * k3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(x)) throw NumericError("estimator diverged");
  }
};

struct ResidualTrace {
  int component = 0;  // i (0-based)
  int mode = 0;       // k: 0 = FD, >= 1 = FI bank
  std::vector<double> times;
  std::vector<double> residual;   // raw x_tilde
  std::vector<double> l1norm;     // NaN during warmup
  std::vector<double> threshold;  // NaN during FI warmup
  std::vector<char> crossed;
};

enum class DecisionKind { NoFault, Detected, Isolated, Ambiguous, NoneMatched };

inline const char* to_string(DecisionKind k) {
  switch (k) {
    case DecisionKind::NoFault: return "NoFault";
    case DecisionKind::Detected: return "Detected";
    case DecisionKind::Isolated: return "Isolated";
    case DecisionKind::Ambiguous: return "Ambiguous";
    case DecisionKind::NoneMatched: return "NoneMatched";
  }
  return "?";
}

struct DecisionEvent {
  DecisionKind kind = DecisionKind::NoFault;
  double time = 0.0;
  int mode = -1;       // isolated mode (1-based) or triggering mode
  int component = -1;  // component that triggered (0-based), -1 if n/a
  std::vector<double> exclusion_times;  // per fault mode, NaN if never excluded
  std::vector<int> survivors;           // surviving mode indices (1-based)
  std::string detail;
};

namespace detail {

/// Network outputs W^T S per component along a modal stream at sample stamps;
/// shared by the FD and FI banks.
inline std::vector<std::vector<double>> network_outputs(
    const std::vector<std::vector<double>>& weights, const RbfLattice& lat,
    const ModalTrajectory& stream) {
  const std::size_t m = weights.size();
  std::vector<std::vector<double>> f(m, std::vector<double>(stream.times.size()));
  BasisCache S(lat);
  for (std::size_t n = 0; n < stream.times.size(); ++n) {
    S.at(lattice_input(stream.states[n], stream.inputs[n]));
    for (std::size_t i = 0; i < m; ++i) f[i][n] = S.dot(weights[i]);
  }
  return f;
}

}  // namespace detail

struct FdResult {
  std::vector<ResidualTrace> traces;  // per component
  DecisionEvent decision;
  bool detected = false;
  double t_d = 0.0;
};

/// FD bank over a modal stream: integrate the mode-0 estimators, compare the
/// windowed residual norms against the constant thresholds, and report the
/// first crossing. The trace continues past detection for continuity.
inline FdResult run_fd(const TrainedModel& model, const ModalTrajectory& stream,
                       const FdConfig& cfg) {
  model.validate();
  cfg.validate();
  const std::size_t m = static_cast<std::size_t>(model.m());
  if (cfg.b0.size() != m) throw ConfigError("run_fd: config dimension != model dimension");
  if (stream.times.empty()) throw ConfigError("run_fd: empty stream");

  const auto f = detail::network_outputs(model.weights[0], model.lattice, stream);
  FdResult res;
  res.traces.resize(m);

  std::vector<ScalarEstimator> est(m);
  std::vector<L1Window> win;
  win.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    est[i] = {cfg.b0[i], model.eigenvalues[i], stream.states[0][i]};
    win.emplace_back(cfg.window, stream.dt);
    res.traces[i].component = static_cast<int>(i);
    res.traces[i].mode = 0;
  }

  const bool too_short = stream.times.back() - stream.times.front() < cfg.window;
  for (std::size_t n = 0; n < stream.times.size(); ++n) {
    for (std::size_t i = 0; i < m; ++i) {
      if (n > 0)
        est[i].step(stream.dt, stream.states[n - 1][i], stream.states[n][i], f[i][n - 1], f[i][n]);
      const double xt = est[i].x - stream.states[n][i];
      win[i].push(xt);
      const double norm = win[i].value();
      const double thr = fd_threshold(cfg.xi_star[i], cfg.varrho[i], cfg.b0[i]);
      const bool cross = win[i].ready() && stream.times[n] >= cfg.start_time && norm > thr;
      ResidualTrace& tr = res.traces[i];
      tr.times.push_back(stream.times[n]);
      tr.residual.push_back(xt);
      tr.l1norm.push_back(norm);
      tr.threshold.push_back(thr);
      tr.crossed.push_back(cross ? 1 : 0);
      if (cross && !res.detected) {
        res.detected = true;
        res.t_d = stream.times[n];
        res.decision.kind = DecisionKind::Detected;
        res.decision.time = stream.times[n];
        res.decision.component = static_cast<int>(i);
      }
    }
  }
  if (!res.detected) {
    res.decision.kind = DecisionKind::NoFault;
    res.decision.time = stream.times.back();
    if (too_short) res.decision.detail = "stream shorter than window; all stamps are warmup";
  }
  return res;
}

/// Fault-similarity bound shapes of the benchmark fault families. The bound is
/// rho_bar_i(t) = integral of phi_bar(z, x, u) |phi_i(z)| dz.
struct SimilarityBound {
  enum class Shape { Constant, ActuatorAmp, StateWindow, ComponentAbs, Tabulated };
  Shape shape = Shape::Constant;
  double constant = 0.0;  // Constant: rho_bar value directly
  double scale = 1.0;     // ActuatorAmp / ComponentAbs: Delta; StateWindow: gain bound
  double beta_u = 0.0;    // ActuatorAmp
  double z_lo = 0.0, z_hi = 0.0;  // StateWindow, half-open [z_lo, z_hi)
  double gamma = 0.0;             // ComponentAbs
  std::vector<double> table_z, table_g;  // Tabulated envelope g(z)
  bool table_times_state = false;
  bool table_times_input = false;

  void validate() const {
    switch (shape) {
      case Shape::Constant:
        if (constant < 0.0) throw ConfigError("SimilarityBound: constant must be nonnegative");
        break;
      case Shape::ActuatorAmp:
        if (scale < 0.0 || beta_u < 0.0) throw ConfigError("SimilarityBound: negative actuator bound");
        break;
      case Shape::StateWindow:
        if (z_hi <= z_lo) throw ConfigError("SimilarityBound: empty state window");
        if (scale < 0.0) throw ConfigError("SimilarityBound: negative window gain");
        break;
      case Shape::ComponentAbs:
        if (scale < 0.0 || gamma <= 0.0) throw ConfigError("SimilarityBound: bad component bound");
        break;
      case Shape::Tabulated:
        if (table_z.size() < 2 || table_z.size() != table_g.size())
          throw ConfigError("SimilarityBound: bad table");
        for (double g : table_g)
          if (g < 0.0) throw ConfigError("SimilarityBound: table values must be nonnegative");
        break;
    }
  }

  bool is_constant() const { return shape == Shape::Constant; }
};

inline double eval_similarity_bound(const SimilarityBound& bound, const EigenSystem& eig,
                                    const SpatialField& field, const std::vector<double>& u,
                                    int i) {
  bound.validate();
  if (i < 0 || i >= eig.m) throw ConfigError("eval_similarity_bound: component out of range");
  if (bound.shape == SimilarityBound::Shape::Constant) return bound.constant;
  const SpatialField& phi = eig.modes[static_cast<std::size_t>(i)];
  if (!same_grid(phi, field)) throw ConfigError("eval_similarity_bound: mismatched grids");
  double u_abs = 0.0;
  for (double uj : u) u_abs += std::abs(uj);

  std::vector<double> integrand(field.values.size());
  for (std::size_t p = 0; p < integrand.size(); ++p) {
    const double z = field.z(p);
    const double x = field.values[p];
    double v = 0.0;
    switch (bound.shape) {
      case SimilarityBound::Shape::ActuatorAmp:
        v = bound.scale * bound.beta_u * u_abs;
        break;
      case SimilarityBound::Shape::StateWindow:
        v = bound.scale * std::abs(x) * heaviside_window(z, bound.z_lo, bound.z_hi);
        break;
      case SimilarityBound::Shape::ComponentAbs:
        v = bound.scale * std::abs(reaction_term({1.0, bound.gamma}, x));
        break;
      case SimilarityBound::Shape::Tabulated:
        v = interp_table(bound.table_z, bound.table_g, z);
        if (bound.table_times_state) v *= std::abs(x);
        if (bound.table_times_input) v *= u_abs;
        break;
      default:
        throw ConfigError("eval_similarity_bound: unknown shape");
    }
    integrand[p] = v * std::abs(phi.values[p]);
  }
  return simpson(integrand, field.dz());
}

/// Low-pass filter of the bound plus the learning-error floor: threshold(t) =
/// xi*/b + L1-window of v, v' = -b v + rho_bar, v(t_d) = 0.
class AdaptiveThreshold {
 public:
  AdaptiveThreshold(double xi_star, double b, double T, double dt)
      : xi_over_b_(xi_star / b), b_(b), dt_(dt), win_(T, dt) {
    if (b <= 0.0) throw ConfigError("AdaptiveThreshold: gain must be positive");
    win_.push(0.0);  // v(t_d) = 0
  }

  /// Advance one sample interval with bound values at its endpoints; returns
  /// the threshold at the new stamp (NaN during warmup).
  double advance(double rho0, double rho1) {
    if (rho0 < 0.0 || rho1 < 0.0) throw ConfigError("AdaptiveThreshold: bound must be nonnegative");
    const double rhom = 0.5 * (rho0 + rho1);
    auto deriv = [&](double rho, double vv) { return -b_ * vv + rho; };
    const double k1 = deriv(rho0, v_);
    const double k2 = deriv(rhom, v_ + 0.5 * dt_ * k1);
    const double k3 = deriv(rhom, v_ + 0.5 * dt_ * k2);
    const double k4 = deriv(rho1, v_ + dt_ * k3);
    v_ += dt_ / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    win_.push(v_);
    return value();
  }

  bool ready() const { return win_.ready(); }
  double value() const {
    return win_.ready() ? xi_over_b_ + win_.value() : std::numeric_limits<double>::quiet_NaN();
  }
  double v() const { return v_; }

 private:
  double xi_over_b_;
  double b_;
  double dt_;
  double v_ = 0.0;
  L1Window win_;
};

/// Batch form over a bound-value stream starting at t_d; warmup stamps NaN.
inline std::vector<double> fi_adaptive_threshold(const std::vector<double>& rho, double b,
                                                 double xi_star, double T, double dt) {
  if (rho.empty()) throw ConfigError("fi_adaptive_threshold: empty stream");
  AdaptiveThreshold thr(xi_star, b, T, dt);
  std::vector<double> out(rho.size());
  out[0] = thr.value();
  for (std::size_t n = 1; n < rho.size(); ++n) out[n] = thr.advance(rho[n - 1], rho[n]);
  return out;
}

struct FiOptions {
  std::vector<double> b;        // FI estimator gains, per component
  std::vector<double> xi_star;  // per component
  double window = 2.5;

  void validate() const {
    if (b.empty() || b.size() != xi_star.size())
      throw ConfigError("FiOptions: per-component vectors must have equal nonzero size");
    if (window <= 0.0) throw ConfigError("FiOptions: window length must be positive");
    for (double g : b)
      if (g <= 0.0) throw ConfigError("FiOptions: estimator gains must be positive");
  }
};

struct FiModeResult {
  int mode = 0;  // k, 1-based
  bool excluded = false;
  double exclusion_time = std::numeric_limits<double>::quiet_NaN();
  int excluded_component = -1;
  std::vector<ResidualTrace> traces;  // per component
};

struct FiResult {
  std::vector<FiModeResult> modes;
  DecisionEvent decision;
};

/// FI bank over the post-detection stream. rho_streams[k-1][i][n] are the
/// similarity-bound samples for mode k; exclusion is latched at the first
/// post-warmup crossing. Exactly one survivor => Isolated.
inline FiResult run_fi(const TrainedModel& model, const ModalTrajectory& stream,
                       const std::vector<std::vector<std::vector<double>>>& rho_streams,
                       const FiOptions& opt) {
  model.validate();
  opt.validate();
  const std::size_t m = static_cast<std::size_t>(model.m());
  const std::size_t num_modes = static_cast<std::size_t>(model.num_fault_modes());
  if (num_modes == 0) throw ConfigError("run_fi: model has no fault modes");
  if (opt.b.size() != m) throw ConfigError("run_fi: config dimension != model dimension");
  if (stream.times.size() < 2) throw ConfigError("run_fi: stream too short (no prior detection?)");
  if (rho_streams.size() != num_modes) throw ConfigError("run_fi: bound stream count != fault modes");
  for (const auto& per_i : rho_streams) {
    if (per_i.size() != m) throw ConfigError("run_fi: bound stream component count mismatch");
    for (const auto& s : per_i)
      if (s.size() != stream.times.size()) throw ConfigError("run_fi: bound stream length mismatch");
  }

  FiResult res;
  res.modes.resize(num_modes);
  res.decision.exclusion_times.assign(num_modes, std::numeric_limits<double>::quiet_NaN());

  for (std::size_t k = 0; k < num_modes; ++k) {
    FiModeResult& mr = res.modes[k];
    mr.mode = static_cast<int>(k) + 1;
    mr.traces.resize(m);
    const auto f = detail::network_outputs(model.weights[k + 1], model.lattice, stream);

    std::vector<ScalarEstimator> est(m);
    std::vector<L1Window> win;
    std::vector<AdaptiveThreshold> thr;
    win.reserve(m);
    thr.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      est[i] = {opt.b[i], model.eigenvalues[i], stream.states[0][i]};
      win.emplace_back(opt.window, stream.dt);
      thr.emplace_back(opt.xi_star[i], opt.b[i], opt.window, stream.dt);
      mr.traces[i].component = static_cast<int>(i);
      mr.traces[i].mode = mr.mode;
    }

    for (std::size_t n = 0; n < stream.times.size(); ++n) {
      for (std::size_t i = 0; i < m; ++i) {
        double thr_val;
        if (n > 0) {
          est[i].step(stream.dt, stream.states[n - 1][i], stream.states[n][i], f[i][n - 1], f[i][n]);
          thr_val = thr[i].advance(rho_streams[k][i][n - 1], rho_streams[k][i][n]);
        } else {
          thr_val = thr[i].value();
        }
        const double xt = est[i].x - stream.states[n][i];
        win[i].push(xt);
        const double norm = win[i].value();
        const bool cross = win[i].ready() && thr[i].ready() && norm > thr_val;
        ResidualTrace& tr = mr.traces[i];
        tr.times.push_back(stream.times[n]);
        tr.residual.push_back(xt);
        tr.l1norm.push_back(norm);
        tr.threshold.push_back(thr_val);
        tr.crossed.push_back(cross ? 1 : 0);
        if (cross && !mr.excluded) {
          mr.excluded = true;
          mr.exclusion_time = stream.times[n];
          mr.excluded_component = static_cast<int>(i);
        }
      }
    }
    if (mr.excluded) res.decision.exclusion_times[k] = mr.exclusion_time;
  }

  std::vector<int> survivors;
  double t_iso = stream.times.front();
  for (const FiModeResult& mr : res.modes) {
    if (mr.excluded)
      t_iso = std::max(t_iso, mr.exclusion_time);
    else
      survivors.push_back(mr.mode);
  }
  res.decision.survivors = survivors;
  if (survivors.size() == 1) {
    res.decision.kind = DecisionKind::Isolated;
    res.decision.mode = survivors.front();
    res.decision.time = t_iso;
  } else if (survivors.empty()) {
    res.decision.kind = DecisionKind::NoneMatched;
    res.decision.time = t_iso;
  } else {
    res.decision.kind = DecisionKind::Ambiguous;
    res.decision.time = stream.times.back();
  }
  return res;
}

}  // namespace pdefdi
