#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "pdefdi/errors.hpp"
#include "pdefdi/ode.hpp"
#include "pdefdi/spatial.hpp"
#include "pdefdi/spectral.hpp"

namespace pdefdi {

// ---------------------------------------------------------------- input signal

struct Harmonic {
  double amp = 0.0;
  double omega = 0.0;
  double phase = 0.0;
};

struct InputChannel {
  double offset = 0.0;
  std::vector<Harmonic> harmonics;
};

struct InputSignal {
  std::vector<InputChannel> channels;

  std::size_t q() const { return channels.size(); }

  std::vector<double> eval(double t) const {
    std::vector<double> u(channels.size());
    for (std::size_t c = 0; c < channels.size(); ++c) {
      double v = channels[c].offset;
      for (const Harmonic& h : channels[c].harmonics) v += h.amp * std::sin(h.omega * t + h.phase);
      u[c] = v;
    }
    return u;
  }
};

inline std::vector<double> eval_input(const InputSignal& sig, double t) { return sig.eval(t); }

/// Fault time profile: 0 before the occurrence instant, 1 from it on.
inline double beta_profile(double t, double t0) { return t < t0 ? 0.0 : 1.0; }

// ---------------------------------------------------------------- plant model

/// Sine series sum_j c_j sin(j pi (z - z1) / L); on [0, pi] this is sum c_j sin(jz).
inline double sin_series(const std::vector<double>& coeffs, double z, double z1, double length) {
  double v = 0.0;
  for (std::size_t j = 0; j < coeffs.size(); ++j)
    v += coeffs[j] * std::sin(static_cast<double>(j + 1) * std::numbers::pi * (z - z1) / length);
  return v;
}

struct Reaction {
  double beta_T = 0.0;
  double gamma = 1.0;  // must stay positive; the term is e^{-gamma/(1+x)} - e^{-gamma}
};

struct PlantModel {
  OperatorSpec op;
  Reaction reaction;
  double beta_u = 0.0;
  std::vector<std::vector<double>> actuator_harmonics;  // b_c(z) per input channel
  std::vector<double> initial_harmonics;                // x0(z) sine series

  void validate() const {
    op.validate();
    if (reaction.gamma <= 0.0) throw ConfigError("PlantModel: gamma must be positive");
  }
};

// Guard margin above the x = -1 singularity of the reaction term.
inline constexpr double kReactionGuardEps = 0.5;

inline double reaction_term(const Reaction& r, double x) {
  return std::exp(-r.gamma / (1.0 + x)) - std::exp(-r.gamma);
}

// ---------------------------------------------------------------- fault specs

struct FaultSpec {
  enum class Kind { Actuator, StateWindow, ComponentGain, Tabulated };
  Kind kind = Kind::Actuator;
  double t0 = 0.0;

  std::vector<double> delta_b_harmonics;  // Actuator: phi = delta_b(z) * beta_u * u
  double z_lo = 0.0, z_hi = 0.0;          // StateWindow: phi = gain * 1_[z_lo,z_hi)(z) * x
  double gain = 1.0;
  double delta_beta = 0.0;                // ComponentGain: phi = delta_beta * reaction(x)
  std::vector<double> table_z, table_g;   // Tabulated: phi = g(z) [* x] [* u]
  bool table_times_state = false;
  bool table_times_input = false;

  void validate(const OperatorSpec& op) const {
    if (t0 < 0.0) throw ConfigError("FaultSpec: t0 must be nonnegative");
    if (kind == Kind::StateWindow && !(z_lo < z_hi && z_lo >= op.z1 && z_hi <= op.z2))
      throw ConfigError("FaultSpec: state window must satisfy z1 <= z_lo < z_hi <= z2");
    if (kind == Kind::Tabulated && (table_z.size() != table_g.size() || table_z.size() < 2))
      throw ConfigError("FaultSpec: tabulated fault needs matching z/g samples");
  }
};

inline double interp_table(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  std::size_t hi = 1;
  while (xs[hi] < x) ++hi;
  const double w = (x - xs[hi - 1]) / (xs[hi] - xs[hi - 1]);
  return ys[hi - 1] + w * (ys[hi] - ys[hi - 1]);
}

// Half-open window convention [z_lo, z_hi).
inline double heaviside_window(double z, double z_lo, double z_hi) {
  return (z >= z_lo && z < z_hi) ? 1.0 : 0.0;
}

/// Pointwise fault dynamics phi^k at (z, x, u).
inline double fault_value(const FaultSpec& f, const PlantModel& plant, double z, double x,
                          const std::vector<double>& u) {
  const double u0 = u.empty() ? 0.0 : u[0];
  switch (f.kind) {
    case FaultSpec::Kind::Actuator:
      return sin_series(f.delta_b_harmonics, z, plant.op.z1, plant.op.z2 - plant.op.z1) *
             plant.beta_u * u0;
    case FaultSpec::Kind::StateWindow:
      return f.gain * heaviside_window(z, f.z_lo, f.z_hi) * x;
    case FaultSpec::Kind::ComponentGain:
      return f.delta_beta * reaction_term(plant.reaction, x);
    case FaultSpec::Kind::Tabulated: {
      double v = interp_table(f.table_z, f.table_g, z);
      if (f.table_times_state) v *= x;
      if (f.table_times_input) v *= u0;
      return v;
    }
  }
  return 0.0;
}

// ------------------------------------------------------------------ simulator

struct SimOptions {
  double t_end = 1.0;
  double dt = 1e-3;         // output sample step
  int grid_size = 200;      // N_z (even)
  double stability_safety = 0.8;
  bool upwind_convection = false;
  double blowup_guard = 1e6;
};

struct Trajectory {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<SpatialField> fields;
  std::vector<std::vector<double>> inputs;
};

struct ModalTrajectory {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<ModalState> states;
  std::vector<std::vector<double>> inputs;
};

namespace detail {

/// Method-of-lines RHS evaluation over the full grid (boundary handling:
/// Dirichlet values pinned, Robin via ghost-node elimination).
class PdeRhs {
 public:
  PdeRhs(const PlantModel& plant, const FaultSpec* fault, const InputSignal& sig, int nz)
      : plant_(plant), fault_(fault), sig_(sig), nz_(nz) {
    dz_ = (plant.op.z2 - plant.op.z1) / nz;
    b_of_z_.resize(sig.q());
    for (std::size_t c = 0; c < sig.q(); ++c) {
      b_of_z_[c].assign(nz + 1, 0.0);
      if (c < plant.actuator_harmonics.size())
        for (int i = 0; i <= nz; ++i)
          b_of_z_[c][i] = sin_series(plant.actuator_harmonics[c], z(i), plant.op.z1,
                                     plant.op.z2 - plant.op.z1);
    }
  }

  double z(int i) const { return plant_.op.z1 + i * dz_; }
  double dz() const { return dz_; }

  void operator()(double t, const std::vector<double>& x, std::vector<double>& dxdt) const {
    const std::vector<double> u = sig_.eval(t);
    const bool faulty = fault_ != nullptr && beta_profile(t, fault_->t0) > 0.0;
    const double a1 = plant_.op.a1, a2 = plant_.op.a2;
    const double inv_dz2 = 1.0 / (dz_ * dz_), inv_2dz = 1.0 / (2.0 * dz_);

    auto source = [&](int i, double xi) {
      double v = 0.0;
      if (plant_.reaction.beta_T != 0.0) v += plant_.reaction.beta_T * reaction_term(plant_.reaction, xi);
      if (plant_.beta_u != 0.0) {
        double bu = 0.0;
        for (std::size_t c = 0; c < b_of_z_.size(); ++c) bu += b_of_z_[c][i] * u[c];
        v += plant_.beta_u * (bu - xi);
      }
      if (faulty) v += fault_value(*fault_, plant_, z(i), xi, u);
      return v;
    };

    for (int i = 1; i < nz_; ++i) {
      const double diff = a2 * (x[i + 1] - 2.0 * x[i] + x[i - 1]) * inv_dz2;
      double conv = 0.0;
      if (a1 != 0.0) {
        if (plant_.op.a1 > 0.0 && upwind_)
          conv = a1 * (x[i + 1] - x[i]) / dz_;
        else if (a1 < 0.0 && upwind_)
          conv = a1 * (x[i] - x[i - 1]) / dz_;
        else
          conv = a1 * (x[i + 1] - x[i - 1]) * inv_2dz;
      }
      dxdt[i] = diff + conv + source(i, x[i]);
    }

    // left endpoint
    if (plant_.op.left.dirichlet()) {
      dxdt[0] = 0.0;
    } else {
      const double slope = -plant_.op.left.m / plant_.op.left.n;
      const double ghost = x[1] + 2.0 * dz_ * slope * x[0];  // x_{-1}
      dxdt[0] = a2 * (x[1] - 2.0 * x[0] + ghost) * inv_dz2 + a1 * slope * x[0] + source(0, x[0]);
    }
    // right endpoint
    if (plant_.op.right.dirichlet()) {
      dxdt[nz_] = 0.0;
    } else {
      const double slope = -plant_.op.right.m / plant_.op.right.n;
      const double ghost = x[nz_ - 1] - 2.0 * dz_ * slope * x[nz_];  // x_{N+1}
      dxdt[nz_] = a2 * (ghost - 2.0 * x[nz_] + x[nz_ - 1]) * inv_dz2 + a1 * slope * x[nz_] +
                  source(nz_, x[nz_]);
    }
  }

  void set_upwind(bool v) { upwind_ = v; }

 private:
  const PlantModel& plant_;
  const FaultSpec* fault_;
  const InputSignal& sig_;
  int nz_;
  double dz_ = 0.0;
  bool upwind_ = false;
  std::vector<std::vector<double>> b_of_z_;  // actuator distribution per channel on the grid
};

}  // namespace detail

/// Core method-of-lines integrator. Advances with RK4 using internal substeps
/// chosen against the explicit diffusion stability limit, and invokes the
/// observer at every output sample (including t = 0).
/// Observer: cb(sample_index, t, field_values, u).
template <class Observer>
void simulate_pde_observed(const PlantModel& plant, const FaultSpec* fault, const InputSignal& sig,
                           const SimOptions& opt, Observer&& cb) {
  plant.validate();
  if (fault) fault->validate(plant.op);
  if (opt.grid_size < 50 || opt.grid_size % 2 != 0)
    throw ConfigError("simulate_pde: grid size must be even and >= 50");
  if (opt.dt <= 0.0 || opt.t_end <= 0.0) throw ConfigError("simulate_pde: bad time parameters");

  const int nz = opt.grid_size;
  detail::PdeRhs rhs(plant, fault, sig, nz);
  rhs.set_upwind(opt.upwind_convection);

  // RK4 real-axis stability radius ~2.78; use 2.5 with the safety factor.
  const double dz = rhs.dz();
  const double spectral_bound = 4.0 * std::abs(plant.op.a2) / (dz * dz) +
                                2.0 * std::abs(plant.op.a1) / dz + std::abs(plant.beta_u);
  const double dt_stable = 2.5 / spectral_bound * opt.stability_safety;
  const int n_sub = std::max(1, static_cast<int>(std::ceil(opt.dt / dt_stable)));
  const double dt_sub = opt.dt / n_sub;

  std::vector<double> x(nz + 1);
  for (int i = 0; i <= nz; ++i)
    x[i] = sin_series(plant.initial_harmonics, rhs.z(i), plant.op.z1, plant.op.z2 - plant.op.z1);
  if (plant.op.left.dirichlet()) x[0] = 0.0;
  if (plant.op.right.dirichlet()) x[nz] = 0.0;

  const std::size_t n_samples = static_cast<std::size_t>(std::llround(opt.t_end / opt.dt));
  Rk4Workspace ws(x.size());
  const bool reaction_active =
      plant.reaction.beta_T != 0.0 ||
      (fault && fault->kind == FaultSpec::Kind::ComponentGain && fault->delta_beta != 0.0);

  cb(std::size_t{0}, 0.0, x, sig.eval(0.0));
  for (std::size_t s = 1; s <= n_samples; ++s) {
    const double t_base = static_cast<double>(s - 1) * opt.dt;
    for (int sub = 0; sub < n_sub; ++sub) ws.step(x, t_base + sub * dt_sub, dt_sub, rhs);
    if (plant.op.left.dirichlet()) x[0] = 0.0;
    if (plant.op.right.dirichlet()) x[nz] = 0.0;
    const double t = static_cast<double>(s) * opt.dt;
    for (double v : x) {
      if (!std::isfinite(v) || std::abs(v) > opt.blowup_guard)
        throw NumericError("simulation diverged");
      if (reaction_active && v <= -1.0 + kReactionGuardEps)
        throw NumericError("reaction domain violation (state approached x = -1)");
    }
    cb(s, t, x, sig.eval(t));
  }
}

/// Full-field trajectory (heavy; prefer the observer form for long horizons).
inline Trajectory simulate_pde(const PlantModel& plant, const std::optional<FaultSpec>& fault,
                               const InputSignal& sig, const SimOptions& opt) {
  Trajectory traj;
  traj.dt = opt.dt;
  simulate_pde_observed(plant, fault ? &*fault : nullptr, sig, opt,
                        [&](std::size_t, double t, const std::vector<double>& x,
                            const std::vector<double>& u) {
                          traj.times.push_back(t);
                          traj.fields.emplace_back(plant.op.z1, plant.op.z2, x);
                          traj.inputs.push_back(u);
                        });
  return traj;
}

/// Per-sample projection of a field trajectory onto the slow eigenfunctions.
inline ModalTrajectory measure_modal(const Trajectory& traj, const EigenSystem& eig) {
  ModalTrajectory out;
  out.dt = traj.dt;
  out.times = traj.times;
  out.inputs = traj.inputs;
  out.states.reserve(traj.fields.size());
  for (const SpatialField& f : traj.fields) out.states.push_back(project(f, eig));
  return out;
}

}  // namespace pdefdi
