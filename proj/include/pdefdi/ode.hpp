#pragma once

#include <vector>

namespace pdefdi {

// Classical fixed-step RK4 for a scalar state.
template <class F>
double rk4_step(double x, double t, double dt, F&& f) {
  const double k1 = f(t, x);
  const double k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1);
  const double k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2);
  const double k4 = f(t + dt, x + dt * k3);
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// RK4 for a vector state with preallocated stage buffers.
class Rk4Workspace {
 public:
  explicit Rk4Workspace(std::size_t n) : k1_(n), k2_(n), k3_(n), k4_(n), tmp_(n) {}

  // f(t, state, deriv_out)
  template <class F>
  void step(std::vector<double>& x, double t, double dt, F&& f) {
    const std::size_t n = x.size();
    f(t, x, k1_);
    for (std::size_t j = 0; j < n; ++j) tmp_[j] = x[j] + 0.5 * dt * k1_[j];
    f(t + 0.5 * dt, tmp_, k2_);
    for (std::size_t j = 0; j < n; ++j) tmp_[j] = x[j] + 0.5 * dt * k2_[j];
    f(t + 0.5 * dt, tmp_, k3_);
    for (std::size_t j = 0; j < n; ++j) tmp_[j] = x[j] + dt * k3_[j];
    f(t + dt, tmp_, k4_);
    for (std::size_t j = 0; j < n; ++j)
      x[j] += dt / 6.0 * (k1_[j] + 2.0 * k2_[j] + 2.0 * k3_[j] + k4_[j]);
  }

 private:
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace pdefdi
