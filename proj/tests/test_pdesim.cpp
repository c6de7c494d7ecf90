#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "pdefdi/ode.hpp"
#include "pdefdi/pdesim.hpp"
#include "pdefdi/spectral.hpp"

using namespace pdefdi;

namespace {

PlantModel benchmark_plant() {
  PlantModel plant;
  plant.op.a2 = 1.0;
  plant.op.z1 = 0.0;
  plant.op.z2 = std::numbers::pi;
  plant.reaction = {50.0, 4.0};
  plant.beta_u = 2.0;
  plant.actuator_harmonics = {{1.5, 1.8, 2.0}};
  plant.initial_harmonics = {15.0};
  return plant;
}

InputSignal benchmark_input() {
  InputSignal sig;
  InputChannel ch;
  ch.offset = 1.1;
  ch.harmonics = {{2.0, 5.0, 0.0}, {-2.0, 5.0, std::numbers::pi / 2.0}};
  sig.channels.push_back(ch);
  return sig;
}

PlantModel pure_diffusion() {
  PlantModel plant;
  plant.op.a2 = 1.0;
  plant.op.z1 = 0.0;
  plant.op.z2 = std::numbers::pi;
  plant.initial_harmonics = {1.0};
  return plant;
}

}  // namespace

TEST_CASE("fault time profile") {
  CHECK(beta_profile(29.9, 30.0) == 0.0);
  CHECK(beta_profile(30.0, 30.0) == 1.0);
  CHECK(beta_profile(0.0, 0.0) == 1.0);
}

TEST_CASE("benchmark input signal evaluation") {
  const InputSignal sig = benchmark_input();
  CHECK(eval_input(sig, 0.0)[0] == Catch::Approx(-0.9).margin(1e-12));
  CHECK(eval_input(sig, std::numbers::pi / 10.0)[0] == Catch::Approx(3.1).margin(1e-12));

  InputSignal flat;
  flat.channels.push_back({5.0, {}});
  CHECK(eval_input(flat, 17.3)[0] == 5.0);
}

TEST_CASE("table interpolation and heaviside window") {
  const std::vector<double> xs = {0.0, 1.0, 2.0};
  const std::vector<double> ys = {0.0, 2.0, 0.0};
  CHECK(interp_table(xs, ys, 0.5) == Catch::Approx(1.0));
  CHECK(interp_table(xs, ys, -1.0) == 0.0);
  CHECK(interp_table(xs, ys, 5.0) == 0.0);
  CHECK(heaviside_window(1.0, 1.0, 1.3) == 1.0);
  CHECK(heaviside_window(1.3, 1.0, 1.3) == 0.0);  // half-open convention
  CHECK(heaviside_window(0.9, 1.0, 1.3) == 0.0);
}

TEST_CASE("zero plant stays identically zero") {
  PlantModel plant = pure_diffusion();
  plant.initial_harmonics = {};
  InputSignal sig;
  sig.channels.push_back({0.0, {}});
  SimOptions opt;
  opt.t_end = 0.5;
  opt.dt = 1e-2;
  opt.grid_size = 50;
  Trajectory traj = simulate_pde(plant, std::nullopt, sig, opt);
  for (const SpatialField& f : traj.fields)
    for (double v : f.values) CHECK(v == 0.0);
}

TEST_CASE("heat equation analytic oracle") {
  PlantModel plant = pure_diffusion();
  InputSignal sig;
  sig.channels.push_back({0.0, {}});
  SimOptions opt;
  opt.t_end = 1.0;
  opt.dt = 1e-3;
  opt.grid_size = 200;
  Trajectory traj = simulate_pde(plant, std::nullopt, sig, opt);
  // x(z, t) = e^{-t} sin z
  const double mid = traj.fields.back().values[100];
  CHECK(mid == Catch::Approx(std::exp(-1.0)).margin(1e-3));

  EigenSystem eig = solve_eigenproblem(plant.op, 3, opt.grid_size);
  ModalTrajectory modal = measure_modal(traj, eig);
  const double expect = std::sqrt(std::numbers::pi / 2.0) * std::exp(-1.0);
  CHECK(modal.states.back()[0] == Catch::Approx(expect).margin(1e-3));
  CHECK(std::abs(modal.states.back()[1]) < 1e-6);
  CHECK(std::abs(modal.states.back()[2]) < 1e-6);
}

TEST_CASE("fault gated after t_end is bit-identical to no fault") {
  PlantModel plant = benchmark_plant();
  InputSignal sig = benchmark_input();
  SimOptions opt;
  opt.t_end = 1.0;
  opt.dt = 1e-3;
  opt.grid_size = 100;

  FaultSpec fault;
  fault.kind = FaultSpec::Kind::Actuator;
  fault.delta_b_harmonics = {-0.3};
  fault.t0 = 5.0;  // beyond the horizon

  Trajectory a = simulate_pde(plant, std::nullopt, sig, opt);
  Trajectory b = simulate_pde(plant, fault, sig, opt);
  REQUIRE(a.fields.size() == b.fields.size());
  for (std::size_t n = 0; n < a.fields.size(); ++n)
    for (std::size_t p = 0; p < a.fields[n].values.size(); ++p)
      CHECK(a.fields[n].values[p] == b.fields[n].values[p]);
}

TEST_CASE("linear consistency with the analytic modal ODE") {
  PlantModel plant = benchmark_plant();
  plant.reaction.beta_T = 0.0;  // linear case
  InputSignal sig = benchmark_input();
  SimOptions opt;
  opt.t_end = 10.0;
  opt.dt = 1e-3;
  opt.grid_size = 200;
  Trajectory traj = simulate_pde(plant, std::nullopt, sig, opt);
  EigenSystem eig = solve_eigenproblem(plant.op, 3, opt.grid_size);
  ModalTrajectory modal = measure_modal(traj, eig);

  // xdot_i = lambda_i x_i + beta_u (<b, phi_i> u - x_i)
  const double half = std::sqrt(std::numbers::pi / 2.0);
  const std::vector<double> bproj = {1.5 * half, 1.8 * half, 2.0 * half};
  std::vector<double> xs = modal.states.front();
  double max_rel = 0.0;
  for (std::size_t n = 0; n + 1 < modal.times.size(); ++n) {
    for (int i = 0; i < 3; ++i) {
      auto deriv = [&](double t, double x) {
        const double u = eval_input(sig, t)[0];
        return eig.eigenvalues[i] * x + plant.beta_u * (bproj[i] * u - x);
      };
      xs[i] = rk4_step(xs[i], modal.times[n], opt.dt, deriv);
    }
    if (modal.times[n + 1] > 1.0) {  // skip the fast-mode transient the reduced model cannot track
      for (int i = 0; i < 3; ++i) {
        const double denom = std::max(1.0, std::abs(modal.states[n + 1][i]));
        max_rel = std::max(max_rel, std::abs(xs[i] - modal.states[n + 1][i]) / denom);
      }
    }
  }
  CHECK(max_rel < 1e-2);
}

TEST_CASE("divergence and domain guards raise numeric errors") {
  PlantModel plant = benchmark_plant();
  InputSignal sig = benchmark_input();
  SimOptions opt;
  opt.t_end = 0.5;
  opt.dt = 1e-3;
  opt.grid_size = 100;
  opt.stability_safety = 60.0;  // force an unstable internal step
  CHECK_THROWS_AS(simulate_pde(plant, std::nullopt, sig, opt), NumericError);

  PlantModel bad = benchmark_plant();
  bad.initial_harmonics = {-20.0};  // dips far below the x = -1 singularity
  SimOptions opt2;
  opt2.t_end = 0.1;
  opt2.dt = 1e-3;
  opt2.grid_size = 100;
  CHECK_THROWS_AS(simulate_pde(bad, std::nullopt, sig, opt2), NumericError);
}

TEST_CASE("benchmark run stays bounded and inside the lattice box") {
  PlantModel plant = benchmark_plant();
  InputSignal sig = benchmark_input();
  SimOptions opt;
  opt.t_end = 20.0;
  opt.dt = 1e-3;
  opt.grid_size = 200;
  EigenSystem eig = solve_eigenproblem(plant.op, 3, opt.grid_size);

  double lo1 = 1e30, hi1 = -1e30;
  bool bounded = true;
  Trajectory traj = simulate_pde(plant, std::nullopt, sig, opt);
  ModalTrajectory modal = measure_modal(traj, eig);
  for (std::size_t n = 0; n < modal.times.size(); ++n) {
    if (modal.times[n] < 5.0) continue;  // transient
    lo1 = std::min(lo1, modal.states[n][0]);
    hi1 = std::max(hi1, modal.states[n][0]);
    for (int i = 0; i < 3; ++i) bounded = bounded && std::abs(modal.states[n][i]) < 100.0;
  }
  CHECK(bounded);
  CHECK(lo1 > 17.5);
  CHECK(hi1 < 24.0);
}

TEST_CASE("fault value shapes") {
  PlantModel plant = benchmark_plant();
  const std::vector<double> u = {2.0};

  FaultSpec act;
  act.kind = FaultSpec::Kind::Actuator;
  act.delta_b_harmonics = {-0.3};
  CHECK(fault_value(act, plant, std::numbers::pi / 2.0, 0.0, u) ==
        Catch::Approx(-0.3 * 2.0 * 2.0));

  FaultSpec sw;
  sw.kind = FaultSpec::Kind::StateWindow;
  sw.z_lo = 1.0;
  sw.z_hi = 1.3;
  sw.gain = 1.0;
  CHECK(fault_value(sw, plant, 1.1, 3.5, u) == 3.5);
  CHECK(fault_value(sw, plant, 1.3, 3.5, u) == 0.0);

  FaultSpec cg;
  cg.kind = FaultSpec::Kind::ComponentGain;
  cg.delta_beta = 2.0;
  const double x = 1.7;
  CHECK(fault_value(cg, plant, 0.5, x, u) ==
        Catch::Approx(2.0 * (std::exp(-4.0 / (1.0 + x)) - std::exp(-4.0))));
}
