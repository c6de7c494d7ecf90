#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "pdefdi/analysis.hpp"

using namespace pdefdi;

namespace {

std::vector<double> stamps(double t_end, double dt) {
  std::vector<double> t;
  for (int n = 0; n <= static_cast<int>(std::llround(t_end / dt)); ++n) t.push_back(n * dt);
  return t;
}

std::optional<std::pair<double, double>> iv(double a, double b) {
  return std::optional<std::pair<double, double>>(std::in_place, a, b);
}

FdConfig bench_cfg() {
  FdConfig cfg;
  cfg.b0 = {2.0};
  cfg.varrho = {0.12};
  cfg.xi_star = {0.086};
  cfg.window = 2.5;
  return cfg;
}

}  // namespace

TEST_CASE("required dwell formulas") {
  // (1/b) ln((7mu - 6xi)/(mu - 2xi)) + T (4xi + 4varrho)/(3mu - 2xi)
  CHECK(detectability_dwell(1.0, 0.086, 0.12, 2.0, 2.5) ==
        Catch::Approx(1.7575).margin(1e-3));
  CHECK(isolatability_dwell(1.0, 0.05, 0.0, 1.0, 2.0) ==
        Catch::Approx(1.29899).margin(1e-3));

  // unsatisfiable magnitude: reported, not thrown
  CHECK(std::isnan(detectability_dwell(0.1, 0.086, 0.12, 2.0, 2.5)));
  CHECK(std::isnan(detectability_dwell(2.0 * 0.086, 0.086, 0.12, 2.0, 2.5)));
  CHECK(std::isnan(isolatability_dwell(0.05, 0.05, 0.0, 1.0, 2.0)));

  // larger fault magnitudes need less dwell
  double prev = detectability_dwell(0.5, 0.086, 0.12, 2.0, 2.5);
  for (double mu : {1.0, 2.0, 4.0, 8.0}) {
    const double d = detectability_dwell(mu, 0.086, 0.12, 2.0, 2.5);
    CHECK(d < prev);
    prev = d;
  }
  // larger bound ceilings need more dwell
  CHECK(isolatability_dwell(1.0, 0.05, 0.5, 1.0, 2.0) >
        isolatability_dwell(1.0, 0.05, 0.0, 1.0, 2.0));
}

TEST_CASE("detectability over an explicit interval") {
  const auto times = stamps(3.0, 0.01);
  const std::vector<std::vector<double>> proj = {std::vector<double>(times.size(), 1.0)};
  const FdConfig cfg = bench_cfg();

  DetectabilityReport ok = check_detectability(times, proj, cfg, iv(0.0, 2.0));
  REQUIRE(ok.components.size() == 1);
  CHECK(ok.components[0].mu == Catch::Approx(1.0));
  CHECK(ok.components[0].magnitude_ok);
  CHECK(ok.components[0].required_dwell == Catch::Approx(1.7575).margin(1e-3));
  CHECK(ok.verdict);
  CHECK(ok.predicted_t_b == Catch::Approx(2.0));

  DetectabilityReport tight = check_detectability(times, proj, cfg, iv(0.0, 1.0));
  CHECK(tight.components[0].magnitude_ok);
  CHECK_FALSE(tight.verdict);  // interval shorter than the required dwell

  // exactly at the magnitude boundary: strict inequality fails
  const double mu_edge = 2.0 * cfg.xi_star[0] + 2.0 * cfg.varrho[0];
  const std::vector<std::vector<double>> edge = {std::vector<double>(times.size(), mu_edge)};
  DetectabilityReport b = check_detectability(times, edge, cfg, iv(0.0, 2.5));
  CHECK_FALSE(b.components[0].magnitude_ok);
  CHECK_FALSE(b.verdict);

  CHECK_THROWS_AS(check_detectability(times, proj, cfg, iv(2.0, 1.0)), ConfigError);
  CHECK_THROWS_AS(check_detectability(times, proj, cfg, iv(0.0, 9.0)), ConfigError);
}

TEST_CASE("detectability interval scanning") {
  const auto times = stamps(3.0, 0.01);
  const std::vector<std::vector<double>> proj = {std::vector<double>(times.size(), 1.0)};
  DetectabilityReport rep = check_detectability(times, proj, bench_cfg());
  CHECK(rep.scanned);
  CHECK(rep.verdict);
  // required dwell ~1.76 s, so the earliest satisfying trailing window is the
  // 2 s one ending at t = 2
  CHECK(rep.predicted_t_b == Catch::Approx(2.0));

  // a weak fault never satisfies the magnitude clause anywhere
  const std::vector<std::vector<double>> weak = {std::vector<double>(times.size(), 0.1)};
  DetectabilityReport no = check_detectability(times, weak, bench_cfg());
  CHECK_FALSE(no.verdict);
  CHECK_FALSE(no.components[0].satisfiable);
}

TEST_CASE("isolatability over explicit intervals") {
  const auto times = stamps(3.0, 0.01);
  const std::size_t len = times.size();
  const std::vector<double> b = {1.0};
  const std::vector<double> xi = {0.05};

  // mode 1: strong mismatch, zero bound; mode 2: mismatch buried in the bound
  std::vector<std::vector<std::vector<double>>> mismatch = {
      {std::vector<double>(len, 1.0)}, {std::vector<double>(len, 0.3)}};
  std::vector<std::vector<std::vector<double>>> bounds = {
      {std::vector<double>(len, 0.0)}, {std::vector<double>(len, 0.4)}};

  const std::optional<std::pair<double, double>> win(std::in_place, 0.0, 2.0);
  IsolatabilityReport rep = check_isolatability(times, mismatch, bounds, b, xi, 2.0, {win, win});
  REQUIRE(rep.modes.size() == 2);
  CHECK(rep.modes[0].verdict);
  CHECK(rep.modes[0].components[0].required_dwell == Catch::Approx(1.29899).margin(1e-3));
  CHECK_FALSE(rep.modes[1].verdict);   // |rho| <= rho_bar everywhere
  CHECK_FALSE(rep.modes[1].components[0].magnitude_ok);
  CHECK_FALSE(rep.verdict);            // not every mode excludable
  CHECK(std::isnan(rep.predicted_t_iso));

  // drop the troublesome mode: overall verdict flips and t_iso is reported
  IsolatabilityReport solo =
      check_isolatability(times, {mismatch[0]}, {bounds[0]}, b, xi, 2.0, {win});
  CHECK(solo.verdict);
  CHECK(solo.predicted_t_iso == Catch::Approx(2.0));
}

TEST_CASE("isolatability scanning and validation") {
  const auto times = stamps(3.0, 0.01);
  const std::size_t len = times.size();
  const std::vector<double> b = {1.0};
  const std::vector<double> xi = {0.05};
  std::vector<std::vector<std::vector<double>>> mismatch = {{std::vector<double>(len, 1.0)}};
  std::vector<std::vector<std::vector<double>>> bounds = {{std::vector<double>(len, 0.0)}};

  IsolatabilityReport rep = check_isolatability(times, mismatch, bounds, b, xi, 2.0);
  CHECK(rep.verdict);
  CHECK(rep.predicted_t_iso <= 2.0 + 1e-9);

  CHECK_THROWS_AS(check_isolatability(times, mismatch, {}, b, xi, 2.0), ConfigError);
  CHECK_THROWS_AS(check_isolatability(times, mismatch, bounds, b, xi, -1.0), ConfigError);
  CHECK_THROWS_AS(check_isolatability(times, mismatch, bounds, b, xi, 2.0, {{}, {}}),
                  ConfigError);
}
