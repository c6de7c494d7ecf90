#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "pdefdi/rbf.hpp"

using namespace pdefdi;

namespace {

RbfLattice unit_pair() {
  RbfLattice lat;
  lat.bounds = {{0.0, 1.0}};
  lat.counts = {2};
  lat.width = 1.0;
  return lat;
}

RbfLattice grid_2x3() {
  RbfLattice lat;
  lat.bounds = {{0.0, 1.0}, {0.0, 2.0}};
  lat.counts = {2, 3};
  lat.width = 0.5;
  return lat;
}

}  // namespace

TEST_CASE("lattice validation and center enumeration") {
  RbfLattice lat = grid_2x3();
  lat.validate();
  CHECK(lat.node_count() == 6);
  CHECK(lat.dims() == 2);

  // row-major, last dimension fastest
  CHECK(lat.center(0) == std::vector<double>{0.0, 0.0});
  CHECK(lat.center(1) == std::vector<double>{0.0, 1.0});
  CHECK(lat.center(2) == std::vector<double>{0.0, 2.0});
  CHECK(lat.center(3) == std::vector<double>{1.0, 0.0});
  CHECK(lat.center(5) == std::vector<double>{1.0, 2.0});

  RbfLattice bad = grid_2x3();
  bad.counts = {2};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = grid_2x3();
  bad.counts[1] = 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = grid_2x3();
  bad.width = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = grid_2x3();
  bad.bounds[0] = {1.0, 1.0};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("basis values at and near centers") {
  const RbfLattice lat = grid_2x3();
  auto s = eval_basis(lat, {1.0, 2.0});
  CHECK(s[5] == 1.0);  // at its own center
  // neighbor one unit away in dim 1: exp(-1 / 0.25)
  CHECK(s[4] == Catch::Approx(std::exp(-4.0)).epsilon(1e-12));
}

TEST_CASE("two-node symmetry at the midpoint") {
  const RbfLattice lat = unit_pair();
  auto s = eval_basis(lat, {0.5});
  REQUIRE(s.size() == 2);
  CHECK(s[0] == Catch::Approx(std::exp(-0.25)).epsilon(1e-12));
  CHECK(s[1] == Catch::Approx(std::exp(-0.25)).epsilon(1e-12));

  // distance nu from a center gives exactly e^{-1}
  auto s2 = eval_basis(lat, {1.0});
  CHECK(s2[0] == Catch::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(s2[1] == 1.0);
}

TEST_CASE("network evaluation: contraction agrees with explicit dot product") {
  const RbfLattice lat = grid_2x3();
  std::vector<double> w(6);
  for (int j = 0; j < 6; ++j) w[j] = 0.3 * j - 0.7;
  const std::vector<double> Z = {0.37, 1.21};
  const auto s = eval_basis(lat, Z);
  double dot = 0.0;
  for (int j = 0; j < 6; ++j) dot += w[j] * s[j];
  CHECK(eval_network(w, lat, Z) == Catch::Approx(dot).epsilon(1e-13));
}

TEST_CASE("network evaluation: trivial weight patterns and linearity") {
  const RbfLattice lat = unit_pair();
  CHECK(eval_network(std::vector<double>{0.0, 0.0}, lat, {0.5}) == 0.0);
  CHECK(eval_network(std::vector<double>{1.0, 1.0}, lat, {0.5}) ==
        Catch::Approx(2.0 * std::exp(-0.25)).epsilon(1e-13));

  const RbfLattice big = grid_2x3();
  std::vector<double> a = {1, 0, -2, 0.5, 3, -1};
  std::vector<double> b = {0.2, 1.1, 0, -0.4, 2, 0.7};
  std::vector<double> combo(6);
  for (int j = 0; j < 6; ++j) combo[j] = 2.0 * a[j] - 3.0 * b[j];
  const std::vector<double> Z = {0.8, 0.3};
  const double lhs = eval_network(combo, big, Z);
  const double rhs = 2.0 * eval_network(a, big, Z) - 3.0 * eval_network(b, big, Z);
  CHECK(lhs == Catch::Approx(rhs).margin(1e-12));

  CHECK_THROWS_AS(eval_network(std::vector<double>{1.0}, big, Z), ConfigError);
  CHECK_THROWS_AS(eval_network(a, big, {0.5}), ConfigError);
}

TEST_CASE("localized indices select nearby receptive fields") {
  const RbfLattice lat = grid_2x3();
  auto near = localized_indices(lat, {0.0, 0.0}, 0.5);
  REQUIRE(near.size() == 1);
  CHECK(near[0] == 0);

  auto loose = localized_indices(lat, {0.0, 0.0}, 0.01);
  CHECK(loose.size() >= near.size());
  for (std::int64_t j : near)
    CHECK(std::find(loose.begin(), loose.end(), j) != loose.end());

  CHECK_THROWS_AS(localized_indices(lat, {0.0, 0.0}, 0.0), ConfigError);
  CHECK_THROWS_AS(localized_indices(lat, {0.0, 0.0}, 1.0), ConfigError);
}

TEST_CASE("excitation diagnostic over a short orbit") {
  const RbfLattice lat = unit_pair();
  std::vector<std::vector<double>> orbit = {{0.0}, {0.0}, {0.05}, {1.0}};
  ExcitationSummary sum = excitation_diagnostic(lat, orbit, 0.9, 0.01);
  REQUIRE(sum.visit_fraction.size() == 2);
  CHECK(sum.max_activation[0] == 1.0);
  CHECK(sum.max_activation[1] == 1.0);
  CHECK(sum.visit_fraction[0] == Catch::Approx(0.75));
  CHECK(sum.visit_fraction[1] == Catch::Approx(0.25));
  CHECK(sum.excited.size() == 2);
  CHECK(sum.observed_max_basis_norm >= 1.0);
  CHECK_THROWS_AS(excitation_diagnostic(lat, {}, 0.5), ConfigError);
}
