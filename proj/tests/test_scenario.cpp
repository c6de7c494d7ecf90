#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdefdi/scenario.hpp"
#include "pdefdi/weights_io.hpp"

using namespace pdefdi;

namespace {

std::string scenario_path(const char* name) {
  return std::string(PDEFDI_SOURCE_DIR) + "/scenarios/" + name;
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream is(path);
  REQUIRE(is);
  nlohmann::json j;
  is >> j;
  return j;
}

TrainedModel sample_model() {
  TrainedModel model;
  model.lattice.bounds = {{-1.0, 1.0}, {0.0, 2.0}};
  model.lattice.counts = {3, 4};
  model.lattice.width = 0.7;
  model.eigenvalues = {-1.0};
  model.xi_star = {0.042};
  const std::size_t nn = 12;
  model.weights.assign(3, {std::vector<double>(nn)});
  double v = -1.3;
  for (auto& mode : model.weights)
    for (auto& w : mode)
      for (double& x : w) {
        x = v;
        v += 0.37;
      }
  return model;
}

}  // namespace

TEST_CASE("benchmark scenario loads") {
  Scenario sc = load_scenario(scenario_path("catalytic_rod.json"));
  CHECK(sc.m == 3);
  CHECK(sc.grid_size == 200);
  CHECK(sc.lattice.node_count() == 980);
  CHECK(sc.lattice.dims() == 4);
  CHECK(sc.q() == 1);
  CHECK(sc.gains.size() == 3);
  CHECK(sc.gains[0].gamma == Catch::Approx(5.0));
  CHECK(sc.fd_b0 == std::vector<double>{2.0, 2.0, 2.0});
  CHECK(sc.fd_window == 2.5);
  CHECK(sc.bounds.size() == 3);
  CHECK(sc.trained_faults.size() == 3);
  CHECK(sc.test_faults.size() == 3);
  CHECK(sc.trained_faults[0].kind == FaultSpec::Kind::Actuator);
  CHECK(sc.trained_faults[1].kind == FaultSpec::Kind::StateWindow);
  CHECK(sc.trained_faults[2].kind == FaultSpec::Kind::ComponentGain);
  CHECK(sc.avg_t1 == 30.0);
  CHECK(sc.avg_t2 == 150.0);
  CHECK(sc.xi_margin == 2.0);
  CHECK(sc.source_hash.size() == 16);

  // u(0) = 1.1 + 2 sin 0 - 2 cos 0
  CHECK(eval_input(sc.input, 0.0)[0] == Catch::Approx(-0.9).margin(1e-12));
}

TEST_CASE("smoke scenario loads") {
  Scenario sc = load_scenario(scenario_path("smoke.json"));
  CHECK(sc.m == 3);
  CHECK(sc.lattice.node_count() < 200);
  CHECK(sc.train_horizon <= 5.0);
}

TEST_CASE("scenario schema violations") {
  CHECK_THROWS_AS(load_scenario("/nonexistent/path.json"), ConfigError);

  nlohmann::json base = load_json(scenario_path("smoke.json"));

  nlohmann::json j = base;
  j.erase("fd");
  CHECK_THROWS_WITH(parse_scenario(j, "x"), Catch::Matchers::ContainsSubstring("schema violation"));

  j = base;
  j["faults"]["trained"][0]["kind"] = "gremlin";
  CHECK_THROWS_AS(parse_scenario(j, "x"), ConfigError);

  j = base;
  j["lattice"]["counts"] = {2, 2};  // dims != m + q
  CHECK_THROWS_AS(parse_scenario(j, "x"), ConfigError);

  j = base;
  j["gains"]["sigma"] = 1.0;  // leakage far above the allowed fraction of Gamma
  CHECK_THROWS_AS(parse_scenario(j, "x"), ConfigError);

  j = base;
  j["timing"]["averaging_window"] = {2.0, 99.0};  // beyond the training horizon
  CHECK_THROWS_AS(parse_scenario(j, "x"), ConfigError);
}

TEST_CASE("scenario hash is deterministic") {
  CHECK(detail::fnv1a_hex("") == "cbf29ce484222325");
  CHECK(detail::fnv1a_hex("a") == "af63dc4c8601ec8c");
  Scenario a = load_scenario(scenario_path("smoke.json"));
  Scenario b = load_scenario(scenario_path("smoke.json"));
  CHECK(a.source_hash == b.source_hash);
}

TEST_CASE("weight file round trip") {
  const TrainedModel model = sample_model();
  const std::string path = "test_weights_roundtrip.bin";
  save_weights(path, model);
  TrainedModel back = load_weights(path);

  CHECK(back.lattice.width == model.lattice.width);
  CHECK(back.lattice.counts == model.lattice.counts);
  CHECK(back.eigenvalues == model.eigenvalues);
  CHECK(back.xi_star == model.xi_star);
  REQUIRE(back.weights.size() == model.weights.size());
  for (std::size_t k = 0; k < model.weights.size(); ++k)
    CHECK(back.weights[k][0] == model.weights[k][0]);  // bit-exact

  CHECK(header_mismatches(back, model.lattice, model.eigenvalues).empty());
  RbfLattice other = model.lattice;
  other.width = 0.9;
  auto diffs = header_mismatches(back, other, model.eigenvalues);
  CHECK_FALSE(diffs.empty());

  std::remove(path.c_str());
}

TEST_CASE("weight file corruption is rejected") {
  const TrainedModel model = sample_model();
  const std::string path = "test_weights_corrupt.bin";
  save_weights(path, model);

  SECTION("bad magic") {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("NOPE", 4);
    f.close();
    CHECK_THROWS_AS(load_weights(path), ConfigError);
  }
  SECTION("truncation") {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 9));
    out.close();
    CHECK_THROWS_AS(load_weights(path), ConfigError);
  }
  SECTION("trailing bytes") {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    out.write("xx", 2);
    out.close();
    CHECK_THROWS_AS(load_weights(path), ConfigError);
  }
  SECTION("missing file") {
    CHECK_THROWS_AS(load_weights("no_such_weights.bin"), ConfigError);
  }
  std::remove(path.c_str());
}

TEST_CASE("weight header JSON sidecar") {
  const TrainedModel model = sample_model();
  nlohmann::json j = weights_header_json(model);
  CHECK(j["format"] == "PDFW");
  CHECK(j["m"] == 1);
  CHECK(j["q"] == 1);
  CHECK(j["num_modes"] == 3);
  CHECK(j["node_count"] == 12);
}
