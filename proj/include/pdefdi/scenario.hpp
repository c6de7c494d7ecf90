#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdefdi/errors.hpp"
#include "pdefdi/fdi.hpp"
#include "pdefdi/identifier.hpp"
#include "pdefdi/pdesim.hpp"
#include "pdefdi/rbf.hpp"

namespace pdefdi {

struct Scenario {
  int version = 1;
  std::string name;

  PlantModel plant;
  InputSignal input;
  int m = 1;
  int grid_size = 200;
  double gap_threshold = 0.2;
  RbfLattice lattice;
  std::vector<IdentifierGains> gains;  // per component

  std::vector<double> fd_b0, fd_varrho;
  double fd_window = 2.5;
  std::vector<double> fi_b;
  double fi_horizon = 20.0;
  std::vector<SimilarityBound> bounds;  // one per trained fault mode

  std::vector<FaultSpec> trained_faults;  // modes 1..N
  std::vector<FaultSpec> test_faults;

  double train_horizon = 150.0;
  double monitor_horizon = 150.0;
  double dt = 1e-3;
  double stability_safety = 0.8;
  double avg_t1 = 140.0, avg_t2 = 150.0;
  double settle_time = 5.0;
  double snapshot_stride = 0.0;  // 0 = keep no weight snapshots during training
  double xi_margin = 1.0;        // headroom factor on the xi* probe maximum

  std::string source_hash;  // FNV-1a of the scenario file bytes

  std::size_t q() const { return input.q(); }

  void validate() const {
    plant.validate();
    lattice.validate();
    if (m < 1) throw ConfigError("scenario: m must be >= 1");
    if (input.channels.empty()) throw ConfigError("scenario: need at least one input channel");
    if (static_cast<std::size_t>(lattice.dims()) != static_cast<std::size_t>(m) + q())
      throw ConfigError("scenario: lattice dims must equal m + q");
    if (gains.size() != static_cast<std::size_t>(m))
      throw ConfigError("scenario: need one gain set per state component");
    for (const IdentifierGains& g : gains) {
      if (g.a <= 0.0 || g.gamma <= 0.0 || g.sigma <= 0.0)
        throw ConfigError("scenario: identifier gains must be positive");
      if (g.sigma > 0.01 * g.gamma)
        throw ConfigError("scenario: leakage sigma must not exceed 0.01 * Gamma");
    }
    if (fd_b0.size() != static_cast<std::size_t>(m) || fd_varrho.size() != fd_b0.size())
      throw ConfigError("scenario: FD parameter vectors must have length m");
    for (std::size_t i = 0; i < fd_b0.size(); ++i) {
      if (fd_b0[i] <= 0.0) throw ConfigError("scenario: FD gains must be positive");
      if (fd_varrho[i] < 0.0) throw ConfigError("scenario: FD margins must be nonnegative");
    }
    if (fd_window <= 0.0) throw ConfigError("scenario: window length must be positive");
    if (fi_b.size() != static_cast<std::size_t>(m))
      throw ConfigError("scenario: FI gain vector must have length m");
    for (double b : fi_b)
      if (b <= 0.0) throw ConfigError("scenario: FI gains must be positive");
    if (fi_horizon <= 0.0) throw ConfigError("scenario: FI horizon must be positive");
    if (trained_faults.empty()) throw ConfigError("scenario: need at least one trained fault");
    if (bounds.size() != trained_faults.size())
      throw ConfigError("scenario: need one similarity bound per trained fault");
    for (const FaultSpec& f : trained_faults) f.validate(plant.op);
    for (const FaultSpec& f : test_faults) f.validate(plant.op);
    for (const SimilarityBound& b : bounds) b.validate();
    if (dt <= 0.0 || train_horizon <= 0.0 || monitor_horizon <= 0.0)
      throw ConfigError("scenario: time parameters must be positive");
    if (!(avg_t1 < avg_t2 && avg_t2 <= train_horizon))
      throw ConfigError("scenario: averaging window must lie within the training horizon");
    if (xi_margin < 1.0) throw ConfigError("scenario: xi_margin must be >= 1");
    if (grid_size < 4 * m || grid_size % 2 != 0)
      throw ConfigError("scenario: grid size must be even and >= 4m");
  }

  SimOptions sim_options(double horizon) const {
    SimOptions opt;
    opt.t_end = horizon;
    opt.dt = dt;
    opt.grid_size = grid_size;
    opt.stability_safety = stability_safety;
    return opt;
  }
};

namespace detail {

inline std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline FaultSpec parse_fault(const nlohmann::json& j) {
  FaultSpec f;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "actuator")
    f.kind = FaultSpec::Kind::Actuator;
  else if (kind == "state_window")
    f.kind = FaultSpec::Kind::StateWindow;
  else if (kind == "component_gain")
    f.kind = FaultSpec::Kind::ComponentGain;
  else if (kind == "tabulated")
    f.kind = FaultSpec::Kind::Tabulated;
  else
    throw ConfigError("scenario: unknown fault kind '" + kind + "'");
  f.t0 = j.at("t0").get<double>();
  if (f.kind == FaultSpec::Kind::Actuator)
    f.delta_b_harmonics = j.at("delta_b_harmonics").get<std::vector<double>>();
  if (f.kind == FaultSpec::Kind::StateWindow) {
    f.z_lo = j.at("z_lo").get<double>();
    f.z_hi = j.at("z_hi").get<double>();
    f.gain = j.value("gain", 1.0);
  }
  if (f.kind == FaultSpec::Kind::ComponentGain) f.delta_beta = j.at("delta_beta").get<double>();
  if (f.kind == FaultSpec::Kind::Tabulated) {
    f.table_z = j.at("table_z").get<std::vector<double>>();
    f.table_g = j.at("table_g").get<std::vector<double>>();
    f.table_times_state = j.value("times_state", false);
    f.table_times_input = j.value("times_input", false);
  }
  return f;
}

inline SimilarityBound parse_bound(const nlohmann::json& j) {
  SimilarityBound b;
  const std::string shape = j.at("shape").get<std::string>();
  if (shape == "constant") {
    b.shape = SimilarityBound::Shape::Constant;
    b.constant = j.at("value").get<double>();
  } else if (shape == "actuator_amp") {
    b.shape = SimilarityBound::Shape::ActuatorAmp;
    b.scale = j.at("scale").get<double>();
    b.beta_u = j.at("beta_u").get<double>();
  } else if (shape == "state_window") {
    b.shape = SimilarityBound::Shape::StateWindow;
    b.scale = j.value("scale", 1.0);
    b.z_lo = j.at("z_lo").get<double>();
    b.z_hi = j.at("z_hi").get<double>();
  } else if (shape == "component_abs") {
    b.shape = SimilarityBound::Shape::ComponentAbs;
    b.scale = j.at("scale").get<double>();
    b.gamma = j.at("gamma").get<double>();
  } else if (shape == "tabulated") {
    b.shape = SimilarityBound::Shape::Tabulated;
    b.table_z = j.at("table_z").get<std::vector<double>>();
    b.table_g = j.at("table_g").get<std::vector<double>>();
    b.table_times_state = j.value("times_state", false);
    b.table_times_input = j.value("times_input", false);
  } else {
    throw ConfigError("scenario: unknown bound shape '" + shape + "'");
  }
  return b;
}

}  // namespace detail

inline Scenario parse_scenario(const nlohmann::json& j, const std::string& raw) {
  Scenario sc;
  try {
    sc.version = j.value("version", 1);
    if (sc.version != 1) throw ConfigError("scenario: unsupported version");
    sc.name = j.value("name", "unnamed");

    const auto& plant = j.at("plant");
    const auto& op = plant.at("operator");
    sc.plant.op.a1 = op.value("a1", 0.0);
    sc.plant.op.a2 = op.at("a2").get<double>();
    sc.plant.op.z1 = op.at("z1").get<double>();
    sc.plant.op.z2 = op.at("z2").get<double>();
    auto parse_bc = [](const nlohmann::json& b) {
      RobinBc bc;
      bc.m = b.value("m", 1.0);
      bc.n = b.value("n", 0.0);
      bc.d = b.value("d", 0.0);
      return bc;
    };
    if (op.contains("left")) sc.plant.op.left = parse_bc(op.at("left"));
    if (op.contains("right")) sc.plant.op.right = parse_bc(op.at("right"));
    sc.plant.reaction.beta_T = plant.at("reaction").value("beta_T", 0.0);
    sc.plant.reaction.gamma = plant.at("reaction").value("gamma", 1.0);
    sc.plant.beta_u = plant.value("beta_u", 0.0);
    sc.plant.actuator_harmonics =
        plant.value("actuator_harmonics", std::vector<std::vector<double>>{});
    sc.plant.initial_harmonics = plant.value("initial_harmonics", std::vector<double>{});

    for (const auto& cj : j.at("input").at("channels")) {
      InputChannel ch;
      ch.offset = cj.value("offset", 0.0);
      for (const auto& hj : cj.value("harmonics", nlohmann::json::array())) {
        if (!hj.is_array() || hj.size() != 3)
          throw ConfigError("scenario: harmonic must be [amp, omega, phase]");
        ch.harmonics.push_back({hj[0].get<double>(), hj[1].get<double>(), hj[2].get<double>()});
      }
      sc.input.channels.push_back(std::move(ch));
    }

    sc.m = j.at("eig").at("m").get<int>();
    sc.grid_size = j.at("eig").value("grid_size", 200);
    sc.gap_threshold = j.at("eig").value("gap_threshold", 0.2);

    const auto& lj = j.at("lattice");
    for (const auto& bj : lj.at("bounds")) {
      if (!bj.is_array() || bj.size() != 2) throw ConfigError("scenario: lattice bound must be [lo, hi]");
      sc.lattice.bounds.push_back({bj[0].get<double>(), bj[1].get<double>()});
    }
    sc.lattice.counts = lj.at("counts").get<std::vector<int>>();
    sc.lattice.width = lj.at("width").get<double>();

    const auto& gj = j.at("gains");
    auto parse_gain = [](const nlohmann::json& g) {
      IdentifierGains ig;
      ig.a = g.at("a").get<double>();
      ig.gamma = g.at("gamma").get<double>();
      ig.sigma = g.at("sigma").get<double>();
      return ig;
    };
    if (gj.is_array())
      for (const auto& g : gj) sc.gains.push_back(parse_gain(g));
    else
      sc.gains.assign(static_cast<std::size_t>(sc.m), parse_gain(gj));

    const auto& fdj = j.at("fd");
    sc.fd_b0 = fdj.at("b0").get<std::vector<double>>();
    sc.fd_varrho = fdj.at("varrho").get<std::vector<double>>();
    sc.fd_window = fdj.at("window").get<double>();

    const auto& fij = j.at("fi");
    sc.fi_b = fij.at("b").get<std::vector<double>>();
    sc.fi_horizon = fij.value("horizon", 20.0);
    for (const auto& bj : fij.at("bounds")) sc.bounds.push_back(detail::parse_bound(bj));

    for (const auto& fj : j.at("faults").at("trained"))
      sc.trained_faults.push_back(detail::parse_fault(fj));
    for (const auto& fj : j.at("faults").value("test", nlohmann::json::array()))
      sc.test_faults.push_back(detail::parse_fault(fj));

    const auto& tj = j.at("timing");
    sc.train_horizon = tj.at("train_horizon").get<double>();
    sc.monitor_horizon = tj.at("monitor_horizon").get<double>();
    sc.dt = tj.at("dt").get<double>();
    sc.stability_safety = tj.value("stability_safety", 0.8);
    const auto& aw = tj.at("averaging_window");
    if (!aw.is_array() || aw.size() != 2)
      throw ConfigError("scenario: averaging_window must be [t1, t2]");
    sc.avg_t1 = aw[0].get<double>();
    sc.avg_t2 = aw[1].get<double>();
    sc.settle_time = tj.value("settle_time", 5.0);
    sc.snapshot_stride = tj.value("snapshot_stride", 0.0);
    sc.xi_margin = tj.value("xi_margin", 1.0);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario: schema violation: ") + e.what());
  }
  sc.source_hash = detail::fnv1a_hex(raw);
  sc.validate();
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("scenario: cannot open " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  const std::string raw = buf.str();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("scenario: parse error in " + path + ": " + e.what());
  }
  return parse_scenario(j, raw);
}

}  // namespace pdefdi
