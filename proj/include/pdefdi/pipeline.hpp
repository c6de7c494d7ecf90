#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdefdi/analysis.hpp"
#include "pdefdi/csv.hpp"
#include "pdefdi/fdi.hpp"
#include "pdefdi/identifier.hpp"
#include "pdefdi/pdesim.hpp"
#include "pdefdi/scenario.hpp"
#include "pdefdi/spectral.hpp"
#include "pdefdi/weights_io.hpp"

namespace pdefdi {

// --------------------------------------------------------------- fault select

struct FaultSelector {
  enum class Kind { None, Trained, Test };
  Kind kind = Kind::None;
  int index = 0;  // 1-based within its list

  std::string tag() const {
    switch (kind) {
      case Kind::None: return "none";
      case Kind::Trained: return "trained" + std::to_string(index);
      case Kind::Test: return "test" + std::to_string(index);
    }
    return "?";
  }
};

inline FaultSelector parse_fault_selector(const std::string& token, const Scenario& sc) {
  FaultSelector sel;
  const int n_trained = static_cast<int>(sc.trained_faults.size());
  const int n_test = static_cast<int>(sc.test_faults.size());
  if (token == "none") return sel;
  if (token == "test") {
    if (n_test != 1)
      throw ConfigError("--fault test is ambiguous: scenario ships " + std::to_string(n_test) +
                        " test faults; use test1..test" + std::to_string(n_test));
    sel.kind = FaultSelector::Kind::Test;
    sel.index = 1;
    return sel;
  }
  if (token.rfind("test", 0) == 0) {
    const int idx = std::atoi(token.c_str() + 4);
    if (idx < 1 || idx > n_test)
      throw ConfigError("invalid test fault '" + token + "': valid range is test1..test" +
                        std::to_string(n_test));
    sel.kind = FaultSelector::Kind::Test;
    sel.index = idx;
    return sel;
  }
  char* end = nullptr;
  const long idx = std::strtol(token.c_str(), &end, 10);
  if (end == token.c_str() || *end != '\0')
    throw ConfigError("invalid --fault value '" + token + "': expected none, test[N], or 1.." +
                      std::to_string(n_trained));
  if (idx < 1 || idx > n_trained)
    throw ConfigError("invalid fault index " + token + ": valid range is 1.." +
                      std::to_string(n_trained));
  sel.kind = FaultSelector::Kind::Trained;
  sel.index = static_cast<int>(idx);
  return sel;
}

inline const FaultSpec* select_fault(const Scenario& sc, const FaultSelector& sel) {
  switch (sel.kind) {
    case FaultSelector::Kind::None: return nullptr;
    case FaultSelector::Kind::Trained: return &sc.trained_faults[sel.index - 1];
    case FaultSelector::Kind::Test: return &sc.test_faults[sel.index - 1];
  }
  return nullptr;
}

// ------------------------------------------------------------------ observers

/// Quadrature projection weights for the slow modes, applied to raw field
/// sample vectors without constructing SpatialField per stamp.
class ModalProjector {
 public:
  explicit ModalProjector(const EigenSystem& eig) {
    coef_.resize(eig.modes.size());
    for (std::size_t i = 0; i < eig.modes.size(); ++i) {
      const SpatialField& phi = eig.modes[i];
      const std::size_t n = phi.values.size();
      coef_[i].resize(n);
      const double h3 = phi.dz() / 3.0;
      for (std::size_t p = 0; p < n; ++p) {
        double w = (p == 0 || p + 1 == n) ? 1.0 : (p % 2 == 1 ? 4.0 : 2.0);
        coef_[i][p] = w * h3 * phi.values[p];
      }
    }
  }

  std::size_t m() const { return coef_.size(); }

  ModalState project(const std::vector<double>& x) const {
    ModalState xs(coef_.size());
    for (std::size_t i = 0; i < coef_.size(); ++i) {
      double acc = 0.0;
      for (std::size_t p = 0; p < x.size(); ++p) acc += coef_[i][p] * x[p];
      xs[i] = acc;
    }
    return xs;
  }

  /// Projection of an arbitrary pointwise function g(z_p, x_p) onto mode i.
  template <class G>
  double project_fn(int i, const std::vector<double>& x, G&& g) const {
    const auto& c = coef_[static_cast<std::size_t>(i)];
    double acc = 0.0;
    for (std::size_t p = 0; p < x.size(); ++p) acc += c[p] * g(p, x[p]);
    return acc;
  }

 private:
  std::vector<std::vector<double>> coef_;  // Simpson weight * phi_i per node
};

struct ObservedStreams {
  ModalTrajectory modal;
  // Similarity-bound streams rho[k][i][n] for each trained mode, when requested.
  std::vector<std::vector<std::vector<double>>> rho;
  // Ungated modal projections of requested fault functions: proj[f][i][n].
  std::vector<std::vector<std::vector<double>>> fault_proj;
};

/// Simulate the PDE and reduce on the fly: modal states, optional
/// similarity-bound streams, and optional fault-function projections.
inline ObservedStreams observe_run(const Scenario& sc, const FaultSpec* fault, double horizon,
                                   const EigenSystem& eig, bool want_rho,
                                   const std::vector<const FaultSpec*>& proj_faults = {}) {
  ObservedStreams out;
  out.modal.dt = sc.dt;
  const ModalProjector proj(eig);
  const std::size_t m = proj.m();
  if (want_rho) out.rho.assign(sc.bounds.size(), std::vector<std::vector<double>>(m));
  out.fault_proj.assign(proj_faults.size(), std::vector<std::vector<double>>(m));

  const double z1 = sc.plant.op.z1;
  const double dz = (sc.plant.op.z2 - z1) / sc.grid_size;
  simulate_pde_observed(
      sc.plant, fault, sc.input, sc.sim_options(horizon),
      [&](std::size_t, double t, const std::vector<double>& x, const std::vector<double>& u) {
        out.modal.times.push_back(t);
        out.modal.states.push_back(proj.project(x));
        out.modal.inputs.push_back(u);
        if (want_rho) {
          SpatialField field(sc.plant.op.z1, sc.plant.op.z2, x);
          for (std::size_t k = 0; k < sc.bounds.size(); ++k)
            for (std::size_t i = 0; i < m; ++i)
              out.rho[k][i].push_back(
                  eval_similarity_bound(sc.bounds[k], eig, field, u, static_cast<int>(i)));
        }
        for (std::size_t f = 0; f < proj_faults.size(); ++f)
          for (std::size_t i = 0; i < m; ++i)
            out.fault_proj[f][i].push_back(proj.project_fn(
                static_cast<int>(i), x, [&](std::size_t p, double xp) {
                  return fault_value(*proj_faults[f], sc.plant, z1 + static_cast<double>(p) * dz,
                                     xp, u);
                }));
      });
  return out;
}

// -------------------------------------------------------------------- outputs

struct RunManifest {
  std::string scenario_hash;
  std::string command;
  std::vector<std::string> files;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["scenario_hash"] = scenario_hash;
    j["command"] = command;
    {
      char buf[32];
      std::time_t now = std::time(nullptr);
      std::tm tm{};
      gmtime_r(&now, &tm);
      std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
      j["timestamp"] = buf;
    }
    j["format_versions"] = {{"weights", kWeightsVersion}, {"csv", 1}, {"manifest", 1}};
    j["files"] = files;
    return j;
  }
};

namespace detail {

inline std::filesystem::path ensure_out_dir(const std::string& out_dir) {
  std::filesystem::path p(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw ConfigError("cannot create output directory " + out_dir);
  return p;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open output file: " + path.string());
  os << j.dump(2) << '\n';
}

inline void write_manifest(const std::filesystem::path& dir, RunManifest man) {
  man.files.push_back("manifest.json");
  write_json(dir / "manifest.json", man.to_json());
}

}  // namespace detail

// ------------------------------------------------------------------- simulate

inline EigenSystem solve_scenario_eigen(const Scenario& sc) {
  EigenSystem eig = solve_eigenproblem(sc.plant.op, sc.m, sc.grid_size);
  check_spectral_gap(eig, sc.gap_threshold);  // throws if the complement is unstable
  return eig;
}

/// Writes modal (full rate) and field (strided) trajectory CSVs.
inline void run_simulate(const Scenario& sc, const FaultSelector& sel, const std::string& out_dir,
                         double field_stride_seconds = 0.1) {
  const EigenSystem eig = solve_scenario_eigen(sc);
  const ModalProjector proj(eig);
  const auto dir = detail::ensure_out_dir(out_dir);
  const std::string tag = sel.tag();
  const double horizon =
      sel.kind == FaultSelector::Kind::Test ? sc.monitor_horizon : sc.train_horizon;

  std::vector<std::string> modal_header = {"t"};
  for (int i = 1; i <= sc.m; ++i) modal_header.push_back("xs_" + std::to_string(i));
  for (std::size_t c = 1; c <= sc.q(); ++c) modal_header.push_back("u_" + std::to_string(c));
  CsvWriter modal_csv((dir / ("modal_" + tag + ".csv")).string(), modal_header);

  std::vector<std::string> field_header = {"t"};
  for (int p = 0; p <= sc.grid_size; ++p) field_header.push_back("z_" + std::to_string(p));
  CsvWriter field_csv((dir / ("field_" + tag + ".csv")).string(), field_header);
  const std::size_t field_stride =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(field_stride_seconds / sc.dt)));

  simulate_pde_observed(
      sc.plant, select_fault(sc, sel), sc.input, sc.sim_options(horizon),
      [&](std::size_t s, double t, const std::vector<double>& x, const std::vector<double>& u) {
        ModalState xs = proj.project(x);
        std::vector<double> row = {t};
        row.insert(row.end(), xs.begin(), xs.end());
        row.insert(row.end(), u.begin(), u.end());
        modal_csv.row(row);
        if (s % field_stride == 0) {
          std::vector<double> frow = {t};
          frow.insert(frow.end(), x.begin(), x.end());
          field_csv.row(frow);
        }
      });

  RunManifest man;
  man.scenario_hash = sc.source_hash;
  man.command = "simulate --fault " + tag;
  man.files = {"modal_" + tag + ".csv", "field_" + tag + ".csv"};
  detail::write_manifest(dir, std::move(man));
}

// ---------------------------------------------------------------------- train

struct TrainBundle {
  EigenSystem eig;
  TrainedModel model;
  std::vector<TrainResult> per_mode;         // k = 0..N
  std::vector<ModalTrajectory> trajectories; // per mode, reused for xi*
  XiStarEstimate xi;
};

/// Full training pipeline: simulate every mode, train all components per mode,
/// average, and run the xi* probe procedure over the same orbits.
inline TrainBundle train_scenario(const Scenario& sc) {
  TrainBundle bundle;
  bundle.eig = solve_scenario_eigen(sc);
  const std::size_t num_modes = sc.trained_faults.size() + 1;

  std::vector<double> eigvals(bundle.eig.eigenvalues.begin(),
                              bundle.eig.eigenvalues.begin() + sc.m);
  TrainOptions topt;
  topt.avg_t1 = sc.avg_t1;
  topt.avg_t2 = sc.avg_t2;
  topt.snapshot_stride = sc.snapshot_stride;

  bundle.model.lattice = sc.lattice;
  bundle.model.eigenvalues = eigvals;
  bundle.model.weights.resize(num_modes);

  for (std::size_t k = 0; k < num_modes; ++k) {
    const FaultSpec* fault = k == 0 ? nullptr : &sc.trained_faults[k - 1];
    ObservedStreams obs = observe_run(sc, fault, sc.train_horizon, bundle.eig, false);
    TrainResult res;
    try {
      res = train_identifier(obs.modal, eigvals, sc.lattice, sc.gains, topt);
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " [training mode k=" + std::to_string(k) + "]");
    }
    bundle.model.weights[k] = res.w_avg;
    bundle.trajectories.push_back(std::move(obs.modal));
    bundle.per_mode.push_back(std::move(res));
  }

  // Fault-mode probes start after the fault occurrence: the averaged model
  // represents the faulty dynamics, so the pre-fault segment is out of scope.
  std::vector<double> probe_start(num_modes, sc.settle_time);
  for (std::size_t k = 1; k < num_modes; ++k)
    probe_start[k] = sc.trained_faults[k - 1].t0 + sc.settle_time;
  bundle.xi = estimate_xi_star(bundle.model.weights, bundle.trajectories, eigvals, sc.lattice,
                               sc.settle_time, probe_start, sc.xi_margin);
  bundle.model.xi_star = bundle.xi.xi;
  bundle.model.validate();
  return bundle;
}

/// Training CSVs are strided to keep artifacts reviewable; the stride is
/// deterministic so reruns stay byte-identical.
inline void write_train_outputs(const Scenario& sc, const TrainBundle& bundle,
                                const std::string& out_dir, double csv_stride_seconds = 0.01) {
  const auto dir = detail::ensure_out_dir(out_dir);
  RunManifest man;
  man.scenario_hash = sc.source_hash;
  man.command = "train";

  save_weights((dir / "weights.bin").string(), bundle.model);
  man.files.push_back("weights.bin");
  detail::write_json(dir / "weights.json", weights_header_json(bundle.model));
  man.files.push_back("weights.json");

  nlohmann::json xi;
  xi["xi_star"] = bundle.xi.xi;
  xi["settle_time"] = bundle.xi.settle_time;
  xi["modes_scanned"] = bundle.xi.modes_scanned;
  xi["max_error_per_mode"] = bundle.xi.max_error;
  detail::write_json(dir / "xi_star.json", xi);
  man.files.push_back("xi_star.json");

  const std::size_t stride =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(csv_stride_seconds / sc.dt)));
  for (std::size_t k = 0; k < bundle.per_mode.size(); ++k) {
    const TrainResult& res = bundle.per_mode[k];
    for (int i = 0; i < sc.m; ++i) {
      const std::string name =
          "train_i" + std::to_string(i + 1) + "_k" + std::to_string(k) + ".csv";
      CsvWriter csv((dir / name).string(), {"t", "xhat", "xs", "err", "weight_norm"});
      for (std::size_t n = 0; n < res.times.size(); n += stride) {
        csv.row({res.times[n], res.xhat[i][n], res.xs[i][n], res.xhat[i][n] - res.xs[i][n],
                 res.weight_norm[i][n]});
      }
      man.files.push_back(name);
    }
  }
  detail::write_manifest(dir, std::move(man));
}

inline TrainBundle run_train(const Scenario& sc, const std::string& out_dir) {
  TrainBundle bundle = train_scenario(sc);
  write_train_outputs(sc, bundle, out_dir);
  return bundle;
}

// -------------------------------------------------------------------- monitor

struct MonitorResult {
  FdResult fd;
  std::optional<FiResult> fi;
  double t_d = 0.0;
  ObservedStreams streams;
};

inline FdConfig make_fd_config(const Scenario& sc, const TrainedModel& model) {
  FdConfig cfg;
  cfg.b0 = sc.fd_b0;
  cfg.varrho = sc.fd_varrho;
  cfg.xi_star = model.xi_star;
  cfg.window = sc.fd_window;
  // Monitoring assumes the plant is on its recurrent orbit; the startup
  // transient region is visited only once during training and is out of scope.
  cfg.start_time = sc.settle_time;
  cfg.validate();
  return cfg;
}

/// FD over the whole monitoring horizon; on detection the FI bank runs from
/// t_d over the configured horizon with the similarity-bound streams.
inline MonitorResult monitor_scenario(const Scenario& sc, const TrainedModel& model,
                                      const FaultSelector& sel, const EigenSystem& eig) {
  const auto diffs = header_mismatches(model, sc.lattice, std::vector<double>(
      eig.eigenvalues.begin(), eig.eigenvalues.begin() + sc.m));
  if (!diffs.empty()) {
    std::string msg = "weight file does not match scenario:";
    for (const auto& d : diffs) msg += " " + d;
    throw ConfigError(msg);
  }

  MonitorResult res;
  res.streams = observe_run(sc, select_fault(sc, sel), sc.monitor_horizon, eig, true);
  res.fd = run_fd(model, res.streams.modal, make_fd_config(sc, model));

  if (res.fd.detected && model.num_fault_modes() > 0) {
    res.t_d = res.fd.t_d;
    const std::size_t nd = detail::index_of_time(res.streams.modal.times, res.fd.t_d);
    const std::size_t horizon_samples = static_cast<std::size_t>(std::llround(sc.fi_horizon / sc.dt));
    const std::size_t ne = std::min(res.streams.modal.times.size() - 1, nd + horizon_samples);
    if (ne > nd) {
      ModalTrajectory fi_stream;
      fi_stream.dt = sc.dt;
      fi_stream.times.assign(res.streams.modal.times.begin() + nd,
                             res.streams.modal.times.begin() + ne + 1);
      fi_stream.states.assign(res.streams.modal.states.begin() + nd,
                              res.streams.modal.states.begin() + ne + 1);
      fi_stream.inputs.assign(res.streams.modal.inputs.begin() + nd,
                              res.streams.modal.inputs.begin() + ne + 1);
      std::vector<std::vector<std::vector<double>>> rho(res.streams.rho.size());
      for (std::size_t k = 0; k < rho.size(); ++k) {
        rho[k].resize(res.streams.rho[k].size());
        for (std::size_t i = 0; i < rho[k].size(); ++i)
          rho[k][i].assign(res.streams.rho[k][i].begin() + nd,
                           res.streams.rho[k][i].begin() + ne + 1);
      }
      FiOptions opt;
      opt.b = sc.fi_b;
      opt.xi_star = model.xi_star;
      opt.window = sc.fd_window;
      res.fi = run_fi(model, fi_stream, rho, opt);
    }
  }
  return res;
}

inline void write_monitor_outputs(const Scenario& sc, const MonitorResult& res,
                                  const FaultSelector& sel, const std::string& out_dir) {
  const auto dir = detail::ensure_out_dir(out_dir);
  const std::string tag = sel.tag();

  const std::string csv_name = "monitor_" + tag + ".csv";
  CsvWriter csv((dir / csv_name).string(),
                {"t", "i", "k", "xtilde", "l1norm", "threshold", "crossed"});
  auto emit_trace = [&](const ResidualTrace& tr) {
    for (std::size_t n = 0; n < tr.times.size(); ++n)
      csv.row({tr.times[n], static_cast<double>(tr.component + 1), static_cast<double>(tr.mode),
               tr.residual[n], tr.l1norm[n], tr.threshold[n], static_cast<double>(tr.crossed[n])});
  };
  for (const ResidualTrace& tr : res.fd.traces) emit_trace(tr);
  if (res.fi)
    for (const FiModeResult& mr : res.fi->modes)
      for (const ResidualTrace& tr : mr.traces) emit_trace(tr);

  const std::string log_name = "decisions_" + tag + ".jsonl";
  std::ofstream log(dir / log_name);
  if (!log) throw ConfigError("cannot open output file: " + (dir / log_name).string());
  auto emit_decision = [&](const DecisionEvent& ev) {
    nlohmann::json j;
    j["kind"] = to_string(ev.kind);
    j["time"] = ev.time;
    nlohmann::json detail;
    if (ev.component >= 0) detail["component"] = ev.component + 1;
    if (ev.mode >= 0) detail["mode"] = ev.mode;
    if (!ev.survivors.empty()) detail["survivors"] = ev.survivors;
    if (!ev.exclusion_times.empty()) {
      nlohmann::json ex = nlohmann::json::array();
      for (double t : ev.exclusion_times)
        ex.push_back(std::isnan(t) ? nlohmann::json(nullptr) : nlohmann::json(t));
      detail["exclusion_times"] = ex;
    }
    if (!ev.detail.empty()) detail["note"] = ev.detail;
    j["detail"] = detail;
    log << j.dump() << '\n';
  };
  emit_decision(res.fd.decision);
  if (res.fi) emit_decision(res.fi->decision);

  RunManifest man;
  man.scenario_hash = sc.source_hash;
  man.command = "monitor --fault " + tag;
  man.files = {csv_name, log_name};
  detail::write_manifest(dir, std::move(man));
}

inline MonitorResult run_monitor(const Scenario& sc, const TrainedModel& model,
                                 const FaultSelector& sel, const std::string& out_dir) {
  const EigenSystem eig = solve_scenario_eigen(sc);
  MonitorResult res = monitor_scenario(sc, model, sel, eig);
  write_monitor_outputs(sc, res, sel, out_dir);
  return res;
}

// ---------------------------------------------------------------------- check

/// Detectability audit for a test fault: stream the true fault projections and
/// evaluate the magnitude-and-dwell conditions post-occurrence.
inline DetectabilityReport check_scenario_detectability(const Scenario& sc,
                                                        const TrainedModel& model,
                                                        const FaultSelector& sel,
                                                        const EigenSystem& eig) {
  const FaultSpec* fault = select_fault(sc, sel);
  if (!fault) throw ConfigError("detectability check needs a fault selection");
  ObservedStreams obs =
      observe_run(sc, fault, sc.monitor_horizon, eig, false, {fault});
  // restrict to t >= t0 (the fault-active part of the stream)
  const std::size_t n0 = detail::index_of_time(obs.modal.times, fault->t0);
  std::vector<double> times(obs.modal.times.begin() + n0, obs.modal.times.end());
  const FdConfig cfg = make_fd_config(sc, model);
  // Theorem conditions are stated against the T-windowed residual norms, so the
  // magnitude mu is evaluated on the T-windowed mean of |projection|; the raw
  // projection oscillates through zero with the input and its pointwise min is
  // uninformative. The warmup prefix of the window is dropped.
  std::vector<std::vector<double>> proj(obs.fault_proj[0].size());
  for (std::size_t i = 0; i < proj.size(); ++i) {
    std::vector<double> mag(times.size());
    for (std::size_t n = 0; n < times.size(); ++n)
      mag[n] = std::abs(obs.fault_proj[0][i][n0 + n]);
    proj[i] = l1_window(mag, cfg.window, sc.dt);
  }
  const std::size_t warm = static_cast<std::size_t>(std::llround(cfg.window / sc.dt));
  if (warm + 2 > times.size())
    throw ConfigError("detectability check: stream shorter than the L1 window");
  times.erase(times.begin(), times.begin() + warm);
  for (auto& p : proj) p.erase(p.begin(), p.begin() + warm);
  return check_detectability(times, proj, cfg);
}

/// Isolatability audit: mismatch streams between the occurring test fault and
/// every non-matching trained fault, against the configured bounds.
inline IsolatabilityReport check_scenario_isolatability(const Scenario& sc,
                                                        const TrainedModel& model,
                                                        const FaultSelector& sel,
                                                        const EigenSystem& eig) {
  if (sel.kind != FaultSelector::Kind::Test)
    throw ConfigError("isolatability check expects a test fault selection");
  const FaultSpec* fault = select_fault(sc, sel);
  const int matched = sel.index;  // test fault j is similar to trained mode j
  if (matched > static_cast<int>(sc.trained_faults.size()))
    throw ConfigError("test fault has no matching trained mode");

  std::vector<const FaultSpec*> proj_faults = {fault};
  for (const FaultSpec& f : sc.trained_faults) proj_faults.push_back(&f);
  ObservedStreams obs = observe_run(sc, fault, sc.monitor_horizon, eig, true, proj_faults);

  const std::size_t n0 = detail::index_of_time(obs.modal.times, fault->t0);
  const std::size_t m = static_cast<std::size_t>(sc.m);
  std::vector<double> times(obs.modal.times.begin() + n0, obs.modal.times.end());

  std::vector<std::vector<std::vector<double>>> mismatch, bounds;
  for (std::size_t k = 0; k < sc.trained_faults.size(); ++k) {
    if (static_cast<int>(k) + 1 == matched) continue;  // only non-matching modes are excluded
    std::vector<std::vector<double>> mm(m), bb(m);
    for (std::size_t i = 0; i < m; ++i) {
      // Same windowing rationale as the detectability check: Theorem margins
      // compare T-windowed means, not pointwise oscillating values.
      std::vector<double> rawm(times.size()), rawb(times.size());
      for (std::size_t n = 0; n < times.size(); ++n) {
        rawm[n] = std::abs(obs.fault_proj[0][i][n0 + n] - obs.fault_proj[k + 1][i][n0 + n]);
        rawb[n] = obs.rho[k][i][n0 + n];
      }
      mm[i] = l1_window(rawm, sc.fd_window, sc.dt);
      bb[i] = l1_window(rawb, sc.fd_window, sc.dt);
    }
    mismatch.push_back(std::move(mm));
    bounds.push_back(std::move(bb));
  }
  const std::size_t warm = static_cast<std::size_t>(std::llround(sc.fd_window / sc.dt));
  if (warm + 2 > times.size())
    throw ConfigError("isolatability check: stream shorter than the L1 window");
  times.erase(times.begin(), times.begin() + warm);
  for (auto& mk : mismatch)
    for (auto& s : mk) s.erase(s.begin(), s.begin() + warm);
  for (auto& bk : bounds)
    for (auto& s : bk) s.erase(s.begin(), s.begin() + warm);
  IsolatabilityReport rep =
      check_isolatability(times, mismatch, bounds, sc.fi_b, model.xi_star, sc.fd_window);
  // re-number modes to the trained-fault indices they refer to
  std::size_t pos = 0;
  for (std::size_t k = 0; k < sc.trained_faults.size(); ++k) {
    if (static_cast<int>(k) + 1 == matched) continue;
    rep.modes[pos++].mode = static_cast<int>(k) + 1;
  }
  return rep;
}

inline nlohmann::json detectability_json(const DetectabilityReport& rep) {
  nlohmann::json j;
  j["kind"] = "detectability";
  j["t_a"] = rep.t_a;
  j["t_b"] = rep.t_b;
  j["verdict"] = rep.verdict;
  j["scanned"] = rep.scanned;
  if (!std::isnan(rep.predicted_t_b)) j["predicted_t_b"] = rep.predicted_t_b;
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : rep.components) {
    nlohmann::json cj;
    cj["component"] = c.component + 1;
    cj["mu"] = c.mu;
    cj["magnitude_ok"] = c.magnitude_ok;
    cj["satisfiable"] = c.satisfiable;
    if (c.satisfiable) cj["required_dwell"] = c.required_dwell;
    cj["available_dwell"] = c.available_dwell;
    cj["verdict"] = c.verdict;
    comps.push_back(cj);
  }
  j["components"] = comps;
  return j;
}

inline nlohmann::json isolatability_json(const IsolatabilityReport& rep) {
  nlohmann::json j;
  j["kind"] = "isolatability";
  j["verdict"] = rep.verdict;
  if (!std::isnan(rep.predicted_t_iso)) j["predicted_t_iso"] = rep.predicted_t_iso;
  nlohmann::json modes = nlohmann::json::array();
  for (const auto& mrep : rep.modes) {
    nlohmann::json mj;
    mj["mode"] = mrep.mode;
    mj["t_a"] = mrep.t_a;
    mj["t_b"] = mrep.t_b;
    mj["verdict"] = mrep.verdict;
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : mrep.components) {
      nlohmann::json cj;
      cj["component"] = c.component + 1;
      cj["mu"] = c.mu;
      cj["rho_max"] = c.rho_max;
      cj["magnitude_ok"] = c.magnitude_ok;
      cj["satisfiable"] = c.satisfiable;
      if (c.satisfiable) cj["required_dwell"] = c.required_dwell;
      cj["available_dwell"] = c.available_dwell;
      cj["verdict"] = c.verdict;
      comps.push_back(cj);
    }
    mj["components"] = comps;
    modes.push_back(mj);
  }
  j["modes"] = modes;
  return j;
}

inline void run_check(const Scenario& sc, const TrainedModel& model, const std::string& which,
                      const FaultSelector& sel, const std::string& out_dir) {
  const EigenSystem eig = solve_scenario_eigen(sc);
  const auto dir = detail::ensure_out_dir(out_dir);
  nlohmann::json j;
  std::string name;
  if (which == "detectability") {
    j = detectability_json(check_scenario_detectability(sc, model, sel, eig));
    name = "detectability_" + sel.tag() + ".json";
  } else if (which == "isolatability") {
    j = isolatability_json(check_scenario_isolatability(sc, model, sel, eig));
    name = "isolatability_" + sel.tag() + ".json";
  } else {
    throw ConfigError("unknown check '" + which + "': expected detectability or isolatability");
  }
  detail::write_json(dir / name, j);
  RunManifest man;
  man.scenario_hash = sc.source_hash;
  man.command = "check " + which + " --fault " + sel.tag();
  man.files = {name};
  detail::write_manifest(dir, std::move(man));
}

}  // namespace pdefdi
