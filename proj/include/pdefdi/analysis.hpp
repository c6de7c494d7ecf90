#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "pdefdi/errors.hpp"
#include "pdefdi/fdi.hpp"

namespace pdefdi {

/// Required dwell from the detectability condition: given a fault-magnitude
/// floor mu over the candidate interval, the minimum interval length that
/// guarantees a threshold crossing. NaN when the magnitude condition is
/// unsatisfiable (mu <= 2 xi*).
inline double detectability_dwell(double mu, double xi_star, double varrho, double b0, double T) {
  if (mu <= 2.0 * xi_star) return std::numeric_limits<double>::quiet_NaN();
  return std::log((7.0 * mu - 6.0 * xi_star) / (mu - 2.0 * xi_star)) / b0 +
         T * (4.0 * xi_star + 4.0 * varrho) / (3.0 * mu - 2.0 * xi_star);
}

/// Required dwell from the isolatability condition with mismatch margin mu and
/// bound ceiling rho_max over the candidate interval. NaN when unsatisfiable.
inline double isolatability_dwell(double mu, double xi_star, double rho_max, double b, double T) {
  if (mu <= 2.0 * xi_star) return std::numeric_limits<double>::quiet_NaN();
  const double num = mu + 2.0 * rho_max;
  return (2.0 * xi_star + 2.0 * rho_max) / num *
             (T + std::log((mu + 2.0 * rho_max + xi_star) / (mu - 2.0 * xi_star)) / b) +
         (mu - 2.0 * xi_star) / num * std::log((3.0 * mu + 4.0 * rho_max) / (mu - 2.0 * xi_star)) / b;
}

namespace detail {

inline std::size_t index_of_time(const std::vector<double>& times, double t) {
  if (times.empty()) throw ConfigError("empty stream");
  const double dt = times.size() > 1 ? times[1] - times[0] : 1.0;
  const long long n = std::llround((t - times.front()) / dt);
  if (n < 0 || n >= static_cast<long long>(times.size()))
    throw ConfigError("interval endpoint outside stream");
  return static_cast<std::size_t>(n);
}

}  // namespace detail

struct DwellScan {
  std::vector<double> window_lengths = {0.5, 1.0, 1.5, 2.0, 2.5,
                                        3.0, 4.0, 5.0, 6.0, 8.0};  // seconds
  double stamp_stride = 0.1;  // seconds between candidate interval endpoints
};

struct DetectabilityComponent {
  int component = 0;
  double mu = 0.0;                // min fault-projection magnitude over the interval
  bool magnitude_ok = false;      // strict magnitude condition
  bool satisfiable = true;        // false when the dwell formula is undefined
  double required_dwell = std::numeric_limits<double>::quiet_NaN();
  double available_dwell = 0.0;
  bool verdict = false;
};

struct DetectabilityReport {
  double t_a = 0.0, t_b = 0.0;
  std::vector<DetectabilityComponent> components;
  bool verdict = false;           // some component satisfies both clauses
  double predicted_t_b = std::numeric_limits<double>::quiet_NaN();
  bool scanned = false;
};

namespace detail {

inline DetectabilityReport evaluate_detect_interval(const std::vector<double>& times,
                                                    const std::vector<std::vector<double>>& proj,
                                                    const FdConfig& cfg, std::size_t a, std::size_t b) {
  DetectabilityReport rep;
  rep.t_a = times[a];
  rep.t_b = times[b];
  const double l = rep.t_b - rep.t_a;
  for (std::size_t i = 0; i < proj.size(); ++i) {
    DetectabilityComponent c;
    c.component = static_cast<int>(i);
    double mu = std::numeric_limits<double>::infinity();
    for (std::size_t n = a; n <= b; ++n) mu = std::min(mu, std::abs(proj[i][n]));
    c.mu = mu;
    c.magnitude_ok = mu > 2.0 * cfg.xi_star[i] + 2.0 * cfg.varrho[i];
    c.required_dwell = detectability_dwell(mu, cfg.xi_star[i], cfg.varrho[i], cfg.b0[i], cfg.window);
    c.satisfiable = !std::isnan(c.required_dwell);
    c.available_dwell = l;
    c.verdict = c.magnitude_ok && c.satisfiable && l >= c.required_dwell;
    rep.verdict = rep.verdict || c.verdict;
    rep.components.push_back(c);
  }
  if (rep.verdict) rep.predicted_t_b = rep.t_b;
  return rep;
}

}  // namespace detail

/// Detectability checker over per-component fault-projection magnitude streams
/// (uniform dt). When no interval is supplied, candidate trailing windows are
/// scanned and the earliest satisfying interval is reported (or the
/// largest-margin failing one).
inline DetectabilityReport check_detectability(const std::vector<double>& times,
                                               const std::vector<std::vector<double>>& proj,
                                               const FdConfig& cfg,
                                               std::optional<std::pair<double, double>> interval = {},
                                               const DwellScan& scan = {}) {
  cfg.validate();
  if (proj.size() != cfg.b0.size()) throw ConfigError("check_detectability: component count mismatch");
  if (times.size() < 2) throw ConfigError("check_detectability: stream too short");
  for (const auto& p : proj)
    if (p.size() != times.size()) throw ConfigError("check_detectability: stream length mismatch");

  if (interval) {
    if (interval->second <= interval->first)
      throw ConfigError("check_detectability: empty candidate interval");
    const std::size_t a = detail::index_of_time(times, interval->first);
    const std::size_t b = detail::index_of_time(times, interval->second);
    return detail::evaluate_detect_interval(times, proj, cfg, a, b);
  }

  const double dt = times[1] - times[0];
  const std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(scan.stamp_stride / dt)));
  DetectabilityReport best;
  double best_margin = -std::numeric_limits<double>::infinity();
  bool have_best = false;
  for (double w : scan.window_lengths) {
    const std::size_t win = static_cast<std::size_t>(std::llround(w / dt));
    if (win < 1 || win >= times.size()) continue;
    for (std::size_t b = win; b < times.size(); b += stride) {
      DetectabilityReport rep = detail::evaluate_detect_interval(times, proj, cfg, b - win, b);
      rep.scanned = true;
      if (rep.verdict) {
        if (!have_best || !best.verdict || rep.t_b < best.predicted_t_b) {
          best = rep;
          have_best = true;
        }
      } else if (!have_best || !best.verdict) {
        double margin = -std::numeric_limits<double>::infinity();
        for (const auto& c : rep.components)
          margin = std::max(margin, c.mu - 2.0 * cfg.xi_star[c.component] - 2.0 * cfg.varrho[c.component]);
        if (!have_best || margin > best_margin) {
          best = rep;
          best_margin = margin;
          have_best = true;
        }
      }
    }
  }
  if (!have_best) throw ConfigError("check_detectability: no candidate window fits the stream");
  return best;
}

struct IsolatabilityComponent {
  int component = 0;
  double mu = 0.0;       // min (|rho| - rho_bar) over the interval
  double rho_max = 0.0;  // max bound value over the interval
  bool magnitude_ok = false;
  bool satisfiable = true;
  double required_dwell = std::numeric_limits<double>::quiet_NaN();
  double available_dwell = 0.0;
  bool verdict = false;
};

struct IsolatabilityMode {
  int mode = 0;  // excluded candidate k (1-based)
  double t_a = 0.0, t_b = 0.0;
  std::vector<IsolatabilityComponent> components;
  bool verdict = false;  // some component excludes this mode
};

struct IsolatabilityReport {
  std::vector<IsolatabilityMode> modes;
  bool verdict = false;  // every non-matching mode excludable
  double predicted_t_iso = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline IsolatabilityMode evaluate_iso_interval(const std::vector<double>& times,
                                               const std::vector<std::vector<double>>& mismatch,
                                               const std::vector<std::vector<double>>& bounds,
                                               const std::vector<double>& b,
                                               const std::vector<double>& xi_star, double T,
                                               std::size_t a, std::size_t bb) {
  IsolatabilityMode rep;
  rep.t_a = times[a];
  rep.t_b = times[bb];
  const double l = rep.t_b - rep.t_a;
  for (std::size_t i = 0; i < mismatch.size(); ++i) {
    IsolatabilityComponent c;
    c.component = static_cast<int>(i);
    double mu = std::numeric_limits<double>::infinity();
    double rmax = 0.0;
    for (std::size_t n = a; n <= bb; ++n) {
      mu = std::min(mu, std::abs(mismatch[i][n]) - bounds[i][n]);
      rmax = std::max(rmax, bounds[i][n]);
    }
    c.mu = mu;
    c.rho_max = rmax;
    c.magnitude_ok = mu > 2.0 * xi_star[i];
    c.required_dwell = isolatability_dwell(mu, xi_star[i], rmax, b[i], T);
    c.satisfiable = !std::isnan(c.required_dwell);
    c.available_dwell = l;
    c.verdict = c.magnitude_ok && c.satisfiable && l >= c.required_dwell;
    rep.verdict = rep.verdict || c.verdict;
    rep.components.push_back(c);
  }
  return rep;
}

}  // namespace detail

/// Isolatability checker. mismatch[k][i] and bounds[k][i] are the true fault
/// mismatch magnitudes and the configured similarity bounds for each
/// non-matching mode k over a post-detection stream.
inline IsolatabilityReport check_isolatability(
    const std::vector<double>& times, const std::vector<std::vector<std::vector<double>>>& mismatch,
    const std::vector<std::vector<std::vector<double>>>& bounds, const std::vector<double>& b,
    const std::vector<double>& xi_star, double T,
    const std::vector<std::optional<std::pair<double, double>>>& intervals = {},
    const DwellScan& scan = {}) {
  if (mismatch.empty() || mismatch.size() != bounds.size())
    throw ConfigError("check_isolatability: mismatch/bound mode counts differ");
  if (times.size() < 2) throw ConfigError("check_isolatability: stream too short");
  if (b.size() != xi_star.size() || b.empty())
    throw ConfigError("check_isolatability: gain/xi* dimensions differ");
  if (T <= 0.0) throw ConfigError("check_isolatability: window must be positive");
  for (std::size_t k = 0; k < mismatch.size(); ++k) {
    if (mismatch[k].size() != b.size() || bounds[k].size() != b.size())
      throw ConfigError("check_isolatability: component count mismatch");
    for (std::size_t i = 0; i < b.size(); ++i)
      if (mismatch[k][i].size() != times.size() || bounds[k][i].size() != times.size())
        throw ConfigError("check_isolatability: stream length mismatch");
  }
  if (!intervals.empty() && intervals.size() != mismatch.size())
    throw ConfigError("check_isolatability: need one interval per mode");

  const double dt = times[1] - times[0];
  IsolatabilityReport rep;
  rep.verdict = true;
  double t_iso = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < mismatch.size(); ++k) {
    IsolatabilityMode mode;
    if (!intervals.empty() && intervals[k]) {
      const std::size_t a = detail::index_of_time(times, intervals[k]->first);
      const std::size_t bb = detail::index_of_time(times, intervals[k]->second);
      if (bb <= a) throw ConfigError("check_isolatability: empty candidate interval");
      mode = detail::evaluate_iso_interval(times, mismatch[k], bounds[k], b, xi_star, T, a, bb);
    } else {
      bool have = false;
      double best_margin = -std::numeric_limits<double>::infinity();
      const std::size_t stride =
          std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(scan.stamp_stride / dt)));
      for (double w : scan.window_lengths) {
        const std::size_t win = static_cast<std::size_t>(std::llround(w / dt));
        if (win < 1 || win >= times.size()) continue;
        for (std::size_t bb = win; bb < times.size(); bb += stride) {
          IsolatabilityMode cand =
              detail::evaluate_iso_interval(times, mismatch[k], bounds[k], b, xi_star, T, bb - win, bb);
          if (cand.verdict) {
            if (!have || !mode.verdict || cand.t_b < mode.t_b) {
              mode = cand;
              have = true;
            }
          } else if (!have || !mode.verdict) {
            double margin = -std::numeric_limits<double>::infinity();
            for (const auto& c : cand.components)
              margin = std::max(margin, c.mu - 2.0 * xi_star[c.component]);
            if (!have || margin > best_margin) {
              mode = cand;
              best_margin = margin;
              have = true;
            }
          }
        }
      }
      if (!have) throw ConfigError("check_isolatability: no candidate window fits the stream");
    }
    mode.mode = static_cast<int>(k) + 1;
    rep.verdict = rep.verdict && mode.verdict;
    if (mode.verdict) t_iso = std::max(t_iso, mode.t_b);
    rep.modes.push_back(std::move(mode));
  }
  if (rep.verdict) rep.predicted_t_iso = t_iso;
  return rep;
}

}  // namespace pdefdi
