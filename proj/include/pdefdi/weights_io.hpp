#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdefdi/errors.hpp"
#include "pdefdi/identifier.hpp"

namespace pdefdi {

// Weight file: magic "PDFW", version 1, little-endian. Header: d, m, q,
// num_modes (u32); width (f64); per dimension lo, hi (f64) and count (u32);
// xi* per component (f64). Then num_modes * m weight blocks of N_n f64 each,
// mode-major (k = 0..N outer, i inner), row-major center order.
inline constexpr char kWeightsMagic[4] = {'P', 'D', 'F', 'W'};
inline constexpr std::uint32_t kWeightsVersion = 1;

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_f64(std::ostream& os, double v) {
  static_assert(sizeof(double) == 8);
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw ConfigError("weight file truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw ConfigError("weight file truncated");
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

}  // namespace detail

/// q is recorded for header round-trips: lattice dims = m + q.
inline void save_weights(const std::string& path, const TrainedModel& model) {
  model.validate();
  const int d = model.lattice.dims();
  const int m = model.m();
  const int q = d - m;
  if (q < 1) throw ConfigError("save_weights: lattice dims must exceed m");
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("save_weights: cannot open " + path);
  os.write(kWeightsMagic, 4);
  detail::put_u32(os, kWeightsVersion);
  detail::put_u32(os, static_cast<std::uint32_t>(d));
  detail::put_u32(os, static_cast<std::uint32_t>(m));
  detail::put_u32(os, static_cast<std::uint32_t>(q));
  detail::put_u32(os, static_cast<std::uint32_t>(model.weights.size()));
  detail::put_f64(os, model.lattice.width);
  for (int dim = 0; dim < d; ++dim) {
    detail::put_f64(os, model.lattice.bounds[dim][0]);
    detail::put_f64(os, model.lattice.bounds[dim][1]);
    detail::put_u32(os, static_cast<std::uint32_t>(model.lattice.counts[dim]));
  }
  for (int i = 0; i < m; ++i) detail::put_f64(os, model.eigenvalues[i]);
  for (int i = 0; i < m; ++i) detail::put_f64(os, model.xi_star[i]);
  for (const auto& mode : model.weights)
    for (const auto& w : mode)
      for (double v : w) detail::put_f64(os, v);
  if (!os) throw ConfigError("save_weights: write failed for " + path);
}

inline TrainedModel load_weights(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("load_weights: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kWeightsMagic, 4) != 0)
    throw ConfigError("load_weights: bad magic in " + path);
  const std::uint32_t version = detail::get_u32(is);
  if (version != kWeightsVersion) throw ConfigError("load_weights: unsupported format version");
  const std::uint32_t d = detail::get_u32(is);
  const std::uint32_t m = detail::get_u32(is);
  const std::uint32_t q = detail::get_u32(is);
  const std::uint32_t num_modes = detail::get_u32(is);
  if (d == 0 || m == 0 || q == 0 || m + q != d || num_modes == 0 || d > 64 || num_modes > 256)
    throw ConfigError("load_weights: implausible header in " + path);

  TrainedModel model;
  model.lattice.width = detail::get_f64(is);
  model.lattice.bounds.resize(d);
  model.lattice.counts.resize(d);
  for (std::uint32_t dim = 0; dim < d; ++dim) {
    model.lattice.bounds[dim][0] = detail::get_f64(is);
    model.lattice.bounds[dim][1] = detail::get_f64(is);
    model.lattice.counts[dim] = static_cast<int>(detail::get_u32(is));
  }
  model.eigenvalues.resize(m);
  for (std::uint32_t i = 0; i < m; ++i) model.eigenvalues[i] = detail::get_f64(is);
  model.xi_star.resize(m);
  for (std::uint32_t i = 0; i < m; ++i) model.xi_star[i] = detail::get_f64(is);
  model.lattice.validate();
  const std::size_t nn = static_cast<std::size_t>(model.lattice.node_count());
  model.weights.assign(num_modes, std::vector<std::vector<double>>(m, std::vector<double>(nn)));
  for (auto& mode : model.weights)
    for (auto& w : mode)
      for (double& v : w) v = detail::get_f64(is);
  is.peek();
  if (!is.eof()) throw ConfigError("load_weights: trailing bytes in " + path);
  model.validate();
  return model;
}

inline nlohmann::json weights_header_json(const TrainedModel& model) {
  nlohmann::json j;
  j["format"] = "PDFW";
  j["version"] = kWeightsVersion;
  j["dims"] = model.lattice.dims();
  j["m"] = model.m();
  j["q"] = model.lattice.dims() - model.m();
  j["num_modes"] = model.weights.size();
  j["width"] = model.lattice.width;
  j["eigenvalues"] = model.eigenvalues;
  j["xi_star"] = model.xi_star;
  nlohmann::json dims = nlohmann::json::array();
  for (int d = 0; d < model.lattice.dims(); ++d)
    dims.push_back({{"lo", model.lattice.bounds[d][0]},
                    {"hi", model.lattice.bounds[d][1]},
                    {"count", model.lattice.counts[d]}});
  j["lattice"] = dims;
  j["node_count"] = model.lattice.node_count();
  return j;
}

/// Header fields that differ between a loaded model and the scenario lattice;
/// empty means compatible.
inline std::vector<std::string> header_mismatches(const TrainedModel& model, const RbfLattice& lat,
                                                  const std::vector<double>& eigvals) {
  std::vector<std::string> diffs;
  if (model.lattice.dims() != lat.dims()) diffs.push_back("dims");
  if (model.lattice.width != lat.width) diffs.push_back("width");
  for (int d = 0; d < std::min(model.lattice.dims(), lat.dims()); ++d) {
    if (model.lattice.counts[d] != lat.counts[d] ||
        model.lattice.bounds[d][0] != lat.bounds[d][0] ||
        model.lattice.bounds[d][1] != lat.bounds[d][1]) {
      diffs.push_back("lattice dimension " + std::to_string(d));
    }
  }
  if (static_cast<std::size_t>(model.m()) != eigvals.size()) {
    diffs.push_back("m");
  } else {
    for (int i = 0; i < model.m(); ++i)
      if (std::abs(model.eigenvalues[i] - eigvals[i]) > 1e-9)
        diffs.push_back("eigenvalue " + std::to_string(i + 1));
  }
  return diffs;
}

}  // namespace pdefdi
