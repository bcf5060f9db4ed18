#pragma once

// Parameter sweeps over one or two axes, the reference-table reproduction and the
// time- versus frequency-domain cross-check.
//
// Sweep config: the device and pulse keys of a run config plus
//
//   sweep.axis1 = "kappa_mhz: 5, 50, 46"      # name: min, max, points
//   sweep.axis2 = "j_mhz: 5, 20, 16"          # optional
//   sweep.outputs = "C, upsilon, T_g, T_e"    # default: all four
//   sweep.optimize_kappa = true               # maximise C over kappa_1 = kappa_2
//   sweep.kappa_range_over_j = "0.5, 5"       # search interval for the optimiser
//   sweep.row_argmax = true                   # flag the best C along axis 2
//
// Axis names are device/pulse keys (omega_r_mhz, omega_ge_mhz, g_ef_mhz,
// g_ge_mhz, j_mhz, kappa_mhz, kappa1_mhz, kappa2_mhz, n_res, gamma_res_mhz,
// tau_coh_us, tau_p_us, omega0_mhz) or the ratios kappa_over_j,
// kappa1_over_j, kappa2_over_j, g_ef_over_j. Rows come out axis-1-major.

#include <photon_switch/config.hpp>
#include <photon_switch/errors.hpp>
#include <photon_switch/log.hpp>
#include <photon_switch/model.hpp>
#include <photon_switch/observables.hpp>
#include <photon_switch/oracle.hpp>
#include <photon_switch/pulse.hpp>
#include <photon_switch/version.hpp>

#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

namespace photon_switch {

inline constexpr std::size_t max_sweep_points = 1'000'000;

struct SweepAxis {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  int points = 1;

  double value(int i) const {
    if (points == 1) return min;
    if (i == points - 1) return max;
    return min + (max - min) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  std::vector<double> values() const {
    std::vector<double> v(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) v[static_cast<std::size_t>(i)] = value(i);
    return v;
  }
};

inline bool is_ratio_axis(std::string_view name) {
  return name == "kappa_over_j" || name == "kappa1_over_j" || name == "kappa2_over_j" ||
         name == "g_ef_over_j";
}

inline bool is_known_axis(std::string_view name) {
  static constexpr std::string_view keys[] = {
      "omega_r_mhz", "omega_ge_mhz", "g_ef_mhz",      "g_ge_mhz",   "j_mhz",
      "kappa_mhz",   "kappa1_mhz",   "kappa2_mhz",    "n_res",      "gamma_res_mhz",
      "tau_coh_us",  "tau_p_us",     "omega0_mhz"};
  return is_ratio_axis(name) || std::find(std::begin(keys), std::end(keys), name) != std::end(keys);
}

namespace detail {

inline std::string_view trim_view(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

inline std::vector<std::string> split_list(std::string_view s, char sep = ',') {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto next = s.find(sep, pos);
    const auto item = trim_view(s.substr(pos, next == std::string_view::npos ? s.npos : next - pos));
    out.emplace_back(item);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

} // namespace detail

// "name: min, max, points"
inline SweepAxis parse_axis(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw ConfigError(fmt::format("axis '{}': expected 'name: min, max, points'", text));
  SweepAxis axis;
  axis.name = std::string(detail::trim_view(text.substr(0, colon)));
  if (!is_known_axis(axis.name)) throw ConfigError(fmt::format("unknown sweep axis '{}'", axis.name));
  const auto parts = detail::split_list(text.substr(colon + 1));
  if (parts.size() != 3)
    throw ConfigError(fmt::format("axis '{}': expected 'min, max, points'", axis.name));
  axis.min = KeyValueConfig::to_double(axis.name, parts[0]);
  axis.max = KeyValueConfig::to_double(axis.name, parts[1]);
  const double pts = KeyValueConfig::to_double(axis.name, parts[2]);
  if (pts < 1.0 || pts != std::floor(pts) || pts > static_cast<double>(max_sweep_points))
    throw ConfigError(fmt::format("axis '{}': point count must be a positive integer", axis.name));
  axis.points = static_cast<int>(pts);
  if (!std::isfinite(axis.min) || !std::isfinite(axis.max) || axis.min <= 0.0 || axis.max <= 0.0)
    throw ConfigError(fmt::format("axis '{}': range must be positive and finite", axis.name));
  if (axis.max < axis.min) throw ConfigError(fmt::format("axis '{}': max < min", axis.name));
  if (axis.points == 1 && axis.max != axis.min)
    throw ConfigError(fmt::format("axis '{}': one point needs min == max", axis.name));
  return axis;
}

enum class Output { contrast, upsilon, t_g, t_e };

inline std::string_view column_name(Output o) {
  switch (o) {
    case Output::contrast: return "C";
    case Output::upsilon: return "upsilon";
    case Output::t_g: return "T_g";
    case Output::t_e: return "T_e";
  }
  return "?";
}

inline Output parse_output(std::string_view s) {
  if (s == "C" || s == "contrast") return Output::contrast;
  if (s == "upsilon" || s == "Upsilon") return Output::upsilon;
  if (s == "T_g") return Output::t_g;
  if (s == "T_e") return Output::t_e;
  throw ConfigError(fmt::format("unknown sweep output '{}'", s));
}

struct SweepSpec {
  KeyValueConfig base;  ///< device and pulse keys (no sweep.* keys)
  std::vector<SweepAxis> axes;
  std::vector<Output> outputs = {Output::contrast, Output::upsilon, Output::t_g, Output::t_e};
  bool optimize_kappa = false;
  double kappa_min_over_j = 0.5;
  double kappa_max_over_j = 5.0;
  int optimizer_scan = 10;  ///< coarse scan points before the Brent refinement
  bool row_argmax = true;
  RunOptions run;
  std::uint64_t config_hash = 0;

  bool wants(Output o) const { return std::find(outputs.begin(), outputs.end(), o) != outputs.end(); }

  std::size_t size() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= static_cast<std::size_t>(a.points);
    return n;
  }

  void validate() const {
    if (axes.size() > 2) throw ConfigError("at most two sweep axes are supported");
    if (axes.size() == 2 && axes[0].name == axes[1].name)
      throw ConfigError("sweep axes must differ");
    std::size_t n = 1;
    for (const auto& a : axes) {
      n *= static_cast<std::size_t>(a.points);
      if (n > max_sweep_points)
        throw ConfigError(fmt::format("sweep grid exceeds {} points", max_sweep_points));
    }
    if (outputs.empty()) throw ConfigError("no sweep outputs requested");
    if (!(kappa_min_over_j > 0.0) || !(kappa_max_over_j > kappa_min_over_j))
      throw ConfigError("kappa search range must satisfy 0 < min < max");
    if (optimize_kappa)
      for (const auto& a : axes)
        if (a.name.rfind("kappa", 0) == 0)
          throw ConfigError("kappa optimisation cannot be combined with a kappa axis");
  }
};

inline SweepSpec sweep_spec_from_config(const KeyValueConfig& cfg) {
  SweepSpec spec;
  for (const auto& key : cfg.keys()) {
    if (key.rfind("sweep.", 0) == 0) continue;
    spec.base.set(key, *cfg.get_string(key));
  }
  for (const char* key : {"sweep.axis1", "sweep.axis2"})
    if (auto a = cfg.get_string(key)) spec.axes.push_back(parse_axis(*a));
  if (cfg.contains("sweep.axis2") && !cfg.contains("sweep.axis1"))
    throw ConfigError("sweep.axis2 given without sweep.axis1");
  if (auto o = cfg.get_string("sweep.outputs")) {
    spec.outputs.clear();
    for (const auto& item : detail::split_list(*o)) spec.outputs.push_back(parse_output(item));
  }
  spec.optimize_kappa = cfg.get_bool("sweep.optimize_kappa").value_or(false);
  if (auto r = cfg.get_string("sweep.kappa_range_over_j")) {
    const auto parts = detail::split_list(*r);
    if (parts.size() != 2) throw ConfigError("sweep.kappa_range_over_j: expected 'min, max'");
    spec.kappa_min_over_j = KeyValueConfig::to_double("sweep.kappa_range_over_j", parts[0]);
    spec.kappa_max_over_j = KeyValueConfig::to_double("sweep.kappa_range_over_j", parts[1]);
  }
  spec.row_argmax = cfg.get_bool("sweep.row_argmax").value_or(true);
  for (const auto& k : cfg.keys())
    if (k.rfind("sweep.", 0) == 0 && k != "sweep.axis1" && k != "sweep.axis2" &&
        k != "sweep.outputs" && k != "sweep.optimize_kappa" && k != "sweep.kappa_range_over_j" &&
        k != "sweep.row_argmax")
      throw ConfigError(fmt::format("unknown sweep key '{}'", k));
  spec.config_hash = fnv1a64(cfg.canonical());
  spec.validate();
  return spec;
}

// ---------------------------------------------------------------------------

struct PointSetup {
  DeviceParams params;
  PulseConfig pulse;
};

inline std::string format_number(double v) { return fmt::format("{:.10g}", v); }

// Device and pulse for one grid point: absolute axes rewrite config keys,
// ratio axes are applied relative to the resulting J.
// `kappa_external` marks exchange rates supplied later (by the optimiser).
inline PointSetup point_setup(const KeyValueConfig& base, const std::vector<SweepAxis>& axes,
                              const std::vector<double>& coords, bool kappa_external = false) {
  KeyValueConfig cfg = base;
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const auto& name = axes[i].name;
    if (is_ratio_axis(name)) continue;
    if (name == "kappa_mhz") {
      cfg.erase("kappa1_mhz");
      cfg.erase("kappa2_mhz");
    } else if (name == "kappa1_mhz" || name == "kappa2_mhz") {
      if (auto k = cfg.get_string("kappa_mhz")) {
        cfg.erase("kappa_mhz");
        cfg.set("kappa1_mhz", *k);
        cfg.set("kappa2_mhz", *k);
      }
    }
    if (name == "n_res") {
      if (coords[i] != std::round(coords[i]))
        throw ConfigError(fmt::format("n_res axis value {} is not an integer", coords[i]));
      cfg.set(name, fmt::format("{}", static_cast<long>(std::lround(coords[i]))));
    } else {
      cfg.set(name, format_number(coords[i]));
    }
  }
  // ratio axes may supply the exchange rates that the base config leaves out
  bool k1 = kappa_external, k2 = kappa_external;
  for (const auto& a : axes) {
    k1 |= a.name == "kappa_over_j" || a.name == "kappa1_over_j";
    k2 |= a.name == "kappa_over_j" || a.name == "kappa2_over_j";
  }
  if (k1 && k2 && !cfg.contains("kappa_mhz") &&
      !(cfg.contains("kappa1_mhz") && cfg.contains("kappa2_mhz"))) {
    cfg.erase("kappa1_mhz");
    cfg.erase("kappa2_mhz");
    cfg.set("kappa_mhz", "1");
  }
  PointSetup s;
  s.params = device_params_from_config(cfg);
  s.pulse = pulse_from_config(cfg, s.params.omega_r);
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const auto& name = axes[i].name;
    const double v = coords[i] * s.params.J;
    if (name == "kappa_over_j") s.params.kappa_1 = s.params.kappa_2 = v;
    else if (name == "kappa1_over_j") s.params.kappa_1 = v;
    else if (name == "kappa2_over_j") s.params.kappa_2 = v;
    else if (name == "g_ef_over_j") s.params.g_ef = v;
  }
  return s;
}

// C at kappa_1 = kappa_2 = kappa, without spectra.
inline double contrast_only(DeviceParams p, const Pulse& pulse, double kappa, const RunOptions& base,
                            std::stop_token stop = {}) {
  p.kappa_1 = p.kappa_2 = kappa;
  RunOptions fast = base;
  fast.spectra = false;
  fast.convergence_guard = false;
  fast.parallel_branches = false;
  fast.integration.samples = 0;
  fast.integration.stop = stop;
  return contrast_and_upsilon(p, pulse, fast).contrast;
}

struct KappaOptimum {
  double kappa = 0.0;
  double contrast = 0.0;
};

// Coarse scan over [lo, hi] J, then Brent's method on the best bracket.
inline KappaOptimum optimize_symmetric_kappa(const DeviceParams& p, const Pulse& pulse, double lo_over_j,
                                             double hi_over_j, int scan, const RunOptions& opts = {},
                                             std::stop_token stop = {}) {
  if (scan < 3) throw InvalidParameters("kappa scan needs at least 3 points");
  const double lo = lo_over_j * p.J, hi = hi_over_j * p.J;
  std::vector<double> k(static_cast<std::size_t>(scan)), c(k.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    k[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(scan - 1);
    c[i] = contrast_only(p, pulse, k[i], opts, stop);
    if (c[i] > c[best]) best = i;
  }
  const double a = k[best == 0 ? 0 : best - 1];
  const double b = k[std::min(best + 1, k.size() - 1)];
  auto negative = [&](double kappa) { return -contrast_only(p, pulse, kappa, opts, stop); };
  std::uintmax_t iterations = 60;
  const auto [kappa, neg] = boost::math::tools::brent_find_minima(negative, a, b, 30, iterations);
  KappaOptimum out{kappa, -neg};
  if (c[best] > out.contrast) out = {k[best], c[best]};
  return out;
}

struct SweepRow {
  std::vector<double> coords;
  std::optional<double> kappa_opt;  ///< rad/us, when optimising
  double T_g = std::numeric_limits<double>::quiet_NaN();
  double T_e = std::numeric_limits<double>::quiet_NaN();
  double C = std::numeric_limits<double>::quiet_NaN();
  double upsilon = std::numeric_limits<double>::quiet_NaN();
  bool converged = true;
  bool row_argmax = false;
  std::string error;
};

struct SweepTable {
  std::vector<std::string> axis_names;
  std::vector<Output> outputs;
  bool optimized = false;
  bool annotated = false;
  std::vector<SweepRow> rows;

  std::size_t unconverged() const {
    return static_cast<std::size_t>(std::count_if(
        rows.begin(), rows.end(), [](const SweepRow& r) { return r.error.empty() && !r.converged; }));
  }

  std::size_t failures() const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return !r.error.empty(); }));
  }
};

inline SweepRow evaluate_point(const SweepSpec& spec, const std::vector<double>& coords,
                               std::stop_token stop = {}) {
  SweepRow row;
  row.coords = coords;
  try {
    auto setup = point_setup(spec.base, spec.axes, coords, spec.optimize_kappa);
    RunOptions opts = spec.run;
    opts.grid = setup.pulse.grid;
    opts.parallel_branches = false;
    opts.warn_unconverged = false;
    opts.integration.samples = 0;
    opts.integration.stop = stop;
    opts.spectra = spec.wants(Output::upsilon);
    if (spec.optimize_kappa) {
      const auto best = optimize_symmetric_kappa(setup.params, setup.pulse.pulse, spec.kappa_min_over_j,
                                                 spec.kappa_max_over_j, spec.optimizer_scan, opts, stop);
      setup.params.kappa_1 = setup.params.kappa_2 = best.kappa;
      row.kappa_opt = best.kappa;
    }
    const auto res = contrast_and_upsilon(setup.params, setup.pulse.pulse, opts);
    row.T_g = res.g.transmission;
    row.T_e = res.e.transmission;
    row.C = res.contrast;
    if (res.has_spectra) row.upsilon = res.upsilon;
    row.converged = res.converged;
  } catch (const Cancelled&) {
    throw;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

// Grid points are claimed from a shared counter by `jobs` workers; results land
// in their axis-major slot, so the table does not depend on scheduling.
inline SweepTable run_sweep(const SweepSpec& spec, int jobs = 0, std::stop_token stop = {}) {
  spec.validate();
  SweepTable table;
  for (const auto& a : spec.axes) table.axis_names.push_back(a.name);
  table.outputs = spec.outputs;
  table.optimized = spec.optimize_kappa;
  const std::size_t n = spec.size();
  table.rows.resize(n);

  auto coords_of = [&](std::size_t idx) {
    std::vector<double> c(spec.axes.size());
    for (std::size_t d = spec.axes.size(); d-- > 0;) {
      const auto pts = static_cast<std::size_t>(spec.axes[d].points);
      c[d] = spec.axes[d].value(static_cast<int>(idx % pts));
      idx /= pts;
    }
    return c;
  };

  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), n));

  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;
  std::stop_source abort;
  auto worker = [&](std::stop_token own) {
    for (;;) {
      if (stop.stop_requested() || own.stop_requested() || abort.stop_requested()) return;
      const std::size_t idx = next.fetch_add(1);
      if (idx >= n) return;
      try {
        table.rows[idx] = evaluate_point(spec, coords_of(idx), abort.get_token());
        if (stop.stop_requested()) abort.request_stop();
      } catch (...) {
        std::scoped_lock lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
        abort.request_stop();
        return;
      }
    }
  };
  {
    std::stop_callback forward(stop, [&] { abort.request_stop(); });
    if (jobs == 1) {
      worker(std::stop_token{});
    } else {
      std::vector<std::jthread> pool;
      for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
  }
  if (fatal) std::rethrow_exception(fatal);
  if (stop.stop_requested()) throw Cancelled();

  if (spec.row_argmax && spec.axes.size() == 2) {
    table.annotated = true;
    const auto cols = static_cast<std::size_t>(spec.axes[1].points);
    for (std::size_t r = 0; r < n / cols; ++r) {
      std::optional<std::size_t> best;
      for (std::size_t c = 0; c < cols; ++c) {
        const auto& row = table.rows[r * cols + c];
        if (!row.error.empty() || !std::isfinite(row.C)) continue;
        if (!best || row.C > table.rows[*best].C) best = r * cols + c;
      }
      if (best) table.rows[*best].row_argmax = true;
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Emission

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

inline std::string csv_number(double v) { return std::isfinite(v) ? format_number(v) : ""; }

inline double output_value(const SweepRow& r, Output o) {
  switch (o) {
    case Output::contrast: return r.C;
    case Output::upsilon: return r.upsilon;
    case Output::t_g: return r.T_g;
    case Output::t_e: return r.T_e;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

} // namespace detail

inline std::vector<std::string> table_columns(const SweepTable& t) {
  std::vector<std::string> cols = t.axis_names;
  if (t.optimized) cols.emplace_back("kappa_opt_mhz");
  for (auto o : t.outputs) cols.emplace_back(column_name(o));
  cols.emplace_back("converged");
  if (t.annotated) cols.emplace_back("row_argmax");
  cols.emplace_back("error");
  return cols;
}

inline std::string metadata_line(std::uint64_t hash) {
  return fmt::format("# photon_switch {}\n# config_hash: {:016x}\n", version, hash);
}

inline void write_csv(std::ostream& out, const SweepTable& t, std::uint64_t config_hash) {
  out << metadata_line(config_hash);
  const auto cols = table_columns(t);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : t.rows) {
    std::string line;
    for (double c : r.coords) line += format_number(c) + ",";
    if (t.optimized) line += (r.kappa_opt ? format_number(to_mhz(*r.kappa_opt)) : "") + ",";
    for (auto o : t.outputs) line += detail::csv_number(detail::output_value(r, o)) + ",";
    line += r.error.empty() ? (r.converged ? "1," : "0,") : ",";
    if (t.annotated) line += r.row_argmax ? "1," : "0,";
    line += detail::csv_field(r.error);
    out << line << '\n';
  }
}

inline nlohmann::ordered_json to_json(const SweepTable& t, std::uint64_t config_hash) {
  nlohmann::ordered_json j;
  j["tool"] = "photon_switch";
  j["version"] = version;
  j["config_hash"] = fmt::format("{:016x}", config_hash);
  j["columns"] = table_columns(t);
  auto& rows = j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : t.rows) {
    nlohmann::ordered_json row;
    for (std::size_t i = 0; i < r.coords.size(); ++i) row[t.axis_names[i]] = r.coords[i];
    if (t.optimized)
      row["kappa_opt_mhz"] = r.kappa_opt ? nlohmann::ordered_json(to_mhz(*r.kappa_opt)) : nullptr;
    for (auto o : t.outputs) {
      const double v = detail::output_value(r, o);
      row[std::string(column_name(o))] = std::isfinite(v) ? nlohmann::ordered_json(v) : nullptr;
    }
    row["converged"] = r.error.empty() && r.converged;
    if (t.annotated) row["row_argmax"] = r.row_argmax;
    row["error"] = r.error;
    rows.push_back(std::move(row));
  }
  return j;
}

// Gnuplot script that renders one heatmap per output of a two-axis sweep.
inline std::string gnuplot_script(const SweepTable& t, const std::string& csv_path,
                                  const std::string& image_prefix) {
  if (t.axis_names.size() != 2) throw InvalidParameters("heatmaps need a two-axis sweep");
  const auto cols = table_columns(t);
  std::string s;
  s += "set datafile separator ','\n";
  s += "set datafile commentschars '#'\n";
  s += "set terminal pngcairo size 900,750\n";
  s += "set view map\n";
  s += fmt::format("set xlabel '{}'\nset ylabel '{}'\n", t.axis_names[1], t.axis_names[0]);
  for (auto o : t.outputs) {
    const auto name = std::string(column_name(o));
    const auto col = std::find(cols.begin(), cols.end(), name) - cols.begin() + 1;
    s += fmt::format("set output '{}_{}.png'\n", image_prefix, name);
    s += fmt::format("set title '{}'\n", name);
    s += fmt::format("plot '{}' every ::1 using 2:1:{} with image notitle\n", csv_path, col);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Reference operating points

struct Table1Row {
  double j_mhz, kappa_mhz, g_ef_mhz, tau_p_us;
  double omega_c_ghz, omega_ef_ghz, alpha_mhz, contrast, upsilon;  ///< reference values
};

inline constexpr Table1Row table1_reference[] = {
    {20.0, 45.0, 50.0, 0.06, 7.004, 7.011, -349.48, 0.952, 0.0118},
    {12.0, 28.0, 40.0, 0.30, 7.002, 7.007, -353.29, 0.985, 0.0044},
    {10.5, 24.0, 30.0, 0.60, 7.001, 7.004, -356.24, 0.991, 0.0036},
};
inline constexpr double table1_omega_r_mhz = 7000.0;
inline constexpr double table1_omega_ge_mhz = 7360.0;
inline constexpr int table1_n_res = 7;
inline constexpr double table1_contrast_tol = 0.01;
inline constexpr double table1_upsilon_tol = 0.002;

inline DeviceParams table1_params(const Table1Row& r) {
  DeviceParams p;
  p.omega_r = from_mhz(table1_omega_r_mhz);
  p.omega_ge = from_mhz(table1_omega_ge_mhz);
  p.g_ef = from_mhz(r.g_ef_mhz);
  p.J = from_mhz(r.j_mhz);
  p.kappa_1 = p.kappa_2 = from_mhz(r.kappa_mhz);
  p.n_res = table1_n_res;
  return p;
}

struct Table1Result {
  Table1Row reference;
  double omega_c_ghz, omega_ef_ghz, alpha_mhz, contrast, upsilon;
  bool omega_c_ok, omega_ef_ok, alpha_ok, contrast_ok, upsilon_ok;
  ScatteringResult full;

  bool ok() const { return omega_c_ok && omega_ef_ok && alpha_ok && contrast_ok && upsilon_ok; }
};

// True when `value` rounds to `reference` at the given number of decimals.
inline bool matches_rounding(double value, double reference, int decimals) {
  const double unit = std::pow(10.0, -decimals);
  return std::abs(value - reference) <= 0.5 * unit * (1.0 + 1e-9);
}

inline std::vector<Table1Result> reproduce_table1(const RunOptions& opts = {}) {
  std::vector<Table1Result> out;
  for (const auto& ref : table1_reference) {
    const DeviceParams p = table1_params(ref);
    const Pulse pulse{p.omega_r, ref.tau_p_us};
    Table1Result r;
    r.reference = ref;
    r.full = contrast_and_upsilon(p, pulse, opts);
    r.omega_c_ghz = to_ghz(r.full.op.omega_c);
    r.omega_ef_ghz = to_ghz(r.full.op.omega_ef);
    r.alpha_mhz = to_mhz(r.full.op.alpha);
    r.contrast = r.full.contrast;
    r.upsilon = r.full.upsilon;
    r.omega_c_ok = matches_rounding(r.omega_c_ghz, ref.omega_c_ghz, 3);
    r.omega_ef_ok = matches_rounding(r.omega_ef_ghz, ref.omega_ef_ghz, 3);
    r.alpha_ok = matches_rounding(r.alpha_mhz, ref.alpha_mhz, 2);
    r.contrast_ok = std::abs(r.contrast - ref.contrast) <= table1_contrast_tol;
    r.upsilon_ok = r.full.has_spectra && std::abs(r.upsilon - ref.upsilon) <= table1_upsilon_tol;
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Time- versus frequency-domain cross-check

inline constexpr double oracle_tolerance = 1e-3;

struct OracleCase {
  std::string label;
  DeviceParams params;
  Pulse pulse;
};

// Reference-table rows followed by `random_count` draws from a valid region of
// parameter space (fixed seed, so the set is reproducible).
inline std::vector<OracleCase> oracle_cases(int random_count = 25, std::uint64_t seed = 20240611) {
  std::vector<OracleCase> cases;
  int row = 1;
  for (const auto& ref : table1_reference) {
    const auto p = table1_params(ref);
    cases.push_back({fmt::format("table1_row{}", row++), p, Pulse{p.omega_r, ref.tau_p_us}});
  }
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * std::generate_canonical<double, 53>(rng);
  };
  for (int i = 0; i < random_count;) {
    DeviceParams p;
    p.omega_r = from_mhz(uniform(6500.0, 7500.0));
    p.omega_ge = p.omega_r + from_mhz(uniform(250.0, 500.0));
    p.J = from_mhz(uniform(5.0, 25.0));
    p.g_ef = p.J * uniform(1.0, 5.0);
    p.kappa_1 = p.J * uniform(0.5, 5.0);
    p.kappa_2 = p.J * uniform(0.5, 5.0);
    p.n_res = 3 + 2 * static_cast<int>(uniform(0.0, 5.0));
    const double tau_p = uniform(0.05, 1.0);
    const double offset = uniform(-0.5, 0.5) * p.J;
    try {
      validate(p);
      const auto op = derive_operating_point(p);
      if (!op.dispersive_valid) continue;
    } catch (const SwitchError&) {
      continue;
    }
    cases.push_back({fmt::format("random{:02}", ++i), p, Pulse{p.omega_r + offset, tau_p}});
  }
  return cases;
}

struct OracleCheckRow {
  std::string label;
  QubitState qubit;
  double time_domain, frequency_domain;
  double difference() const { return std::abs(time_domain - frequency_domain); }
  bool ok() const { return difference() < oracle_tolerance; }
};

inline std::vector<OracleCheckRow> oracle_check(const OracleCase& c, const RunOptions& opts = {}) {
  RunOptions fast = opts;
  fast.spectra = false;
  const auto res = contrast_and_upsilon(c.params, c.pulse, fast);
  std::vector<OracleCheckRow> rows;
  for (auto q : {QubitState::g, QubitState::e}) {
    const double td = q == QubitState::g ? res.g.transmission : res.e.transmission;
    const double fd = expected_transmission(c.params, res.op, q, c.pulse);
    rows.push_back({c.label, q, td, fd});
  }
  return rows;
}

} // namespace photon_switch
