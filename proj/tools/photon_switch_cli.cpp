#include <photon_switch/photon_switch.hpp>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <string>

using namespace photon_switch;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 1;
constexpr int exit_failure = 2;

struct Common {
  std::string config;
  std::string out;
  std::string format = "csv";
  int jobs = 0;
  bool emit_plot = false;
  std::string trajectory_csv;
  int random_cases = 25;
  bool verbose = false;
  bool quiet = false;
};

// Writes to --out when given, stdout otherwise.
class Sink {
public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ConfigError(fmt::format("cannot write '{}'", path));
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
  std::unique_ptr<std::ofstream> file_;
};

KeyValueConfig load_config(const Common& c) {
  if (c.config.empty()) throw ConfigError("--config is required");
  return KeyValueConfig::load(c.config);
}

void warn_unused(const KeyValueConfig& cfg) {
  for (const auto& k : cfg.unused_keys()) log::warn(fmt::format("config key '{}' was not used", k));
}

int cmd_run(const Common& c) {
  const auto cfg = load_config(c);
  const auto params = device_params_from_config(cfg);
  const auto pulse = pulse_from_config(cfg, params.omega_r);
  warn_unused(cfg);
  RunOptions opts;
  opts.grid = pulse.grid;
  opts.integration.samples = c.trajectory_csv.empty() ? 0 : 2000;
  const auto res = contrast_and_upsilon(params, pulse.pulse, opts);
  if (!c.trajectory_csv.empty()) {
    const auto op = derive_operating_point(params);
    for (auto q : {QubitState::g, QubitState::e}) {
      auto io = opts.integration;
      io.keep_dense = false;
      const auto traj = integrate(assemble_generator(params, op, q), pulse.pulse, res.t_inf, io);
      traj.write_csv(fmt::format("{}_{}.csv", c.trajectory_csv, to_string(q)));
    }
  }
  Sink sink(c.out);
  auto& os = sink.stream();
  const auto j = to_json(res);
  if (c.format == "json") {
    os << j.dump(2) << '\n';
  } else {
    os << metadata_line(fnv1a64(cfg.canonical()));
    os << "quantity,value\n";
    for (const char* key : {"T_g", "T_e", "R_g", "R_e", "C", "upsilon_g", "upsilon_e", "upsilon"})
      os << key << ',' << format_number(j[key].get<double>()) << '\n';
    os << "residual_g," << format_number(res.g.residual) << '\n';
    os << "residual_e," << format_number(res.e.residual) << '\n';
    os << "converged," << (res.converged ? 1 : 0) << '\n';
  }
  return exit_ok;
}

int cmd_sweep(const Common& c) {
  const auto cfg = load_config(c);
  SweepSpec spec = sweep_spec_from_config(cfg);
  // validate the base point once so config mistakes surface as config errors
  {
    std::vector<double> first;
    for (const auto& a : spec.axes) first.push_back(a.min);
    point_setup(spec.base, spec.axes, first, spec.optimize_kappa);
  }
  const auto table = run_sweep(spec, c.jobs);
  {
    Sink sink(c.out);
    if (c.format == "json")
      sink.stream() << to_json(table, spec.config_hash).dump(2) << '\n';
    else
      write_csv(sink.stream(), table, spec.config_hash);
  }
  if (c.emit_plot) {
    if (c.out.empty() || c.format != "csv")
      throw ConfigError("--emit-plot needs --out and CSV output");
    if (spec.axes.size() != 2) throw ConfigError("--emit-plot needs a two-axis sweep");
    std::ofstream gp(c.out + ".gp");
    if (!gp) throw ConfigError(fmt::format("cannot write '{}.gp'", c.out));
    gp << gnuplot_script(table, c.out, c.out);
  }
  for (const auto& r : table.rows)
    if (!r.error.empty()) log::warn(fmt::format("point failed: {}", r.error));
  if (const auto n = table.unconverged())
    log::warn(fmt::format("{} of {} points have |C(2 t_inf) - C(t_inf)| >= {:g} (converged = 0)", n,
                          table.rows.size(), convergence_tolerance));
  return table.failures() == 0 ? exit_ok : exit_failure;
}

int cmd_table1(const Common& c) {
  const auto rows = reproduce_table1();
  Sink sink(c.out);
  auto& os = sink.stream();
  bool all = true;
  if (c.format == "json") {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      nlohmann::ordered_json e;
      e["j_mhz"] = r.reference.j_mhz;
      e["kappa_mhz"] = r.reference.kappa_mhz;
      e["g_ef_mhz"] = r.reference.g_ef_mhz;
      e["tau_p_us"] = r.reference.tau_p_us;
      e["omega_c_ghz"] = {{"computed", r.omega_c_ghz}, {"reference", r.reference.omega_c_ghz}, {"pass", r.omega_c_ok}};
      e["omega_ef_ghz"] = {{"computed", r.omega_ef_ghz}, {"reference", r.reference.omega_ef_ghz}, {"pass", r.omega_ef_ok}};
      e["alpha_mhz"] = {{"computed", r.alpha_mhz}, {"reference", r.reference.alpha_mhz}, {"pass", r.alpha_ok}};
      e["C"] = {{"computed", r.contrast}, {"reference", r.reference.contrast}, {"pass", r.contrast_ok}};
      e["upsilon"] = {{"computed", r.upsilon}, {"reference", r.reference.upsilon}, {"pass", r.upsilon_ok}};
      j.push_back(std::move(e));
      all = all && r.ok();
    }
    os << j.dump(2) << '\n';
  } else {
    os << metadata_line(0);
    os << "row,quantity,computed,reference,pass\n";
    int i = 1;
    for (const auto& r : rows) {
      auto line = [&](const char* q, double v, double ref, bool ok) {
        os << fmt::format("{},{},{:.6f},{},{}\n", i, q, v, ref, ok ? "pass" : "FAIL");
      };
      line("omega_c_ghz", r.omega_c_ghz, r.reference.omega_c_ghz, r.omega_c_ok);
      line("omega_ef_ghz", r.omega_ef_ghz, r.reference.omega_ef_ghz, r.omega_ef_ok);
      line("alpha_mhz", r.alpha_mhz, r.reference.alpha_mhz, r.alpha_ok);
      line("C", r.contrast, r.reference.contrast, r.contrast_ok);
      line("upsilon", r.upsilon, r.reference.upsilon, r.upsilon_ok);
      all = all && r.ok();
      ++i;
    }
  }
  return all ? exit_ok : exit_failure;
}

int cmd_oracle_check(const Common& c) {
  std::vector<OracleCase> cases;
  if (!c.config.empty()) {
    const auto cfg = load_config(c);
    const auto params = device_params_from_config(cfg);
    const auto pulse = pulse_from_config(cfg, params.omega_r);
    warn_unused(cfg);
    cases.push_back({"config", params, pulse.pulse});
  } else {
    cases = oracle_cases(c.random_cases);
  }
  Sink sink(c.out);
  auto& os = sink.stream();
  os << "case,qubit,T_time_domain,T_frequency_domain,abs_difference,pass\n";
  bool all = true;
  for (const auto& oc : cases) {
    for (const auto& r : oracle_check(oc)) {
      os << fmt::format("{},{},{:.9f},{:.9f},{:.3e},{}\n", r.label, to_string(r.qubit), r.time_domain,
                        r.frequency_domain, r.difference(), r.ok() ? "pass" : "FAIL");
      all = all && r.ok();
    }
  }
  return all ? exit_ok : exit_failure;
}

int cmd_diagnose(const Common& c) {
  const auto cfg = load_config(c);
  const auto params = device_params_from_config(cfg);
  const auto pulse = pulse_from_config(cfg, params.omega_r);
  warn_unused(cfg);
  validate(params);
  const auto op = derive_operating_point(params);
  const auto band = passband_diagnostics(params, op);
  nlohmann::ordered_json j;
  j["omega_c_mhz"] = to_mhz(op.omega_c);
  j["omega_ef_mhz"] = to_mhz(op.omega_ef);
  j["omega_a_mhz"] = to_mhz(op.omega_a);
  j["chi_mhz"] = to_mhz(op.chi);
  j["lambda"] = op.lambda;
  j["alpha_mhz"] = to_mhz(op.alpha);
  j["alpha_rel"] = op.alpha_rel;
  j["delta_plus_mhz"] = to_mhz(op.delta_plus);
  j["delta_minus_mhz"] = to_mhz(op.delta_minus);
  j["dispersive_valid"] = op.dispersive_valid;
  j["rwa_valid"] = op.rwa_valid;
  j["band_lower_mhz"] = to_mhz(band.lower_edge);
  j["band_upper_mhz"] = to_mhz(band.upper_edge);
  j["qubit_in_gap"] = band.qubit_in_gap;
  j["dressed_in_band"] = band.dressed_in_band;
  if (params.J > 0.0) {
    const auto loss = loss_diagnostics(params, pulse.pulse.tau_p);
    j["cra_loss"] = loss.cra_loss;
    j["travel_time_us"] = loss.travel_time;
    j["loss_negligible"] = loss.loss_negligible;
    j["coherence_sufficient"] = loss.coherence_sufficient;
  }
  j["pulse_narrowband"] = pulse.pulse.narrowband();
  Sink sink(c.out);
  auto& os = sink.stream();
  if (c.format == "json") {
    os << j.dump(2) << '\n';
  } else {
    os << "quantity,value\n";
    for (const auto& [k, v] : j.items()) os << k << ',' << v.dump() << '\n';
  }
  return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-photon switch simulator"};
  app.require_subcommand(1);
  Common c;
  app.add_flag("-v,--verbose", c.verbose, "Log informational messages");
  app.add_flag("-q,--quiet", c.quiet, "Suppress warnings");
  app.set_version_flag("--version", std::string(version));

  auto add_io = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", c.config, "Key-value config file");
    if (needs_config) opt->required();
    sub->add_option("--out", c.out, "Output file (default: stdout)");
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  };
  auto* run = app.add_subcommand("run", "Simulate one parameter point");
  add_io(run, true);
  run->add_option("--trajectory-csv", c.trajectory_csv,
                  "Debug: write amplitudes to PREFIX_g.csv and PREFIX_e.csv");
  auto* sweep = app.add_subcommand("sweep", "Sweep one or two parameters");
  add_io(sweep, true);
  sweep->add_option("--jobs", c.jobs, "Worker threads (default: hardware concurrency)")
      ->check(CLI::NonNegativeNumber);
  sweep->add_flag("--emit-plot", c.emit_plot, "Write a gnuplot heatmap script next to --out");
  auto* table1 = app.add_subcommand("table1", "Reproduce the reference operating points");
  add_io(table1, false);
  auto* oracle = app.add_subcommand("oracle-check", "Compare time- and frequency-domain transmission");
  add_io(oracle, false);
  oracle->add_option("--random", c.random_cases, "Random parameter sets when no config is given")
      ->check(CLI::NonNegativeNumber);
  auto* diagnose = app.add_subcommand("diagnose", "Print operating point and validity flags");
  add_io(diagnose, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }
  if (c.verbose) log::set_level(log::Level::info);
  if (c.quiet) log::set_level(log::Level::quiet);

  try {
    if (*run) return cmd_run(c);
    if (*sweep) return cmd_sweep(c);
    if (*table1) return cmd_table1(c);
    if (*oracle) return cmd_oracle_check(c);
    if (*diagnose) return cmd_diagnose(c);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const InvalidParameters& e) {
    std::cerr << "invalid parameters: " << e.what() << '\n';
    return exit_config;
  } catch (const DetuningTooSmall& e) {
    std::cerr << "invalid parameters: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_failure;
  }
  return exit_ok;
}
