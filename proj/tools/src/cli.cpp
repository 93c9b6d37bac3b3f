#include "hwigs_cli/cli.hpp"

#include "hwigs/errors.hpp"
#include "hwigs/scenario_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace hwigs::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Raised for problems in a user-supplied file (exit 65).
struct ConfigError : Error {
  using Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path output_dir(const std::string& flag) {
  fs::path dir = ".";
  if (!flag.empty()) {
    dir = flag;
  } else if (const char* env = std::getenv("HWIGS_OUTPUT_DIR"); env != nullptr && *env != '\0') {
    dir = env;
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

// UTC ISO-8601; SOURCE_DATE_EPOCH pins it for reproducible manifests.
std::string timestamp() {
  std::time_t now = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
    now = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  }
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

json matrix_json(const RealMat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json report_json(const RateReport& r) {
  return {{"rate", r.rate},
          {"r1", r.r1},
          {"r2", r.r2},
          {"power", r.power},
          {"ee", r.ee},
          {"sum_rate", r.sum_rate},
          {"min_rate", r.min_rate},
          {"total_consumption", r.total_consumption},
          {"global_ee", r.global_ee}};
}

json trace_json(const OptimizeTrace& t) {
  return {{"objective", t.objective},
          {"mm_iterations", t.objective.empty() ? 0 : t.objective.size() - 1},
          {"mu", t.mu},
          {"inner_residual", t.inner_residual},
          {"converged", t.converged},
          {"inner_converged", t.inner_converged},
          {"qos_precheck_used", t.qos_precheck_used},
          {"solver_iterations", t.solver_iterations}};
}

// ---------------------------------------------------------------------------

struct ScenarioArgs {
  ScenarioParams params;
  std::uint64_t seed = 1;
  std::string file;
};

void add_scenario_flags(CLI::App* cmd, ScenarioArgs& a) {
  auto& p = a.params;
  std::vector<CLI::Option*> opts = {
      cmd->add_option("--users", p.users, "Number of users K")->check(CLI::PositiveNumber),
      cmd->add_option("--ntx", p.n_tx, "Transmit antennas")->check(CLI::PositiveNumber),
      cmd->add_option("--nrx", p.n_rx, "Receive antennas")->check(CLI::PositiveNumber),
      cmd->add_option("--snr-db", p.snr_db, "SNR = P / sigma_R^2 in dB"),
      cmd->add_option("--a-tx", p.a_tx, "Transmit I/Q amplitude a_T"),
      cmd->add_option("--a-rx", p.a_rx, "Receive I/Q amplitude a_R"),
      cmd->add_option("--phase-deg", p.phase_deg, "I/Q phase mismatch in degrees (both sides)"),
      cmd->add_option("--sigma-t2", p.sigma2_tx, "Transmit distortion variance"),
      cmd->add_option("--sigma-r2", p.sigma2_rx, "Receive noise variance"),
      cmd->add_option("--eta", p.eta, "Power amplifier inefficiency"),
      cmd->add_option("--pc", p.p_static, "Static circuit power P_c"),
      cmd->add_option("--seed", a.seed, "Channel seed"),
  };
  for (auto* o : opts) o->capture_default_str();
  CLI::Option* file = cmd->add_option("--scenario", a.file, "Scenario file written by dump-scenario");
  for (auto* o : opts) file->excludes(o);
}

NetworkScenario load_scenario(const ScenarioArgs& a) {
  if (a.file.empty()) return draw_scenario(a.params, a.seed);
  const std::string text = read_file(a.file);
  try {
    return parse_scenario(text);
  } catch (const InvalidArgument& ex) {
    throw ConfigError(a.file + ": " + ex.what());
  }
}

struct SolveArgs {
  ScenarioArgs scenario;
  std::string problem;
  std::string mode = "igs";
  std::vector<double> alphas;
  std::vector<double> r_th;
  int max_outer = MMOptions{}.max_outer;
  int max_inner = MMOptions{}.max_inner;
  std::string output;
  std::string name = "solve_report";
};

int cmd_solve(const SolveArgs& a, bool quiet, std::ostream& out) {
  ProblemSpec spec;
  spec.kind = parse_problem_kind(a.problem);
  spec.mode = parse_design_mode(a.mode);
  spec.alphas = a.alphas;
  spec.r_th = a.r_th;
  MMOptions opts;
  opts.max_outer = a.max_outer;
  opts.max_inner = a.max_inner;

  const NetworkScenario scenario = load_scenario(a.scenario);
  spec.weights(scenario.users);
  spec.thresholds(scenario.users);
  const EffectiveNetwork network = build_effective(scenario);
  const ModeOutcome m = run_mode(scenario, network, spec, opts);

  json j;
  j["format"] = "hwigs-solve-report";
  j["version"] = 1;
  j["problem"] = std::string(to_string(spec.kind));
  j["mode"] = std::string(to_string(spec.mode));
  j["alphas"] = spec.weights(scenario.users);
  j["r_th"] = spec.thresholds(scenario.users);
  j["hwi"] = {{"tx_imbalance_ideal", scenario.tx_imb.is_ideal()},
              {"rx_imbalance_ideal", scenario.rx_imb.is_ideal()},
              {"distortion_free", scenario.distortion.sigma2_tx == 0.0},
              {"ideal", scenario.tx_imb.is_ideal() && scenario.rx_imb.is_ideal() &&
                            scenario.distortion.sigma2_tx == 0.0}};
  j["scenario"] = json::parse(dump_scenario(scenario));
  j["objective"] = m.objective;
  j["report"] = report_json(m.report);
  j["trace"] = trace_json(m.solution.trace);
  json covs = json::array();
  for (const auto& p : m.solution.point.mats) covs.push_back(matrix_json(p));
  j["covariances"] = std::move(covs);

  const fs::path path = output_dir(a.output) / (a.name + ".json");
  write_file_atomic(path.string(), j.dump(2) + "\n");

  if (!quiet) {
    out << to_string(spec.kind) << " / " << to_string(spec.mode) << ": objective " << fmt("%.10g", m.objective)
        << "\n";
    for (std::size_t k = 0; k < m.report.rate.size(); ++k) {
      out << "  user " << k + 1 << ": rate " << fmt("%.10g", m.report.rate[k]) << "  power "
          << fmt("%.6g", m.report.power[k]) << "  ee " << fmt("%.6g", m.report.ee[k]) << "\n";
    }
    out << "  MM iterations " << m.solution.trace.objective.size() - 1
        << (m.solution.trace.converged ? " (converged)" : " (iteration cap)") << "\n";
    out << "report: " << path.string() << "\n";
  }
  return kExitOk;
}

struct DumpArgs {
  ScenarioArgs scenario;
  std::string out_file;
  bool no_channels = false;
};

int cmd_dump(const DumpArgs& a, std::ostream& out) {
  const std::string text = dump_scenario(load_scenario(a.scenario), !a.no_channels);
  if (a.out_file.empty()) {
    out << text;
  } else {
    write_file_atomic(a.out_file, text);
  }
  return kExitOk;
}

struct SweepArgs {
  std::string preset;
  std::string config;
  std::vector<double> values;
  std::optional<int> realizations;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool record_runtime = false;
  bool print_config = false;
  std::string output;
  std::string name;
};

SweepConfig resolve_sweep(const SweepArgs& a) {
  SweepConfig cfg;
  if (!a.preset.empty()) {
    auto p = preset(a.preset);
    if (!p) {
      std::string names;
      for (const auto& n : preset_names()) names += (names.empty() ? "" : ", ") + n;
      throw InvalidArgument("unknown preset '" + a.preset + "' (" + names + ")");
    }
    cfg = *p;
  } else {
    const std::string text = read_file(a.config);
    try {
      cfg = parse_sweep_config(text);
    } catch (const InvalidArgument& ex) {
      throw ConfigError(a.config + ": " + ex.what());
    }
  }
  if (!a.values.empty()) cfg.values = a.values;
  if (a.realizations) cfg.realizations = *a.realizations;
  if (a.seed) cfg.base_seed = *a.seed;
  if (a.threads) cfg.threads = *a.threads;
  if (a.record_runtime) cfg.record_runtime = true;
  try {
    cfg.validate();
  } catch (const InvalidArgument& ex) {
    throw ConfigError(ex.what());
  }
  return cfg;
}

int cmd_sweep(const SweepArgs& a, bool quiet, bool verbose, std::ostream& out, std::ostream& err) {
  const SweepConfig cfg = resolve_sweep(a);
  if (a.print_config) {
    out << dump_sweep_config(cfg);
    return kExitOk;
  }
  std::string name = a.name;
  if (name.empty()) name = !a.preset.empty() ? a.preset : fs::path(a.config).stem().string();

  const SweepResult result = run_sweep(cfg);
  const fs::path dir = output_dir(a.output);
  const fs::path csv = dir / (name + ".csv");
  const fs::path manifest = dir / (name + ".manifest.json");
  write_file_atomic(csv.string(), to_csv(result.rows));
  write_file_atomic(manifest.string(), sweep_manifest(cfg, result, timestamp()));

  if (result.failures > 0) {
    err << "sweep: " << result.failures << " realization(s) failed and were excluded\n";
    if (verbose) {
      for (const auto& r : result.records) {
        if (!r.ok) err << "  axis " << r.axis_index << " realization " << r.realization << ": " << r.error << "\n";
      }
    }
  }
  if (!quiet) {
    for (const auto& row : result.rows) {
      if (row.metric != "objective" && row.metric != "gain_pct_objective") continue;
      out << row.axis_name << "=" << fmt("%g", row.axis_value) << "  " << row.mode << "  " << row.metric << " "
          << fmt("%.6g", row.mean) << " +- " << fmt("%.2g", row.std_error) << "  (n=" << row.n_realizations
          << ")\n";
    }
    out << "csv: " << csv.string() << "\nmanifest: " << manifest.string() << "\n";
  }
  return kExitOk;
}

int cmd_verify(const VerifyHooks& hooks, std::ostream& out) {
  const auto checks = run_verify(hooks);
  std::size_t passed = 0;
  for (const auto& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) out << "  " << c.detail;
    out << "\n";
    if (c.passed) ++passed;
  }
  out << "verify: " << passed << "/" << checks.size() << " checks passed\n";
  return passed == checks.size() ? kExitOk : kExitInternal;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err, const VerifyHooks& hooks) {
  CLI::App app{"IGS/PGS transmit covariance design for the MIMO interference channel with I/Q imbalance", "hwigs"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "hwigs 0.1.0");
  bool quiet = false;
  bool verbose = false;
  app.add_flag("-q,--quiet", quiet, "Only print errors");
  app.add_flag("-v,--verbose", verbose, "Print per-realization failures");

  SolveArgs solve;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Design covariances for one scenario");
  add_scenario_flags(solve_cmd, solve.scenario);
  solve_cmd->add_option("--problem", solve.problem, "rate-region | sum-rate | ee-region | global-ee")->required();
  solve_cmd->add_option("--mode", solve.mode, "igs | pgs | i-pgs")->capture_default_str();
  solve_cmd->add_option("--alphas", solve.alphas, "Profile weights, comma separated")->delimiter(',');
  solve_cmd->add_option("--rth", solve.r_th, "Per-user rate thresholds, comma separated")->delimiter(',');
  solve_cmd->add_option("--max-outer", solve.max_outer, "MM iteration cap")->capture_default_str();
  solve_cmd->add_option("--max-inner", solve.max_inner, "Dinkelbach iteration cap")->capture_default_str();
  solve_cmd->add_option("--output-dir", solve.output, "Report directory (default $HWIGS_OUTPUT_DIR or .)");
  solve_cmd->add_option("--name", solve.name, "Report file stem")->capture_default_str();

  SweepArgs sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Monte Carlo sweep over one parameter");
  CLI::Option* preset_opt = sweep_cmd->add_option("--preset", sweep.preset, "fig3a fig3b fig4 fig5 fig6 fig7 fig9");
  CLI::Option* config_opt = sweep_cmd->add_option("--config", sweep.config, "Sweep config file");
  preset_opt->excludes(config_opt);
  sweep_cmd->add_option("--values", sweep.values, "Override the axis values, comma separated")->delimiter(',');
  sweep_cmd->add_option("--realizations", sweep.realizations, "Channel realizations per axis value");
  sweep_cmd->add_option("--seed", sweep.seed, "Base seed");
  sweep_cmd->add_option("--threads", sweep.threads, "Worker threads");
  sweep_cmd->add_flag("--record-runtime", sweep.record_runtime, "Write wall-clock runtimes into the CSV");
  sweep_cmd->add_flag("--print-config", sweep.print_config, "Print the resolved config and exit");
  sweep_cmd->add_option("--output-dir", sweep.output, "Output directory (default $HWIGS_OUTPUT_DIR or .)");
  sweep_cmd->add_option("--name", sweep.name, "Output file stem (default: preset or config name)");

  CLI::App* verify_cmd = app.add_subcommand("verify", "Run the fast invariant self-check");

  DumpArgs dump;
  CLI::App* dump_cmd = app.add_subcommand("dump-scenario", "Write a seeded scenario as JSON");
  add_scenario_flags(dump_cmd, dump.scenario);
  dump_cmd->add_option("-o,--out", dump.out_file, "Output file (default stdout)");
  dump_cmd->add_flag("--no-channels", dump.no_channels, "Omit channels; they are redrawn from the seed on load");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "hwigs 0.1.0\n";
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "usage error: " << ex.what() << "\nRun 'hwigs --help' for usage.\n";
    return kExitUsage;
  }

  if (*sweep_cmd && preset_opt->count() == 0 && config_opt->count() == 0) {
    err << "usage error: sweep needs --preset or --config\n";
    return kExitUsage;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve, quiet, out);
    if (*sweep_cmd) return cmd_sweep(sweep, quiet, verbose, out, err);
    if (*verify_cmd) return cmd_verify(hooks, out);
    if (*dump_cmd) return cmd_dump(dump, out);
  } catch (const InfeasibleError& ex) {
    err << "infeasible: " << ex.what() << "\n";
    return kExitInfeasible;
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const InvalidArgument& ex) {
    err << "usage error: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace hwigs::cli
