#include "hwigs/montecarlo.hpp"

#include "hwigs/errors.hpp"
#include "hwigs/scenario_io.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <thread>

namespace hwigs {
namespace {

using nlohmann::json;

constexpr int kSweepFormatVersion = 1;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<double> sized(const std::vector<double>& v, int users) {
  if (v.size() == 1) return std::vector<double>(static_cast<std::size_t>(users), v.front());
  return v;
}

ModeMetrics metrics_of(const ModeOutcome& m) {
  ModeMetrics out;
  out.objective = m.objective;
  out.min_rate = m.report.min_rate;
  out.sum_rate = m.report.sum_rate;
  out.min_ee = *std::min_element(m.report.ee.begin(), m.report.ee.end());
  out.global_ee = m.report.global_ee;
  out.rates = m.report.rate;
  out.runtime_ms = m.runtime_ms;
  return out;
}

RealizationRecord run_one(const SweepConfig& cfg, std::size_t axis_index, int realization) {
  RealizationRecord rec;
  rec.axis_index = axis_index;
  rec.realization = realization;
  rec.seed = realization_seed(cfg.base_seed, axis_index, realization, axis_changes_channel(cfg.axis));
  try {
    const ScenarioParams params = scenario_at(cfg, cfg.values[axis_index]);
    const NetworkScenario scenario = draw_scenario(params, rec.seed);
    const ModeComparison c = run_all_modes(scenario, problem_for(cfg, params.users), cfg.mm);
    rec.modes[0] = metrics_of(c.pgs);
    rec.modes[1] = metrics_of(c.igs);
    rec.modes[2] = metrics_of(c.ideal_pgs);
    rec.ok = true;
  } catch (const Error& ex) {
    rec.error = ex.what();
  }
  return rec;
}

struct MetricAccessor {
  std::string name;
  std::function<double(const ModeMetrics&)> get;
};

std::vector<MetricAccessor> metrics_for(int users) {
  std::vector<MetricAccessor> out = {
      {"objective", [](const ModeMetrics& m) { return m.objective; }},
      {"min_rate", [](const ModeMetrics& m) { return m.min_rate; }},
      {"sum_rate", [](const ModeMetrics& m) { return m.sum_rate; }},
      {"min_ee", [](const ModeMetrics& m) { return m.min_ee; }},
      {"global_ee", [](const ModeMetrics& m) { return m.global_ee; }},
  };
  for (int k = 0; k < users; ++k) {
    out.push_back({"rate_user" + std::to_string(k + 1),
                   [k](const ModeMetrics& m) { return m.rates[static_cast<std::size_t>(k)]; }});
  }
  return out;
}

void mean_and_error(const std::vector<double>& x, double& mean, double& err) {
  mean = 0.0;
  err = 0.0;
  if (x.empty()) {
    mean = kNaN;
    err = kNaN;
    return;
  }
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  if (x.size() < 2) return;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  err = std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
}

std::string format_number(double x) {
  if (!std::isfinite(x)) return "NA";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// --- config (de)serialization ---------------------------------------------

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  throw InvalidArgument("sweep config: field '" + where + "': " + what);
}

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) config_error(where.empty() ? "<root>" : where, "expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) config_error(where.empty() ? key : where + "." + key, "unknown field");
  }
}

template <typename T>
void read(const json& j, const char* key, const std::string& where, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& ex) {
    config_error(where.empty() ? key : where + "." + key, ex.what());
  }
}

json solver_json(const SolveOptions& s) {
  return {{"max_iters", s.max_iters},       {"grad_tol", s.grad_tol},         {"stall_tol", s.stall_tol},
          {"stall_window", s.stall_window},         {"step_init", s.step_init},
          {"armijo_shrink", s.armijo_shrink}, {"armijo_c", s.armijo_c},       {"tau_init", s.tau_init},
          {"tau_final", s.tau_final},       {"tau_factor", s.tau_factor},     {"penalty_init", s.penalty_init},
          {"penalty_max", s.penalty_max},   {"qos_tol", s.qos_tol}};
}

json config_json(const SweepConfig& cfg) {
  const auto& sc = cfg.scenario;
  json j;
  j["format"] = "hwigs-sweep";
  j["version"] = kSweepFormatVersion;
  j["problem"] = {{"kind", std::string(to_string(cfg.problem.kind))},
                  {"alphas", cfg.problem.alphas},
                  {"r_th", cfg.problem.r_th}};
  j["axis"] = std::string(to_string(cfg.axis));
  j["values"] = cfg.values;
  j["realizations"] = cfg.realizations;
  j["base_seed"] = cfg.base_seed;
  j["threads"] = cfg.threads;
  j["record_runtime"] = cfg.record_runtime;
  j["scenario"] = {{"users", sc.users},         {"n_tx", sc.n_tx},           {"n_rx", sc.n_rx},
                   {"snr_db", sc.snr_db},       {"a_tx", sc.a_tx},           {"a_rx", sc.a_rx},
                   {"phase_deg", sc.phase_deg}, {"sigma2_tx", sc.sigma2_tx}, {"sigma2_rx", sc.sigma2_rx},
                   {"eta", sc.eta},             {"p_static", sc.p_static}};
  j["mm"] = {{"max_outer", cfg.mm.max_outer}, {"outer_tol", cfg.mm.outer_tol},
             {"max_inner", cfg.mm.max_inner}, {"inner_tol", cfg.mm.inner_tol},
             {"warm_tau_init", cfg.mm.warm_tau_init}, {"solver", solver_json(cfg.mm.solver)}};
  return j;
}

}  // namespace

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::SnrDb: return "snr_db";
    case SweepAxis::Users: return "users";
    case SweepAxis::Imbalance: return "imbalance";
    case SweepAxis::PStatic: return "p_static";
  }
  return "?";
}

SweepAxis parse_sweep_axis(std::string_view text) {
  for (auto a : {SweepAxis::SnrDb, SweepAxis::Users, SweepAxis::Imbalance, SweepAxis::PStatic}) {
    if (text == to_string(a)) return a;
  }
  throw InvalidArgument("unknown sweep axis '" + std::string(text) + "' (snr_db, users, imbalance, p_static)");
}

bool axis_changes_channel(SweepAxis axis) { return axis == SweepAxis::Users; }

void SweepConfig::validate() const {
  if (realizations < 1) throw InvalidArgument("sweep config: field 'realizations': must be >= 1");
  if (values.empty()) throw InvalidArgument("sweep config: field 'values': must be non-empty");
  if (threads < 1) throw InvalidArgument("sweep config: field 'threads': must be >= 1");
  if (mm.max_outer < 1 || mm.max_inner < 1) throw InvalidArgument("sweep config: field 'mm': iteration caps must be >= 1");
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidArgument("sweep config: field 'values': non-finite entry");
    if (axis == SweepAxis::Users && (v < 1.0 || v != std::floor(v))) {
      throw InvalidArgument("sweep config: field 'values': user counts must be positive integers");
    }
    if (axis == SweepAxis::Imbalance && !(v < 1.0)) {
      throw InvalidArgument("sweep config: field 'values': imbalance level must be < 1");
    }
    if (axis == SweepAxis::PStatic && v < 0.0) {
      throw InvalidArgument("sweep config: field 'values': static power must be >= 0");
    }
  }
}

ScenarioParams scenario_at(const SweepConfig& cfg, double axis_value) {
  ScenarioParams p = cfg.scenario;
  switch (cfg.axis) {
    case SweepAxis::SnrDb: p.snr_db = axis_value; break;
    case SweepAxis::Users: p.users = static_cast<int>(axis_value); break;
    case SweepAxis::Imbalance:
      p.a_tx = 1.0 - axis_value;
      p.a_rx = 1.0 - axis_value;
      break;
    case SweepAxis::PStatic: p.p_static = axis_value; break;
  }
  return p;
}

ProblemSpec problem_for(const SweepConfig& cfg, int users) {
  ProblemSpec spec = cfg.problem;
  spec.alphas = sized(spec.alphas, users);
  spec.r_th = sized(spec.r_th, users);
  return spec;
}

std::uint64_t realization_seed(std::uint64_t base_seed, std::size_t axis_index, int realization, bool channel_varies) {
  std::uint64_t h = splitmix64(base_seed);
  if (channel_varies) h = splitmix64(h ^ (static_cast<std::uint64_t>(axis_index) + 1));
  return splitmix64(h ^ (0x5851f42d4c957f2dULL * (static_cast<std::uint64_t>(realization) + 1)));
}

SweepResult run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const std::size_t n_axis = cfg.values.size();
  const auto n_real = static_cast<std::size_t>(cfg.realizations);
  const std::size_t total = n_axis * n_real;

  SweepResult result;
  result.records.resize(total);
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (std::size_t idx = next++; idx < total; idx = next++) {
      result.records[idx] = run_one(cfg, idx / n_real, static_cast<int>(idx % n_real));
    }
  };
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), total);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  const std::string axis_name(to_string(cfg.axis));
  for (std::size_t a = 0; a < n_axis; ++a) {
    const int users = scenario_at(cfg, cfg.values[a]).users;
    for (std::size_t m = 0; m < kModeCount; ++m) {
      for (const auto& metric : metrics_for(users)) {
        std::vector<double> samples;
        std::vector<double> runtimes;
        for (std::size_t r = 0; r < n_real; ++r) {
          const auto& rec = result.records[a * n_real + r];
          if (!rec.ok) continue;
          samples.push_back(metric.get(rec.modes[m]));
          runtimes.push_back(rec.modes[m].runtime_ms);
        }
        ResultRow row;
        row.axis_name = axis_name;
        row.axis_value = cfg.values[a];
        row.mode = std::string(to_string(kSweepModes[m]));
        row.metric = metric.name;
        mean_and_error(samples, row.mean, row.std_error);
        row.n_realizations = static_cast<int>(samples.size());
        double rt = 0.0;
        double rt_err = 0.0;
        mean_and_error(runtimes, rt, rt_err);
        row.runtime_ms = cfg.record_runtime ? rt : kNaN;
        result.rows.push_back(std::move(row));
      }
    }
  }
  for (const auto& rec : result.records) {
    if (!rec.ok) ++result.failures;
  }
  auto gains = relative_gain_rows(cfg, result.records);
  result.rows.insert(result.rows.end(), gains.begin(), gains.end());
  return result;
}

GainEstimate relative_gain(std::span<const double> treated, std::span<const double> baseline) {
  GainEstimate g;
  if (treated.size() != baseline.size() || treated.empty()) return g;
  const auto n = static_cast<double>(treated.size());
  double mt = 0.0;
  double mb = 0.0;
  for (std::size_t i = 0; i < treated.size(); ++i) {
    mt += treated[i];
    mb += baseline[i];
  }
  mt /= n;
  mb /= n;
  if (mb == 0.0) return g;
  const double ratio = mt / mb;
  g.percent = 100.0 * (ratio - 1.0);
  g.defined = true;
  if (treated.size() > 1) {
    double ss = 0.0;
    for (std::size_t i = 0; i < treated.size(); ++i) {
      const double resid = treated[i] - ratio * baseline[i];
      ss += resid * resid;
    }
    g.std_error = 100.0 * std::sqrt(ss / (n - 1.0) / n) / std::abs(mb);
  }
  return g;
}

std::vector<ResultRow> relative_gain_rows(const SweepConfig& cfg, const std::vector<RealizationRecord>& records) {
  std::vector<ResultRow> rows;
  const std::size_t n_real = static_cast<std::size_t>(cfg.realizations);
  const std::string axis_name(to_string(cfg.axis));
  const std::pair<std::size_t, const char*> baselines[] = {{0, "IGS_vs_PGS"}, {2, "IGS_vs_I-PGS"}};
  for (std::size_t a = 0; a < cfg.values.size(); ++a) {
    for (const auto& [base, label] : baselines) {
      for (const auto& metric : metrics_for(0)) {
        std::vector<double> igs;
        std::vector<double> ref;
        for (std::size_t r = 0; r < n_real; ++r) {
          const auto& rec = records[a * n_real + r];
          if (!rec.ok) continue;
          igs.push_back(metric.get(rec.modes[1]));
          ref.push_back(metric.get(rec.modes[base]));
        }
        const GainEstimate g = relative_gain(igs, ref);
        ResultRow row;
        row.axis_name = axis_name;
        row.axis_value = cfg.values[a];
        row.mode = label;
        row.metric = "gain_pct_" + metric.name;
        row.mean = g.defined ? g.percent : kNaN;
        row.std_error = g.defined ? g.std_error : kNaN;
        row.n_realizations = static_cast<int>(igs.size());
        row.runtime_ms = kNaN;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::string out = "axis_name,axis_value,mode,metric_name,mean,stderr,n_realizations,runtime_ms\n";
  for (const auto& r : rows) {
    out += r.axis_name + ',' + format_number(r.axis_value) + ',' + r.mode + ',' + r.metric + ',' +
           format_number(r.mean) + ',' + format_number(r.std_error) + ',' + std::to_string(r.n_realizations) + ',' +
           format_number(r.runtime_ms) + '\n';
  }
  return out;
}

SweepConfig parse_sweep_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& ex) {
    throw InvalidArgument(std::string("sweep config: ") + ex.what());
  }
  check_keys(j, "", {"format", "version", "problem", "axis", "values", "realizations", "base_seed", "threads",
                     "record_runtime", "scenario", "mm"});
  std::string format;
  int version = 0;
  read(j, "format", "", format);
  read(j, "version", "", version);
  if (format != "hwigs-sweep") config_error("format", "must be \"hwigs-sweep\"");
  if (version != kSweepFormatVersion) config_error("version", "unsupported version " + std::to_string(version));

  SweepConfig cfg;
  if (j.contains("problem")) {
    const json& p = j.at("problem");
    check_keys(p, "problem", {"kind", "alphas", "r_th"});
    std::string kind = std::string(to_string(cfg.problem.kind));
    read(p, "kind", "problem", kind);
    try {
      cfg.problem.kind = parse_problem_kind(kind);
    } catch (const InvalidArgument& ex) {
      config_error("problem.kind", ex.what());
    }
    read(p, "alphas", "problem", cfg.problem.alphas);
    read(p, "r_th", "problem", cfg.problem.r_th);
  }
  std::string axis = std::string(to_string(cfg.axis));
  read(j, "axis", "", axis);
  try {
    cfg.axis = parse_sweep_axis(axis);
  } catch (const InvalidArgument& ex) {
    config_error("axis", ex.what());
  }
  read(j, "values", "", cfg.values);
  read(j, "realizations", "", cfg.realizations);
  read(j, "base_seed", "", cfg.base_seed);
  read(j, "threads", "", cfg.threads);
  read(j, "record_runtime", "", cfg.record_runtime);
  if (j.contains("scenario")) {
    const json& s = j.at("scenario");
    check_keys(s, "scenario", {"users", "n_tx", "n_rx", "snr_db", "a_tx", "a_rx", "phase_deg", "sigma2_tx",
                               "sigma2_rx", "eta", "p_static"});
    auto& sc = cfg.scenario;
    read(s, "users", "scenario", sc.users);
    read(s, "n_tx", "scenario", sc.n_tx);
    read(s, "n_rx", "scenario", sc.n_rx);
    read(s, "snr_db", "scenario", sc.snr_db);
    read(s, "a_tx", "scenario", sc.a_tx);
    read(s, "a_rx", "scenario", sc.a_rx);
    read(s, "phase_deg", "scenario", sc.phase_deg);
    read(s, "sigma2_tx", "scenario", sc.sigma2_tx);
    read(s, "sigma2_rx", "scenario", sc.sigma2_rx);
    read(s, "eta", "scenario", sc.eta);
    read(s, "p_static", "scenario", sc.p_static);
    if (sc.users < 1 || sc.n_tx < 1 || sc.n_rx < 1) config_error("scenario", "users and antenna counts must be >= 1");
  }
  if (j.contains("mm")) {
    const json& m = j.at("mm");
    check_keys(m, "mm", {"max_outer", "outer_tol", "max_inner", "inner_tol", "warm_tau_init", "solver"});
    read(m, "max_outer", "mm", cfg.mm.max_outer);
    read(m, "outer_tol", "mm", cfg.mm.outer_tol);
    read(m, "max_inner", "mm", cfg.mm.max_inner);
    read(m, "inner_tol", "mm", cfg.mm.inner_tol);
    read(m, "warm_tau_init", "mm", cfg.mm.warm_tau_init);
    if (m.contains("solver")) {
      const json& s = m.at("solver");
      check_keys(s, "mm.solver", {"max_iters", "grad_tol", "stall_tol", "stall_window", "step_init", "armijo_shrink", "armijo_c", "tau_init",
                                  "tau_final", "tau_factor", "penalty_init", "penalty_max", "qos_tol"});
      auto& o = cfg.mm.solver;
      read(s, "max_iters", "mm.solver", o.max_iters);
      read(s, "grad_tol", "mm.solver", o.grad_tol);
      read(s, "stall_tol", "mm.solver", o.stall_tol);
      read(s, "stall_window", "mm.solver", o.stall_window);
      read(s, "step_init", "mm.solver", o.step_init);
      read(s, "armijo_shrink", "mm.solver", o.armijo_shrink);
      read(s, "armijo_c", "mm.solver", o.armijo_c);
      read(s, "tau_init", "mm.solver", o.tau_init);
      read(s, "tau_final", "mm.solver", o.tau_final);
      read(s, "tau_factor", "mm.solver", o.tau_factor);
      read(s, "penalty_init", "mm.solver", o.penalty_init);
      read(s, "penalty_max", "mm.solver", o.penalty_max);
      read(s, "qos_tol", "mm.solver", o.qos_tol);
    }
  }
  cfg.validate();
  return cfg;
}

std::string dump_sweep_config(const SweepConfig& cfg) { return config_json(cfg).dump(2) + "\n"; }

std::string sweep_manifest(const SweepConfig& cfg, const SweepResult& result, std::string_view timestamp) {
  json j;
  j["format"] = "hwigs-sweep-manifest";
  j["version"] = kSweepFormatVersion;
  j["artifact_version"] = "0.1.0";
  j["timestamp"] = std::string(timestamp);
  j["config"] = config_json(cfg);
  j["realizations_requested"] = cfg.realizations * static_cast<int>(cfg.values.size());
  j["failures"] = result.failures;
  json errors = json::array();
  for (const auto& rec : result.records) {
    if (!rec.ok) errors.push_back({{"axis_index", rec.axis_index}, {"realization", rec.realization},
                                   {"seed", rec.seed}, {"error", rec.error}});
  }
  j["failed_realizations"] = std::move(errors);
  j["channel_pairing"] = axis_changes_channel(cfg.axis)
                             ? "channels redrawn per axis value; paired across modes"
                             : "channels shared across axis values and modes (paired comparison)";
  j["imbalance_axis"] = "value v sets a_tx = a_rx = 1 - v";
  return j.dump(2) + "\n";
}

void write_file_atomic(const std::string& path, std::string_view content) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace hwigs
