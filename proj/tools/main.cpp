#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oraclesim/experiments.hpp"
#include "oraclesim/fit.hpp"
#include "oraclesim/io.hpp"
#include "oraclesim/progress.hpp"
#include "oraclesim/search.hpp"

namespace sim = oraclesim;

namespace {

// Exit codes: 0 ok, 1 usage/config, 2 bound violation, 3 numerical failure.
constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kBoundViolation = 2;
constexpr int kNumericalFailure = 3;

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw std::invalid_argument("config key '" + key +
                                "': not a number: " + v);
  return x;
}

long long to_ll(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw std::invalid_argument("config key '" + key +
                                "': not an integer: " + v);
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config key '" + key +
                              "': expected true or false, got " + v);
}

std::vector<Eigen::Index> parse_n_list(const std::string& s) {
  std::vector<Eigen::Index> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    out.push_back(static_cast<Eigen::Index>(to_ll("n-values", item)));
  }
  if (out.empty())
    throw std::invalid_argument("n-values: empty list: " + s);
  return out;
}

/* Config file values fill in options the command line left unset; flags
   always win. Unknown keys are rejected so typos surface. */
class ConfigFallback {
 public:
  explicit ConfigFallback(const std::string& path) {
    if (!path.empty()) kv_ = sim::read_config_file(path);
  }

  template <typename F>
  void apply(const CLI::Option* opt, const std::string& key, F&& set) {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return;
    used_.insert(key);
    if (opt != nullptr && opt->count() > 0) return;
    set(it->second);
  }

  void finish() const {
    for (const auto& [key, value] : kv_)
      if (used_.find(key) == used_.end())
        throw std::invalid_argument("config key '" + key +
                                    "' is not recognized by this command");
  }

 private:
  std::map<std::string, std::string> kv_;
  std::set<std::string> used_;
};

struct SimulateArgs {
  std::string config;
  long long n = 16;
  long long winner = 0;
  double gamma = 0.0;
  double energy = 1.0;
  double t_final = 0.0;  // 0: one full noiseless oscillation, pi sqrt(N)/E
  double dt = 0.0;
  std::string method = "fixed-rk4";
  double error_tolerance = 1e-9;
  std::string engine = "auto";
  long long sample_every = 0;  // 0: stride targeting <= 4000 rows
  std::string initial_state = "uniform";
  std::string out;
};

int cmd_simulate(SimulateArgs& a, ConfigFallback& cfg,
                 const std::map<std::string, const CLI::Option*>& opts) {
  cfg.apply(opts.at("n"), "n",
            [&](const std::string& v) { a.n = to_ll("n", v); });
  cfg.apply(opts.at("winner"), "winner",
            [&](const std::string& v) { a.winner = to_ll("winner", v); });
  cfg.apply(opts.at("gamma"), "gamma",
            [&](const std::string& v) { a.gamma = to_double("gamma", v); });
  cfg.apply(opts.at("energy"), "energy",
            [&](const std::string& v) { a.energy = to_double("energy", v); });
  cfg.apply(opts.at("t-final"), "t-final", [&](const std::string& v) {
    a.t_final = to_double("t-final", v);
  });
  cfg.apply(opts.at("dt"), "dt",
            [&](const std::string& v) { a.dt = to_double("dt", v); });
  cfg.apply(opts.at("method"), "method",
            [&](const std::string& v) { a.method = v; });
  cfg.apply(opts.at("error-tolerance"), "error-tolerance",
            [&](const std::string& v) {
              a.error_tolerance = to_double("error-tolerance", v);
            });
  cfg.apply(opts.at("engine"), "engine",
            [&](const std::string& v) { a.engine = v; });
  cfg.apply(opts.at("sample-every"), "sample-every",
            [&](const std::string& v) {
              a.sample_every = to_ll("sample-every", v);
            });
  cfg.apply(opts.at("initial-state"), "initial-state",
            [&](const std::string& v) { a.initial_state = v; });
  cfg.apply(opts.at("out"), "out",
            [&](const std::string& v) { a.out = v; });
  cfg.finish();

  if (a.initial_state != "uniform")
    throw std::invalid_argument(
        "initial-state: only 'uniform' is supported; the observable columns "
        "compare against the driver-stationary reference, which requires "
        "the uniform start");

  sim::SearchModel model;
  model.n = a.n;
  model.winner = a.winner;
  model.energy = a.energy;
  model.gamma = a.gamma;
  model.validate();

  sim::EngineKind engine;
  if (a.engine == "auto")
    engine = a.n <= 256 ? sim::EngineKind::FullSpace
                        : sim::EngineKind::Reduced;
  else
    engine = sim::parse_engine(a.engine);

  sim::IntegratorConfig ic;
  ic.step_size = a.dt;
  ic.method = sim::parse_method(a.method);
  ic.error_tolerance = a.error_tolerance;

  const double t_final =
      a.t_final > 0.0
          ? a.t_final
          : 2.0 * sim::analytic_first_peak_time(model.n, model.energy);

  int stride = static_cast<int>(a.sample_every);
  if (stride <= 0) {
    const double h = ic.resolved_step(model.energy, model.gamma);
    stride = static_cast<int>(
        std::max(1.0, std::ceil(t_final / h / 4000.0)));
  }

  const std::vector<sim::ProgressSample> samples =
      sim::progress_trajectory(model, t_final, ic, engine, stride);
  const std::string csv = sim::trajectory_csv(samples);
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    sim::write_file(a.out, csv);
    std::cerr << "wrote " << samples.size() << " samples to " << a.out
              << "\n";
  }
  return kOk;
}

struct SweepArgs {
  std::string config;
  std::string n_values;
  double gamma = 1.0;
  double alpha = 1.0;
  double delta = 0.0;
  double energy = 1.0;
  double p = 0.8;
  std::string criterion = "trace-distance";
  double t_max = 0.0;
  double dt = 0.0;
  std::string method = "adaptive-rk4";
  double error_tolerance = 1e-9;
  std::string engine = "reduced";
  int jobs = 1;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "csv";
  bool stable_output = false;
};

sim::SweepSpec build_sweep_spec(SweepArgs& a, ConfigFallback& cfg,
                                const std::map<std::string,
                                               const CLI::Option*>& opts) {
  cfg.apply(opts.at("n-values"), "n-values",
            [&](const std::string& v) { a.n_values = v; });
  cfg.apply(opts.at("gamma"), "gamma",
            [&](const std::string& v) { a.gamma = to_double("gamma", v); });
  cfg.apply(opts.at("alpha"), "alpha",
            [&](const std::string& v) { a.alpha = to_double("alpha", v); });
  cfg.apply(opts.at("delta"), "delta",
            [&](const std::string& v) { a.delta = to_double("delta", v); });
  cfg.apply(opts.at("energy"), "energy",
            [&](const std::string& v) { a.energy = to_double("energy", v); });
  cfg.apply(opts.at("threshold-p"), "threshold-p",
            [&](const std::string& v) { a.p = to_double("threshold-p", v); });
  cfg.apply(opts.at("criterion"), "criterion",
            [&](const std::string& v) { a.criterion = v; });
  cfg.apply(opts.at("t-max"), "t-max",
            [&](const std::string& v) { a.t_max = to_double("t-max", v); });
  cfg.apply(opts.at("dt"), "dt",
            [&](const std::string& v) { a.dt = to_double("dt", v); });
  cfg.apply(opts.at("method"), "method",
            [&](const std::string& v) { a.method = v; });
  cfg.apply(opts.at("error-tolerance"), "error-tolerance",
            [&](const std::string& v) {
              a.error_tolerance = to_double("error-tolerance", v);
            });
  cfg.apply(opts.at("engine"), "engine",
            [&](const std::string& v) { a.engine = v; });
  cfg.apply(opts.at("jobs"), "jobs", [&](const std::string& v) {
    a.jobs = static_cast<int>(to_ll("jobs", v));
  });
  cfg.apply(opts.at("seed"), "seed", [&](const std::string& v) {
    a.seed = static_cast<std::uint64_t>(to_ll("seed", v));
  });
  cfg.apply(opts.at("out"), "out",
            [&](const std::string& v) { a.out = v; });
  cfg.apply(opts.at("format"), "format",
            [&](const std::string& v) { a.format = v; });
  cfg.apply(opts.at("stable-output"), "stable-output",
            [&](const std::string& v) {
              a.stable_output = to_bool("stable-output", v);
            });
  cfg.finish();

  if (a.format != "csv" && a.format != "json")
    throw std::invalid_argument("format must be csv or json");

  sim::SweepSpec spec;
  spec.engine = sim::parse_engine(a.engine);
  if (a.n_values.empty())
    a.n_values = spec.engine == sim::EngineKind::Reduced
                     ? "64,128,256,512,1024,2048,4096"
                     : "64,128,256";
  spec.n_values = parse_n_list(a.n_values);

  const bool power_law =
      opts.at("alpha")->count() > 0 || opts.at("delta")->count() > 0;
  const bool constant = opts.at("gamma")->count() > 0;
  if (power_law && constant)
    throw std::invalid_argument(
        "--gamma and --alpha/--delta are mutually exclusive");
  if (power_law) {
    spec.gamma_rule.kind = sim::GammaRuleKind::PowerLaw;
    spec.gamma_rule.alpha = a.alpha;
    spec.gamma_rule.delta = a.delta;
  } else {
    spec.gamma_rule.kind = sim::GammaRuleKind::Constant;
    spec.gamma_rule.gamma = a.gamma;
  }

  spec.energy = a.energy;
  spec.p = a.p;
  spec.criterion = sim::parse_criterion(a.criterion);
  spec.t_max = a.t_max;
  spec.integrator.step_size = a.dt;
  spec.integrator.method = sim::parse_method(a.method);
  spec.integrator.error_tolerance = a.error_tolerance;
  spec.jobs = a.jobs;
  spec.seed = a.seed;
  spec.stable_output = a.stable_output;
  return spec;
}

void emit_sweep(const sim::SweepResult& result, const std::string& out,
                const std::string& format) {
  const std::string artifact = format == "json" ? sim::sweep_json(result)
                                                : sim::sweep_csv(result);
  if (out.empty())
    std::cout << artifact;
  else
    sim::write_file(out, artifact);
}

void print_sweep_summary(const sim::SweepResult& result) {
  int measured = 0, failed = 0;
  for (const sim::SweepRow& row : result.rows) {
    if (row.t_measured) ++measured;
    if (!row.error.empty()) ++failed;
  }
  std::cerr << result.rows.size() << " rows, " << measured << " crossed, "
            << failed << " failed\n";
  for (const sim::SweepRow& row : result.rows) {
    std::cerr << "  N=" << row.n << " gamma=" << sim::format_double(row.gamma)
              << " status=" << sim::status_tag(row.status);
    if (row.t_measured)
      std::cerr << " T=" << sim::format_double(*row.t_measured);
    else
      std::cerr << " d_max=" << sim::format_double(row.d_max);
    if (!row.error.empty()) std::cerr << " error: " << row.error;
    std::cerr << "\n";
  }
  if (result.fit.present)
    std::cerr << "fitted exponent " << sim::format_double(result.fit.exponent)
              << " +/- " << sim::format_double(result.fit.stderr_exponent)
              << " over " << result.fit.points << " points\n";
  else
    std::cerr << "fit skipped (fewer than 3 measured rows)\n";
  for (const sim::CrossCheckRow& cc : result.cross_checks) {
    std::cerr << "  cross-check N=" << cc.n;
    if (cc.t_reduced && cc.t_full)
      std::cerr << " reduced=" << sim::format_double(*cc.t_reduced)
                << " full=" << sim::format_double(*cc.t_full)
                << " rel_diff=" << sim::format_double(cc.rel_diff);
    if (!cc.error.empty()) std::cerr << " error: " << cc.error;
    std::cerr << "\n";
  }
}

int cmd_sweep(SweepArgs& a, ConfigFallback& cfg,
              const std::map<std::string, const CLI::Option*>& opts) {
  const sim::SweepSpec spec = build_sweep_spec(a, cfg, opts);
  const sim::SweepResult result = sim::run_sweep(spec);
  emit_sweep(result, a.out, a.format);
  print_sweep_summary(result);
  for (const sim::SweepRow& row : result.rows)
    if (!row.error.empty()) return kNumericalFailure;
  return kOk;
}

int cmd_verify(SweepArgs& a, ConfigFallback& cfg,
               const std::map<std::string, const CLI::Option*>& opts,
               const std::string& from) {
  if (!from.empty()) {
    cfg.finish();
    const sim::SweepResult prior = sim::read_sweep_json(sim::read_file(from));
    const sim::BoundCheck check = sim::check_bound_rows(prior.rows);
    std::cerr << check.rows_checked << " rows checked, "
              << check.violations.size() << " violations\n";
    for (const std::string& v : check.violations)
      std::cerr << "  VIOLATION " << v << "\n";
    return check.all_satisfied ? kOk : kBoundViolation;
  }
  const sim::SweepSpec spec = build_sweep_spec(a, cfg, opts);
  const sim::VerifyReport report = sim::verify_bounds(spec);
  emit_sweep(report.sweep, a.out, a.format);
  print_sweep_summary(report.sweep);
  std::cerr << report.check.rows_checked << " rows carried both a time and "
            << "a bound\n";
  for (std::size_t i = 0; i < report.sweep.rows.size(); ++i) {
    if (!report.ratios[i]) continue;
    const sim::SweepRow& row = report.sweep.rows[i];
    std::cerr << "  N=" << row.n
              << " T/bound=" << sim::format_double(*report.ratios[i]) << "\n";
  }
  for (const std::string& v : report.check.violations)
    std::cerr << "  VIOLATION " << v << "\n";
  if (!report.check.all_satisfied) return kBoundViolation;
  for (const sim::SweepRow& row : report.sweep.rows)
    if (!row.error.empty()) return kNumericalFailure;
  return kOk;
}

struct UnravelArgs {
  std::string config;
  long long n = 2;
  double energy = 1.0;
  double gamma = 0.0;      // derived from noise-std unless given
  double noise_std = 0.0;  // derived from gamma unless given
  double window = M_PI;
  double calibration = 0.5;
  int trajectories = 10000;
  std::uint64_t seed = 1;
  int jobs = 1;
  double t_final = 5.0;
  double dt = 0.005;
  std::string driver = "zero";
  std::string out;
};

int cmd_unravel(UnravelArgs& a, ConfigFallback& cfg,
                const std::map<std::string, const CLI::Option*>& opts) {
  cfg.apply(opts.at("n"), "n",
            [&](const std::string& v) { a.n = to_ll("n", v); });
  cfg.apply(opts.at("energy"), "energy",
            [&](const std::string& v) { a.energy = to_double("energy", v); });
  cfg.apply(opts.at("gamma"), "gamma",
            [&](const std::string& v) { a.gamma = to_double("gamma", v); });
  cfg.apply(opts.at("noise-std"), "noise-std", [&](const std::string& v) {
    a.noise_std = to_double("noise-std", v);
  });
  cfg.apply(opts.at("window"), "window",
            [&](const std::string& v) { a.window = to_double("window", v); });
  cfg.apply(opts.at("calibration"), "calibration",
            [&](const std::string& v) {
              a.calibration = to_double("calibration", v);
            });
  cfg.apply(opts.at("trajectories"), "trajectories",
            [&](const std::string& v) {
              a.trajectories = static_cast<int>(to_ll("trajectories", v));
            });
  cfg.apply(opts.at("seed"), "seed", [&](const std::string& v) {
    a.seed = static_cast<std::uint64_t>(to_ll("seed", v));
  });
  cfg.apply(opts.at("jobs"), "jobs", [&](const std::string& v) {
    a.jobs = static_cast<int>(to_ll("jobs", v));
  });
  cfg.apply(opts.at("t-final"), "t-final", [&](const std::string& v) {
    a.t_final = to_double("t-final", v);
  });
  cfg.apply(opts.at("dt"), "dt",
            [&](const std::string& v) { a.dt = to_double("dt", v); });
  cfg.apply(opts.at("driver"), "driver",
            [&](const std::string& v) { a.driver = v; });
  cfg.apply(opts.at("out"), "out",
            [&](const std::string& v) { a.out = v; });
  cfg.finish();

  const bool gamma_given = opts.at("gamma")->count() > 0;
  const bool s_given = opts.at("noise-std")->count() > 0;
  if (gamma_given && s_given)
    throw std::invalid_argument(
        "--gamma and --noise-std are mutually exclusive (each determines "
        "the other)");

  sim::NoiseTrajectoryConfig noise;
  noise.window = a.window;
  noise.calibration = a.calibration;
  noise.n_trajectories = a.trajectories;
  noise.rng_seed = a.seed;
  noise.jobs = a.jobs;
  double gamma;
  if (s_given) {
    noise.noise_std_s = a.noise_std;
    gamma = noise.gamma_equivalent();
  } else {
    gamma = gamma_given ? a.gamma : 0.5;
    noise.noise_std_s = std::sqrt(gamma * a.window / a.calibration);
  }

  sim::SearchModel model;
  model.n = a.n;
  model.energy = a.energy;
  model.gamma = gamma;
  if (a.driver == "zero") {
    model.driver = sim::DriverKind::CustomConstant;
    model.custom_driver = sim::Matrix::Zero(a.n, a.n);
  } else if (a.driver == "uniform") {
    model.driver = sim::DriverKind::Uniform;
  } else {
    throw std::invalid_argument("driver must be zero or uniform");
  }

  sim::IntegratorConfig ic;
  ic.step_size = a.dt;
  ic.method = sim::StepMethod::FixedRk4;

  const sim::UnravelReport rep =
      sim::unravel_check(noise, model, a.t_final, ic);

  std::cerr << "N=" << rep.n << " gamma=" << sim::format_double(rep.gamma_model)
            << " s=" << sim::format_double(rep.noise_std) << " trajectories="
            << rep.n_trajectories << "\n";
  std::cerr << "max Frobenius distance "
            << sim::format_double(rep.max_frobenius_distance) << ", final "
            << sim::format_double(rep.final_frobenius_distance) << "\n";
  std::cerr << "coherence decay rate: master equation "
            << sim::format_double(rep.lindblad_decay_rate) << ", ensemble "
            << sim::format_double(rep.stochastic_decay_rate) << ", ratio "
            << sim::format_double(rep.rate_ratio) << "\n";
  const std::string artifact = sim::unravel_json(rep);
  if (a.out.empty())
    std::cout << artifact;
  else
    sim::write_file(a.out, artifact);
  return kOk;
}

int cmd_fit(const std::string& in, const std::string& out) {
  std::vector<sim::SweepRow> rows;
  if (in.size() >= 5 && in.substr(in.size() - 5) == ".json")
    rows = sim::read_sweep_json(sim::read_file(in)).rows;
  else
    rows = sim::read_sweep_csv(sim::read_file(in));
  std::vector<double> xs, ys;
  for (const sim::SweepRow& row : rows) {
    if (row.t_measured) {
      xs.push_back(static_cast<double>(row.n));
      ys.push_back(*row.t_measured);
    }
  }
  if (xs.size() < 3)
    throw std::invalid_argument(
        "need at least 3 measured rows to fit (got " +
        std::to_string(xs.size()) + ")");
  const sim::PowerLawFit fit = sim::fit_power_law(xs, ys);
  std::cout << "exponent " << sim::format_double(fit.exponent) << " +/- "
            << sim::format_double(fit.stderr_exponent) << " ("
            << fit.points << " points, prefactor "
            << sim::format_double(fit.prefactor) << ")\n";
  if (!out.empty()) {
    std::string j = "{\n  \"schema\": \"fit/1\",\n  \"exponent\": ";
    j += sim::format_double(fit.exponent);
    j += ",\n  \"stderr_exponent\": ";
    j += sim::format_double(fit.stderr_exponent);
    j += ",\n  \"log_prefactor\": ";
    j += sim::format_double(fit.log_prefactor);
    j += ",\n  \"points\": " + std::to_string(fit.points) + "\n}\n";
    sim::write_file(out, j);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Simulation and verification harness for continuous-time search "
      "driven by a dephasing projector oracle"};
  app.require_subcommand(1);

  SimulateArgs sa;
  auto* simulate =
      app.add_subcommand("simulate", "Dump one trajectory's observables");
  std::map<std::string, const CLI::Option*> sim_opts;
  sim_opts["n"] = simulate->add_option("--n", sa.n, "Search-space size");
  sim_opts["winner"] =
      simulate->add_option("--winner", sa.winner, "Marked basis index");
  sim_opts["gamma"] =
      simulate->add_option("--gamma", sa.gamma, "Dephasing rate");
  sim_opts["energy"] =
      simulate->add_option("--energy", sa.energy, "Oracle/driver energy");
  sim_opts["t-final"] = simulate->add_option(
      "--t-final", sa.t_final, "Evolution time (0: pi sqrt(N)/E)");
  sim_opts["dt"] = simulate->add_option(
      "--dt", sa.dt, "Step size (0: 0.01 / max(E, gamma, 1))");
  sim_opts["method"] = simulate->add_option(
      "--method", sa.method, "fixed-rk4 or adaptive-rk4");
  sim_opts["error-tolerance"] = simulate->add_option(
      "--error-tolerance", sa.error_tolerance, "Adaptive local error target");
  sim_opts["engine"] = simulate->add_option(
      "--engine", sa.engine, "auto, full-space, or reduced");
  sim_opts["sample-every"] = simulate->add_option(
      "--sample-every", sa.sample_every, "Keep every k-th step (0: auto)");
  sim_opts["initial-state"] = simulate->add_option(
      "--initial-state", sa.initial_state, "Initial state (uniform)");
  sim_opts["out"] =
      simulate->add_option("--out", sa.out, "Output CSV path (default stdout)");
  simulate->add_option("--config", sa.config, "key = value config file");

  auto add_sweep_options = [](CLI::App* cmd, SweepArgs& a,
                              std::map<std::string, const CLI::Option*>& o) {
    o["n-values"] = cmd->add_option("--n-values", a.n_values,
                                    "Comma-separated sizes");
    o["gamma"] =
        cmd->add_option("--gamma", a.gamma, "Constant dephasing rate");
    o["alpha"] = cmd->add_option("--alpha", a.alpha,
                                 "Power-law rate prefactor alpha");
    o["delta"] = cmd->add_option(
        "--delta", a.delta, "Power-law rate exponent: gamma = alpha N^-2delta");
    o["energy"] = cmd->add_option("--energy", a.energy, "Energy scale");
    o["threshold-p"] =
        cmd->add_option("--threshold-p", a.p, "Detection threshold p");
    o["criterion"] = cmd->add_option("--criterion", a.criterion,
                                     "trace-distance or success-prob");
    o["t-max"] = cmd->add_option("--t-max", a.t_max,
                                 "Search horizon (0: per-N default)");
    o["dt"] = cmd->add_option("--dt", a.dt, "Step size (0: auto)");
    o["method"] =
        cmd->add_option("--method", a.method, "fixed-rk4 or adaptive-rk4");
    o["error-tolerance"] = cmd->add_option("--error-tolerance",
                                           a.error_tolerance,
                                           "Adaptive local error target");
    o["engine"] =
        cmd->add_option("--engine", a.engine, "reduced or full-space");
    o["jobs"] = cmd->add_option("--jobs", a.jobs, "Worker threads");
    o["seed"] = cmd->add_option("--seed", a.seed,
                                "Seed echoed into outputs (sweeps draw no "
                                "randomness)");
    o["out"] = cmd->add_option("--out", a.out, "Output path (default stdout)");
    o["format"] = cmd->add_option("--format", a.format, "csv or json");
    o["stable-output"] = cmd->add_flag("--stable-output", a.stable_output,
                                       "Zero wall times for byte-stable "
                                       "files");
  };

  SweepArgs swa;
  auto* sweep =
      app.add_subcommand("sweep", "Measure threshold times across N and fit "
                                  "the scaling exponent");
  std::map<std::string, const CLI::Option*> sweep_opts;
  add_sweep_options(sweep, swa, sweep_opts);
  sweep->add_option("--config", swa.config, "key = value config file");

  SweepArgs va;
  va.gamma = 0.1;
  va.n_values = "16,32,64,128,256";
  auto* verify = app.add_subcommand(
      "verify-bounds", "Check measured times against the runtime lower "
                       "bound");
  std::map<std::string, const CLI::Option*> verify_opts;
  add_sweep_options(verify, va, verify_opts);
  verify->add_option("--config", va.config, "key = value config file");
  std::string verify_from;
  verify->add_option("--from", verify_from,
                     "Re-check rows of an existing sweep JSON instead of "
                     "simulating");

  UnravelArgs ua;
  auto* unravel = app.add_subcommand(
      "unravel", "Compare averaged noisy trajectories with the master "
                 "equation");
  std::map<std::string, const CLI::Option*> unravel_opts;
  unravel_opts["n"] = unravel->add_option("--n", ua.n, "Search-space size");
  unravel_opts["energy"] =
      unravel->add_option("--energy", ua.energy, "Oracle energy");
  unravel_opts["gamma"] = unravel->add_option(
      "--gamma", ua.gamma, "Dephasing rate (sets the noise std)");
  unravel_opts["noise-std"] = unravel->add_option(
      "--noise-std", ua.noise_std, "Noise scale s (sets gamma)");
  unravel_opts["window"] =
      unravel->add_option("--window", ua.window, "Accumulation window");
  unravel_opts["calibration"] = unravel->add_option(
      "--calibration", ua.calibration, "Noise-to-rate calibration constant");
  unravel_opts["trajectories"] = unravel->add_option(
      "--trajectories", ua.trajectories, "Ensemble size");
  unravel_opts["seed"] = unravel->add_option("--seed", ua.seed, "RNG seed");
  unravel_opts["jobs"] =
      unravel->add_option("--jobs", ua.jobs, "Worker threads");
  unravel_opts["t-final"] =
      unravel->add_option("--t-final", ua.t_final, "Evolution time");
  unravel_opts["dt"] = unravel->add_option("--dt", ua.dt, "Fixed step size");
  unravel_opts["driver"] = unravel->add_option(
      "--driver", ua.driver, "zero (isolate the oracle) or uniform");
  unravel_opts["out"] = unravel->add_option(
      "--out", ua.out, "Report JSON path (default stdout)");
  unravel->add_option("--config", ua.config, "key = value config file");

  std::string fit_in, fit_out;
  auto* fit = app.add_subcommand(
      "fit", "Re-fit the scaling exponent from an existing result file");
  fit->add_option("--in", fit_in, "Sweep CSV or JSON to fit")->required();
  fit->add_option("--out", fit_out, "Optional fit JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (app.got_subcommand(simulate)) {
      ConfigFallback cfg(sa.config);
      return cmd_simulate(sa, cfg, sim_opts);
    }
    if (app.got_subcommand(sweep)) {
      ConfigFallback cfg(swa.config);
      return cmd_sweep(swa, cfg, sweep_opts);
    }
    if (app.got_subcommand(verify)) {
      ConfigFallback cfg(va.config);
      return cmd_verify(va, cfg, verify_opts, verify_from);
    }
    if (app.got_subcommand(unravel)) {
      ConfigFallback cfg(ua.config);
      return cmd_unravel(ua, cfg, unravel_opts);
    }
    if (app.got_subcommand(fit)) return cmd_fit(fit_in, fit_out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const sim::IntegrationError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericalFailure;
  }
  return kOk;
}
