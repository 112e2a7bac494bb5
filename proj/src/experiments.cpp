#include "oraclesim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace oraclesim {

double GammaRule::value_for(Eigen::Index n) const {
  if (kind == GammaRuleKind::Constant) return gamma;
  return alpha * std::pow(static_cast<double>(n), -2.0 * delta);
}

void GammaRule::validate() const {
  if (kind == GammaRuleKind::Constant) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
      throw std::invalid_argument("constant gamma must be finite and >= 0");
  } else {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
      throw std::invalid_argument("power-law alpha must be finite and > 0");
    if (!(delta >= 0.0) || !std::isfinite(delta))
      throw std::invalid_argument("power-law delta must be >= 0");
  }
}

void SweepSpec::validate() const {
  if (n_values.empty()) throw std::invalid_argument("no rows: empty N list");
  for (const Eigen::Index n : n_values) {
    if (n < 2) throw std::invalid_argument("every N must be >= 2");
    if (engine == EngineKind::FullSpace && n > 1024)
      throw std::invalid_argument(
          "full-space engine is capped at N = 1024; use the reduced engine");
  }
  gamma_rule.validate();
  if (!(energy > 0.0) || !std::isfinite(energy))
    throw std::invalid_argument("energy must be finite and > 0");
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("threshold p must lie in (0, 1)");
  integrator.validate();
  if (!(t_max >= 0.0) || !std::isfinite(t_max))
    throw std::invalid_argument("t_max must be finite and >= 0");
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
}

double default_sweep_t_max(Eigen::Index n, double energy) {
  return std::max(60.0, 8.0 * std::sqrt(static_cast<double>(n))) / energy;
}

namespace {

SearchModel model_for(const SweepSpec& spec, Eigen::Index n) {
  SearchModel m;
  m.n = n;
  m.winner = 0;
  m.energy = spec.energy;
  m.gamma = spec.gamma_rule.value_for(n);
  m.driver = DriverKind::Uniform;
  return m;
}

SweepRow run_point(const SweepSpec& spec, Eigen::Index n, EngineKind engine) {
  SweepRow row;
  row.n = n;
  row.energy = spec.energy;
  row.p = spec.p;
  row.criterion = spec.criterion;
  const auto start = std::chrono::steady_clock::now();
  try {
    const SearchModel model = model_for(spec, n);
    row.gamma = model.gamma;
    const double t_max =
        spec.t_max > 0.0 ? spec.t_max : default_sweep_t_max(n, spec.energy);
    const BoundReport rep = measure_runtime(model, spec.p, spec.criterion,
                                            t_max, spec.integrator, engine);
    row.status = rep.status;
    row.t_measured = rep.t_measured;
    row.t_lower_bound = rep.t_lower_bound;
    row.satisfied = rep.satisfied;
    row.d_max = rep.d_max;
    row.t_searched = rep.t_searched;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  row.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return row;
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  SweepResult result;
  result.spec = spec;
  result.rows.resize(spec.n_values.size());

  const int workers = static_cast<int>(std::min<std::size_t>(
      static_cast<std::size_t>(spec.jobs), spec.n_values.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= spec.n_values.size()) return;
      result.rows[i] = run_point(spec, spec.n_values[i], spec.engine);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int k = 0; k < workers; ++k) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  if (spec.engine == EngineKind::Reduced) {
    for (std::size_t i = 0; i < spec.n_values.size(); ++i) {
      const Eigen::Index n = spec.n_values[i];
      if (n > 32) continue;
      CrossCheckRow cc;
      cc.n = n;
      cc.t_reduced = result.rows[i].t_measured;
      const SweepRow full = run_point(spec, n, EngineKind::FullSpace);
      cc.t_full = full.t_measured;
      cc.error = full.error;
      if (cc.t_reduced && cc.t_full)
        cc.rel_diff = std::abs(*cc.t_full - *cc.t_reduced) /
                      std::max(std::abs(*cc.t_reduced), 1e-300);
      result.cross_checks.push_back(std::move(cc));
    }
  }

  std::vector<double> xs, ys;
  for (const SweepRow& row : result.rows) {
    if (row.error.empty() && row.t_measured) {
      xs.push_back(static_cast<double>(row.n));
      ys.push_back(*row.t_measured);
    }
  }
  if (xs.size() >= 3) {
    const PowerLawFit fit = fit_power_law(xs, ys);
    result.fit.present = true;
    result.fit.exponent = fit.exponent;
    result.fit.stderr_exponent = fit.stderr_exponent;
    result.fit.log_prefactor = fit.log_prefactor;
    result.fit.points = fit.points;
  }

  if (spec.stable_output)
    for (SweepRow& row : result.rows) row.wall_time_s = 0.0;
  return result;
}

BoundCheck check_bound_rows(const std::vector<SweepRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("no rows");
  BoundCheck check;
  for (const SweepRow& row : rows) {
    if (row.t_measured) ++check.rows_measured;
    if (!(row.t_measured && row.t_lower_bound)) continue;
    ++check.rows_checked;
    const bool ok = *row.t_measured >= *row.t_lower_bound - 1e-9;
    if (!ok || !row.satisfied) {
      check.all_satisfied = false;
      std::ostringstream msg;
      msg << "N=" << row.n << " gamma=" << row.gamma << " E=" << row.energy
          << " p=" << row.p << ": T_measured=" << *row.t_measured
          << " < T_bound=" << *row.t_lower_bound;
      check.violations.push_back(msg.str());
    }
  }
  return check;
}

VerifyReport verify_bounds(const SweepSpec& spec) {
  if (spec.criterion != RuntimeCriterion::TraceDistance)
    throw std::invalid_argument(
        "bound verification requires the trace-distance criterion");
  if (spec.gamma_rule.kind == GammaRuleKind::Constant &&
      !(spec.gamma_rule.gamma > 0.0))
    throw std::invalid_argument("bound verification requires gamma > 0");
  VerifyReport report;
  report.sweep = run_sweep(spec);
  report.check = check_bound_rows(report.sweep.rows);
  report.ratios.reserve(report.sweep.rows.size());
  for (const SweepRow& row : report.sweep.rows) {
    if (row.t_measured && row.t_lower_bound && *row.t_lower_bound > 0.0)
      report.ratios.push_back(*row.t_measured / *row.t_lower_bound);
    else
      report.ratios.push_back(std::nullopt);
  }
  return report;
}

UnravelReport unravel_check(const NoiseTrajectoryConfig& noise,
                            const SearchModel& model, double t_final,
                            const IntegratorConfig& config) {
  noise.validate();
  model.validate();
  config.validate();
  if (!(t_final > 0.0)) throw std::invalid_argument("t_final must be > 0");
  if (config.method != StepMethod::FixedRk4)
    throw std::invalid_argument(
        "the unraveling comparison needs a fixed step so both runs share a "
        "grid");
  const double gamma_eq = noise.gamma_equivalent();
  if (std::abs(model.gamma - gamma_eq) > 1e-9 * std::max(1.0, gamma_eq))
    throw std::invalid_argument(
        "model gamma must equal the noise-equivalent dephasing rate");

  const PureState psi0 = model.initial_state();
  const double h = config.resolved_step(model.energy, model.gamma);
  const long n_steps = static_cast<long>(std::ceil(t_final / h - 1e-9));
  const int stride =
      static_cast<int>(std::max(1.0, std::ceil(n_steps / 4096.0)));

  const StochasticResult mc =
      stochastic_oracle_run(model, noise, psi0, t_final, config, stride);
  const Trajectory lb = evolve_lindblad(
      build_oracle_generator(model), DensityMatrix(psi0), t_final, config,
      stride);

  if (mc.times.size() != lb.times.size())
    throw std::logic_error("sampling grids of the two runs diverged");
  for (std::size_t i = 0; i < mc.times.size(); ++i)
    if (std::abs(mc.times[i] - lb.times[i]) > 1e-9)
      throw std::logic_error("sampling grids of the two runs diverged");

  const TwoDimDecomposition dec = two_dim_decompose(psi0, model.winner);

  UnravelReport rep;
  rep.n = model.n;
  rep.gamma_model = model.gamma;
  rep.gamma_equivalent = gamma_eq;
  rep.noise_std = noise.noise_std_s;
  rep.n_trajectories = noise.n_trajectories;
  rep.t_final = t_final;
  rep.max_step_norm_dev = mc.max_step_norm_dev;
  rep.times = lb.times;

  const std::size_t count = lb.times.size();
  rep.coherence_lindblad.resize(count);
  rep.coherence_stochastic.resize(count);
  rep.frobenius_distance.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    rep.coherence_lindblad[i] =
        std::abs((lb.states[i].row(model.winner) * dec.w_perp).value());
    rep.coherence_stochastic[i] =
        std::abs((mc.averaged_states[i].row(model.winner) * dec.w_perp)
                     .value());
    rep.frobenius_distance[i] = std::sqrt(
        frobenius_norm_sq_diff(mc.averaged_states[i], lb.states[i]));
    rep.max_frobenius_distance =
        std::max(rep.max_frobenius_distance, rep.frobenius_distance[i]);
  }
  rep.final_frobenius_distance = rep.frobenius_distance.back();

  if (model.gamma > 0.0) {
    // drop stochastic samples buried in the Monte Carlo floor ~ 1/sqrt(M)
    const double floor_mc =
        1.5 / std::sqrt(static_cast<double>(noise.n_trajectories));
    rep.lindblad_decay_rate =
        fit_exponential_decay(rep.times, rep.coherence_lindblad, 1e-14).slope;
    rep.stochastic_decay_rate =
        fit_exponential_decay(rep.times, rep.coherence_stochastic, floor_mc)
            .slope;
    rep.rate_ratio = std::abs(rep.lindblad_decay_rate) > 1e-12
                         ? rep.stochastic_decay_rate / rep.lindblad_decay_rate
                         : std::numeric_limits<double>::quiet_NaN();
  } else {
    rep.rate_ratio = 1.0;  // nothing decays; the runs coincide exactly
  }
  return rep;
}

}  // namespace oraclesim
