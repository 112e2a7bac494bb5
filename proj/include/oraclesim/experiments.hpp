#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oraclesim/dynamics.hpp"
#include "oraclesim/fit.hpp"
#include "oraclesim/progress.hpp"
#include "oraclesim/search.hpp"

namespace oraclesim {

/* Experiment orchestration: scaling sweeps over N with a dephasing-rate
   rule, bound verification over a grid, and the stochastic-vs-Lindblad
   unraveling comparison. */

enum class GammaRuleKind { Constant, PowerLaw };

// Constant: gamma for every N. PowerLaw: alpha * N^(-2 delta).
struct GammaRule {
  GammaRuleKind kind = GammaRuleKind::Constant;
  double gamma = 1.0;
  double alpha = 1.0;
  double delta = 0.0;
  double value_for(Eigen::Index n) const;
  void validate() const;
};

struct SweepSpec {
  std::vector<Eigen::Index> n_values;
  GammaRule gamma_rule;
  double energy = 1.0;
  double p = 0.8;
  RuntimeCriterion criterion = RuntimeCriterion::TraceDistance;
  IntegratorConfig integrator{0.0, StepMethod::AdaptiveRk4, 1e-9};
  // 0 selects the per-N default max(60, 8 sqrt(N)) / E; early stopping makes
  // a generous cap cheap for rows that cross or saturate.
  double t_max = 0.0;
  EngineKind engine = EngineKind::Reduced;
  int jobs = 1;
  std::uint64_t seed = 0;  // echoed into outputs; sweeps draw no randomness
  bool stable_output = false;  // zero wall times for byte-stable files
  void validate() const;
};

struct SweepRow {
  Eigen::Index n = 0;
  double gamma = 0.0;
  double energy = 0.0;
  double p = 0.0;
  RuntimeCriterion criterion = RuntimeCriterion::TraceDistance;
  RunStatus status = RunStatus::NotReached;
  std::optional<double> t_measured;
  std::optional<double> t_lower_bound;
  bool satisfied = true;
  double d_max = 0.0;
  double t_searched = 0.0;
  double wall_time_s = 0.0;
  std::string error;  // nonempty when this point failed
};

struct FitSummary {
  bool present = false;
  double exponent = 0.0;
  double stderr_exponent = 0.0;
  double log_prefactor = 0.0;
  int points = 0;
};

// Reduced-engine sweeps re-run small sizes on the full space as a check.
struct CrossCheckRow {
  Eigen::Index n = 0;
  std::optional<double> t_reduced;
  std::optional<double> t_full;
  double rel_diff = 0.0;
  std::string error;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<SweepRow> rows;        // one per requested N, input order
  FitSummary fit;                    // log-log T vs N, >= 3 measured rows
  std::vector<CrossCheckRow> cross_checks;
};

double default_sweep_t_max(Eigen::Index n, double energy);

/* One measure_runtime per N, dispatched to `jobs` workers, assembled in
   input order (deterministic regardless of scheduling). Per-row failures
   land in the row's error field; the fit uses measured rows only. Reduced
   sweeps add full-space cross-check rows for N <= 32. */
SweepResult run_sweep(const SweepSpec& spec);

struct BoundCheck {
  bool all_satisfied = true;
  int rows_checked = 0;    // rows carrying both a time and a bound
  int rows_measured = 0;   // rows with a measured time
  std::vector<std::string> violations;
};

// Pure scan of sweep rows against T_measured >= T_bound - 1e-9.
// Throws on an empty row set ("no rows").
BoundCheck check_bound_rows(const std::vector<SweepRow>& rows);

struct VerifyReport {
  SweepResult sweep;
  BoundCheck check;
  // t_measured / t_lower_bound per row, when both exist
  std::vector<std::optional<double>> ratios;
};

// Bound verification sweep: trace-distance criterion and gamma > 0 only.
VerifyReport verify_bounds(const SweepSpec& spec);

struct UnravelReport {
  Eigen::Index n = 0;
  double gamma_model = 0.0;
  double gamma_equivalent = 0.0;
  double noise_std = 0.0;
  int n_trajectories = 0;
  double t_final = 0.0;
  double max_frobenius_distance = 0.0;
  double final_frobenius_distance = 0.0;
  double lindblad_decay_rate = 0.0;    // e-folding rate of |rho_{w,w_perp}|
  double stochastic_decay_rate = 0.0;
  double rate_ratio = 0.0;             // stochastic / lindblad
  double max_step_norm_dev = 0.0;
  std::vector<double> times;
  std::vector<double> coherence_lindblad;
  std::vector<double> coherence_stochastic;
  std::vector<double> frobenius_distance;
};

/* Averaged noisy pure-state trajectories vs the Lindblad solution on the
   same fixed grid. The model's gamma must equal the noise-equivalent rate.
   Decay rates are fitted on the winner-coherence magnitude; the stochastic
   fit drops samples under the Monte Carlo floor. A driver-free model
   (custom zero driver) makes the decay a clean exponential. */
UnravelReport unravel_check(const NoiseTrajectoryConfig& noise,
                            const SearchModel& model, double t_final,
                            const IntegratorConfig& config = IntegratorConfig{});

}  // namespace oraclesim
