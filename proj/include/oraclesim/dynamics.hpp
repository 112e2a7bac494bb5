#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "oraclesim/operators.hpp"
#include "oraclesim/quantum.hpp"
#include "oraclesim/types.hpp"

namespace oraclesim {

enum class StepMethod { FixedRk4, AdaptiveRk4 };

struct IntegratorConfig {
  // Fixed-step size, or the initial trial step in adaptive mode.
  double step_size = 0.0;
  StepMethod method = StepMethod::FixedRk4;
  // Per-step local error target for AdaptiveRk4 (Frobenius norm of the
  // step-doubling estimate).
  double error_tolerance = 1e-9;

  // dt = 0.01 / max(E, gamma, 1), the resolution rule used throughout.
  static IntegratorConfig defaults_for(double energy, double gamma);
  double resolved_step(double energy, double gamma) const;
  void validate() const;
};

struct NoiseTrajectoryConfig {
  // Scale s of the phase-noise convention: the noise integrated over one
  // window has standard deviation s * sqrt(calibration).
  double noise_std_s = 0.0;
  double window = M_PI;
  // Per-step draw std = s * sqrt(calibration / (window * dt)); the resulting
  // white-noise intensity matches a dephasing rate of
  // gamma_equivalent() = calibration * s^2 / window.
  double calibration = 0.5;
  int n_trajectories = 1;
  std::uint64_t rng_seed = 0;
  int jobs = 1;

  double step_std(double dt) const;
  double gamma_equivalent() const;
  void validate() const;
};

struct IntegrationStats {
  double max_trace_dev = 0.0;        // |tr(rho) - 1|, worst sample
  double max_hermiticity_dev = 0.0;  // max |rho - rho^dag| entry, worst sample
  double min_eigenvalue = 1.0;       // most negative eigenvalue seen
  double max_norm_dev = 0.0;         // | |psi| - 1 |, unitary runs
  long accepted_steps = 0;
  long rejected_steps = 0;
  long rhs_evaluations = 0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Matrix> states;       // master-equation runs
  std::vector<Vector> pure_states;  // unitary runs
  std::map<std::string, std::vector<double>> observables;
  IntegrationStats stats;
};

/* Streaming consumer of integration samples. Return false from on_sample to
   stop the run early (the stop is recorded, not an error). */
class SampleSink {
 public:
  virtual ~SampleSink() = default;
  virtual bool on_sample(double t, const Matrix& rho) = 0;
};

/* Integrate drho/dt = L(rho) from rho0 to t_final, keeping every
   sample_every-th step (plus t = 0 and t_final). Stored samples are thinned
   automatically beyond a memory cap; use the streaming variant for dense
   output. Trace and Hermiticity are validated at every sample and the
   spectrum on a bounded subsample; violations raise IntegrationError. */
Trajectory evolve_lindblad(const LindbladGenerator& gen,
                           const DensityMatrix& rho0, double t_final,
                           const IntegratorConfig& config,
                           int sample_every = 1);

// Same integration, but samples go to a sink and nothing is stored.
IntegrationStats evolve_lindblad_stream(const LindbladGenerator& gen,
                                        const Matrix& rho0, double t_final,
                                        const IntegratorConfig& config,
                                        int sample_every, SampleSink& sink);

// Unitary evolution dpsi/dt = -i H(t) psi with norm tracking.
Trajectory evolve_schrodinger(const Hamiltonian& h, const PureState& psi0,
                              double t_final, const IntegratorConfig& config,
                              int sample_every = 1);

struct StochasticResult {
  std::vector<double> times;
  std::vector<Matrix> averaged_states;  // ensemble average of |psi><psi|
  long n_trajectories = 0;
  double max_step_norm_dev = 0.0;  // worst per-step norm slip before renorm
};

/* Ensemble of pure-state runs under H(t) = H_driver + (energy + xi_k) P
   where P projects onto `direction` and xi_k is redrawn each step (piecewise
   constant white noise). States are renormalized after every step.
   `driver` may be null (bare noisy projector). Requires FixedRk4.
   The trajectory average is reduced in fixed chunks in index order, so the
   result is identical for any jobs count. */
StochasticResult noisy_projector_ensemble(const Hamiltonian* driver,
                                          const Vector& direction,
                                          double energy, const PureState& psi0,
                                          double t_final,
                                          const NoiseTrajectoryConfig& noise,
                                          const IntegratorConfig& config,
                                          int sample_every = 1);

}  // namespace oraclesim
