#pragma once

#include "oraclesim/dynamics.hpp"
#include "oraclesim/operators.hpp"
#include "oraclesim/quantum.hpp"
#include "oraclesim/types.hpp"

namespace oraclesim {

enum class DriverKind { Uniform, CustomConstant };

/* Continuous-time search over n basis states: the oracle contributes
   E |w><w| plus dephasing of the marked projector at rate gamma, the driver
   is E |s><s| (uniform superposition s) unless a custom matrix is given. */
struct SearchModel {
  Eigen::Index n = 0;
  Eigen::Index winner = 0;
  double energy = 1.0;
  double gamma = 0.0;
  DriverKind driver = DriverKind::Uniform;
  Matrix custom_driver;  // used when driver == CustomConstant

  void validate() const;
  PureState initial_state() const;  // uniform superposition
  PureState winner_state() const;
};

// drho/dt = -i[E P_w + H_D, rho] + gamma (P_w rho P_w - 1/2 {P_w, rho})
LindbladGenerator build_oracle_generator(const SearchModel& model);
// Oracle removed entirely: unitary evolution under the driver alone.
LindbladGenerator build_no_oracle_generator(const SearchModel& model);

/* Two-level reduction of the uniform-driver model on span{|w>, |w_perp>}
   with |w_perp> the component of |s> orthogonal to the winner. Exact: the
   dynamics never leaves that span. */
struct ReducedModel {
  Eigen::Index n = 0;  // original search-space size
  double a = 0.0;      // overlap <w|s> = 1/sqrt(n)
  double energy = 0.0;
  double gamma = 0.0;
  Matrix h2;           // oracle+driver Hamiltonian in the reduced basis
  Matrix h2_driver;    // driver alone in the reduced basis
};

ReducedModel build_reduced_model(const SearchModel& model);
LindbladGenerator reduced_oracle_generator(const ReducedModel& reduced);
LindbladGenerator reduced_no_oracle_generator(const ReducedModel& reduced);
PureState reduced_initial_state(const ReducedModel& reduced);

double success_probability(const Matrix& rho, Eigen::Index winner);
double success_probability(const DensityMatrix& rho, Eigen::Index winner);
double success_probability(const PureState& psi, Eigen::Index winner);

/* Ensemble average of unitary runs with a fluctuating oracle magnitude,
   H(t) = H_D + (E + xi(t)) |w><w|; converges to the dephasing master
   equation with gamma = noise.gamma_equivalent() as trajectories grow. */
StochasticResult stochastic_oracle_run(const SearchModel& model,
                                       const NoiseTrajectoryConfig& noise,
                                       const PureState& psi0, double t_final,
                                       const IntegratorConfig& config,
                                       int sample_every = 1);

/* Noiseless (gamma = 0) references from diagonalizing the two-level model:
   p(t) = 1/n + (1 - 1/n) sin^2(E t / sqrt(n)). */
double analytic_success_probability(Eigen::Index n, double energy, double t);
// First time p(t) = 1, at pi sqrt(n) / (2 E).
double analytic_first_peak_time(Eigen::Index n, double energy);
// First time p(t) >= p (0 if already true at t = 0; throws for p > 1).
double analytic_threshold_crossing(Eigen::Index n, double energy, double p);

}  // namespace oraclesim
