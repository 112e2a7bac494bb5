#include "oraclesim/search.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace oraclesim {

void SearchModel::validate() const {
  if (n < 2) throw std::invalid_argument("search space needs n >= 2");
  if (winner < 0 || winner >= n)
    throw std::invalid_argument("winner index out of range");
  if (!(energy > 0.0) || !std::isfinite(energy))
    throw std::invalid_argument("energy must be finite and > 0");
  if (gamma < 0.0 || !std::isfinite(gamma))
    throw std::invalid_argument("gamma must be finite and >= 0");
  if (driver == DriverKind::CustomConstant) {
    if (custom_driver.rows() != n || custom_driver.cols() != n)
      throw std::invalid_argument("custom driver has wrong dimension");
    if ((custom_driver - custom_driver.adjoint()).cwiseAbs().maxCoeff() >
        tol::kHermiticity)
      throw std::invalid_argument("custom driver must be Hermitian");
  }
}

PureState SearchModel::initial_state() const {
  validate();
  return uniform_state(n);
}

PureState SearchModel::winner_state() const {
  validate();
  return PureState::basis_state(n, winner);
}

LindbladGenerator build_oracle_generator(const SearchModel& model) {
  model.validate();
  LindbladGenerator gen;
  const Vector w = PureState::basis_state(model.n, model.winner).amplitudes();
  if (model.driver == DriverKind::Uniform) {
    const Vector s = uniform_state(model.n).amplitudes();
    gen.hamiltonian = std::make_shared<ProjectorSumHamiltonian>(
        model.n, std::vector<double>{model.energy, model.energy},
        std::vector<Vector>{w, s});
  } else {
    Matrix h = model.custom_driver;
    h(model.winner, model.winner) += model.energy;
    gen.hamiltonian =
        std::make_shared<DenseHamiltonian>(HermitianOperator::from_matrix(h));
  }
  if (model.gamma > 0.0)
    gen.jump_ops.push_back(
        std::make_shared<ScaledProjectorJump>(std::sqrt(model.gamma), w));
  return gen;
}

LindbladGenerator build_no_oracle_generator(const SearchModel& model) {
  model.validate();
  LindbladGenerator gen;
  if (model.driver == DriverKind::Uniform) {
    const Vector s = uniform_state(model.n).amplitudes();
    gen.hamiltonian = std::make_shared<ProjectorSumHamiltonian>(
        model.n, std::vector<double>{model.energy}, std::vector<Vector>{s});
  } else {
    gen.hamiltonian = std::make_shared<DenseHamiltonian>(
        HermitianOperator::from_matrix(model.custom_driver));
  }
  return gen;
}

ReducedModel build_reduced_model(const SearchModel& model) {
  model.validate();
  if (model.driver != DriverKind::Uniform)
    throw std::invalid_argument(
        "the two-level reduction requires the uniform driver");
  ReducedModel reduced;
  reduced.n = model.n;
  reduced.energy = model.energy;
  reduced.gamma = model.gamma;
  const double a = 1.0 / std::sqrt(static_cast<double>(model.n));
  const double b = std::sqrt(1.0 - a * a);
  reduced.a = a;
  // basis {|w>, |w_perp>}: |s> = a |w> + b |w_perp>
  reduced.h2_driver = Matrix::Zero(2, 2);
  reduced.h2_driver << Complex(a * a), Complex(a * b), Complex(a * b),
      Complex(b * b);
  reduced.h2_driver *= model.energy;
  reduced.h2 = reduced.h2_driver;
  reduced.h2(0, 0) += model.energy;
  return reduced;
}

LindbladGenerator reduced_oracle_generator(const ReducedModel& reduced) {
  LindbladGenerator gen;
  gen.hamiltonian = std::make_shared<DenseHamiltonian>(
      HermitianOperator::from_matrix(reduced.h2));
  if (reduced.gamma > 0.0) {
    Vector e0 = Vector::Zero(2);
    e0(0) = 1.0;
    gen.jump_ops.push_back(
        std::make_shared<ScaledProjectorJump>(std::sqrt(reduced.gamma), e0));
  }
  return gen;
}

LindbladGenerator reduced_no_oracle_generator(const ReducedModel& reduced) {
  LindbladGenerator gen;
  gen.hamiltonian = std::make_shared<DenseHamiltonian>(
      HermitianOperator::from_matrix(reduced.h2_driver));
  return gen;
}

PureState reduced_initial_state(const ReducedModel& reduced) {
  Vector v(2);
  v << Complex(reduced.a), Complex(std::sqrt(1.0 - reduced.a * reduced.a));
  return PureState::normalized(std::move(v));
}

double success_probability(const Matrix& rho, Eigen::Index winner) {
  if (winner < 0 || winner >= rho.rows())
    throw std::invalid_argument("winner index out of range");
  return rho(winner, winner).real();
}

double success_probability(const DensityMatrix& rho, Eigen::Index winner) {
  return success_probability(rho.matrix(), winner);
}

double success_probability(const PureState& psi, Eigen::Index winner) {
  if (winner < 0 || winner >= psi.dim())
    throw std::invalid_argument("winner index out of range");
  return std::norm(psi.amplitudes()(winner));
}

StochasticResult stochastic_oracle_run(const SearchModel& model,
                                       const NoiseTrajectoryConfig& noise,
                                       const PureState& psi0, double t_final,
                                       const IntegratorConfig& config,
                                       int sample_every) {
  model.validate();
  const LindbladGenerator driver_part = build_no_oracle_generator(model);
  const Vector w = PureState::basis_state(model.n, model.winner).amplitudes();
  return noisy_projector_ensemble(driver_part.hamiltonian.get(), w,
                                  model.energy, psi0, t_final, noise, config,
                                  sample_every);
}

double analytic_success_probability(Eigen::Index n, double energy, double t) {
  if (n < 2) throw std::invalid_argument("search space needs n >= 2");
  const double a2 = 1.0 / static_cast<double>(n);
  const double s = std::sin(energy * t * std::sqrt(a2));
  return a2 + (1.0 - a2) * s * s;
}

double analytic_first_peak_time(Eigen::Index n, double energy) {
  if (n < 2) throw std::invalid_argument("search space needs n >= 2");
  if (!(energy > 0.0)) throw std::invalid_argument("energy must be > 0");
  return M_PI * std::sqrt(static_cast<double>(n)) / (2.0 * energy);
}

double analytic_threshold_crossing(Eigen::Index n, double energy, double p) {
  if (n < 2) throw std::invalid_argument("search space needs n >= 2");
  if (!(energy > 0.0)) throw std::invalid_argument("energy must be > 0");
  if (p > 1.0) throw std::invalid_argument("threshold above 1 is never reached");
  const double a2 = 1.0 / static_cast<double>(n);
  if (p <= a2) return 0.0;
  const double s = std::sqrt((p - a2) / (1.0 - a2));
  return std::asin(s) / (energy * std::sqrt(a2));
}

}  // namespace oraclesim
