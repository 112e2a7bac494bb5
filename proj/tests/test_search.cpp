#include <doctest.h>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <oraclesim/dynamics.hpp>
#include <oraclesim/search.hpp>

#include "oracles.hpp"

using namespace oraclesim;

namespace {

SearchModel make_model(Eigen::Index n, double gamma, double energy = 1.0,
                       Eigen::Index winner = 0) {
  SearchModel model;
  model.n = n;
  model.winner = winner;
  model.energy = energy;
  model.gamma = gamma;
  return model;
}

}  // namespace

TEST_CASE("model validation") {
  CHECK_THROWS_AS(make_model(1, 0.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_model(4, 0.0, 1.0, 4).validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_model(4, 0.0, 0.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_model(4, -0.1).validate(), std::invalid_argument);

  SearchModel custom = make_model(3, 0.0);
  custom.driver = DriverKind::CustomConstant;
  custom.custom_driver = Matrix::Zero(2, 2);  // wrong size
  CHECK_THROWS_AS(custom.validate(), std::invalid_argument);
  custom.custom_driver = Matrix::Zero(3, 3);
  custom.custom_driver(0, 1) = 1.0;  // not Hermitian
  CHECK_THROWS_AS(custom.validate(), std::invalid_argument);
  custom.custom_driver = Matrix::Zero(3, 3);
  CHECK_NOTHROW(custom.validate());

  CHECK(make_model(5, 0.0).initial_state().dim() == 5);
  CHECK(success_probability(make_model(5, 0.0, 1.0, 3).winner_state(), 3) ==
        doctest::Approx(1.0));
}

TEST_CASE("oracle hamiltonian entries for the smallest search") {
  // n = 2, E = 1, w = 0: H = |w><w| + |s><s| in the computational basis
  const SearchModel model = make_model(2, 0.0);
  const Matrix h = build_oracle_generator(model).hamiltonian->matrix(0.0);
  Matrix expected(2, 2);
  expected << 1.5, 0.5, 0.5, 0.5;
  CHECK((h - expected).cwiseAbs().maxCoeff() <= 1e-15);

  // no-oracle generator carries the driver alone
  const Matrix hd = build_no_oracle_generator(model).hamiltonian->matrix(0.0);
  Matrix driver(2, 2);
  driver << 0.5, 0.5, 0.5, 0.5;
  CHECK((hd - driver).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("oracle right-hand side matches the entrywise expansion") {
  const SearchModel model = make_model(5, 0.7, 1.3, 2);
  const LindbladGenerator gen = build_oracle_generator(model);
  REQUIRE(gen.jump_ops.size() == 1);

  const Matrix h = gen.hamiltonian->matrix(0.0);
  const Matrix l = gen.jump_ops[0]->matrix();
  CHECK(std::abs(l(2, 2) - Complex(std::sqrt(0.7), 0.0)) <= 1e-15);

  for (const Matrix& rho :
       {DensityMatrix(model.initial_state()).matrix(),
        ref::random_density(5, 71)}) {
    const Matrix got =
        lindblad_rhs(gen, DensityMatrix::from_matrix(rho), 0.0);
    const Matrix want = ref::lindblad_rhs(h, {l}, rho);
    CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("zero dephasing leaves the dynamics unitary") {
  const SearchModel model = make_model(4, 0.0);
  const LindbladGenerator gen = build_oracle_generator(model);
  CHECK(gen.jump_ops.empty());

  IntegratorConfig cfg;
  cfg.step_size = 1e-3;
  const Trajectory traj = evolve_lindblad(
      gen, DensityMatrix(model.initial_state()), 3.0, cfg, 100);
  const double purity = (traj.states.back() * traj.states.back()).trace().real();
  CHECK(std::abs(purity - 1.0) <= 1e-8);
}

TEST_CASE("uniform state is stationary under the bare driver") {
  const SearchModel model = make_model(6, 0.9);
  const LindbladGenerator gen = build_no_oracle_generator(model);
  const Matrix rhs =
      lindblad_rhs(gen, DensityMatrix(model.initial_state()), 0.0);
  CHECK(rhs.cwiseAbs().maxCoeff() <= 1e-12);

  // and a non-stationary start follows the exact propagator
  const Matrix h = gen.hamiltonian->matrix(0.0);
  const Matrix rho0 = ref::random_density(6, 55);
  IntegratorConfig cfg;
  cfg.step_size = 1e-3;
  const Trajectory traj =
      evolve_lindblad(gen, DensityMatrix::from_matrix(rho0), 2.0, cfg, 100);
  const Matrix exact = ref::evolve_exact(h, {}, rho0, 2.0);
  CHECK((traj.states.back() - exact).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("reduced model freezes the two level hamiltonian") {
  const SearchModel model = make_model(4, 0.3);
  const ReducedModel red = build_reduced_model(model);
  CHECK(red.a == doctest::Approx(0.5).epsilon(1e-15));

  // basis {|w>, |w_perp>}: H2 = E [[1 + a^2, ab], [ab, b^2]]
  const double ab = 0.5 * std::sqrt(3.0) / 2.0;
  Matrix h2(2, 2);
  h2 << 1.25, ab, ab, 0.75;
  CHECK((red.h2 - h2).cwiseAbs().maxCoeff() <= 1e-12);
  Matrix hd(2, 2);
  hd << 0.25, ab, ab, 0.75;
  CHECK((red.h2_driver - hd).cwiseAbs().maxCoeff() <= 1e-12);

  // the coupling ab = sqrt(n - 1) / n vanishes as the space grows
  const ReducedModel big = build_reduced_model(make_model(1 << 20, 0.0));
  CHECK(std::abs(big.h2(0, 1)) ==
        doctest::Approx(std::sqrt((1 << 20) - 1.0) / (1 << 20)).epsilon(1e-12));
  CHECK(std::abs(big.h2(0, 1)) < 1e-3);

  SearchModel custom = make_model(4, 0.0);
  custom.driver = DriverKind::CustomConstant;
  custom.custom_driver = Matrix::Zero(4, 4);
  CHECK_THROWS_AS(build_reduced_model(custom), std::invalid_argument);
}

TEST_CASE("reduced dynamics reproduces the full space observables") {
  const SearchModel model = make_model(8, 0.6);
  IntegratorConfig cfg;
  cfg.step_size = 0.01;
  const double t_final = 20.0;

  const Trajectory full = evolve_lindblad(
      build_oracle_generator(model), DensityMatrix(model.initial_state()),
      t_final, cfg, 50);
  const ReducedModel red = build_reduced_model(model);
  const Trajectory reduced = evolve_lindblad(
      reduced_oracle_generator(red), DensityMatrix(reduced_initial_state(red)),
      t_final, cfg, 50);

  REQUIRE(full.times.size() == reduced.times.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < full.times.size(); ++k) {
    const double pf = success_probability(full.states[k], model.winner);
    const double pr = success_probability(reduced.states[k], 0);
    worst = std::max(worst, std::abs(pf - pr));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("winner choice only relabels the dynamics") {
  IntegratorConfig cfg;
  cfg.step_size = 0.01;
  std::vector<std::vector<double>> curves;
  for (Eigen::Index w : {0, 3, 5}) {
    const SearchModel model = make_model(6, 0.8, 1.0, w);
    const Trajectory traj = evolve_lindblad(
        build_oracle_generator(model), DensityMatrix(model.initial_state()),
        5.0, cfg, 100);
    std::vector<double> curve;
    for (const Matrix& rho : traj.states)
      curve.push_back(success_probability(rho, w));
    curves.push_back(std::move(curve));
  }
  for (std::size_t k = 0; k < curves[0].size(); ++k) {
    CHECK(std::abs(curves[0][k] - curves[1][k]) <= 1e-12);
    CHECK(std::abs(curves[0][k] - curves[2][k]) <= 1e-12);
  }
}

TEST_CASE("success probability forms agree") {
  const PureState s = uniform_state(8);
  CHECK(success_probability(s, 3) == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(success_probability(DensityMatrix(s), 3) ==
        doctest::Approx(0.125).epsilon(1e-14));
  CHECK(success_probability(PureState::basis_state(8, 3), 3) ==
        doctest::Approx(1.0).epsilon(1e-14));
  const PureState random = PureState::normalized(ref::random_unit_vector(8, 5));
  CHECK(success_probability(random, 2) ==
        doctest::Approx(std::norm(random.amplitudes()[2])).epsilon(1e-14));
  CHECK_THROWS_AS(success_probability(s, 8), std::invalid_argument);
}

TEST_CASE("analytic noiseless references") {
  // p(t) = 1/n + (1 - 1/n) sin^2(E t / sqrt(n)) against the integrator
  const SearchModel model = make_model(9, 0.0, 0.7);
  IntegratorConfig cfg;
  cfg.step_size = 1e-3;
  const Trajectory traj = evolve_schrodinger(
      *build_oracle_generator(model).hamiltonian, model.initial_state(), 1.7,
      cfg);
  for (std::size_t k = 0; k < traj.times.size(); k += 300) {
    const double want =
        analytic_success_probability(9, 0.7, traj.times[k]);
    CHECK(std::abs(std::norm(traj.pure_states[k][0]) - want) <= 1e-8);
  }

  // peak time reaches unit probability exactly
  const double t_peak = analytic_first_peak_time(16, 2.0);
  CHECK(t_peak == doctest::Approx(M_PI * 4.0 / 4.0).epsilon(1e-14));
  CHECK(analytic_success_probability(16, 2.0, t_peak) ==
        doctest::Approx(1.0).epsilon(1e-14));

  // threshold crossings invert the probability curve
  CHECK(analytic_threshold_crossing(16, 1.0, 0.05) == 0.0);  // true at t = 0
  const double t_mid = analytic_threshold_crossing(16, 1.0, 0.6);
  CHECK(analytic_success_probability(16, 1.0, t_mid) ==
        doctest::Approx(0.6).epsilon(1e-12));
  CHECK(analytic_threshold_crossing(16, 1.0, 1.0) ==
        doctest::Approx(analytic_first_peak_time(16, 1.0)).epsilon(1e-12));
  CHECK_THROWS_AS(analytic_threshold_crossing(16, 1.0, 1.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(analytic_success_probability(1, 1.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(analytic_first_peak_time(4, 0.0), std::invalid_argument);
}

TEST_CASE("stochastic wrapper equals the bare ensemble") {
  const SearchModel model = make_model(2, 0.0);
  NoiseTrajectoryConfig noise;
  noise.noise_std_s = 0.8;
  noise.n_trajectories = 3;
  noise.rng_seed = 7;
  IntegratorConfig cfg;
  cfg.step_size = 0.01;

  const StochasticResult via_model = stochastic_oracle_run(
      model, noise, model.initial_state(), 1.0, cfg, 10);

  const LindbladGenerator driver = build_no_oracle_generator(model);
  const Vector w = model.winner_state().amplitudes();
  const StochasticResult direct =
      noisy_projector_ensemble(driver.hamiltonian.get(), w, model.energy,
                               model.initial_state(), 1.0, noise, cfg, 10);

  REQUIRE(via_model.averaged_states.size() == direct.averaged_states.size());
  for (std::size_t k = 0; k < direct.averaged_states.size(); ++k)
    CHECK((via_model.averaged_states[k] - direct.averaged_states[k])
              .cwiseAbs()
              .maxCoeff() == 0.0);
}
