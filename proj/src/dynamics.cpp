#include "oraclesim/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <thread>

namespace oraclesim {

namespace {

constexpr Complex kMinusI{0.0, -1.0};
constexpr long kMaxEigChecks = 2048;     // spectrum checks per run
constexpr long kMaxStoredSamples = 8192; // cap for collecting variants
constexpr int kChunkTrajectories = 16;   // reduction block of the ensemble

double positive_step(const IntegratorConfig& config) {
  if (!(config.step_size > 0.0))
    throw std::invalid_argument(
        "integrator step size is unresolved; set step_size or use defaults_for()");
  return config.step_size;
}

// Uniform grid over [0, t_final] whose last point is exactly t_final.
struct FixedGrid {
  long n_steps = 0;
  double h = 0.0;
  double t_final = 0.0;

  FixedGrid(double t_end, double step) : h(step), t_final(t_end) {
    n_steps = (t_end > 0.0)
                  ? static_cast<long>(std::ceil(t_end / step - 1e-9))
                  : 0;
  }
  double time_at(long k) const { return k == n_steps ? t_final : k * h; }
  double step_at(long k) const { return time_at(k + 1) - time_at(k); }
};

template <class State>
struct Rk4Buffers {
  State k1, k2, k3, k4, tmp;
};

// One classical RK4 step from (t, y) with k1 = rhs(t, y) already evaluated.
template <class State, class Rhs>
void rk4_step(double t, double h, const State& y, const State& k1, Rhs&& rhs,
              Rk4Buffers<State>& b, State& out, long& evals) {
  b.tmp = y + (0.5 * h) * k1;
  rhs(t + 0.5 * h, b.tmp, b.k2);
  b.tmp = y + (0.5 * h) * b.k2;
  rhs(t + 0.5 * h, b.tmp, b.k3);
  b.tmp = y + h * b.k3;
  rhs(t + h, b.tmp, b.k4);
  out = y + (h / 6.0) * (k1 + 2.0 * b.k2 + 2.0 * b.k3 + b.k4);
  evals += 3;
}

/* Fixed-step driver. sample(t, y) is called at t = 0, after every
   `stride`-th step, and at t_final; returning false stops the run. */
template <class State, class Rhs, class Sample>
void integrate_fixed(State& y, double t_final, double h, int stride, Rhs&& rhs,
                     Sample&& sample, IntegrationStats& stats) {
  if (!sample(0.0, y)) return;
  const FixedGrid grid(t_final, h);
  Rk4Buffers<State> b;
  State k1, next;
  for (long k = 0; k < grid.n_steps; ++k) {
    const double t = grid.time_at(k);
    rhs(t, y, k1);
    ++stats.rhs_evaluations;
    rk4_step(t, grid.step_at(k), y, k1, rhs, b, next, stats.rhs_evaluations);
    y.swap(next);
    ++stats.accepted_steps;
    const bool last = (k + 1 == grid.n_steps);
    if (last || (k + 1) % stride == 0)
      if (!sample(grid.time_at(k + 1), y)) return;
  }
}

/* Step-doubling adaptive driver: compares one h step against two h/2 steps,
   accepts when the estimated error is within tolerance and applies the
   fifth-order correction. Every `stride`-th accepted step is sampled. */
template <class State, class Rhs, class Sample>
void integrate_adaptive(State& y, double t_final, double h0, double tolerance,
                        int stride, Rhs&& rhs, Sample&& sample,
                        IntegrationStats& stats) {
  if (!sample(0.0, y)) return;
  if (t_final <= 0.0) return;

  const double h_max = std::max(std::min(h0 * 1e6, t_final / 32.0), h0);
  const double h_min = 1e-14 * std::max(t_final, 1.0);
  double t = 0.0;
  double h = std::min(h0, t_final);
  Rk4Buffers<State> b;
  State k1, k_mid, y_full, y_half, y_two;

  while (t < t_final) {
    h = std::min(h, t_final - t);
    rhs(t, y, k1);
    ++stats.rhs_evaluations;
    for (;;) {
      if (h < h_min)
        throw IntegrationError(t, "adaptive step size underflow");
      rk4_step(t, h, y, k1, rhs, b, y_full, stats.rhs_evaluations);
      rk4_step(t, 0.5 * h, y, k1, rhs, b, y_half, stats.rhs_evaluations);
      rhs(t + 0.5 * h, y_half, k_mid);
      ++stats.rhs_evaluations;
      rk4_step(t + 0.5 * h, 0.5 * h, y_half, k_mid, rhs, b, y_two,
               stats.rhs_evaluations);

      const double err = (y_two - y_full).norm() / 15.0;
      const double scale = tolerance * std::max(1.0, y_two.norm());
      const double ratio = scale / std::max(err, 1e-300);
      const double factor =
          std::clamp(0.9 * std::pow(ratio, 0.2), 0.3, 2.0);
      if (err <= scale) {
        y = y_two + (y_two - y_full) / 15.0;
        t += h;
        h = std::min(h * factor, h_max);
        ++stats.accepted_steps;
        break;
      }
      h *= factor;
      ++stats.rejected_steps;
    }
    if (t >= t_final - 1e-12 * std::max(1.0, t_final)) t = t_final;
    const bool due = (stats.accepted_steps % stride == 0) || t == t_final;
    if (due && !sample(t, y)) return;
  }
}

/* Physicality checks at sample points. Trace and Hermiticity are checked at
   every sample; the spectrum (an O(N^3) eigensolve) on a bounded subsample
   plus the final point. */
class DensityGuard {
 public:
  DensityGuard(double t_final, IntegrationStats& stats)
      : stats_(stats),
        eig_interval_(t_final > 0.0 ? t_final / kMaxEigChecks : 0.0),
        t_final_(t_final) {}

  void check(double t, const Matrix& rho) {
    const double trace_dev = std::abs(rho.trace() - Complex{1.0, 0.0});
    stats_.max_trace_dev = std::max(stats_.max_trace_dev, trace_dev);
    if (trace_dev > tol::kUnitTrace)
      throw IntegrationError(t, "trace drifted beyond tolerance");
    const double herm_dev = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    stats_.max_hermiticity_dev = std::max(stats_.max_hermiticity_dev, herm_dev);
    if (herm_dev > tol::kHermiticity)
      throw IntegrationError(t, "state is no longer Hermitian");
    if (t >= next_eig_t_ || t == t_final_) {
      next_eig_t_ = t + eig_interval_;
      Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
      const double min_eig = es.eigenvalues().minCoeff();
      stats_.min_eigenvalue = std::min(stats_.min_eigenvalue, min_eig);
      if (min_eig < tol::kEigenvalueFloor)
        throw IntegrationError(t, "state developed a negative eigenvalue");
    }
  }

 private:
  IntegrationStats& stats_;
  double eig_interval_;
  double t_final_;
  double next_eig_t_ = 0.0;
};

// Stores samples, halving the kept density whenever the cap is exceeded.
template <class State>
class ThinningStore {
 public:
  void add(double t, const State& s) {
    if (counter_ % modulus_ == 0) {
      times_.push_back(t);
      states_.push_back(s);
      if (static_cast<long>(times_.size()) > kMaxStoredSamples) compact();
    }
    ++counter_;
    last_time_ = t;
    last_state_ = s;
  }
  // The final sample is always kept.
  void finalize() {
    if (!times_.empty() && times_.back() != last_time_) {
      times_.push_back(last_time_);
      states_.push_back(last_state_);
    }
  }
  std::vector<double>& times() { return times_; }
  std::vector<State>& states() { return states_; }

 private:
  void compact() {
    std::size_t kept = 0;
    for (std::size_t i = 0; i < times_.size(); i += 2, ++kept) {
      times_[kept] = times_[i];
      states_[kept] = std::move(states_[i]);
    }
    times_.resize(kept);
    states_.resize(kept);
    modulus_ *= 2;
  }

  std::vector<double> times_;
  std::vector<State> states_;
  long counter_ = 0;
  long modulus_ = 1;
  double last_time_ = 0.0;
  State last_state_{};
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

IntegratorConfig IntegratorConfig::defaults_for(double energy, double gamma) {
  IntegratorConfig config;
  config.step_size = 0.01 / std::max({energy, gamma, 1.0});
  return config;
}

double IntegratorConfig::resolved_step(double energy, double gamma) const {
  if (step_size > 0.0) return step_size;
  return 0.01 / std::max({energy, gamma, 1.0});
}

void IntegratorConfig::validate() const {
  if (step_size < 0.0 || !std::isfinite(step_size))
    throw std::invalid_argument("step_size must be finite and >= 0");
  if (!(error_tolerance > 0.0))
    throw std::invalid_argument("error_tolerance must be > 0");
}

double NoiseTrajectoryConfig::step_std(double dt) const {
  return noise_std_s * std::sqrt(calibration / (window * dt));
}

double NoiseTrajectoryConfig::gamma_equivalent() const {
  return calibration * noise_std_s * noise_std_s / window;
}

void NoiseTrajectoryConfig::validate() const {
  if (noise_std_s < 0.0 || !std::isfinite(noise_std_s))
    throw std::invalid_argument("noise_std_s must be finite and >= 0");
  if (!(window > 0.0)) throw std::invalid_argument("window must be > 0");
  if (!(calibration > 0.0))
    throw std::invalid_argument("calibration must be > 0");
  if (n_trajectories < 1)
    throw std::invalid_argument("n_trajectories must be >= 1");
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
}

IntegrationStats evolve_lindblad_stream(const LindbladGenerator& gen,
                                        const Matrix& rho0, double t_final,
                                        const IntegratorConfig& config,
                                        int sample_every, SampleSink& sink) {
  config.validate();
  gen.validate();
  if (sample_every < 1) throw std::invalid_argument("sample_every must be >= 1");
  if (t_final < 0.0) throw std::invalid_argument("t_final must be >= 0");
  if (rho0.rows() != gen.dim() || rho0.cols() != gen.dim())
    throw std::invalid_argument("state dimension does not match generator");
  const double h = positive_step(config);

  IntegrationStats stats;
  DensityGuard guard(t_final, stats);
  RhsWorkspace ws;
  Matrix y = rho0;
  auto rhs = [&](double t, const Matrix& state, Matrix& out) {
    gen.rhs(t, state, out, ws);
  };
  auto sample = [&](double t, const Matrix& state) {
    guard.check(t, state);
    return sink.on_sample(t, state);
  };
  if (config.method == StepMethod::FixedRk4)
    integrate_fixed(y, t_final, h, sample_every, rhs, sample, stats);
  else
    integrate_adaptive(y, t_final, h, config.error_tolerance, sample_every,
                       rhs, sample, stats);
  return stats;
}

namespace {
class CollectingSink : public SampleSink {
 public:
  bool on_sample(double t, const Matrix& rho) override {
    store.add(t, rho);
    purity_store.add(t, rho.squaredNorm());  // tr(rho^2) for Hermitian rho
    return true;
  }
  ThinningStore<Matrix> store;
  ThinningStore<double> purity_store;
};
}  // namespace

Trajectory evolve_lindblad(const LindbladGenerator& gen,
                           const DensityMatrix& rho0, double t_final,
                           const IntegratorConfig& config, int sample_every) {
  CollectingSink sink;
  Trajectory traj;
  traj.stats = evolve_lindblad_stream(gen, rho0.matrix(), t_final, config,
                                      sample_every, sink);
  sink.store.finalize();
  sink.purity_store.finalize();
  traj.times = std::move(sink.store.times());
  traj.states = std::move(sink.store.states());
  traj.observables["purity"] = std::move(sink.purity_store.states());
  return traj;
}

Trajectory evolve_schrodinger(const Hamiltonian& h, const PureState& psi0,
                              double t_final, const IntegratorConfig& config,
                              int sample_every) {
  config.validate();
  if (sample_every < 1) throw std::invalid_argument("sample_every must be >= 1");
  if (t_final < 0.0) throw std::invalid_argument("t_final must be >= 0");
  if (psi0.dim() != h.dim())
    throw std::invalid_argument("state dimension does not match hamiltonian");
  const double step = positive_step(config);

  Trajectory traj;
  ThinningStore<Vector> store;
  Vector y = psi0.amplitudes();
  Vector hpsi(y.size());
  auto rhs = [&](double t, const Vector& state, Vector& out) {
    hpsi.setZero();
    h.apply(t, state, hpsi);
    out = kMinusI * hpsi;
  };
  auto sample = [&](double t, const Vector& state) {
    const double norm_dev = std::abs(state.norm() - 1.0);
    traj.stats.max_norm_dev = std::max(traj.stats.max_norm_dev, norm_dev);
    if (norm_dev > 1e-6)
      throw IntegrationError(t, "unitary evolution lost normalization");
    store.add(t, state);
    return true;
  };
  if (config.method == StepMethod::FixedRk4)
    integrate_fixed(y, t_final, step, sample_every, rhs, sample, traj.stats);
  else
    integrate_adaptive(y, t_final, step, config.error_tolerance, sample_every,
                       rhs, sample, traj.stats);
  store.finalize();
  traj.times = std::move(store.times());
  traj.pure_states = std::move(store.states());
  return traj;
}

StochasticResult noisy_projector_ensemble(const Hamiltonian* driver,
                                          const Vector& direction,
                                          double energy, const PureState& psi0,
                                          double t_final,
                                          const NoiseTrajectoryConfig& noise,
                                          const IntegratorConfig& config,
                                          int sample_every) {
  config.validate();
  noise.validate();
  if (sample_every < 1) throw std::invalid_argument("sample_every must be >= 1");
  if (config.method != StepMethod::FixedRk4)
    throw std::invalid_argument(
        "stochastic runs need FixedRk4: the noise std is tied to the step");
  if (t_final < 0.0) throw std::invalid_argument("t_final must be >= 0");
  const Eigen::Index n = direction.size();
  if (std::abs(direction.norm() - 1.0) > tol::kStateNorm)
    throw std::invalid_argument("noisy projector direction must be normalized");
  if (psi0.dim() != n)
    throw std::invalid_argument("state dimension does not match projector");
  if (driver && driver->dim() != n)
    throw std::invalid_argument("driver dimension does not match projector");
  const double h = positive_step(config);

  const FixedGrid grid(t_final, h);
  std::vector<long> sample_steps;  // grid indices that are kept
  sample_steps.push_back(0);
  for (long k = 1; k <= grid.n_steps; ++k)
    if (k == grid.n_steps || k % sample_every == 0)
      sample_steps.push_back(k);
  const std::size_t n_samples = sample_steps.size();

  const long m_total = noise.n_trajectories;
  const long n_chunks = (m_total + kChunkTrajectories - 1) / kChunkTrajectories;
  const double mem_bytes = static_cast<double>(n_chunks) * n_samples *
                           static_cast<double>(n) * n * sizeof(Complex);
  if (mem_bytes > 512.0 * 1024 * 1024)
    throw std::invalid_argument(
        "ensemble reduction would need too much memory; raise sample_every");

  std::vector<std::vector<Matrix>> partials(
      n_chunks, std::vector<Matrix>(n_samples, Matrix::Zero(n, n)));
  std::vector<double> chunk_norm_dev(n_chunks, 0.0);

  const double sigma = noise.step_std(h);
  const Vector psi_init = psi0.amplitudes();

  auto run_chunk = [&](long chunk) {
    const long m_begin = chunk * kChunkTrajectories;
    const long m_end = std::min(m_begin + kChunkTrajectories, m_total);
    Rk4Buffers<Vector> b;
    Vector psi(n), k1(n), next(n), hpsi(n);
    long dummy_evals = 0;
    for (long m = m_begin; m < m_end; ++m) {
      std::mt19937_64 rng(splitmix64(noise.rng_seed ^
                                     (0x9e3779b97f4a7c15ULL *
                                      static_cast<std::uint64_t>(m + 1))));
      std::normal_distribution<double> normal(0.0, 1.0);
      psi = psi_init;
      std::size_t next_sample = 0;
      auto record = [&](long step_index) {
        if (next_sample < n_samples && sample_steps[next_sample] == step_index) {
          partials[chunk][next_sample].noalias() += psi * psi.adjoint();
          ++next_sample;
        }
      };
      record(0);
      for (long k = 0; k < grid.n_steps; ++k) {
        const double xi = sigma > 0.0 ? sigma * normal(rng) : 0.0;
        const double strength = energy + xi;
        auto rhs = [&](double t, const Vector& state, Vector& out) {
          hpsi.setZero();
          if (driver) driver->apply(t, state, hpsi);
          hpsi.noalias() += strength * direction.dot(state) * direction;
          out = kMinusI * hpsi;
        };
        const double t = grid.time_at(k);
        rhs(t, psi, k1);
        rk4_step(t, grid.step_at(k), psi, k1, rhs, b, next, dummy_evals);
        const double nrm = next.norm();
        chunk_norm_dev[chunk] =
            std::max(chunk_norm_dev[chunk], std::abs(nrm - 1.0));
        psi = next / nrm;  // each realization stays an exact pure state
        record(k + 1);
      }
    }
  };

  const int jobs = std::max(1, noise.jobs);
  if (jobs == 1 || n_chunks == 1) {
    for (long c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::atomic<long> next_chunk{0};
    auto worker = [&] {
      for (;;) {
        const long c = next_chunk.fetch_add(1);
        if (c >= n_chunks) return;
        run_chunk(c);
      }
    };
    std::vector<std::thread> pool;
    const int n_workers = static_cast<int>(std::min<long>(jobs, n_chunks));
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  StochasticResult result;
  result.n_trajectories = m_total;
  result.times.reserve(n_samples);
  for (const long k : sample_steps) result.times.push_back(grid.time_at(k));
  result.averaged_states.assign(n_samples, Matrix::Zero(n, n));
  // chunk-order reduction keeps the sum identical for every jobs count
  for (long c = 0; c < n_chunks; ++c) {
    for (std::size_t s = 0; s < n_samples; ++s)
      result.averaged_states[s] += partials[c][s];
    result.max_step_norm_dev =
        std::max(result.max_step_norm_dev, chunk_norm_dev[c]);
  }
  for (auto& m : result.averaged_states) m /= static_cast<double>(m_total);
  return result;
}

}  // namespace oraclesim
