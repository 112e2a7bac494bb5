#include "oraclesim/progress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace oraclesim {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kBoundSlack = 1e-9;
constexpr int kRefineSteps = 64;
constexpr int kUnreachableCheckStride = 64;

void require_same_dim(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("state dimensions do not match");
}

void check_threshold_domain(double p) {
  if (!(p > 0.0) || p > 1.0)
    throw std::domain_error("threshold p must lie in (0, 1]");
  if (p < kInvSqrt2 - 1e-12)
    throw std::domain_error(
        "progress bound is vacuous below p = 2^{-1/2}");
}
}  // namespace

double progress_measure(const DensityMatrix& rho_w,
                        const DensityMatrix& rho_0) {
  return frobenius_norm_sq_diff(rho_w, rho_0);
}

double progress_lower_bound_at_T(double p, Eigen::Index n) {
  if (n < 2) throw std::invalid_argument("search space needs n >= 2");
  check_threshold_domain(p);
  return std::max(0.0, static_cast<double>(n) * (2.0 * p * p - 1.0));
}

double growth_rate_direct(const Matrix& rho_w, const Matrix& rho_0,
                          Eigen::Index w, double energy, double gamma) {
  require_same_dim(rho_w, rho_0);
  if (w < 0 || w >= rho_w.rows())
    throw std::invalid_argument("winner index out of range");
  // All three traces touch only row/column w of the states.
  const double r_ww = rho_w(w, w).real();
  const double s_ww = rho_0(w, w).real();
  const double row_sq = rho_w.row(w).squaredNorm();
  const Complex d = (rho_w.row(w) * rho_0.col(w)).value();
  const double t1 = gamma * (r_ww * r_ww - row_sq);
  const double t2 = gamma * (r_ww * s_ww - d.real());
  const double t3 = -2.0 * energy * d.imag();
  return 2.0 * (t1 - t2 + t3);
}

double growth_rate_direct(const DensityMatrix& rho_w,
                          const DensityMatrix& rho_0, Eigen::Index w,
                          double energy, double gamma) {
  return growth_rate_direct(rho_w.matrix(), rho_0.matrix(), w, energy, gamma);
}

double growth_rate_closed_form(Complex x, Complex f, double energy,
                               double gamma) {
  const Complex half_g{0.5 * gamma, 0.0};
  const Complex ie{0.0, energy};
  const Complex value =
      2.0 * (-gamma * std::norm(x) + (half_g + ie) * x * std::conj(f) +
             (half_g - ie) * std::conj(x) * f);
  if (std::abs(value.imag()) > 1e-12 * std::max(1.0, std::abs(value.real())))
    throw std::logic_error("growth rate acquired an imaginary part");
  return value.real();
}

Complex optimal_coherence(Complex f, double energy, double gamma) {
  if (!(gamma > 0.0))
    throw std::domain_error("optimal coherence diverges at gamma = 0");
  return Complex(0.5, -energy / gamma) * f;
}

double growth_rate_cap(double energy, double gamma) {
  if (!(gamma > 0.0))
    throw std::domain_error("growth cap is undefined at gamma = 0");
  return (gamma * gamma + 4.0 * energy * energy) / (2.0 * gamma);
}

double growth_rate_cap_per_winner(double energy, double gamma,
                                  Complex overlap) {
  return growth_rate_cap(energy, gamma) * std::norm(overlap);
}

double runtime_lower_bound(Eigen::Index n, double gamma, double energy,
                           double p) {
  if (n < 2) throw std::invalid_argument("search space needs n >= 2");
  if (!(gamma > 0.0))
    throw std::domain_error("runtime bound is undefined at gamma = 0");
  check_threshold_domain(p);
  const double num =
      static_cast<double>(n) * 2.0 * gamma * std::max(0.0, 2.0 * p * p - 1.0);
  return num / (gamma * gamma + 4.0 * energy * energy);
}

namespace {

/* Everything constant along one runtime measurement: the oracle generator,
   the stationary no-oracle state and its decomposition against the winner,
   and the dephasing fixed point used for the reachability cutoff. */
struct Setup {
  LindbladGenerator gen;
  Matrix sigma0;
  Vector phi;
  Vector w_perp;
  Complex overlap;
  Complex f;
  Eigen::Index w = 0;
  Eigen::Index n_logical = 0;
  double energy = 0.0;
  double gamma = 0.0;
  Matrix pi2;  // 1/2 (|w><w| + |w_perp><w_perp|), stationary when gamma > 0
  double dist_pi_sigma = 0.0;
};

Setup make_setup(const SearchModel& model, EngineKind engine) {
  model.validate();
  if (model.driver != DriverKind::Uniform)
    throw std::invalid_argument(
        "runtime measurement requires the uniform driver (the no-oracle "
        "state must be stationary)");
  Setup s;
  s.n_logical = model.n;
  s.energy = model.energy;
  s.gamma = model.gamma;
  if (engine == EngineKind::FullSpace) {
    s.gen = build_oracle_generator(model);
    const PureState phi = model.initial_state();
    const TwoDimDecomposition dec = two_dim_decompose(phi, model.winner);
    s.phi = phi.amplitudes();
    s.w_perp = dec.w_perp;
    s.overlap = dec.overlap;
    s.f = dec.f;
    s.w = model.winner;
  } else {
    const ReducedModel reduced = build_reduced_model(model);
    s.gen = reduced_oracle_generator(reduced);
    const PureState phi = reduced_initial_state(reduced);
    s.phi = phi.amplitudes();
    s.w_perp = Vector::Zero(2);
    s.w_perp(1) = 1.0;
    s.overlap = Complex(reduced.a);
    s.f = Complex(reduced.a * std::sqrt(1.0 - reduced.a * reduced.a));
    s.w = 0;
  }
  s.sigma0.noalias() = s.phi * s.phi.adjoint();

  // the no-oracle evolution must hold sigma0 fixed for the pairing to be
  // collapsible to a single integration
  {
    const LindbladGenerator no_oracle =
        engine == EngineKind::FullSpace
            ? build_no_oracle_generator(model)
            : reduced_no_oracle_generator(build_reduced_model(model));
    Matrix r;
    RhsWorkspace ws;
    no_oracle.rhs(0.0, s.sigma0, r, ws);
    if (r.cwiseAbs().maxCoeff() > 1e-10)
      throw std::logic_error("no-oracle state is not stationary");
  }

  if (s.gamma > 0.0) {
    const Eigen::Index n = s.phi.size();
    Vector w_vec = Vector::Zero(n);
    w_vec(s.w) = 1.0;
    s.pi2.noalias() = 0.5 * (w_vec * w_vec.adjoint());
    s.pi2.noalias() += 0.5 * (s.w_perp * s.w_perp.adjoint());
    Matrix r;
    RhsWorkspace ws;
    s.gen.rhs(0.0, s.pi2, r, ws);
    if (r.cwiseAbs().maxCoeff() > 1e-10)
      throw std::logic_error("dephasing fixed point is not stationary");
    s.dist_pi_sigma = trace_distance(s.pi2, s.sigma0);
  }
  return s;
}

ProgressSample compute_sample(double t, const Matrix& rho, const Setup& s,
                              double distance) {
  ProgressSample ps;
  ps.t = t;
  ps.overlap = s.overlap;
  ps.f = s.f;
  ps.x = (rho.row(s.w) * s.w_perp).value();
  ps.purity_w = rho.squaredNorm();
  ps.trace_w = rho.trace().real();
  const double quad = (s.phi.adjoint() * rho * s.phi).value().real();
  ps.f_w = std::max(0.0, ps.purity_w + 1.0 - 2.0 * quad);
  ps.f_total = static_cast<double>(s.n_logical) * ps.f_w;
  ps.rate_direct =
      growth_rate_direct(rho, s.sigma0, s.w, s.energy, s.gamma);
  ps.rate_closed_form =
      growth_rate_closed_form(ps.x, ps.f, s.energy, s.gamma);
  ps.success_prob = rho(s.w, s.w).real();
  ps.distance = distance;
  return ps;
}

struct Pending {
  double p = 0.0;      // user threshold, reported as-is
  double level = 0.0;  // value the criterion observable must reach
  std::size_t original = 0;
  RunStatus status = RunStatus::NotReached;
  double t_cross = 0.0;
};

// trace-distance runs cross at p itself; the operational alternative asks
// for success probability >= p^2
double criterion_level(RuntimeCriterion c, double p) {
  return c == RuntimeCriterion::SuccessProbability ? p * p : p;
}

class RuntimeTracker : public SampleSink {
 public:
  RuntimeTracker(const Setup& s, RuntimeCriterion criterion,
                 std::vector<Pending> thresholds, const IntegratorConfig& cfg,
                 bool collect, int collect_stride)
      : s_(s),
        criterion_(criterion),
        thresholds_(std::move(thresholds)),
        cfg_(cfg),
        collect_(collect),
        collect_stride_(std::max(1, collect_stride)) {}

  bool on_sample(double t, const Matrix& rho) override {
    const double d = distance_of(rho);
    const ProgressSample ps = compute_sample(t, rho, s_, d);
    track_diagnostics(ps);
    if (collect_ && sample_index_ % collect_stride_ == 0)
      samples_.push_back(ps);
    ++sample_index_;
    d_max_ = std::max(d_max_, d);
    t_end_ = t;

    while (next_ < thresholds_.size() && d >= thresholds_[next_].level) {
      Pending& th = thresholds_[next_];
      th.status = RunStatus::Reached;
      th.t_cross = (sample_index_ == 1)
                       ? t  // already above threshold at the first sample
                       : refine_crossing(th.level, t, rho);
      ++next_;
    }
    if (next_ == thresholds_.size()) return false;

    if (criterion_ == RuntimeCriterion::TraceDistance && s_.gamma > 0.0 &&
        sample_index_ % kUnreachableCheckStride == 0) {
      // contraction toward the dephasing fixed point caps every future
      // distance at d(t') <= ||rho_t - pi2||_tr/2 + ||pi2 - sigma0||_tr/2
      const double reach = trace_distance(rho, s_.pi2) + s_.dist_pi_sigma;
      if (reach < thresholds_[next_].level - kBoundSlack) {
        for (std::size_t i = next_; i < thresholds_.size(); ++i)
          thresholds_[i].status = RunStatus::ProvenUnreachable;
        proven_stop_ = true;
        return false;
      }
    }

    prev_t_ = t;
    prev_rho_ = rho;
    return true;
  }

  const std::vector<Pending>& thresholds() const { return thresholds_; }
  double d_max() const { return d_max_; }
  double t_end() const { return t_end_; }
  bool proven_stop() const { return proven_stop_; }
  double max_cap_excess() const { return max_cap_excess_; }
  double max_integrated_cap_excess() const {
    return max_integrated_cap_excess_;
  }
  double max_rate_mismatch() const { return max_rate_mismatch_; }
  std::vector<ProgressSample>& samples() { return samples_; }

 private:
  double distance_of(const Matrix& rho) const {
    if (criterion_ == RuntimeCriterion::SuccessProbability)
      return rho(s_.w, s_.w).real();
    return trace_distance(rho, s_.sigma0);
  }

  void track_diagnostics(const ProgressSample& ps) {
    max_rate_mismatch_ = std::max(
        max_rate_mismatch_, std::abs(ps.rate_direct - ps.rate_closed_form));
    if (s_.gamma > 0.0) {
      const double cap = growth_rate_cap(s_.energy, s_.gamma);
      max_cap_excess_ =
          std::max(max_cap_excess_,
                   static_cast<double>(s_.n_logical) * ps.rate_direct - cap);
      max_integrated_cap_excess_ = std::max(
          max_integrated_cap_excess_, ps.f_total - cap * ps.t);
    }
  }

  /* Re-integrate the bracketing interval on a fine fixed grid and pick the
     linear interpolant of the first crossing pair. The bracket is at most
     one accepted coarse step, so the fine step is unconditionally stable. */
  double refine_crossing(double level, double t_hi, const Matrix& rho_hi) {
    const double t_lo = prev_t_;
    const double width = t_hi - t_lo;
    if (!(width > 0.0)) return t_hi;
    struct RefineSink : SampleSink {
      RuntimeTracker* outer;
      double level = 0.0, t_lo = 0.0;
      double prev_t = 0.0, prev_d = 0.0;
      bool first = true, found = false;
      double t_cross = 0.0;
      bool on_sample(double t, const Matrix& rho) override {
        const double d = outer->distance_of(rho);
        if (!first && prev_d < level && d >= level) {
          const double frac = (level - prev_d) / (d - prev_d);
          t_cross = t_lo + prev_t + frac * (t - prev_t);
          found = true;
          return false;
        }
        first = false;
        prev_t = t;
        prev_d = d;
        return true;
      }
    } sink;
    sink.outer = this;
    sink.level = level;
    sink.t_lo = t_lo;
    IntegratorConfig fine;
    fine.method = StepMethod::FixedRk4;
    fine.step_size = width / kRefineSteps;
    evolve_lindblad_stream(s_.gen, prev_rho_, width, fine, 1, sink);
    if (sink.found) return sink.t_cross;
    // numerical wobble right at the endpoint: fall back to the coarse pair
    const double d_lo = sink.first ? 0.0 : sink.prev_d;
    const double d_hi = distance_of(rho_hi);
    if (d_hi > d_lo)
      return t_lo + (level - d_lo) / (d_hi - d_lo) * width;
    return t_hi;
  }

  const Setup& s_;
  RuntimeCriterion criterion_;
  std::vector<Pending> thresholds_;
  IntegratorConfig cfg_;
  bool collect_;
  int collect_stride_;
  std::size_t next_ = 0;
  long sample_index_ = 0;
  double prev_t_ = 0.0;
  Matrix prev_rho_;
  double d_max_ = 0.0;
  double t_end_ = 0.0;
  bool proven_stop_ = false;
  double max_cap_excess_ = -std::numeric_limits<double>::infinity();
  double max_integrated_cap_excess_ =
      -std::numeric_limits<double>::infinity();
  double max_rate_mismatch_ = 0.0;
  std::vector<ProgressSample> samples_;
};

}  // namespace

RuntimeMeasurement measure_runtime_multi(const SearchModel& model,
                                         const std::vector<double>& thresholds,
                                         RuntimeCriterion criterion,
                                         double t_max,
                                         const IntegratorConfig& config,
                                         EngineKind engine,
                                         bool collect_samples,
                                         int sample_every) {
  if (thresholds.empty())
    throw std::invalid_argument("no thresholds requested");
  for (const double p : thresholds)
    if (!(p > 0.0 && p < 1.0))
      throw std::invalid_argument("threshold p must lie in (0, 1)");
  if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be > 0");
  config.validate();

  const Setup setup = make_setup(model, engine);

  std::vector<Pending> pending(thresholds.size());
  for (std::size_t i = 0; i < thresholds.size(); ++i)
    pending[i] = Pending{thresholds[i], criterion_level(criterion, thresholds[i]),
                         i, RunStatus::NotReached, 0.0};
  std::sort(pending.begin(), pending.end(),
            [](const Pending& a, const Pending& b) { return a.level < b.level; });

  RuntimeTracker tracker(setup, criterion, std::move(pending), config,
                         collect_samples, sample_every);
  IntegratorConfig run = config;
  run.step_size = config.resolved_step(model.energy, model.gamma);

  RuntimeMeasurement out;
  out.stats =
      evolve_lindblad_stream(setup.gen, setup.sigma0, t_max, run, 1, tracker);

  out.d_max = tracker.d_max();
  out.t_end = tracker.t_end();
  out.max_cap_excess = tracker.max_cap_excess();
  out.max_integrated_cap_excess = tracker.max_integrated_cap_excess();
  out.max_rate_mismatch = tracker.max_rate_mismatch();
  out.samples = std::move(tracker.samples());

  out.reports.resize(thresholds.size());
  for (const Pending& th : tracker.thresholds()) {
    BoundReport rep;
    rep.n = model.n;
    rep.gamma = model.gamma;
    rep.energy = model.energy;
    rep.p = th.p;
    rep.criterion = criterion;
    rep.status = th.status;
    if (th.status == RunStatus::Reached) rep.t_measured = th.t_cross;
    if (model.gamma > 0.0 && criterion == RuntimeCriterion::TraceDistance &&
        th.p >= kInvSqrt2 - 1e-12)
      rep.t_lower_bound =
          runtime_lower_bound(model.n, model.gamma, model.energy, th.p);
    rep.satisfied = !(rep.t_measured && rep.t_lower_bound) ||
                    *rep.t_measured >= *rep.t_lower_bound - kBoundSlack;
    rep.d_max = tracker.d_max();
    rep.t_searched = tracker.t_end();
    out.reports[th.original] = rep;
  }
  return out;
}

BoundReport measure_runtime(const SearchModel& model, double p,
                            RuntimeCriterion criterion, double t_max,
                            const IntegratorConfig& config,
                            EngineKind engine) {
  return measure_runtime_multi(model, {p}, criterion, t_max, config, engine)
      .reports.front();
}

namespace {
class DumpSink : public SampleSink {
 public:
  DumpSink(const Setup& s) : s_(s) {}
  bool on_sample(double t, const Matrix& rho) override {
    samples_.push_back(
        compute_sample(t, rho, s_, trace_distance(rho, s_.sigma0)));
    return true;
  }
  std::vector<ProgressSample> samples_;

 private:
  const Setup& s_;
};
}  // namespace

std::vector<ProgressSample> progress_trajectory(const SearchModel& model,
                                                double t_final,
                                                const IntegratorConfig& config,
                                                EngineKind engine,
                                                int sample_every) {
  if (!(t_final >= 0.0)) throw std::invalid_argument("t_final must be >= 0");
  config.validate();
  const Setup setup = make_setup(model, engine);
  DumpSink sink(setup);
  IntegratorConfig run = config;
  run.step_size = config.resolved_step(model.energy, model.gamma);
  evolve_lindblad_stream(setup.gen, setup.sigma0, t_final, run, sample_every,
                         sink);
  return std::move(sink.samples_);
}

}  // namespace oraclesim
