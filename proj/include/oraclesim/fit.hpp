#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace oraclesim {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;  // 0 for two points (no residual dof)
  int points = 0;
};

// Ordinary least squares y = slope x + intercept.
inline LinearFit fit_linear(const std::vector<double>& x,
                            const std::vector<double>& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("fit needs matching x/y lengths");
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("fit needs at least two points");
  double xbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xbar += x[i];
    ybar += y[i];
  }
  xbar /= static_cast<double>(n);
  ybar /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - xbar) * (x[i] - xbar);
    sxy += (x[i] - xbar) * (y[i] - ybar);
  }
  if (!(sxx > 0.0))
    throw std::invalid_argument("fit abscissae are degenerate");
  LinearFit out;
  out.points = static_cast<int>(n);
  out.slope = sxy / sxx;
  out.intercept = ybar - out.slope * xbar;
  if (n > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - (out.intercept + out.slope * x[i]);
      ssr += r * r;
    }
    out.stderr_slope =
        std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  }
  return out;
}

struct PowerLawFit {
  double exponent = 0.0;
  double stderr_exponent = 0.0;
  double log_prefactor = 0.0;
  double prefactor = 0.0;
  int points = 0;
};

// Least squares in log-log coordinates: y ~ prefactor * x^exponent.
inline PowerLawFit fit_power_law(const std::vector<double>& x,
                                 const std::vector<double>& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("fit needs matching x/y lengths");
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw std::invalid_argument("power-law fit needs positive data");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const LinearFit lin = fit_linear(lx, ly);
  PowerLawFit out;
  out.exponent = lin.slope;
  out.stderr_exponent = lin.stderr_slope;
  out.log_prefactor = lin.intercept;
  out.prefactor = std::exp(lin.intercept);
  out.points = lin.points;
  return out;
}

/* Decay rate of y ~ A exp(-rate t), fitted on log y. Samples at or below
   `floor` are dropped (Monte Carlo noise floor); rate = -slope. */
inline LinearFit fit_exponential_decay(const std::vector<double>& t,
                                       const std::vector<double>& y,
                                       double floor = 0.0) {
  if (t.size() != y.size())
    throw std::invalid_argument("fit needs matching t/y lengths");
  std::vector<double> tk, lk;
  tk.reserve(t.size());
  lk.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (y[i] > floor && y[i] > 0.0) {
      tk.push_back(t[i]);
      lk.push_back(std::log(y[i]));
    }
  }
  LinearFit lin = fit_linear(tk, lk);
  lin.slope = -lin.slope;  // report the decay rate, not the log-slope
  return lin;
}

}  // namespace oraclesim
