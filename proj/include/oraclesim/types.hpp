#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace oraclesim {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

// Numerical tolerances used across the library. Validation thresholds are
// deliberately looser than machine precision so that integrator output can be
// checked without renormalization.
namespace tol {
inline constexpr double kStateNorm = 1e-12;       // pure state normalization
inline constexpr double kHermiticity = 1e-10;     // max |A - A^dag| entry
inline constexpr double kUnitTrace = 1e-10;       // |tr(rho) - 1|
inline constexpr double kEigenvalueFloor = -1e-9; // min eigenvalue of rho
inline constexpr double kTracelessRhs = 1e-12;    // |tr(Lindblad RHS)|
inline constexpr double kDegenerateOverlap = 1e-12; // 1 - |<w|phi>| cutoff
inline constexpr double kDefault = 1e-10;         // generic identity checks
}  // namespace tol

// Raised when an evolution leaves the physical manifold (trace, Hermiticity
// or positivity drift beyond tolerance) or a step cannot be completed.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(double t, const std::string& what)
      : std::runtime_error("integration failure at t=" + std::to_string(t) +
                           ": " + what),
        time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

}  // namespace oraclesim
