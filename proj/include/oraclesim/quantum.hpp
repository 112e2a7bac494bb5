#pragma once

#include <optional>

#include "oraclesim/types.hpp"

namespace oraclesim {

/* Normalized state vector. Construction validates the norm; `normalized`
   rescales instead, for wrapping raw integrator output. */
class PureState {
 public:
  // Throws std::invalid_argument unless | ||v|| - 1 | <= tol::kStateNorm.
  explicit PureState(Vector v);

  // Rescales v to unit norm. Throws on (near-)zero input.
  static PureState normalized(Vector v);

  // Computational basis state |k> in dimension n.
  static PureState basis_state(Eigen::Index n, Eigen::Index k);

  const Vector& amplitudes() const { return v_; }
  Eigen::Index dim() const { return v_.size(); }
  Complex overlap(const PureState& other) const;  // <this|other>

 private:
  struct Unchecked {};
  PureState(Vector v, Unchecked) : v_(std::move(v)) {}
  Vector v_;
};

/* Density matrix. `from_matrix` enforces Hermiticity, unit trace and
   positivity up to the shared tolerances; the pure-state constructor is
   exact by construction. */
class DensityMatrix {
 public:
  explicit DensityMatrix(const PureState& psi);  // |psi><psi|

  // Full validation: Hermitian within tol::kHermiticity, trace within
  // tol::kUnitTrace of 1, min eigenvalue >= tol::kEigenvalueFloor.
  static DensityMatrix from_matrix(Matrix m);

  const Matrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }
  double purity() const;                            // tr(rho^2)
  double expectation(const PureState& phi) const;   // <phi|rho|phi>

 private:
  struct Unchecked {};
  DensityMatrix(Matrix m, Unchecked) : m_(std::move(m)) {}
  Matrix m_;
};

/* Hermitian observable/Hamiltonian wrapper; validates on construction. */
class HermitianOperator {
 public:
  static HermitianOperator from_matrix(Matrix m);
  const Matrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  explicit HermitianOperator(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

// Equal-amplitude state over n basis elements; n >= 2 required.
PureState uniform_state(Eigen::Index n);

// || a - b ||_F^2, the squared Frobenius gap between two density matrices.
double frobenius_norm_sq_diff(const DensityMatrix& a, const DensityMatrix& b);
double frobenius_norm_sq_diff(const Matrix& a, const Matrix& b);

// (1/2) sum_i |lambda_i(a - b)|, computed by Hermitian eigendecomposition.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);
double trace_distance(const Matrix& a, const Matrix& b);

// sqrt(1 - <phi|rho|phi>). Dominates trace_distance(rho, |phi><phi|).
// Radicands in [-1e-12, 0) are clamped to 0; below that it throws.
double fidelity_upper_bound(const DensityMatrix& rho, const PureState& phi);

/* Two-level decomposition of |phi> against the marked basis state |w>:
   |phi> = overlap |w> + beta |w_perp>, beta = sqrt(1 - |overlap|^2) real.
   f = overlap * beta is the coherence weight that drives progress growth.
   When |overlap| is within tol::kDegenerateOverlap of 1 the perpendicular
   direction is ill-conditioned; `degenerate` is set, f = 0 and w_perp is a
   fixed basis vector orthogonal to |w>. */
struct TwoDimDecomposition {
  Complex overlap;
  Complex f;
  Vector w_perp;
  bool degenerate = false;
};

TwoDimDecomposition two_dim_decompose(const PureState& phi, Eigen::Index w);

}  // namespace oraclesim
