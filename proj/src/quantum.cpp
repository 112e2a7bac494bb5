#include "oraclesim/quantum.hpp"

#include <cmath>

namespace oraclesim {

namespace {

double max_abs_antihermitian_part(const Matrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace

PureState::PureState(Vector v) : v_(std::move(v)) {
  if (v_.size() < 1) throw std::invalid_argument("empty state vector");
  double n = v_.norm();
  if (std::abs(n - 1.0) > tol::kStateNorm)
    throw std::invalid_argument("state vector norm deviates from 1 by " +
                                std::to_string(std::abs(n - 1.0)));
}

PureState PureState::normalized(Vector v) {
  double n = v.norm();
  if (n < 1e-300) throw std::invalid_argument("cannot normalize zero vector");
  v /= n;
  return PureState(std::move(v), Unchecked{});
}

PureState PureState::basis_state(Eigen::Index n, Eigen::Index k) {
  if (n < 1 || k < 0 || k >= n)
    throw std::invalid_argument("basis index out of range");
  Vector v = Vector::Zero(n);
  v(k) = 1.0;
  return PureState(std::move(v), Unchecked{});
}

Complex PureState::overlap(const PureState& other) const {
  if (dim() != other.dim())
    throw std::invalid_argument("dimension mismatch in overlap");
  return v_.dot(other.v_);  // Eigen dot conjugates the left argument
}

DensityMatrix::DensityMatrix(const PureState& psi)
    : m_(psi.amplitudes() * psi.amplitudes().adjoint()) {}

DensityMatrix DensityMatrix::from_matrix(Matrix m) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw std::invalid_argument("density matrix must be square");
  if (max_abs_antihermitian_part(m) > tol::kHermiticity)
    throw std::invalid_argument("density matrix is not Hermitian");
  if (std::abs(m.trace().real() - 1.0) > tol::kUnitTrace ||
      std::abs(m.trace().imag()) > tol::kUnitTrace)
    throw std::invalid_argument("density matrix trace deviates from 1");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < tol::kEigenvalueFloor)
    throw std::invalid_argument("density matrix has eigenvalue below " +
                                std::to_string(tol::kEigenvalueFloor));
  return DensityMatrix(std::move(m), Unchecked{});
}

double DensityMatrix::purity() const { return (m_ * m_).trace().real(); }

double DensityMatrix::expectation(const PureState& phi) const {
  if (phi.dim() != dim())
    throw std::invalid_argument("dimension mismatch in expectation");
  return (phi.amplitudes().adjoint() * m_ * phi.amplitudes())(0, 0).real();
}

HermitianOperator HermitianOperator::from_matrix(Matrix m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("operator must be square");
  if (max_abs_antihermitian_part(m) > tol::kHermiticity)
    throw std::invalid_argument("operator is not Hermitian");
  return HermitianOperator(std::move(m));
}

PureState uniform_state(Eigen::Index n) {
  if (n < 2) throw std::invalid_argument("uniform_state requires n >= 2");
  Vector v = Vector::Constant(n, Complex(1.0 / std::sqrt(double(n)), 0.0));
  return PureState::normalized(std::move(v));
}

double frobenius_norm_sq_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("dimension mismatch in frobenius distance");
  return (a - b).squaredNorm();
}

double frobenius_norm_sq_diff(const DensityMatrix& a, const DensityMatrix& b) {
  return frobenius_norm_sq_diff(a.matrix(), b.matrix());
}

double trace_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("dimension mismatch in trace distance");
  Eigen::SelfAdjointEigenSolver<Matrix> es(a - b, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return trace_distance(a.matrix(), b.matrix());
}

double fidelity_upper_bound(const DensityMatrix& rho, const PureState& phi) {
  double radicand = 1.0 - rho.expectation(phi);
  if (radicand < -1e-12)
    throw std::invalid_argument("overlap above 1 beyond tolerance");
  return std::sqrt(std::max(0.0, radicand));
}

TwoDimDecomposition two_dim_decompose(const PureState& phi, Eigen::Index w) {
  const Vector& v = phi.amplitudes();
  if (w < 0 || w >= v.size())
    throw std::invalid_argument("marked index out of range");
  TwoDimDecomposition out;
  out.overlap = v(w);
  double beta_sq = 1.0 - std::norm(out.overlap);
  if (1.0 - std::abs(out.overlap) <= tol::kDegenerateOverlap) {
    // |phi> is (numerically) the marked state itself; any orthogonal
    // direction works, so pick a fixed basis vector.
    out.degenerate = true;
    out.f = 0.0;
    out.w_perp = Vector::Zero(v.size());
    out.w_perp(w == 0 ? 1 : 0) = 1.0;
    return out;
  }
  double beta = std::sqrt(std::max(0.0, beta_sq));
  // w_perp carries the rest of |phi>: phi = overlap * e_w + beta * w_perp.
  out.w_perp = v;
  out.w_perp(w) = 0.0;
  out.w_perp /= beta;
  out.f = out.overlap * beta;
  return out;
}

}  // namespace oraclesim
