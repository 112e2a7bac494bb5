#include "oraclesim/operators.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace oraclesim {

namespace {
constexpr Complex kMinusI{0.0, -1.0};

void prepare(RhsWorkspace& ws, Eigen::Index n) {
  if (ws.row.size() != n) ws.row.resize(n);
  if (ws.col.size() != n) ws.col.resize(n);
}
}  // namespace

void Hamiltonian::apply(double t, const Vector& x, Vector& out) const {
  out.noalias() += matrix(t) * x;
}

void Hamiltonian::add_commutator(double t, const Matrix& rho, Matrix& out,
                                 RhsWorkspace&) const {
  const Matrix h = matrix(t);
  out.noalias() += kMinusI * (h * rho);
  out.noalias() -= kMinusI * (rho * h);
}

DenseHamiltonian::DenseHamiltonian(HermitianOperator h)
    : h_(h.matrix()) {}

void DenseHamiltonian::apply(double, const Vector& x, Vector& out) const {
  out.noalias() += h_ * x;
}

void DenseHamiltonian::add_commutator(double, const Matrix& rho, Matrix& out,
                                      RhsWorkspace&) const {
  out.noalias() += kMinusI * (h_ * rho);
  out.noalias() -= kMinusI * (rho * h_);
}

CallbackHamiltonian::CallbackHamiltonian(Eigen::Index dim,
                                         std::function<Matrix(double)> provider)
    : dim_(dim), provider_(std::move(provider)) {
  if (dim_ < 1) throw std::invalid_argument("hamiltonian dimension must be >= 1");
  if (!provider_) throw std::invalid_argument("hamiltonian provider is empty");
}

Matrix CallbackHamiltonian::matrix(double t) const {
  Matrix h = provider_(t);
  if (h.rows() != dim_ || h.cols() != dim_)
    throw std::invalid_argument("hamiltonian provider returned wrong dimension");
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > tol::kHermiticity)
    throw std::invalid_argument("hamiltonian provider returned non-Hermitian matrix");
  return h;
}

ProjectorSumHamiltonian::ProjectorSumHamiltonian(Eigen::Index dim,
                                                 std::vector<double> coeffs,
                                                 std::vector<Vector> vectors)
    : dim_(dim), coeffs_(std::move(coeffs)), vectors_(std::move(vectors)) {
  if (dim_ < 1) throw std::invalid_argument("hamiltonian dimension must be >= 1");
  if (coeffs_.size() != vectors_.size())
    throw std::invalid_argument("projector sum needs one coefficient per vector");
  for (const auto& v : vectors_) {
    if (v.size() != dim_)
      throw std::invalid_argument("projector vector has wrong dimension");
    if (std::abs(v.norm() - 1.0) > tol::kStateNorm)
      throw std::invalid_argument("projector vector must be normalized");
  }
}

Matrix ProjectorSumHamiltonian::matrix(double) const {
  Matrix h = Matrix::Zero(dim_, dim_);
  for (std::size_t k = 0; k < coeffs_.size(); ++k)
    h.noalias() += coeffs_[k] * (vectors_[k] * vectors_[k].adjoint());
  return h;
}

void ProjectorSumHamiltonian::apply(double, const Vector& x, Vector& out) const {
  for (std::size_t k = 0; k < coeffs_.size(); ++k)
    out.noalias() += coeffs_[k] * vectors_[k].dot(x) * vectors_[k];
}

void ProjectorSumHamiltonian::add_commutator(double, const Matrix& rho,
                                             Matrix& out, RhsWorkspace& ws) const {
  prepare(ws, dim_);
  // per term: -i c (v (v^dag rho) - (rho v) v^dag)
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    const Vector& v = vectors_[k];
    const Complex lam = kMinusI * coeffs_[k];
    ws.row.noalias() = v.adjoint() * rho;
    ws.col.noalias() = rho * v;
    out.noalias() += lam * (v * ws.row);
    out.noalias() -= lam * (ws.col * v.adjoint());
  }
}

void JumpOperator::add_dissipator(const Matrix& rho, Matrix& out,
                                  RhsWorkspace&) const {
  const Matrix l = matrix();
  const Matrix ldl = l.adjoint() * l;
  out.noalias() += l * rho * l.adjoint();
  out.noalias() -= 0.5 * (ldl * rho);
  out.noalias() -= 0.5 * (rho * ldl);
}

DenseJumpOperator::DenseJumpOperator(Matrix l) : l_(std::move(l)) {
  if (l_.rows() != l_.cols() || l_.rows() < 1)
    throw std::invalid_argument("jump operator must be square");
  ldl_ = l_.adjoint() * l_;
}

void DenseJumpOperator::add_dissipator(const Matrix& rho, Matrix& out,
                                       RhsWorkspace&) const {
  out.noalias() += l_ * rho * l_.adjoint();
  out.noalias() -= 0.5 * (ldl_ * rho);
  out.noalias() -= 0.5 * (rho * ldl_);
}

ScaledProjectorJump::ScaledProjectorJump(double g, Vector v)
    : g_(g), v_(std::move(v)) {
  if (!(g_ >= 0.0) || !std::isfinite(g_))
    throw std::invalid_argument("jump coefficient must be finite and >= 0");
  if (v_.size() < 1) throw std::invalid_argument("jump direction is empty");
  if (std::abs(v_.norm() - 1.0) > tol::kStateNorm)
    throw std::invalid_argument("jump direction must be normalized");
}

Matrix ScaledProjectorJump::matrix() const {
  return g_ * (v_ * v_.adjoint());
}

void ScaledProjectorJump::add_dissipator(const Matrix& rho, Matrix& out,
                                         RhsWorkspace& ws) const {
  const Eigen::Index n = v_.size();
  prepare(ws, n);
  const double g2 = g_ * g_;
  if (g2 == 0.0) return;
  // L = g |v><v|:  D(rho) = g^2 ((v^dag rho v) |v><v| - 1/2 (|v><v| rho + rho |v><v|))
  ws.row.noalias() = v_.adjoint() * rho;
  ws.col.noalias() = rho * v_;
  const Complex q = ws.row * v_;
  out.noalias() += (g2 * q) * (v_ * v_.adjoint());
  out.noalias() -= (0.5 * g2) * (v_ * ws.row);
  out.noalias() -= (0.5 * g2) * (ws.col * v_.adjoint());
}

Eigen::Index LindbladGenerator::dim() const {
  if (!hamiltonian) throw std::invalid_argument("generator has no hamiltonian");
  return hamiltonian->dim();
}

void LindbladGenerator::validate() const {
  const Eigen::Index n = dim();
  for (const auto& jump : jump_ops) {
    if (!jump) throw std::invalid_argument("generator holds a null jump operator");
    if (jump->dim() != n)
      throw std::invalid_argument("jump operator dimension mismatch");
  }
}

void LindbladGenerator::rhs(double t, const Matrix& rho, Matrix& out,
                            RhsWorkspace& ws) const {
  out.setZero(rho.rows(), rho.cols());
  hamiltonian->add_commutator(t, rho, out, ws);
  for (const auto& jump : jump_ops) jump->add_dissipator(rho, out, ws);
}

Matrix lindblad_rhs(const LindbladGenerator& gen, const DensityMatrix& rho,
                    double t) {
  gen.validate();
  if (rho.dim() != gen.dim())
    throw std::invalid_argument("state dimension does not match generator");
  Matrix out;
  RhsWorkspace ws;
  gen.rhs(t, rho.matrix(), out, ws);
  if (std::abs(out.trace()) > tol::kTracelessRhs)
    throw std::logic_error("master equation right-hand side is not traceless");
  return out;
}

}  // namespace oraclesim
