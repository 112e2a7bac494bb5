#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "oraclesim/quantum.hpp"
#include "oraclesim/types.hpp"

namespace oraclesim {

// Scratch buffers threaded through right-hand-side evaluations so the hot
// loop performs no allocations.
struct RhsWorkspace {
  Eigen::RowVectorXcd row;
  Vector col;
};

/* Hermitian generator of coherent evolution, possibly time dependent.
   Implementations may exploit structure; the dense `matrix(t)` form is always
   available for tests and diagnostics. */
class Hamiltonian {
 public:
  virtual ~Hamiltonian() = default;
  virtual Eigen::Index dim() const = 0;
  virtual bool time_dependent() const { return false; }
  virtual Matrix matrix(double t) const = 0;

  // out += H(t) x
  virtual void apply(double t, const Vector& x, Vector& out) const;
  // out += -i [H(t), rho]
  virtual void add_commutator(double t, const Matrix& rho, Matrix& out,
                              RhsWorkspace& ws) const;
};

// Constant dense Hamiltonian.
class DenseHamiltonian : public Hamiltonian {
 public:
  explicit DenseHamiltonian(HermitianOperator h);
  Eigen::Index dim() const override { return h_.rows(); }
  Matrix matrix(double) const override { return h_; }
  void apply(double t, const Vector& x, Vector& out) const override;
  void add_commutator(double t, const Matrix& rho, Matrix& out,
                      RhsWorkspace& ws) const override;

 private:
  Matrix h_;
};

// Time-dependent Hamiltonian from a dense provider callback.
class CallbackHamiltonian : public Hamiltonian {
 public:
  CallbackHamiltonian(Eigen::Index dim, std::function<Matrix(double)> provider);
  Eigen::Index dim() const override { return dim_; }
  bool time_dependent() const override { return true; }
  Matrix matrix(double t) const override;

 private:
  Eigen::Index dim_;
  std::function<Matrix(double)> provider_;
};

/* H = sum_k c_k |v_k><v_k| with real coefficients and unit vectors.
   Commutators cost O(N^2) per term instead of O(N^3). */
class ProjectorSumHamiltonian : public Hamiltonian {
 public:
  ProjectorSumHamiltonian(Eigen::Index dim, std::vector<double> coeffs,
                          std::vector<Vector> vectors);
  Eigen::Index dim() const override { return dim_; }
  Matrix matrix(double) const override;
  void apply(double t, const Vector& x, Vector& out) const override;
  void add_commutator(double t, const Matrix& rho, Matrix& out,
                      RhsWorkspace& ws) const override;

 private:
  Eigen::Index dim_;
  std::vector<double> coeffs_;
  std::vector<Vector> vectors_;
};

/* Collapse operator L of a Lindblad dissipator,
   D(rho) = L rho L^dag - 1/2 {L^dag L, rho}. */
class JumpOperator {
 public:
  virtual ~JumpOperator() = default;
  virtual Eigen::Index dim() const = 0;
  virtual Matrix matrix() const = 0;
  // out += D(rho)
  virtual void add_dissipator(const Matrix& rho, Matrix& out,
                              RhsWorkspace& ws) const;
};

class DenseJumpOperator : public JumpOperator {
 public:
  explicit DenseJumpOperator(Matrix l);
  Eigen::Index dim() const override { return l_.rows(); }
  Matrix matrix() const override { return l_; }
  void add_dissipator(const Matrix& rho, Matrix& out,
                      RhsWorkspace& ws) const override;

 private:
  Matrix l_;
  Matrix ldl_;  // cached L^dag L
};

// L = g |v><v| with g real and |v| = 1; dissipator costs O(N^2).
class ScaledProjectorJump : public JumpOperator {
 public:
  ScaledProjectorJump(double g, Vector v);
  Eigen::Index dim() const override { return v_.size(); }
  Matrix matrix() const override;
  double coefficient() const { return g_; }
  const Vector& direction() const { return v_; }
  void add_dissipator(const Matrix& rho, Matrix& out,
                      RhsWorkspace& ws) const override;

 private:
  double g_;
  Vector v_;
};

/* Generator of the master equation
     drho/dt = -i[H(t), rho] + sum_i (L_i rho L_i^dag - 1/2 {L_i^dag L_i, rho}).
   The right-hand side is traceless and Hermiticity preserving for any
   Hermitian input. */
struct LindbladGenerator {
  std::shared_ptr<const Hamiltonian> hamiltonian;
  std::vector<std::shared_ptr<const JumpOperator>> jump_ops;

  Eigen::Index dim() const;
  void validate() const;
  // out = full right-hand side at time t.
  void rhs(double t, const Matrix& rho, Matrix& out, RhsWorkspace& ws) const;
};

// Checked single evaluation; asserts |tr(out)| <= tol::kTracelessRhs.
Matrix lindblad_rhs(const LindbladGenerator& gen, const DensityMatrix& rho,
                    double t);

}  // namespace oraclesim
