#pragma once

#include <Eigen/Dense>

namespace nlmmse {

/// Symmetric positive definite solve with Jacobi equilibration and ridge
/// escalation. The matrix is factorized as D A D (D = diag(A)^{-1/2}); if the
/// plain Cholesky fails or is too ill-conditioned, eps * trace/dim is added to
/// the equilibrated diagonal for eps = 1e-12, 1e-11, ..., 1e-8.
class SpdSolver {
 public:
  static constexpr double kMinRcond = 1e-14;
  static constexpr double kFirstRidge = 1e-12;
  static constexpr double kLastRidge = 1e-8;

  /// Throws ConditioningError when no ridge level yields a factorization.
  explicit SpdSolver(const Eigen::MatrixXd& a);

  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  /// Ridge level applied (0 when none was needed).
  double ridge() const noexcept { return ridge_; }
  bool regularized() const noexcept { return ridge_ > 0.0; }
  double rcond() const noexcept { return rcond_; }

 private:
  Eigen::VectorXd scale_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double ridge_ = 0.0;
  double rcond_ = 0.0;
};

}  // namespace nlmmse
