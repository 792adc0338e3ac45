#include "nlmmse/linalg.hpp"

#include <cmath>
#include <string>

#include "nlmmse/errors.hpp"

namespace nlmmse {

SpdSolver::SpdSolver(const Eigen::MatrixXd& a) {
  const Eigen::Index dim = a.rows();
  if (dim == 0 || a.cols() != dim) throw ConditioningError("SpdSolver: matrix must be square and non-empty");
  if (!a.allFinite()) throw ConditioningError("SpdSolver: matrix has non-finite entries");

  scale_.resize(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double d = a(i, i);
    scale_(i) = d > 0.0 ? 1.0 / std::sqrt(d) : 1.0;
  }
  Eigen::MatrixXd eq = scale_.asDiagonal() * a * scale_.asDiagonal();
  eq = 0.5 * (eq + eq.transpose());

  llt_.compute(eq);
  if (llt_.info() == Eigen::Success) {
    rcond_ = llt_.rcond();
    if (rcond_ >= kMinRcond) return;
  }

  const double mean_diag = eq.trace() / static_cast<double>(dim);
  for (double eps = kFirstRidge; eps <= kLastRidge * 1.0001; eps *= 10.0) {
    Eigen::MatrixXd shifted = eq;
    shifted.diagonal().array() += eps * mean_diag;
    llt_.compute(shifted);
    if (llt_.info() == Eigen::Success && mean_diag > 0.0) {
      ridge_ = eps;
      rcond_ = llt_.rcond();
      return;
    }
  }
  throw ConditioningError("SpdSolver: " + std::to_string(dim) + "x" + std::to_string(dim) +
                          " covariance not positive definite after ridge 1e-8");
}

Eigen::MatrixXd SpdSolver::solve(const Eigen::MatrixXd& rhs) const {
  Eigen::MatrixXd scaled = scale_.asDiagonal() * rhs;
  return scale_.asDiagonal() * llt_.solve(scaled);
}

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd scaled = scale_.cwiseProduct(rhs);
  return scale_.cwiseProduct(llt_.solve(scaled));
}

}  // namespace nlmmse
