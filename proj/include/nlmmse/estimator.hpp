#pragma once

#include <optional>
#include <span>

#include <Eigen/Dense>

#include "nlmmse/experiment.hpp"

namespace nlmmse {

/// First and second order statistics of the augmented measurement vector.
struct CovarianceBlocks {
  int receivers = 0;
  int ppm_order = 2;
  Eigen::VectorXd mean_x;  // [E y_m ; E y_n]
  Eigen::VectorXd p_bx;    // [P_By_m , P_By_n]
  Eigen::MatrixXd p_ym;
  std::optional<Eigen::MatrixXd> p_yn;
  std::optional<Eigen::MatrixXd> p_ymyn;
  double p_b = 0.25;

  bool augmented() const noexcept { return p_yn.has_value(); }
  /// Full P_xx assembled from the blocks.
  Eigen::MatrixXd p_xx() const;
  /// The y_m-only statistics (conventional receiver).
  CovarianceBlocks linear_part() const;
};

struct EstimatorCoefficients {
  Eigen::VectorXd alpha;
  double intercept = 0.0;
  double ridge = 0.0;

  bool regularized() const noexcept { return ridge > 0.0; }
};

struct MseDetail {
  double value = 0.0;
  bool regularized = false;
};

/// E[y_m] followed by E[y_n] when augmented.
Eigen::VectorXd mean_augmented(const ExperimentConfig& cfg);

/// P_Bx = R_Bx - E[x] / M.
Eigen::VectorXd cross_cov_bx(const ExperimentConfig& cfg);

/// P_{y_a y_b}, K x K.
Eigen::MatrixXd cov_block(const ExperimentConfig& cfg, int a, int b);

CovarianceBlocks assemble_blocks(const ExperimentConfig& cfg);

/// alpha = P_xx^{-1} P_Bx^T, b' = 1/M - alpha . E[x].
EstimatorCoefficients build_estimator(const CovarianceBlocks& blocks);

/// Same, but conditioning failures name the configuration.
EstimatorCoefficients build_estimator(const ExperimentConfig& cfg);

/// Two-stage (Schur complement) MSE of the augmented receiver.
MseDetail analytical_mse_block_detail(const CovarianceBlocks& blocks);
double analytical_mse_block(const CovarianceBlocks& blocks);

/// P_B - P_Bx P_xx^{-1} P_Bx^T in one joint solve.
double analytical_mse_direct(const CovarianceBlocks& blocks);

/// MSE of the conventional receiver on the y_m block alone.
MseDetail analytical_mse_linear_detail(const CovarianceBlocks& blocks);
double analytical_mse_linear(const CovarianceBlocks& blocks);

/// Builds x from raw measurements z and returns alpha . x + b'.
double estimate(const EstimatorCoefficients& coeffs, std::span<const double> z, const AugmentSpec& spec);

/// x = [z^m, z^n] written into `out` (resized as needed).
void augment_measurements(std::span<const double> z, const AugmentSpec& spec, Eigen::VectorXd& out);

}  // namespace nlmmse
