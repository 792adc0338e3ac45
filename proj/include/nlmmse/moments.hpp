#pragma once

#include <cstdint>

namespace nlmmse {

/// Highest row of the exact Stirling table.
inline constexpr int kMaxStirlingOrder = 40;

/// Detector parameters in electron-normalized units: a detected photon
/// contributes a Gaussian of mean `gain` and variance `shot_sigma^2`, and the
/// thermal floor is Gaussian with variance `thermal_sigma^2`. The physical
/// electron charge is carried only for reporting.
struct DetectorParams {
  double gain = 1.0;
  double electron_charge = 1.602e-19;
  double shot_sigma = 0.0;
  double thermal_sigma = 1.0;

  void validate() const;
};

/// Prior and background shared by every helper evaluation.
struct MomentContext {
  int ppm_order = 2;  // M; OOK is M = 2
  double background_mean = 0.0;

  void validate() const;
};

/// Stirling number of the second kind s(k, l), exact up to k = 40.
unsigned __int128 stirling2_exact(int k, int l);
double stirling2(int k, int l);

/// E[z^k] for z ~ Poisson(lambda).
double poisson_raw_moment(int k, double lambda);

/// E[z^n] for z ~ N(mu, var).
double gaussian_raw_moment(int n, double mu, double var);

/// Weight of n^{x-y-z} in E[(nA + G)^x | n] where G ~ N(0, n sigma^2 + sigma0^2):
/// C(x,2y) A^{x-2y} sigma^{2(y-z)} sigma0^{2z} C(y,z) (2y)!/(y! 2^y).
double coeff_I(int x, int y, int z, const DetectorParams& det);

/// E[z^n] for the Poisson(lambda)-Gaussian mixture of a PMT/APD output.
double pg_raw_moment(int n, double lambda, const DetectorParams& det);

/// s(x,y) [(lambda_b + z)^y + (M-1) lambda_b^y]
double f_helper(int x, int y, double z, const MomentContext& ctx);

/// s(u,w) s(v,x) [(lambda_b + y)^w (lambda_b + z)^x + (M-1) lambda_b^{w+x}]
double g_helper(int u, int v, int w, int x, double y, double z, const MomentContext& ctx);

double binomial(int n, int k);

}  // namespace nlmmse
