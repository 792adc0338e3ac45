#include "nlmmse/moments.hpp"

#include <array>
#include <cmath>
#include <string>

#include "nlmmse/errors.hpp"

namespace nlmmse {

namespace {

using u128 = unsigned __int128;
using StirlingTable = std::array<std::array<u128, kMaxStirlingOrder + 1>, kMaxStirlingOrder + 1>;

const StirlingTable& stirling_table() {
  static const StirlingTable table = [] {
    StirlingTable t{};
    t[0][0] = 1;
    for (int k = 1; k <= kMaxStirlingOrder; ++k) {
      for (int l = 1; l <= k; ++l) {
        t[k][l] = static_cast<u128>(l) * t[k - 1][l] + t[k - 1][l - 1];
      }
    }
    return t;
  }();
  return table;
}

void check_order(int k, const char* what) {
  if (k < 0 || k > kMaxStirlingOrder) {
    throw RangeError(std::string(what) + ": order " + std::to_string(k) +
                     " outside [0, " + std::to_string(kMaxStirlingOrder) + "]");
  }
}

// Integer powers; 0^0 = 1.
double ipow(double base, int exp) {
  double result = 1.0;
  for (int i = 0; i < exp; ++i) result *= base;
  return result;
}

// (2k)! / (k! 2^k) = (2k-1)!!
double double_factorial_odd(int k) {
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r *= static_cast<double>(2 * j - 1);
  return r;
}

}  // namespace

void DetectorParams::validate() const {
  if (!(gain >= 1.0) || !std::isfinite(gain)) throw std::invalid_argument("detector gain must be >= 1");
  if (!(shot_sigma >= 0.0) || !std::isfinite(shot_sigma)) throw std::invalid_argument("shot sigma must be >= 0");
  if (!(thermal_sigma > 0.0) || !std::isfinite(thermal_sigma))
    throw std::invalid_argument("thermal sigma must be > 0");
  if (!(electron_charge > 0.0)) throw std::invalid_argument("electron charge must be > 0");
}

void MomentContext::validate() const {
  if (ppm_order < 2) throw std::invalid_argument("PPM order must be >= 2");
  if (!(background_mean >= 0.0) || !std::isfinite(background_mean))
    throw std::invalid_argument("background mean must be finite and >= 0");
}

u128 stirling2_exact(int k, int l) {
  check_order(k, "stirling2");
  if (l < 0 || l > k) return 0;
  return stirling_table()[k][l];
}

double stirling2(int k, int l) { return static_cast<double>(stirling2_exact(k, l)); }

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r = r * static_cast<double>(n - k + j) / static_cast<double>(j);
  return std::round(r);
}

double poisson_raw_moment(int k, double lambda) {
  check_order(k, "poisson_raw_moment");
  // Horner over the Stirling row.
  double acc = 0.0;
  for (int l = k; l >= 0; --l) acc = acc * lambda + stirling2(k, l);
  return acc;
}

double gaussian_raw_moment(int n, double mu, double var) {
  if (n < 0) throw RangeError("gaussian_raw_moment: negative order");
  double sum = 0.0;
  for (int k = 0; 2 * k <= n; ++k) {
    sum += binomial(n, 2 * k) * ipow(mu, n - 2 * k) * double_factorial_odd(k) * ipow(var, k);
  }
  return sum;
}

double coeff_I(int x, int y, int z, const DetectorParams& det) {
  if (x < 0 || y < 0 || z < 0 || 2 * y > x || z > y) {
    throw RangeError("coeff_I: indices (" + std::to_string(x) + "," + std::to_string(y) + "," +
                     std::to_string(z) + ") violate y <= x/2, z <= y");
  }
  const double shot_var = det.shot_sigma * det.shot_sigma;
  const double thermal_var = det.thermal_sigma * det.thermal_sigma;
  return binomial(x, 2 * y) * ipow(det.gain, x - 2 * y) * ipow(shot_var, y - z) * ipow(thermal_var, z) *
         binomial(y, z) * double_factorial_odd(y);
}

double pg_raw_moment(int n, double lambda, const DetectorParams& det) {
  check_order(n, "pg_raw_moment");
  double sum = 0.0;
  for (int k = 0; 2 * k <= n; ++k) {
    for (int l = 0; l <= k; ++l) {
      sum += coeff_I(n, k, l, det) * poisson_raw_moment(n - k - l, lambda);
    }
  }
  return sum;
}

double f_helper(int x, int y, double z, const MomentContext& ctx) {
  const double s = stirling2(x, y);
  if (s == 0.0) return 0.0;
  const double lb = ctx.background_mean;
  return s * (ipow(lb + z, y) + static_cast<double>(ctx.ppm_order - 1) * ipow(lb, y));
}

double g_helper(int u, int v, int w, int x, double y, double z, const MomentContext& ctx) {
  const double s = stirling2(u, w) * stirling2(v, x);
  if (s == 0.0) return 0.0;
  const double lb = ctx.background_mean;
  return s * (ipow(lb + y, w) * ipow(lb + z, x) + static_cast<double>(ctx.ppm_order - 1) * ipow(lb, w + x));
}

}  // namespace nlmmse
