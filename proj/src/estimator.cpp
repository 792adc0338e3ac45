#include "nlmmse/estimator.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nlmmse/errors.hpp"
#include "nlmmse/linalg.hpp"
#include "nlmmse/moments.hpp"

namespace nlmmse {

namespace {

double ipow(double base, int exp) {
  double r = 1.0;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// Raw moment sums of single measurements and receiver pairs, written as the
// f/g helper expansions (PC) and their I-weighted generalization (PMT/APD).
class MomentModel {
 public:
  explicit MomentModel(const ExperimentConfig& cfg)
      : cfg_(cfg),
        ctx_{cfg.ppm_order(), cfg.channel.background_mean},
        inv_m_(1.0 / static_cast<double>(cfg.ppm_order())),
        mixture_(cfg.channel.receiver_kind != ReceiverKind::pc) {
    if (cfg.augment.max_moment_order() > kMaxStirlingOrder) {
      throw RangeError("moment order " + std::to_string(cfg.augment.max_moment_order()) +
                       " exceeds the Stirling table");
    }
  }

  double lambda(int i) const { return cfg_.channel.signal_means[static_cast<std::size_t>(i)]; }

  // E[z_i^a]
  double marginal(int a, int i) const {
    double sum = 0.0;
    for_each_term(a, [&](double weight, int order) {
      for (int p = 0; p <= order; ++p) sum += weight * f_helper(order, p, lambda(i), ctx_);
    });
    return inv_m_ * sum;
  }

  // E[z_i^a | B = 1]
  double given_pulse(int a, int i) const {
    const double rate = lambda(i) + ctx_.background_mean;
    double sum = 0.0;
    for_each_term(a, [&](double weight, int order) {
      for (int p = 0; p <= order; ++p) sum += weight * stirling2(order, p) * ipow(rate, p);
    });
    return sum;
  }

  // E[z_i^a z_j^b] for i != j (conditionally independent receivers).
  double cross(int a, int b, int i, int j) const {
    double sum = 0.0;
    for_each_term(a, [&](double wa, int oa) {
      for_each_term(b, [&](double wb, int ob) {
        double inner = 0.0;
        for (int p1 = 0; p1 <= oa; ++p1) {
          for (int p2 = 0; p2 <= ob; ++p2) inner += g_helper(oa, ob, p1, p2, lambda(i), lambda(j), ctx_);
        }
        sum += wa * wb * inner;
      });
    });
    return inv_m_ * sum;
  }

 private:
  // Calls fn(weight, poisson_order) for every term of E[z^a | n] as a
  // polynomial in the photon count n: a single unit term for PC, the
  // I(a,k,l) n^{a-k-l} expansion for the Poisson-Gaussian mixture.
  template <typename Fn>
  void for_each_term(int a, Fn&& fn) const {
    if (!mixture_) {
      fn(1.0, a);
      return;
    }
    for (int k = 0; 2 * k <= a; ++k) {
      for (int l = 0; l <= k; ++l) fn(coeff_I(a, k, l, cfg_.channel.detector), a - k - l);
    }
  }

  const ExperimentConfig& cfg_;
  MomentContext ctx_;
  double inv_m_;
  bool mixture_;
};

Eigen::VectorXd means_for(const MomentModel& model, int a, int k) {
  Eigen::VectorXd v(k);
  for (int i = 0; i < k; ++i) v(i) = model.marginal(a, i);
  return v;
}

Eigen::MatrixXd block_for(const MomentModel& model, int a, int b, int k) {
  const Eigen::VectorXd ea = means_for(model, a, k);
  const Eigen::VectorXd eb = a == b ? ea : means_for(model, b, k);
  Eigen::MatrixXd p(k, k);
  for (int i = 0; i < k; ++i) {
    p(i, i) = model.marginal(a + b, i) - ea(i) * eb(i);
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      if (a == b && j < i) {
        p(i, j) = p(j, i);
        continue;
      }
      p(i, j) = model.cross(a, b, i, j) - ea(i) * eb(j);
    }
  }
  return p;
}

void check_config(const ExperimentConfig& cfg) {
  cfg.channel.validate();
  cfg.modulation.validate();
  cfg.augment.validate(cfg.channel.receiver_kind);
}

}  // namespace

Eigen::MatrixXd CovarianceBlocks::p_xx() const {
  if (!augmented()) return p_ym;
  const Eigen::Index k = p_ym.rows();
  Eigen::MatrixXd full(2 * k, 2 * k);
  full.topLeftCorner(k, k) = p_ym;
  full.topRightCorner(k, k) = *p_ymyn;
  full.bottomLeftCorner(k, k) = p_ymyn->transpose();
  full.bottomRightCorner(k, k) = *p_yn;
  return full;
}

CovarianceBlocks CovarianceBlocks::linear_part() const {
  CovarianceBlocks out;
  out.receivers = receivers;
  out.ppm_order = ppm_order;
  out.mean_x = mean_x.head(receivers);
  out.p_bx = p_bx.head(receivers);
  out.p_ym = p_ym;
  out.p_b = p_b;
  return out;
}

Eigen::VectorXd mean_augmented(const ExperimentConfig& cfg) {
  check_config(cfg);
  const MomentModel model(cfg);
  const int k = cfg.channel.receivers();
  const auto orders = cfg.augment.orders();
  Eigen::VectorXd out(k * static_cast<int>(orders.size()));
  for (std::size_t o = 0; o < orders.size(); ++o) {
    out.segment(static_cast<Eigen::Index>(o) * k, k) = means_for(model, orders[o], k);
  }
  return out;
}

Eigen::VectorXd cross_cov_bx(const ExperimentConfig& cfg) {
  check_config(cfg);
  const MomentModel model(cfg);
  const int k = cfg.channel.receivers();
  const double inv_m = 1.0 / static_cast<double>(cfg.ppm_order());
  const auto orders = cfg.augment.orders();
  Eigen::VectorXd out(k * static_cast<int>(orders.size()));
  for (std::size_t o = 0; o < orders.size(); ++o) {
    for (int i = 0; i < k; ++i) {
      out(static_cast<Eigen::Index>(o) * k + i) =
          inv_m * model.given_pulse(orders[o], i) - inv_m * model.marginal(orders[o], i);
    }
  }
  return out;
}

Eigen::MatrixXd cov_block(const ExperimentConfig& cfg, int a, int b) {
  check_config(cfg);
  if (a < 1 || b < 1) throw std::invalid_argument("cov_block: factors must be >= 1");
  if (a + b > kMaxStirlingOrder) throw RangeError("cov_block: order a+b exceeds the Stirling table");
  const MomentModel model(cfg);
  return block_for(model, a, b, cfg.channel.receivers());
}

CovarianceBlocks assemble_blocks(const ExperimentConfig& cfg) {
  check_config(cfg);
  const MomentModel model(cfg);
  const int k = cfg.channel.receivers();
  const int m = cfg.augment.m;
  const double inv_m = 1.0 / static_cast<double>(cfg.ppm_order());

  CovarianceBlocks out;
  out.receivers = k;
  out.ppm_order = cfg.ppm_order();
  out.p_b = inv_m - inv_m * inv_m;

  const auto orders = cfg.augment.orders();
  const int dim = k * static_cast<int>(orders.size());
  out.mean_x.resize(dim);
  out.p_bx.resize(dim);
  for (std::size_t o = 0; o < orders.size(); ++o) {
    for (int i = 0; i < k; ++i) {
      const auto idx = static_cast<Eigen::Index>(o) * k + i;
      out.mean_x(idx) = model.marginal(orders[o], i);
      out.p_bx(idx) = inv_m * model.given_pulse(orders[o], i) - inv_m * out.mean_x(idx);
    }
  }
  out.p_ym = block_for(model, m, m, k);
  if (cfg.augment.augmented) {
    const int n = cfg.augment.n;
    out.p_yn = block_for(model, n, n, k);
    out.p_ymyn = block_for(model, m, n, k);
  }
  return out;
}

EstimatorCoefficients build_estimator(const CovarianceBlocks& blocks) {
  EstimatorCoefficients out;
  const double inv_m = 1.0 / static_cast<double>(blocks.ppm_order);
  if (blocks.p_bx.isZero(0.0)) {
    out.alpha = Eigen::VectorXd::Zero(blocks.p_bx.size());
    out.intercept = inv_m;
    return out;
  }
  const SpdSolver solver(blocks.p_xx());
  out.alpha = solver.solve(Eigen::VectorXd(blocks.p_bx));
  out.ridge = solver.ridge();
  out.intercept = inv_m - out.alpha.dot(blocks.mean_x);
  return out;
}

EstimatorCoefficients build_estimator(const ExperimentConfig& cfg) {
  const CovarianceBlocks blocks = assemble_blocks(cfg);
  try {
    return build_estimator(blocks);
  } catch (const ConditioningError& e) {
    throw ConditioningError(std::string(e.what()) + " [" + cfg.describe() + "]");
  }
}

MseDetail analytical_mse_linear_detail(const CovarianceBlocks& blocks) {
  const Eigen::VectorXd p_bym = blocks.p_bx.head(blocks.receivers);
  if (p_bym.isZero(0.0)) return {blocks.p_b, false};
  const SpdSolver solver(blocks.p_ym);
  return {blocks.p_b - p_bym.dot(solver.solve(p_bym)), solver.regularized()};
}

double analytical_mse_linear(const CovarianceBlocks& blocks) { return analytical_mse_linear_detail(blocks).value; }

MseDetail analytical_mse_block_detail(const CovarianceBlocks& blocks) {
  if (!blocks.augmented()) return analytical_mse_linear_detail(blocks);
  const int k = blocks.receivers;
  const Eigen::VectorXd p_bym = blocks.p_bx.head(k);
  const Eigen::VectorXd p_byn = blocks.p_bx.tail(k);
  if (blocks.p_bx.isZero(0.0)) return {blocks.p_b, false};

  const SpdSolver ym(blocks.p_ym);
  const Eigen::VectorXd u = ym.solve(p_bym);                           // P_ym^{-1} P_Bym^T
  const Eigen::MatrixXd w = ym.solve(Eigen::MatrixXd(*blocks.p_ymyn));  // P_ym^{-1} P_ymyn
  const double d_linear = blocks.p_b - p_bym.dot(u);

  Eigen::MatrixXd schur = *blocks.p_yn - blocks.p_ymyn->transpose() * w;
  schur = 0.5 * (schur + schur.transpose());
  const Eigen::VectorXd r = p_byn - blocks.p_ymyn->transpose() * u;
  const SpdSolver sc(schur);
  return {d_linear - r.dot(sc.solve(r)), ym.regularized() || sc.regularized()};
}

double analytical_mse_block(const CovarianceBlocks& blocks) { return analytical_mse_block_detail(blocks).value; }

double analytical_mse_direct(const CovarianceBlocks& blocks) {
  if (blocks.p_bx.isZero(0.0)) return blocks.p_b;
  const SpdSolver solver(blocks.p_xx());
  return blocks.p_b - blocks.p_bx.dot(solver.solve(Eigen::VectorXd(blocks.p_bx)));
}

void augment_measurements(std::span<const double> z, const AugmentSpec& spec, Eigen::VectorXd& out) {
  const auto k = static_cast<Eigen::Index>(z.size());
  out.resize(spec.augmented ? 2 * k : k);
  for (Eigen::Index i = 0; i < k; ++i) {
    out(i) = ipow(z[static_cast<std::size_t>(i)], spec.m);
    if (spec.augmented) out(k + i) = ipow(z[static_cast<std::size_t>(i)], spec.n);
  }
}

double estimate(const EstimatorCoefficients& coeffs, std::span<const double> z, const AugmentSpec& spec) {
  const auto k = static_cast<Eigen::Index>(z.size());
  const Eigen::Index expected = spec.augmented ? 2 * k : k;
  if (coeffs.alpha.size() != expected) {
    throw std::invalid_argument("estimate: measurement vector of length " + std::to_string(k) +
                                " does not match estimator of length " + std::to_string(coeffs.alpha.size()));
  }
  double acc = coeffs.intercept;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double zi = z[static_cast<std::size_t>(i)];
    acc += coeffs.alpha(i) * ipow(zi, spec.m);
    if (spec.augmented) acc += coeffs.alpha(k + i) * ipow(zi, spec.n);
  }
  if (!std::isfinite(acc)) {
    std::ostringstream os;
    os << "estimate: non-finite output for sample z = [";
    for (std::size_t i = 0; i < z.size(); ++i) os << (i ? ", " : "") << z[i];
    os << "]";
    throw std::runtime_error(os.str());
  }
  return acc;
}

}  // namespace nlmmse
