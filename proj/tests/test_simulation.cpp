#include <cmath>
#include <vector>

#include "doctest.h"
#include "nlmmse/estimator.hpp"
#include "nlmmse/simulation.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace nlmmse;
using support::pc_config;
using support::physical_config;

namespace {

ExperimentConfig with_trials(ExperimentConfig cfg, long long trials, std::uint64_t seed) {
  cfg.trials = trials;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("threshold detector") {
  CHECK(threshold_detect(0.5) == 1);
  CHECK(threshold_detect(0.4999999) == 0);
  CHECK(threshold_detect(-3.0) == 0);
  CHECK(threshold_detect(7.0) == 1);
}

TEST_CASE("Monte Carlo MSE agrees with the analytical value") {
  struct Case {
    ExperimentConfig cfg;
    const char* name;
  };
  const std::vector<Case> cases{
      {pc_config(2, 2.0, 0.02, AugmentSpec::pair(1, 2)), "pc K=2 (1,2)"},
      {pc_config(3, 0.8, 0.02, AugmentSpec::pair(1, 3)), "pc K=3 (1,3)"},
      {pc_config(1, 3.0, 0.02, AugmentSpec::conventional(1)), "pc K=1 linear"},
      {physical_config(ReceiverKind::pmt, 2, 0.0, AugmentSpec::pair(1, 2)), "pmt K=2 (1,2)"},
      {physical_config(ReceiverKind::apd, 3, 5.0, AugmentSpec::conventional(1)), "apd K=3 linear"},
      {pc_config(2, 2.0, 0.02, AugmentSpec::pair(1, 2), Modulation::ppm(4)), "pc 4-PPM (1,2)"},
  };
  std::uint64_t seed = 11;
  for (const auto& c : cases) {
    CAPTURE(c.name);
    const auto cfg = with_trials(c.cfg, 60000, seed++);
    const double d = analytical_mse_block(assemble_blocks(cfg));
    const McResult r = run_mc_mse(cfg);
    CHECK(r.trials == 60000);
    CHECK(r.mse_stderr > 0.0);
    CHECK(std::abs(r.mse - d) <= 3.0 * r.mse_stderr);
  }
}

TEST_CASE("no signal gives the prior variance") {
  for (auto mod : {Modulation::ook(), Modulation::ppm(4)}) {
    const auto cfg = with_trials(pc_config(2, 0.0, 0.05, AugmentSpec::pair(1, 2), mod), 20000, 3);
    const McResult r = run_mc_mse(cfg);
    const double pb = 1.0 / mod.order - 1.0 / (mod.order * mod.order);
    // alpha = 0 so the estimate is the prior mean; OOK still varies with the bits
    if (mod.is_ook())
      CHECK(std::abs(r.mse - pb) < 1e-12);
    else
      CHECK(r.mse == doctest::Approx(pb).epsilon(1e-12));
  }
}

TEST_CASE("PPM pulse positions are uniform") {
  const auto cfg = with_trials(pc_config(2, 1.0, 0.02, AugmentSpec::pair(1, 2), Modulation::ppm(4)), 40000, 5);
  const McResult r = run_mc_mse(cfg);
  REQUIRE(r.slot_occupancy.size() == 4);
  long long total = 0;
  for (long long c : r.slot_occupancy) {
    total += c;
    const double expected = 40000.0 / 4, sd = std::sqrt(40000.0 * 0.25 * 0.75);
    CHECK(std::abs(static_cast<double>(c) - expected) <= 4.0 * sd);
  }
  CHECK(total == 40000);
}

TEST_CASE("the estimator is unbiased over the prior") {
  for (auto mod : {Modulation::ook(), Modulation::ppm(8)}) {
    const auto cfg = with_trials(pc_config(3, 1.5, 0.02, AugmentSpec::pair(1, 2), mod), 50000, 21);
    const McResult r = run_mc_mse(cfg);
    CHECK(std::abs(r.mean_estimate - 1.0 / mod.order) <= 4.0 * r.mean_estimate_stderr);
  }
}

TEST_CASE("PC maximum likelihood matches a brute-force likelihood ratio") {
  auto cfg = pc_config(2, 2.0, 0.02, AugmentSpec::pair(1, 2));
  cfg.channel.signal_means = {2.0, 1.3};
  const double lb = cfg.channel.background_mean;
  for (int z1 = 0; z1 <= 30; ++z1)
    for (int z2 = 0; z1 + z2 <= 30; ++z2) {
      const double l1 = std::log(oracle::poisson_pmf(z1, 2.0 + lb)) + std::log(oracle::poisson_pmf(z2, 1.3 + lb));
      const double l0 = std::log(oracle::poisson_pmf(z1, lb)) + std::log(oracle::poisson_pmf(z2, lb));
      const std::vector<double> z{static_cast<double>(z1), static_cast<double>(z2)};
      CAPTURE(z1);
      CAPTURE(z2);
      CHECK(ml_detect(z, cfg) == (l1 > l0 ? 1 : 0));
    }
  // ties decide 0
  auto silent = pc_config(2, 0.0, 0.02, AugmentSpec::pair(1, 2));
  const std::vector<double> z{3.0, 1.0};
  CHECK(ml_detect(z, silent) == 0);
}

TEST_CASE("PMT/APD maximum likelihood follows the mixture likelihood") {
  for (auto kind : {ReceiverKind::pmt, ReceiverKind::apd}) {
    const auto cfg = physical_config(kind, 2, 1.0, AugmentSpec::pair(1, 2));
    const auto& det = cfg.channel.detector;
    const double lb = cfg.channel.background_mean, ls = cfg.channel.signal_means[0];
    int ones = 0;
    for (double z1 = -1500.0; z1 <= 1500.0; z1 += 37.0)
      for (double z2 = -700.0; z2 <= 900.0; z2 += 113.0) {
        const double l1 = pg_log_likelihood(z1, ls + lb, det, 500) + pg_log_likelihood(z2, ls + lb, det, 500);
        const double l0 = pg_log_likelihood(z1, lb, det, 500) + pg_log_likelihood(z2, lb, det, 500);
        if (std::abs(l1 - l0) < 1e-9) continue;
        const std::vector<double> z{z1, z2};
        const int want = l1 > l0 ? 1 : 0;
        ones += want;
        CHECK(ml_detect(z, cfg) == want);
      }
    CHECK(ones > 0);
  }
}

TEST_CASE("BER run shape and ordering") {
  const auto cfg = with_trials(pc_config(2, 2.4, 0.02, AugmentSpec::pair(1, 2)), 40000, 7);
  const McResult r = run_mc_ber(cfg);
  REQUIRE(r.ber_lmmse.has_value());
  REQUIRE(r.ber_lmmse_nc.has_value());
  REQUIRE(r.ber_ml.has_value());
  CHECK(*r.ber_ml <= *r.ber_lmmse_nc);
  CHECK(*r.ber_lmmse_nc <= *r.ber_lmmse);
  CHECK(*r.ber_lmmse > 0.0);

  const McResult only_ml = run_mc_ber(cfg, Detector::ml);
  CHECK_FALSE(only_ml.ber_lmmse.has_value());
  CHECK(*only_ml.ber_ml == *r.ber_ml);

  CHECK_THROWS(run_mc_ber(pc_config(2, 1.0, 0.02, AugmentSpec::pair(1, 2), Modulation::ppm(4))));
}

TEST_CASE("detectors see the same samples") {
  const auto cfg = with_trials(pc_config(2, 1.8, 0.02, AugmentSpec::pair(1, 2)), 12000, 9);
  McOptions opt;
  opt.record_errors = true;
  const McResult all = run_mc_ber(cfg, DetectorSet::all(), opt);
  const McResult ml = run_mc_ber(cfg, Detector::ml, opt);
  const McResult lin = run_mc_ber(cfg, Detector::lmmse, opt);
  CHECK(all.errors_ml == ml.errors_ml);
  CHECK(all.errors_lmmse == lin.errors_lmmse);
  CHECK(static_cast<double>(all.errors_ml.size()) == doctest::Approx(*all.ber_ml * 12000));
  CHECK(std::is_sorted(all.errors_lmmse.begin(), all.errors_lmmse.end()));
}

TEST_CASE("results do not depend on the worker count") {
  for (auto kind : {ReceiverKind::pc, ReceiverKind::apd}) {
    const auto cfg = with_trials(physical_config(kind, 2, 1.0, AugmentSpec::pair(1, 2)), 3 * kTrialsPerChunk + 17, 42);
    McOptions one, many;
    many.workers = 4;
    const McResult a = run_mc_ber(cfg, DetectorSet::all(), one);
    const McResult b = run_mc_ber(cfg, DetectorSet::all(), many);
    CHECK(a.mse == b.mse);
    CHECK(a.mse_stderr == b.mse_stderr);
    CHECK(*a.ber_ml == *b.ber_ml);
    CHECK(*a.ber_lmmse == *b.ber_lmmse);
    CHECK(run_mc_mse(cfg, one).mse == run_mc_mse(cfg, many).mse);

    auto other = cfg;
    other.seed = 43;
    CHECK(run_mc_mse(other).mse != a.mse);
  }
}
