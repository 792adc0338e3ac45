#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "nlmmse/channel.hpp"
#include "oracles.hpp"

using namespace nlmmse;

TEST_CASE("derive_channel_params under the average-per-bit convention") {
  PhysicalConfig phys;
  phys.power_convention = PowerConvention::average_per_bit;
  phys.transmit_power_dbw = 0.0;
  const ChannelParams ch = derive_channel_params(phys, 3);
  REQUIRE(ch.receivers() == 3);
  // eta P wl / (L h c R_b), independent evaluation
  const double want = 0.06 * 1.0 * 250e-9 / (4e10 * 6.62606957e-34 * 2.99792458e8 * 1e6);
  CHECK(want == doctest::Approx(1.888).epsilon(1e-3));
  for (double l : ch.signal_means) CHECK(l == doctest::Approx(want).epsilon(1e-15));
  CHECK(ch.background_mean == doctest::Approx(0.02).epsilon(1e-15));
}

TEST_CASE("energy-per-pulse convention scales by bits per pulse") {
  PhysicalConfig phys;
  const double avg = average_photons_per_bit(phys);
  CHECK(derive_channel_params(phys, 1, Modulation::ook()).signal_means[0] == doctest::Approx(2.0 * avg));
  CHECK(derive_channel_params(phys, 1, Modulation::ppm(8)).signal_means[0] == doctest::Approx(3.0 * avg));
  CHECK(derive_channel_params(phys, 1, Modulation::ppm(2)).signal_means[0] == doctest::Approx(avg));
  CHECK(derive_channel_params(phys, 1, Modulation::ppm(8)).background_mean == doctest::Approx(0.02));
}

TEST_CASE("no-signal limit") {
  PhysicalConfig phys;
  phys.transmit_power_dbw = -std::numeric_limits<double>::infinity();
  const ChannelParams ch = derive_channel_params(phys, 2);
  CHECK(ch.signal_means[0] == 0.0);
  CHECK(ch.background_mean == doctest::Approx(0.02));
  phys.transmit_power_dbw = -300.0;
  CHECK(derive_channel_params(phys, 2).signal_means[0] < 1e-29);
}

TEST_CASE("detector noise mapping") {
  PhysicalConfig phys;
  phys.receiver_kind = ReceiverKind::pmt;
  phys.gain = 100.0;
  ChannelParams pmt = derive_channel_params(phys, 1);
  CHECK(pmt.detector.thermal_sigma == doctest::Approx(359.3229746837771).epsilon(1e-12));
  CHECK(pmt.detector.shot_sigma * pmt.detector.shot_sigma == doctest::Approx(0.1 * 1e4));
  CHECK(pmt.detector.gain == 100.0);

  phys.receiver_kind = ReceiverKind::apd;
  ChannelParams apd = derive_channel_params(phys, 1);
  const double f = 0.028 * 100.0 + (2.0 - 0.01) * (1.0 - 0.028);
  CHECK(apd.detector.shot_sigma * apd.detector.shot_sigma == doctest::Approx(1e4 * (f - 1.0)));

  phys.load_resistance = 0.0;
  CHECK_THROWS(derive_channel_params(phys, 1));
  phys.load_resistance = 5e6;
  CHECK_THROWS(derive_channel_params(phys, 0));
}

TEST_CASE("modulation parsing") {
  CHECK(parse_modulation("ook") == Modulation::ook());
  CHECK(parse_modulation("ppm8") == Modulation::ppm(8));
  CHECK(parse_modulation("ppm8").name() == "ppm8");
  CHECK_THROWS(parse_modulation("ppm1"));
  CHECK_THROWS(parse_modulation("qam"));
  CHECK_THROWS(parse_modulation("ppm"));
  CHECK(parse_receiver_kind("apd") == ReceiverKind::apd);
  CHECK_THROWS(parse_receiver_kind("ccd"));
}

TEST_CASE("poisson sampling") {
  RandomSource rng(7);
  for (int i = 0; i < 100; ++i) CHECK(sample_pc(0.0, rng) == 0);

  const int n = 1000000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += static_cast<double>(sample_pc(2.0, rng));
  CHECK(std::abs(sum / n - 2.0) <= 3.0 * std::sqrt(2.0 / n));

  RandomSource a(99), b(99);
  for (int i = 0; i < 1000; ++i) REQUIRE(sample_pc(3.3, a) == sample_pc(3.3, b));
}

TEST_CASE("mixture sampling") {
  RandomSource rng(11);
  const int n = 1000000;
  DetectorParams det{100.0, 1.602e-19, 10.0, 30.0};

  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = sample_pg(0.0, det, rng);
    s1 += z;
    s2 += z * z;
  }
  const double var = s2 / n - (s1 / n) * (s1 / n);
  CHECK(std::abs(var / 900.0 - 1.0) < 0.01);

  s1 = 0.0;
  for (int i = 0; i < n; ++i) s1 += sample_pg(1.0, det, rng);
  // sd of z is sqrt(A^2 lambda + sigma^2 lambda + sigma0^2)
  CHECK(std::abs(s1 / n - 100.0) <= 3.0 * std::sqrt(10000.0 + 100.0 + 900.0) / std::sqrt(n));
}

TEST_CASE("empirical raw moments match the analytical kernels") {
  const int n = 1000000;
  struct Case {
    ReceiverKind kind;
    double lambda;
    DetectorParams det;
  };
  const Case cases[] = {{ReceiverKind::pc, 2.0, {}},
                        {ReceiverKind::pmt, 2.0, {100.0, 1.602e-19, 31.6, 359.0}},
                        {ReceiverKind::apd, 2.0, {100.0, 1.602e-19, 193.0, 359.0}}};
  std::uint64_t seed = 5;
  for (const Case& c : cases) {
    RandomSource rng(seed++);
    std::vector<double> z(n);
    for (auto& v : z)
      v = c.kind == ReceiverKind::pc ? static_cast<double>(sample_pc(c.lambda, rng)) : sample_pg(c.lambda, c.det, rng);
    for (int order = 1; order <= 4; ++order) {
      double s = 0.0, s2 = 0.0;
      for (double v : z) {
        const double p = std::pow(v, order);
        s += p;
        s2 += p * p;
      }
      const double mean = s / n;
      const double se = std::sqrt((s2 / n - mean * mean) / n);
      const double want = c.kind == ReceiverKind::pc ? poisson_raw_moment(order, c.lambda)
                                                     : pg_raw_moment(order, c.lambda, c.det);
      CAPTURE(order);
      CHECK(std::abs(mean - want) <= 3.0 * se);
    }
  }
}

TEST_CASE("poisson log likelihood") {
  CHECK(pc_log_likelihood(0, 2.0) == doctest::Approx(-2.0));
  CHECK(pc_log_likelihood(2, 2.0) == doctest::Approx(std::log(2.0) - 2.0));
  CHECK(std::abs(pc_log_likelihood(50, 5.0) - (-73.00587133006803)) <= 1e-12);
  CHECK(pc_log_likelihood(3, 0.0) == -std::numeric_limits<double>::infinity());
  CHECK(pc_log_likelihood(0, 0.0) == 0.0);
}

TEST_CASE("mixture log likelihood") {
  DetectorParams det{20.0, 1.602e-19, 3.0, 5.0};
  // lambda = 0 keeps only the thermal Gaussian
  for (double z : {-7.0, 0.0, 12.5}) {
    const double gauss = -0.5 * std::log(2.0 * M_PI * 25.0) - z * z / 50.0;
    CHECK(pg_log_likelihood(z, 0.0, det) == doctest::Approx(gauss).epsilon(1e-14));
  }
  for (double z : {-3.0, 25.0, 41.0, 90.0})
    CHECK(std::abs(pg_log_likelihood(z, 2.0, det, 50) - pg_log_likelihood(z, 2.0, det, 500)) <= 1e-10);
  CHECK(pg_log_likelihood(17.0, 1.5, det) == pg_log_likelihood(17.0, 1.5, det));
  CHECK_THROWS(pg_log_likelihood(1.0, 1.0, det, 0));
}

TEST_CASE("mixture likelihood integrates to one") {
  DetectorParams det{20.0, 1.602e-19, 3.0, 5.0};
  for (double lambda : {0.0, 0.5, 2.0, 5.0}) {
    const double h = 0.05;
    double sum = 0.0;
    for (double z = -100.0; z <= 60.0 * 20.0; z += h) sum += std::exp(pg_log_likelihood(z, lambda, det));
    CAPTURE(lambda);
    CHECK(std::abs(sum * h - 1.0) <= 1e-6);
  }
}
