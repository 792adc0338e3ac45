#include "nlmmse/simulation.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "nlmmse/channel.hpp"
#include "nlmmse/estimator.hpp"
#include "nlmmse/parallel.hpp"

namespace nlmmse {

namespace {

constexpr std::uint32_t kStreamTag = 0x4d43u;  // "MC"

RandomSource chunk_stream(std::uint64_t seed, std::uint64_t chunk) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32), kStreamTag};
  return RandomSource(seq);
}

// Sufficient statistics of one chunk; merged in chunk order.
struct ChunkStats {
  double sum_se = 0.0;
  double sum_se2 = 0.0;
  double sum_est = 0.0;
  double sum_est2 = 0.0;
  long long errors_lmmse = 0;
  long long errors_lmmse_nc = 0;
  long long errors_ml = 0;
  std::vector<long long> occupancy;
  std::vector<long long> idx_lmmse;
  std::vector<long long> idx_lmmse_nc;
  std::vector<long long> idx_ml;
};

void sample_slot(const ChannelParams& ch, bool pulse, RandomSource& rng, std::vector<double>& z) {
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double lambda = (pulse ? ch.signal_means[i] : 0.0) + ch.background_mean;
    z[i] = ch.receiver_kind == ReceiverKind::pc ? static_cast<double>(sample_pc(lambda, rng))
                                                 : sample_pg(lambda, ch.detector, rng);
  }
}

McResult run_engine(const ExperimentConfig& cfg, DetectorSet detectors, const McOptions& options) {
  cfg.validate();
  const bool ber = !detectors.empty();
  if (ber && !cfg.modulation.is_ook()) throw std::invalid_argument("BER simulation is defined for OOK only");

  const EstimatorCoefficients main = build_estimator(cfg);
  const AugmentSpec linear_spec = cfg.augment.linear_part();
  std::optional<EstimatorCoefficients> linear;
  if (detectors.contains(Detector::lmmse)) {
    ExperimentConfig lin_cfg = cfg;
    lin_cfg.augment = linear_spec;
    linear = build_estimator(lin_cfg);
  }
  const bool score_nc = detectors.contains(Detector::lmmse_nc) && cfg.augment.augmented;
  const bool score_ml = detectors.contains(Detector::ml);

  const int slots = cfg.modulation.slots();
  const long long trials = cfg.trials;
  const long long chunks = (trials + kTrialsPerChunk - 1) / kTrialsPerChunk;
  std::vector<ChunkStats> stats(static_cast<std::size_t>(chunks));

  parallel_for(static_cast<std::size_t>(chunks), options.workers, [&](std::size_t c) {
    ChunkStats& st = stats[c];
    st.occupancy.assign(static_cast<std::size_t>(slots), 0);
    RandomSource rng = chunk_stream(cfg.seed, c);
    std::vector<double> z(static_cast<std::size_t>(cfg.channel.receivers()));
    const long long begin = static_cast<long long>(c) * kTrialsPerChunk;
    const long long end = std::min(trials, begin + kTrialsPerChunk);

    for (long long t = begin; t < end; ++t) {
      if (cfg.modulation.is_ook()) {
        const int bit = static_cast<int>(rng() >> 63);
        st.occupancy[0] += bit;
        sample_slot(cfg.channel, bit == 1, rng, z);
        const double a_hat = estimate(main, z, cfg.augment);
        const double err = a_hat - bit;
        st.sum_se += err * err;
        st.sum_se2 += err * err * err * err;
        st.sum_est += a_hat;
        st.sum_est2 += a_hat * a_hat;
        if (!ber) continue;
        if (linear && threshold_detect(estimate(*linear, z, linear_spec)) != bit) {
          ++st.errors_lmmse;
          if (options.record_errors) st.idx_lmmse.push_back(t);
        }
        if (score_nc && threshold_detect(a_hat) != bit) {
          ++st.errors_lmmse_nc;
          if (options.record_errors) st.idx_lmmse_nc.push_back(t);
        }
        if (score_ml && ml_detect(z, cfg) != bit) {
          ++st.errors_ml;
          if (options.record_errors) st.idx_ml.push_back(t);
        }
      } else {
        std::uniform_int_distribution<int> position(0, slots - 1);
        const int pos = position(rng);
        ++st.occupancy[static_cast<std::size_t>(pos)];
        double symbol_se = 0.0;
        double symbol_est = 0.0;
        for (int s = 0; s < slots; ++s) {
          const int bit = s == pos ? 1 : 0;
          sample_slot(cfg.channel, bit == 1, rng, z);
          const double a_hat = estimate(main, z, cfg.augment);
          symbol_se += (a_hat - bit) * (a_hat - bit);
          symbol_est += a_hat;
        }
        symbol_se /= slots;
        symbol_est /= slots;
        st.sum_se += symbol_se;
        st.sum_se2 += symbol_se * symbol_se;
        st.sum_est += symbol_est;
        st.sum_est2 += symbol_est * symbol_est;
      }
    }
  });

  ChunkStats total;
  total.occupancy.assign(static_cast<std::size_t>(slots), 0);
  McResult out;
  for (ChunkStats& st : stats) {
    total.sum_se += st.sum_se;
    total.sum_se2 += st.sum_se2;
    total.sum_est += st.sum_est;
    total.sum_est2 += st.sum_est2;
    total.errors_lmmse += st.errors_lmmse;
    total.errors_lmmse_nc += st.errors_lmmse_nc;
    total.errors_ml += st.errors_ml;
    for (int s = 0; s < slots; ++s) total.occupancy[static_cast<std::size_t>(s)] += st.occupancy[static_cast<std::size_t>(s)];
    out.errors_lmmse.insert(out.errors_lmmse.end(), st.idx_lmmse.begin(), st.idx_lmmse.end());
    out.errors_lmmse_nc.insert(out.errors_lmmse_nc.end(), st.idx_lmmse_nc.begin(), st.idx_lmmse_nc.end());
    out.errors_ml.insert(out.errors_ml.end(), st.idx_ml.begin(), st.idx_ml.end());
  }

  const auto n = static_cast<double>(trials);
  auto stderr_of = [n](double sum, double sum2) {
    if (n < 2.0) return 0.0;
    const double mean = sum / n;
    const double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0));
    return std::sqrt(var / n);
  };
  out.trials = trials;
  out.mse = total.sum_se / n;
  out.mse_stderr = stderr_of(total.sum_se, total.sum_se2);
  out.mean_estimate = total.sum_est / n;
  out.mean_estimate_stderr = stderr_of(total.sum_est, total.sum_est2);
  out.slot_occupancy = std::move(total.occupancy);
  out.regularization_flag = main.regularized() || (linear && linear->regularized());
  if (linear) out.ber_lmmse = static_cast<double>(total.errors_lmmse) / n;
  if (score_nc) out.ber_lmmse_nc = static_cast<double>(total.errors_lmmse_nc) / n;
  if (score_ml) out.ber_ml = static_cast<double>(total.errors_ml) / n;
  return out;
}

}  // namespace

int threshold_detect(double a_hat) { return a_hat >= 0.5 ? 1 : 0; }

int ml_detect(std::span<const double> z, const ExperimentConfig& cfg) {
  const ChannelParams& ch = cfg.channel;
  if (z.size() != ch.signal_means.size()) throw std::invalid_argument("ml_detect: measurement length mismatch");
  double log_one = 0.0;
  double log_zero = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double on = ch.signal_means[i] + ch.background_mean;
    const double off = ch.background_mean;
    if (ch.receiver_kind == ReceiverKind::pc) {
      const auto count = std::llround(z[i]);
      log_one += pc_log_likelihood(count, on);
      log_zero += pc_log_likelihood(count, off);
    } else {
      log_one += pg_log_likelihood(z[i], on, ch.detector, cfg.ml_terms);
      log_zero += pg_log_likelihood(z[i], off, ch.detector, cfg.ml_terms);
    }
  }
  return log_one > log_zero ? 1 : 0;
}

McResult run_mc_mse(const ExperimentConfig& cfg, const McOptions& options) {
  return run_engine(cfg, DetectorSet{}, options);
}

McResult run_mc_ber(const ExperimentConfig& cfg, DetectorSet detectors, const McOptions& options) {
  if (detectors.empty()) throw std::invalid_argument("run_mc_ber: no detectors requested");
  return run_engine(cfg, detectors, options);
}

}  // namespace nlmmse
