#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nlmmse/experiment.hpp"

namespace nlmmse {

/// Detectors scored by a BER run.
enum class Detector : unsigned { lmmse = 1u << 0, lmmse_nc = 1u << 1, ml = 1u << 2 };

class DetectorSet {
 public:
  constexpr DetectorSet() = default;
  constexpr DetectorSet(Detector d) : bits_(static_cast<unsigned>(d)) {}
  static constexpr DetectorSet all() { return DetectorSet(Detector::lmmse) | Detector::lmmse_nc | Detector::ml; }

  constexpr bool contains(Detector d) const { return (bits_ & static_cast<unsigned>(d)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  friend constexpr DetectorSet operator|(DetectorSet a, Detector d) {
    a.bits_ |= static_cast<unsigned>(d);
    return a;
  }

 private:
  unsigned bits_ = 0;
};

struct McOptions {
  int workers = 1;
  /// Keep the indices of erroneous OOK trials per detector.
  bool record_errors = false;
};

struct McResult {
  double mse = 0.0;
  double mse_stderr = 0.0;
  std::optional<double> ber_lmmse;
  std::optional<double> ber_lmmse_nc;
  std::optional<double> ber_ml;
  long long trials = 0;
  bool regularization_flag = false;

  // Diagnostics.
  double mean_estimate = 0.0;
  double mean_estimate_stderr = 0.0;
  std::vector<long long> slot_occupancy;  // pulses observed per slot index
  std::vector<long long> errors_lmmse;
  std::vector<long long> errors_lmmse_nc;
  std::vector<long long> errors_ml;
};

/// Trials per independently seeded random stream.
inline constexpr long long kTrialsPerChunk = 4096;

/// 1 if a_hat >= 0.5, else 0.
int threshold_detect(double a_hat);

/// OOK maximum-likelihood decision over the K receivers; ties decide 0.
int ml_detect(std::span<const double> z, const ExperimentConfig& cfg);

/// Bit MSE of the estimator built for cfg.augment.
McResult run_mc_mse(const ExperimentConfig& cfg, const McOptions& options = {});

/// OOK BER of the requested detectors on shared sample streams; the MSE of
/// cfg.augment is reported as well. LMMSE uses the factor m alone.
McResult run_mc_ber(const ExperimentConfig& cfg, DetectorSet detectors = DetectorSet::all(),
                    const McOptions& options = {});

}  // namespace nlmmse
