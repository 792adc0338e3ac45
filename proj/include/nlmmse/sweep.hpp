#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nlmmse/channel.hpp"
#include "nlmmse/experiment.hpp"

namespace nlmmse {

/// Bumped whenever the CSV column list changes.
inline constexpr int kSweepCsvVersion = 1;

/// CSV header, in column order.
const std::vector<std::string>& sweep_csv_columns();

struct SweepRecord {
  ReceiverKind receiver_kind = ReceiverKind::pc;
  Modulation modulation;
  int k = 1;
  AugmentSpec augment;
  double power_dbw = 0.0;
  double lambda_sig = 0.0;
  double lambda_bg = 0.0;
  std::optional<double> gain_a;
  std::optional<double> mse_analytical;
  std::optional<double> mse_linear_analytical;
  std::optional<double> mse_mc;
  std::optional<double> mse_stderr;
  std::optional<double> ber_lmmse;
  std::optional<double> ber_lmmse_nc;
  std::optional<double> ber_ml;
  long long trials = 0;
  std::uint64_t seed = 0;
  bool regularized = false;
  std::string error;
};

/// One Cartesian sweep. Every axis must be non-empty.
struct SweepSpec {
  std::vector<ReceiverKind> receivers{ReceiverKind::pc};
  std::vector<Modulation> modulations{Modulation::ook()};
  std::vector<int> k_values{3};
  std::vector<AugmentSpec> factors{AugmentSpec::pair(1, 2)};
  std::vector<double> powers_dbw;
  std::vector<double> gains{100.0};  // PMT/APD only

  PhysicalConfig physical;
  long long trials = 0;  // 0: analytical values only
  bool ber = false;
  bool ml = true;
  std::uint64_t seed = 1;
  int ml_terms = 50;

  void validate() const;
};

struct SweepPlan {
  std::vector<SweepSpec> sweeps;
  std::string plot = "mse";
};

/// Flat `key = value` text. Axis keys take whitespace-separated values and
/// may repeat (values accumulate); `a:b:step` expands to a numeric range.
/// Keys before the first `[sweep]` header are defaults for every sweep.
SweepPlan parse_sweep_config(const std::string& text);
SweepPlan load_sweep_config(const std::string& path);

/// Command-line overrides applied to every sweep of a plan.
struct SweepOverrides {
  std::optional<long long> trials;
  std::optional<std::uint64_t> seed;
  std::optional<ReceiverKind> receiver;
  std::optional<Modulation> modulation;
  std::optional<AugmentSpec> factors;
  std::optional<int> k;
  std::optional<std::vector<double>> powers_dbw;
  std::optional<int> ml_terms;
  std::optional<bool> ber;
};

void apply_overrides(SweepPlan& plan, const SweepOverrides& overrides);

/// Expands "a:b:step" (inclusive) or a single number.
std::vector<double> parse_range(const std::string& text);

std::vector<std::string> preset_names();
/// Config text of a preset; throws ConfigError for unknown names.
std::string preset_config(const std::string& name);
SweepPlan preset_plan(const std::string& name);

/// Builds the experiment for one sweep point.
ExperimentConfig make_experiment(const SweepSpec& spec, ReceiverKind kind, const Modulation& mod, int k,
                                 const AugmentSpec& factors, double power_dbw, double gain);

/// Evaluates every point in deterministic order; failures are recorded per row.
std::vector<SweepRecord> run_sweep(const SweepPlan& plan, int workers = 1);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records);
std::string sweep_csv(const std::vector<SweepRecord>& records);

/// 0 when every row succeeded, 3 otherwise.
int sweep_exit_code(const std::vector<SweepRecord>& records);

/// Reference operating points evaluated under both power conventions.
struct CalibrationEntry {
  std::string label;
  double target = 0.0;
  double tolerance = 0.0;  // relative
  double pulse_value = 0.0;
  double average_value = 0.0;
};

std::vector<CalibrationEntry> calibration_entries();
std::string calibration_report();

}  // namespace nlmmse
