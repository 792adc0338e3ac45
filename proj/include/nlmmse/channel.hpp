#pragma once

#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "nlmmse/moments.hpp"

namespace nlmmse {

enum class ReceiverKind { pc, pmt, apd };

std::string_view to_string(ReceiverKind kind);
ReceiverKind parse_receiver_kind(std::string_view text);

/// OOK is binary with equal priors; M-PPM places one pulse in M slots.
struct Modulation {
  enum class Kind { ook, ppm };
  Kind kind = Kind::ook;
  int order = 2;

  static Modulation ook() { return {Kind::ook, 2}; }
  static Modulation ppm(int m) { return {Kind::ppm, m}; }

  int slots() const noexcept { return order; }
  bool is_ook() const noexcept { return kind == Kind::ook; }
  /// Information bits carried by one transmitted pulse on average.
  double bits_per_pulse() const;
  std::string name() const;  // "ook" or "ppm<M>"
  void validate() const;

  friend bool operator==(const Modulation&, const Modulation&) = default;
};

/// Accepts "ook", "ppm4", "ppm8", ...
Modulation parse_modulation(std::string_view text);

namespace constants {
inline constexpr double kPlanck = 6.62606957e-34;
inline constexpr double kSpeedOfLight = 2.99792458e8;
inline constexpr double kBoltzmann = 1.3806505e-23;
inline constexpr double kElectronCharge = 1.602e-19;
}  // namespace constants

/// How transmit power P_t maps to the mean photon count of a pulse.
enum class PowerConvention {
  /// Average power over a bit: lambda = eta P_t wl / (L h c R_b).
  average_per_bit,
  /// Average power concentrated in the pulses: the average-per-bit count
  /// multiplied by the bits each pulse carries (2 for OOK, log2 M for M-PPM).
  energy_per_pulse,
};

std::string_view to_string(PowerConvention c);
PowerConvention parse_power_convention(std::string_view text);

struct PhysicalConfig {
  double transmit_power_dbw = 0.0;
  double quantum_efficiency = 0.06;
  double path_loss = 4e10;
  double bit_rate = 1e6;
  double wavelength = 250e-9;
  double background_rate = 20000.0;
  double temperature = 300.0;
  double load_resistance = 5e6;
  double pmt_spreading = 0.10;
  double apd_ionization = 0.028;
  double gain = 100.0;
  ReceiverKind receiver_kind = ReceiverKind::pc;
  PowerConvention power_convention = PowerConvention::energy_per_pulse;

  void validate() const;
};

struct ChannelParams {
  std::vector<double> signal_means;  // lambda_i per receiver
  double background_mean = 0.0;      // lambda_b
  DetectorParams detector;
  ReceiverKind receiver_kind = ReceiverKind::pc;

  int receivers() const noexcept { return static_cast<int>(signal_means.size()); }
  void validate() const;
};

/// Average detected photons per bit interval at the given power.
double average_photons_per_bit(const PhysicalConfig& phys);

/// APD excess-noise factor F = gamma A + (2 - 1/A)(1 - gamma).
double apd_excess_noise(double gain, double ionization);

/// Maps physical link parameters to K identical receivers.
ChannelParams derive_channel_params(const PhysicalConfig& phys, int k_receivers,
                                    const Modulation& modulation = Modulation::ook());

using RandomSource = std::mt19937_64;

long long sample_pc(double lambda, RandomSource& rng);
double sample_pg(double lambda, const DetectorParams& det, RandomSource& rng);

/// log Poisson(z; lambda); -inf when lambda = 0 and z > 0.
double pc_log_likelihood(long long z, double lambda);

/// Log of the mixture density truncated to photon counts 0 .. terms-1.
double pg_log_likelihood(double z, double lambda, const DetectorParams& det, int terms = 50);

}  // namespace nlmmse
