#include "nlmmse/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nlmmse/errors.hpp"

namespace nlmmse {

std::string_view to_string(ReceiverKind kind) {
  switch (kind) {
    case ReceiverKind::pc: return "pc";
    case ReceiverKind::pmt: return "pmt";
    case ReceiverKind::apd: return "apd";
  }
  return "?";
}

ReceiverKind parse_receiver_kind(std::string_view text) {
  if (text == "pc") return ReceiverKind::pc;
  if (text == "pmt") return ReceiverKind::pmt;
  if (text == "apd") return ReceiverKind::apd;
  throw std::invalid_argument("unknown receiver kind '" + std::string(text) + "' (expected pc|pmt|apd)");
}

double Modulation::bits_per_pulse() const { return is_ook() ? 2.0 : std::log2(static_cast<double>(order)); }

std::string Modulation::name() const { return is_ook() ? "ook" : "ppm" + std::to_string(order); }

void Modulation::validate() const {
  if (is_ook() && order != 2) throw std::invalid_argument("OOK modulation has M = 2");
  if (order < 2) throw std::invalid_argument("PPM order must be >= 2");
}

Modulation parse_modulation(std::string_view text) {
  if (text == "ook") return Modulation::ook();
  if (text.size() > 3 && text.substr(0, 3) == "ppm") {
    const std::string digits(text.substr(3));
    if (digits.find_first_not_of("0123456789") == std::string::npos) {
      const int m = std::stoi(digits);
      if (m >= 2) return Modulation::ppm(m);
    }
  }
  throw std::invalid_argument("unknown modulation '" + std::string(text) + "' (expected ook|ppm<M>, M >= 2)");
}

std::string_view to_string(PowerConvention c) {
  return c == PowerConvention::average_per_bit ? "average" : "pulse";
}

PowerConvention parse_power_convention(std::string_view text) {
  if (text == "average") return PowerConvention::average_per_bit;
  if (text == "pulse") return PowerConvention::energy_per_pulse;
  throw std::invalid_argument("unknown power convention '" + std::string(text) + "' (expected pulse|average)");
}

void PhysicalConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be finite and > 0");
  };
  if (std::isnan(transmit_power_dbw) || transmit_power_dbw == std::numeric_limits<double>::infinity())
    throw std::invalid_argument("transmit power must be a number below +inf dBW");
  if (!(quantum_efficiency > 0.0 && quantum_efficiency <= 1.0))
    throw std::invalid_argument("quantum efficiency must lie in (0, 1]");
  positive(path_loss, "path loss");
  positive(bit_rate, "bit rate");
  positive(wavelength, "wavelength");
  if (!(background_rate >= 0.0) || !std::isfinite(background_rate))
    throw std::invalid_argument("background rate must be finite and >= 0");
  if (receiver_kind != ReceiverKind::pc) {
    positive(temperature, "temperature");
    positive(load_resistance, "load resistance");
    if (!(gain >= 1.0) || !std::isfinite(gain)) throw std::invalid_argument("gain must be >= 1");
    if (!(pmt_spreading >= 0.0)) throw std::invalid_argument("PMT spreading factor must be >= 0");
    if (!(apd_ionization >= 0.0 && apd_ionization <= 1.0))
      throw std::invalid_argument("APD ionization factor must lie in [0, 1]");
  }
}

void ChannelParams::validate() const {
  if (signal_means.empty()) throw std::invalid_argument("at least one receiver is required");
  for (double l : signal_means) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw std::invalid_argument("signal means must be finite and >= 0");
  }
  if (!(background_mean >= 0.0) || !std::isfinite(background_mean))
    throw std::invalid_argument("background mean must be finite and >= 0");
  if (receiver_kind != ReceiverKind::pc) detector.validate();
}

double average_photons_per_bit(const PhysicalConfig& phys) {
  const double watts = std::pow(10.0, phys.transmit_power_dbw / 10.0);
  return phys.quantum_efficiency * watts * phys.wavelength /
         (phys.path_loss * constants::kPlanck * constants::kSpeedOfLight * phys.bit_rate);
}

double apd_excess_noise(double gain, double ionization) {
  return ionization * gain + (2.0 - 1.0 / gain) * (1.0 - ionization);
}

ChannelParams derive_channel_params(const PhysicalConfig& phys, int k_receivers, const Modulation& modulation) {
  phys.validate();
  modulation.validate();
  if (k_receivers < 1) throw std::invalid_argument("receiver count must be >= 1");

  double lambda = average_photons_per_bit(phys);
  if (phys.power_convention == PowerConvention::energy_per_pulse) lambda *= modulation.bits_per_pulse();

  ChannelParams out;
  out.signal_means.assign(static_cast<std::size_t>(k_receivers), lambda);
  out.background_mean = phys.background_rate / phys.bit_rate;
  out.receiver_kind = phys.receiver_kind;

  if (phys.receiver_kind != ReceiverKind::pc) {
    DetectorParams& det = out.detector;
    det.gain = phys.gain;
    det.electron_charge = constants::kElectronCharge;
    det.thermal_sigma =
        std::sqrt(4.0 * constants::kBoltzmann * phys.temperature / (phys.load_resistance * phys.bit_rate)) /
        constants::kElectronCharge;
    const double a2 = phys.gain * phys.gain;
    const double shot_var = phys.receiver_kind == ReceiverKind::pmt
                                ? phys.pmt_spreading * a2
                                : a2 * (apd_excess_noise(phys.gain, phys.apd_ionization) - 1.0);
    det.shot_sigma = std::sqrt(std::max(shot_var, 0.0));
  }

  const bool finite = std::isfinite(lambda) && std::isfinite(out.background_mean) &&
                      std::isfinite(out.detector.thermal_sigma) && std::isfinite(out.detector.shot_sigma);
  if (!finite) throw std::invalid_argument("derived channel parameters are not finite");
  out.validate();
  return out;
}

long long sample_pc(double lambda, RandomSource& rng) {
  if (lambda <= 0.0) return 0;
  std::poisson_distribution<long long> dist(lambda);
  return dist(rng);
}

double sample_pg(double lambda, const DetectorParams& det, RandomSource& rng) {
  const long long photons = sample_pc(lambda, rng);
  const double n = static_cast<double>(photons);
  const double sd = std::sqrt(n * det.shot_sigma * det.shot_sigma + det.thermal_sigma * det.thermal_sigma);
  std::normal_distribution<double> noise(n * det.gain, sd);
  return noise(rng);
}

double pc_log_likelihood(long long z, double lambda) {
  if (z < 0) return -std::numeric_limits<double>::infinity();
  if (lambda <= 0.0) return z == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  const double zd = static_cast<double>(z);
  return zd * std::log(lambda) - lambda - std::lgamma(zd + 1.0);
}

double pg_log_likelihood(double z, double lambda, const DetectorParams& det, int terms) {
  if (terms < 1) throw std::invalid_argument("pg_log_likelihood: terms must be >= 1");
  constexpr double kLogTwoPi = 1.8378770664093454836;
  const double shot_var = det.shot_sigma * det.shot_sigma;
  const double thermal_var = det.thermal_sigma * det.thermal_sigma;
  const int count = lambda > 0.0 ? terms : 1;
  const double log_lambda = lambda > 0.0 ? std::log(lambda) : 0.0;

  // Streaming log-sum-exp.
  double peak = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (int k = 0; k < count; ++k) {
    const double n = static_cast<double>(k);
    const double var = n * shot_var + thermal_var;
    const double dz = z - n * det.gain;
    const double log_poisson = (k == 0 ? 0.0 : n * log_lambda) - lambda - std::lgamma(n + 1.0);
    const double term = log_poisson - 0.5 * (kLogTwoPi + std::log(var) + dz * dz / var);
    if (term > peak) {
      sum = sum * std::exp(peak - term) + 1.0;
      peak = term;
    } else {
      sum += std::exp(term - peak);
    }
  }
  if (!std::isfinite(peak)) return peak;
  return peak + std::log(sum);
}

}  // namespace nlmmse
