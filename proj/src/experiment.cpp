#include "nlmmse/experiment.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace nlmmse {

std::vector<int> AugmentSpec::orders() const {
  if (augmented) return {m, n};
  return {m};
}

int AugmentSpec::max_moment_order() const { return 2 * (augmented ? std::max(m, n) : m); }

std::string AugmentSpec::label() const {
  return augmented ? std::to_string(m) + "," + std::to_string(n) : std::to_string(m);
}

void AugmentSpec::validate(ReceiverKind kind) const {
  if (m < 1) throw std::invalid_argument("nonlinear factor m must be >= 1");
  if (augmented) {
    if (n < 1) throw std::invalid_argument("nonlinear factor n must be >= 1");
    if (n == m) throw std::invalid_argument("nonlinear factors must differ (m = n makes P_xx singular)");
  }
  const int bound = kind == ReceiverKind::pc ? 12 : 8;
  const int used = augmented ? m + n : m;
  if (used > bound) {
    throw std::invalid_argument("nonlinear factors (" + label() + ") exceed the supported bound m+n <= " +
                                std::to_string(bound) + " for " + std::string(to_string(kind)));
  }
}

AugmentSpec parse_augment(const std::string& text) {
  auto parse_int = [&](const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("bad nonlinear factor list '" + text + "' (expected m or m,n)");
    return std::stoi(s);
  };
  const auto comma = text.find(',');
  const AugmentSpec spec = comma == std::string::npos
                               ? AugmentSpec::conventional(parse_int(text))
                               : AugmentSpec::pair(parse_int(text.substr(0, comma)), parse_int(text.substr(comma + 1)));
  if (spec.m < 1 || (spec.augmented && (spec.n < 1 || spec.n == spec.m)))
    throw std::invalid_argument("bad nonlinear factor list '" + text + "' (need m >= 1, n >= 1, n != m)");
  return spec;
}

void ExperimentConfig::validate() const {
  channel.validate();
  modulation.validate();
  augment.validate(channel.receiver_kind);
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (ml_terms < 1) throw std::invalid_argument("ml_terms must be >= 1");
}

std::string ExperimentConfig::describe() const {
  std::ostringstream os;
  os.precision(6);
  os << to_string(channel.receiver_kind) << ' ' << modulation.name() << " K=" << channel.receivers()
     << " nl=(" << augment.label() << ") lambda=" << (channel.signal_means.empty() ? 0.0 : channel.signal_means[0])
     << " lambda_b=" << channel.background_mean;
  if (channel.receiver_kind != ReceiverKind::pc) os << " A=" << channel.detector.gain;
  return os.str();
}

}  // namespace nlmmse
