#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlmmse/channel.hpp"

namespace nlmmse {

/// Power factors applied to every measurement: x = [z^m, z^n] when augmented,
/// x = z^m otherwise.
struct AugmentSpec {
  int m = 1;
  int n = 2;
  bool augmented = true;

  static AugmentSpec conventional(int m = 1) { return {m, 0, false}; }
  static AugmentSpec pair(int m, int n) { return {m, n, true}; }

  std::vector<int> orders() const;
  int max_moment_order() const;
  /// Conventional receiver over the y_m block of this spec.
  AugmentSpec linear_part() const { return conventional(m); }
  std::string label() const;  // "1" or "1,2"
  void validate(ReceiverKind kind) const;

  friend bool operator==(const AugmentSpec&, const AugmentSpec&) = default;
};

/// Accepts "m" or "m,n".
AugmentSpec parse_augment(const std::string& text);

struct ExperimentConfig {
  ChannelParams channel;
  Modulation modulation = Modulation::ook();
  AugmentSpec augment;
  long long trials = 100000;
  std::uint64_t seed = 1;
  int ml_terms = 50;

  int ppm_order() const noexcept { return modulation.order; }
  void validate() const;
  std::string describe() const;
};

}  // namespace nlmmse
