#pragma once

#include <cmath>

#include "nlmmse/estimator.hpp"
#include "nlmmse/sweep.hpp"

namespace support {

inline nlmmse::ExperimentConfig pc_config(int k, double lambda, double lambda_b, nlmmse::AugmentSpec spec,
                                          nlmmse::Modulation mod = nlmmse::Modulation::ook()) {
  nlmmse::ExperimentConfig cfg;
  cfg.channel.signal_means.assign(static_cast<std::size_t>(k), lambda);
  cfg.channel.background_mean = lambda_b;
  cfg.channel.receiver_kind = nlmmse::ReceiverKind::pc;
  cfg.modulation = mod;
  cfg.augment = spec;
  return cfg;
}

/// Receiver of the given kind at a transmit power, default physical constants.
inline nlmmse::ExperimentConfig physical_config(nlmmse::ReceiverKind kind, int k, double power_dbw,
                                                nlmmse::AugmentSpec spec, double gain = 100.0,
                                                nlmmse::Modulation mod = nlmmse::Modulation::ook()) {
  nlmmse::SweepSpec sweep;
  return nlmmse::make_experiment(sweep, kind, mod, k, spec, power_dbw, gain);
}

/// Statistics of c * z derived from those of z: a power-a block scales by c^a.
inline nlmmse::CovarianceBlocks scale_blocks(const nlmmse::CovarianceBlocks& b, double c,
                                             const nlmmse::AugmentSpec& spec) {
  nlmmse::CovarianceBlocks out = b;
  const int k = b.receivers;
  const double cm = std::pow(c, spec.m);
  out.mean_x.head(k) *= cm;
  out.p_bx.head(k) *= cm;
  out.p_ym *= cm * cm;
  if (spec.augmented) {
    const double cn = std::pow(c, spec.n);
    out.mean_x.tail(k) *= cn;
    out.p_bx.tail(k) *= cn;
    *out.p_yn *= cn * cn;
    *out.p_ymyn *= cm * cn;
  }
  return out;
}

}  // namespace support
