#pragma once

#include <optional>

#include "lack/random.hpp"

namespace lack {

enum class JitterLaw {
  TruncatedNormal,  // |N(0, s^2)| scaled so the jitter SD equals jitter_sd_ms
  Gamma,            // shape gamma_shape, scale chosen for the same SD
};

struct ChannelConfig {
  double base_delay_ms = 20.0;
  double jitter_sd_ms = 0.0;
  JitterLaw jitter_law = JitterLaw::TruncatedNormal;
  double p_loss = 0.0;
  double gamma_shape = 2.0;

  void validate() const;
};

// Non-negative jitter draw with standard deviation cfg.jitter_sd_ms.
double draw_jitter(const ChannelConfig& cfg, RandomStream& rng);

// Arrival time, or nullopt when the packet is lost. Losses are independent.
std::optional<double> transmit(const ChannelConfig& cfg, double send_ms, RandomStream& rng);

}  // namespace lack
