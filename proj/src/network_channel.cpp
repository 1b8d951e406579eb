#include "lack/network_channel.hpp"

#include <cmath>
#include <numbers>

#include "lack/errors.hpp"

namespace lack {

void ChannelConfig::validate() const {
  if (!(base_delay_ms >= 0.0)) throw DomainError("channel base delay must be >= 0");
  if (!(jitter_sd_ms >= 0.0)) throw DomainError("channel jitter SD must be >= 0");
  if (!(p_loss >= 0.0 && p_loss < 1.0)) throw DomainError("channel loss must lie in [0, 1)");
  if (!(gamma_shape > 0.0)) throw DomainError("gamma jitter shape must be > 0");
}

double draw_jitter(const ChannelConfig& cfg, RandomStream& rng) {
  if (cfg.jitter_sd_ms <= 0.0) return 0.0;
  switch (cfg.jitter_law) {
    case JitterLaw::TruncatedNormal: {
      // SD of |Z| is sqrt(1 - 2/pi).
      const double scale = cfg.jitter_sd_ms / std::sqrt(1.0 - 2.0 / std::numbers::pi);
      return scale * std::abs(std::normal_distribution<double>(0.0, 1.0)(rng));
    }
    case JitterLaw::Gamma: {
      const double scale = cfg.jitter_sd_ms / std::sqrt(cfg.gamma_shape);
      return std::gamma_distribution<double>(cfg.gamma_shape, scale)(rng);
    }
  }
  return 0.0;
}

std::optional<double> transmit(const ChannelConfig& cfg, double send_ms, RandomStream& rng) {
  if (!(send_ms >= 0.0)) throw DomainError("send time must be >= 0");
  if (cfg.p_loss > 0.0 && std::bernoulli_distribution(cfg.p_loss)(rng)) return std::nullopt;
  return send_ms + cfg.base_delay_ms + draw_jitter(cfg, rng);
}

}  // namespace lack
