#include <cmath>

#include <doctest.h>

#include "lack/errors.hpp"
#include "lack/network_channel.hpp"

using namespace lack;

TEST_CASE("degenerate channel") {
  RandomStream rng(3);
  ChannelConfig c;
  CHECK(transmit(c, 100.0, rng) == 120.0);
}

TEST_CASE("loss frequency") {
  RandomStream rng(4);
  ChannelConfig c;
  c.p_loss = 1.0 - 1e-3;
  const int n = 100000;
  int lost = 0;
  for (int i = 0; i < n; ++i) lost += !transmit(c, 0.0, rng).has_value();
  const double se = std::sqrt(c.p_loss * (1 - c.p_loss) / n);
  CHECK(std::abs(static_cast<double>(lost) / n - c.p_loss) < 3 * se);
}

TEST_CASE("jitter moments") {
  for (auto law : {JitterLaw::TruncatedNormal, JitterLaw::Gamma}) {
    RandomStream rng(5);
    ChannelConfig c;
    c.jitter_sd_ms = 5.0;
    c.jitter_law = law;
    const int n = 100000;
    double sum = 0;
    double sum2 = 0;
    for (int i = 0; i < n; ++i) {
      const double a = *transmit(c, 0.0, rng);
      CHECK(a >= 20.0);
      sum += a - 20.0;
      sum2 += (a - 20.0) * (a - 20.0);
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum2 / n - mean * mean);
    CHECK(std::abs(sd - 5.0) < 0.5);
  }
}

TEST_CASE("validation") {
  ChannelConfig c;
  c.p_loss = 1.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c.p_loss = 0.0;
  c.jitter_sd_ms = -1.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c.jitter_sd_ms = 0.0;
  c.base_delay_ms = -5.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("causality and ordering") {
  RandomStream rng(6);
  ChannelConfig c;
  c.jitter_sd_ms = 15;
  int reordered = 0;
  double prev = -1;
  for (int i = 0; i < 5000; ++i) {
    const double send = 20.0 * i;
    const double a = *transmit(c, send, rng);
    CHECK(a >= send + c.base_delay_ms);
    reordered += a < prev;
    prev = a;
  }
  CHECK(reordered > 0);

  ChannelConfig still;
  prev = -1;
  for (int i = 0; i < 1000; ++i) {
    const double a = *transmit(still, 20.0 * i, rng);
    CHECK(a > prev);
    prev = a;
  }
}
