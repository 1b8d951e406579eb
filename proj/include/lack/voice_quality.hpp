#pragma once

// Packet-loss driven MOS estimation and codec loss budgets.

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace lack {

struct MosParams {
  double alpha;
  double beta;
  double gamma;

  MosParams(double alpha, double beta, double gamma);

  // Fit reported for Skype telephony.
  static MosParams skype() { return {3.0829, -4.6446, 1.07}; }
  double ceiling() const noexcept { return alpha + gamma; }
};

struct CodecProfile {
  std::string name;
  double bitrate;             // bit/s
  double frame_ms;
  double payload_bits;        // P_P
  double packets_per_second;  // N_P
  double loss_tolerance;
  double plc_loss_tolerance;

  // Checks the derived fields and tolerance ordering.
  static CodecProfile make(std::string name, double bitrate, double frame_ms,
                           double loss_tolerance, double plc_loss_tolerance);

  // Bytes carried by one packet; rounds up for codecs whose frame is not a
  // whole number of octets.
  std::size_t payload_bytes() const;
  // N_P * P_P: bit/s of payload, the denominator of the rate/loss conversion.
  double payload_rate() const noexcept { return packets_per_second * payload_bits; }
};

// The built-in codec table as a JSON document.
const std::string& builtin_codec_table_json();
std::vector<CodecProfile> builtin_codecs();
// Looks up G.711, G.729A or G.723.1; throws ConfigError for unknown names.
CodecProfile builtin_codec(const std::string& name);
// Applies any of bitrate/frame_ms/loss_tolerance/plc_loss_tolerance present in
// `overrides` and re-derives N_P and P_P.
CodecProfile override_codec(const CodecProfile& base, const nlohmann::json& overrides);

double mos(const MosParams& params, double p_loss, double p_lack);

// Largest steganographic loss that keeps MOS at or above `mos_floor`.
double max_p_lack(const MosParams& params, double p_loss, double mos_floor);

// Loss headroom left to the covert channel by the codec's tolerance.
double loss_budget(const CodecProfile& codec, bool plc_enabled, double p_network);

double p_lack_from_rate(const CodecProfile& codec, double ir_bps);
double rate_from_p_lack(const CodecProfile& codec, double p_lack);

struct TimedValue {
  double t;
  double value;
};

// MOS(t) along an insertion-rate series.
std::vector<TimedValue> mos_timeline(const MosParams& params, const CodecProfile& codec,
                                     double p_loss, std::span<const TimedValue> ir_series);

// Probability mass over MOS values, e.g. measured for a network.
struct MosDistribution {
  std::vector<std::pair<double, double>> points;  // (mos, probability)
};

// Largest p_lack such that P(MOS_with_lack < mos_floor) stays within
// `max_violation`, where the network's loss-free MOS follows `dist`.
double max_p_lack_for_distribution(const MosParams& params, const MosDistribution& dist,
                                   double mos_floor, double max_violation);

}  // namespace lack
