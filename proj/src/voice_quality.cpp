#include "lack/voice_quality.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "lack/errors.hpp"

namespace lack {
namespace {

void require_fraction(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError(std::string(what) + " must lie in [0, 1]");
  }
}

// Loss tolerances per codec; G.729A and G.723.1 carry no PLC bonus.
const char* const kCodecTable = R"([
  {"name": "G.711",   "bitrate": 64000, "frame_ms": 20, "loss_tolerance": 0.03, "plc_loss_tolerance": 0.05},
  {"name": "G.729A",  "bitrate": 8000,  "frame_ms": 10, "loss_tolerance": 0.02, "plc_loss_tolerance": 0.02},
  {"name": "G.723.1", "bitrate": 6300,  "frame_ms": 30, "loss_tolerance": 0.01, "plc_loss_tolerance": 0.01}
])";

CodecProfile codec_from_json(const nlohmann::json& j) {
  return CodecProfile::make(j.at("name").get<std::string>(), j.at("bitrate").get<double>(),
                            j.at("frame_ms").get<double>(), j.at("loss_tolerance").get<double>(),
                            j.at("plc_loss_tolerance").get<double>());
}

}  // namespace

MosParams::MosParams(double a, double b, double g) : alpha(a), beta(b), gamma(g) {
  if (!(a > 0.0) || !(b < 0.0) || !(g >= 1.0) || !(a + g <= 5.0)) {
    throw DomainError("MOS parameters need alpha > 0, beta < 0, gamma >= 1, alpha + gamma <= 5");
  }
}

CodecProfile CodecProfile::make(std::string name, double bitrate, double frame_ms,
                                double loss_tolerance, double plc_loss_tolerance) {
  if (!(bitrate > 0.0) || !(frame_ms > 0.0)) {
    throw DomainError("codec " + name + ": bitrate and frame size must be > 0");
  }
  if (!(loss_tolerance > 0.0 && loss_tolerance <= plc_loss_tolerance && plc_loss_tolerance < 1.0)) {
    throw DomainError("codec " + name + ": need 0 < loss_tolerance <= plc_loss_tolerance < 1");
  }
  return CodecProfile{std::move(name),  bitrate,        frame_ms, bitrate * frame_ms / 1000.0,
                      1000.0 / frame_ms, loss_tolerance, plc_loss_tolerance};
}

std::size_t CodecProfile::payload_bytes() const {
  return static_cast<std::size_t>(std::ceil(payload_bits / 8.0 - 1e-9));
}

const std::string& builtin_codec_table_json() {
  static const std::string table = kCodecTable;
  return table;
}

std::vector<CodecProfile> builtin_codecs() {
  std::vector<CodecProfile> out;
  for (const auto& j : nlohmann::json::parse(builtin_codec_table_json())) {
    out.push_back(codec_from_json(j));
  }
  return out;
}

CodecProfile builtin_codec(const std::string& name) {
  for (auto& c : builtin_codecs()) {
    if (c.name == name) return c;
  }
  throw ConfigError("unknown codec: " + name);
}

CodecProfile override_codec(const CodecProfile& base, const nlohmann::json& overrides) {
  return CodecProfile::make(base.name, overrides.value("bitrate", base.bitrate),
                            overrides.value("frame_ms", base.frame_ms),
                            overrides.value("loss_tolerance", base.loss_tolerance),
                            overrides.value("plc_loss_tolerance", base.plc_loss_tolerance));
}

double mos(const MosParams& params, double p_loss, double p_lack) {
  require_fraction(p_loss, "p_loss");
  require_fraction(p_lack, "p_lack");
  if (p_loss + p_lack > 1.0) throw DomainError("mos: combined loss exceeds 1");
  return params.alpha * std::exp(params.beta * (p_loss + p_lack)) + params.gamma;
}

double max_p_lack(const MosParams& params, double p_loss, double mos_floor) {
  require_fraction(p_loss, "p_loss");
  if (!(mos_floor > params.gamma)) {
    throw DomainError("max_p_lack: MOS floor must exceed gamma");
  }
  const double best = mos(params, p_loss, 0.0);
  // A floor equal to the loss-free MOS up to rounding is met with zero headroom.
  if (mos_floor > best * (1.0 + 1e-12)) {
    throw QualityInfeasibleError("MOS floor unreachable even without steganographic loss");
  }
  if (mos_floor >= best) return 0.0;
  const double total = std::log((mos_floor - params.gamma) / params.alpha) / params.beta;
  return std::clamp(total - p_loss, 0.0, 1.0 - p_loss);
}

double loss_budget(const CodecProfile& codec, bool plc_enabled, double p_network) {
  require_fraction(p_network, "p_network");
  const double tolerance = plc_enabled ? codec.plc_loss_tolerance : codec.loss_tolerance;
  return std::max(0.0, tolerance - p_network);
}

double p_lack_from_rate(const CodecProfile& codec, double ir_bps) {
  if (!(ir_bps >= 0.0)) throw DomainError("insertion rate must be >= 0");
  return ir_bps / codec.payload_rate();
}

double rate_from_p_lack(const CodecProfile& codec, double p_lack) {
  require_fraction(p_lack, "p_lack");
  return p_lack * codec.payload_rate();
}

std::vector<TimedValue> mos_timeline(const MosParams& params, const CodecProfile& codec,
                                     double p_loss, std::span<const TimedValue> ir_series) {
  std::vector<TimedValue> out;
  out.reserve(ir_series.size());
  for (const auto& point : ir_series) {
    const double p = p_lack_from_rate(codec, point.value);
    if (p > 1.0) throw DomainError("insertion rate exceeds the codec payload rate");
    out.push_back({point.t, mos(params, p_loss, p)});
  }
  return out;
}

double max_p_lack_for_distribution(const MosParams& params, const MosDistribution& dist,
                                   double mos_floor, double max_violation) {
  if (dist.points.empty()) throw DomainError("MOS distribution is empty");
  if (!(mos_floor > params.gamma)) throw DomainError("MOS floor must exceed gamma");
  require_fraction(max_violation, "max_violation");
  double total = 0.0;
  for (const auto& [m, w] : dist.points) {
    if (!(w >= 0.0)) throw DomainError("MOS distribution weights must be >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw DomainError("MOS distribution has no mass");

  // Point with loss-free MOS m keeps the floor while p_lack <= threshold.
  std::vector<std::pair<double, double>> thresholds;
  for (const auto& [m, w] : dist.points) {
    const double th = m > params.gamma
                          ? std::log((mos_floor - params.gamma) / (m - params.gamma)) / params.beta
                          : -1.0;
    thresholds.emplace_back(th, w / total);
  }
  std::sort(thresholds.begin(), thresholds.end());
  double violated = 0.0;
  for (const auto& [th, w] : thresholds) {
    if (violated + w > max_violation + 1e-12) {
      if (th < 0.0) throw QualityInfeasibleError("MOS floor violated beyond budget at p_lack = 0");
      return std::min(th, 1.0);
    }
    violated += w;
  }
  return 1.0;
}

}  // namespace lack
