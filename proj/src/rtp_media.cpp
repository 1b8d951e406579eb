#include "lack/rtp_media.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "lack/errors.hpp"

namespace lack {

std::vector<std::uint8_t> serialize(const PacketRecord& packet, std::uint8_t payload_type) {
  std::vector<std::uint8_t> wire;
  wire.reserve(12 + packet.payload.size());
  const auto rtp_ts = static_cast<std::uint32_t>(std::llround(packet.timestamp_ms * 8.0));
  wire.push_back(0x80);
  wire.push_back(payload_type & 0x7f);
  wire.push_back(static_cast<std::uint8_t>(packet.seq >> 8));
  wire.push_back(static_cast<std::uint8_t>(packet.seq));
  for (int shift = 24; shift >= 0; shift -= 8) wire.push_back(static_cast<std::uint8_t>(rtp_ts >> shift));
  for (int shift = 24; shift >= 0; shift -= 8) {
    wire.push_back(static_cast<std::uint8_t>(packet.ssrc >> shift));
  }
  wire.insert(wire.end(), packet.payload.begin(), packet.payload.end());
  return wire;
}

std::vector<PacketRecord> generate_stream(const CodecProfile& codec, double call_seconds,
                                          std::uint32_t ssrc, RandomStream& voice_rng) {
  const auto first_seq = static_cast<std::uint16_t>(
      std::uniform_int_distribution<unsigned>(0, 0xffff)(voice_rng));
  return generate_stream(codec, call_seconds, ssrc, first_seq, voice_rng);
}

std::vector<PacketRecord> generate_stream(const CodecProfile& codec, double call_seconds,
                                          std::uint32_t ssrc, std::uint16_t first_seq,
                                          RandomStream& voice_rng) {
  if (!(call_seconds > 0.0)) throw DomainError("call duration must be > 0");
  const auto count =
      static_cast<std::size_t>(std::ceil(call_seconds * 1000.0 / codec.frame_ms - 1e-9));
  const std::size_t bytes = codec.payload_bytes();
  std::vector<PacketRecord> stream(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto& p = stream[i];
    p.ssrc = ssrc;
    p.seq = static_cast<std::uint16_t>(first_seq + i);
    p.timestamp_ms = static_cast<double>(i) * codec.frame_ms;
    p.payload.resize(bytes);
    // Eight payload bytes per 64-bit draw.
    for (std::size_t b = 0; b < bytes; b += 8) {
      std::uint64_t word = voice_rng();
      for (std::size_t k = b; k < std::min(bytes, b + 8); ++k, word >>= 8) {
        p.payload[k] = static_cast<std::uint8_t>(word);
      }
    }
  }
  return stream;
}

JitterBufferConfig::JitterBufferConfig(double size, bool adapt) : size_ms(size), adaptive(adapt) {
  if (!(size >= 10.0 && size <= 500.0)) {
    throw DomainError("de-jitter buffer size must lie in [10, 500] ms");
  }
}

BufferVerdict buffer_decide(const JitterBufferConfig& cfg, const PacketRecord& packet,
                            double arrival_ms, double reference_delay_ms) {
  if (arrival_ms < packet.timestamp_ms) {
    throw CausalityError("packet arrived before its timestamp");
  }
  const double deadline = packet.timestamp_ms + reference_delay_ms + cfg.size_ms;
  return arrival_ms <= deadline ? BufferVerdict::Play : BufferVerdict::Late;
}

AdaptiveJitterBuffer::AdaptiveJitterBuffer(JitterBufferConfig cfg, double initial_delay_ms)
    : cfg_(cfg), estimate_(initial_delay_ms) {}

BufferVerdict AdaptiveJitterBuffer::decide(const PacketRecord& packet, double arrival_ms) {
  const BufferVerdict v = buffer_decide(cfg_, packet, arrival_ms, estimate_);
  if (v == BufferVerdict::Play) {
    estimate_ += (arrival_ms - packet.timestamp_ms - estimate_) / 16.0;
  }
  return v;
}

std::uint64_t SequenceUnwrapper::unwrap(std::uint16_t seq) {
  if (!started_) {
    started_ = true;
    highest_ = (std::uint64_t{1} << 32) + seq;  // headroom for early reordering
    return highest_;
  }
  const auto delta = static_cast<std::int16_t>(static_cast<std::uint16_t>(seq - highest_));
  const std::uint64_t ext = highest_ + static_cast<std::int64_t>(delta);
  if (delta > 0) highest_ = ext;
  return ext;
}

const char* to_string(TraceVerdict v) {
  switch (v) {
    case TraceVerdict::Play: return "play";
    case TraceVerdict::Late: return "late";
    case TraceVerdict::Lost: return "lost";
  }
  return "?";
}

std::string to_json_line(const TraceEvent& e) {
  nlohmann::ordered_json j;
  j["ssrc"] = e.ssrc;
  j["seq"] = e.seq;
  j["ts_ms"] = e.ts_ms;
  j["sent_ms"] = e.sent_ms;
  j["arrival_ms"] = e.arrival_ms ? nlohmann::ordered_json(*e.arrival_ms) : nlohmann::ordered_json(nullptr);
  j["verdict"] = to_string(e.verdict);
  return j.dump();
}

TraceEvent trace_event_from_json_line(const std::string& line) {
  TraceEvent e;
  try {
    const auto j = nlohmann::json::parse(line);
    e.ssrc = j.at("ssrc").get<std::uint32_t>();
    e.seq = j.at("seq").get<std::uint16_t>();
    e.ts_ms = j.at("ts_ms").get<double>();
    e.sent_ms = j.at("sent_ms").get<double>();
    if (!j.at("arrival_ms").is_null()) e.arrival_ms = j.at("arrival_ms").get<double>();
    const auto v = j.at("verdict").get<std::string>();
    if (v == "play") e.verdict = TraceVerdict::Play;
    else if (v == "late") e.verdict = TraceVerdict::Late;
    else if (v == "lost") e.verdict = TraceVerdict::Lost;
    else throw ConfigError("unknown trace verdict: " + v);
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("malformed trace line: ") + ex.what());
  }
  return e;
}

void write_trace(std::ostream& os, const std::vector<TraceEvent>& events) {
  for (const auto& e : events) os << to_json_line(e) << '\n';
}

std::vector<TraceEvent> read_trace(std::istream& is) {
  std::vector<TraceEvent> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(trace_event_from_json_line(line));
  }
  return out;
}

}  // namespace lack
