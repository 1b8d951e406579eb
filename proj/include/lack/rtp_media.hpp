#pragma once

// Carrier RTP stream and the receiver's de-jitter acceptance rule.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lack/random.hpp"
#include "lack/voice_quality.hpp"

namespace lack {

struct PacketRecord {
  std::uint32_t ssrc = 0;
  std::uint16_t seq = 0;
  double timestamp_ms = 0.0;  // media time since call start
  std::vector<std::uint8_t> payload;
  bool steg_marked = false;  // sender-side bookkeeping, never on the wire
};

// Fixed 12-byte RTP header (V=2, no CSRC, no extension, 8 kHz clock) followed
// by the payload.
std::vector<std::uint8_t> serialize(const PacketRecord& packet, std::uint8_t payload_type = 0);

std::vector<PacketRecord> generate_stream(const CodecProfile& codec, double call_seconds,
                                          std::uint32_t ssrc, RandomStream& voice_rng);
std::vector<PacketRecord> generate_stream(const CodecProfile& codec, double call_seconds,
                                          std::uint32_t ssrc, std::uint16_t first_seq,
                                          RandomStream& voice_rng);

struct JitterBufferConfig {
  double size_ms = 60.0;
  bool adaptive = false;

  JitterBufferConfig() = default;
  JitterBufferConfig(double size_ms, bool adaptive = false);
};

enum class BufferVerdict { Play, Late };

// Play iff arrival <= timestamp + reference_delay + buffer size (ties play).
BufferVerdict buffer_decide(const JitterBufferConfig& cfg, const PacketRecord& packet,
                            double arrival_ms, double reference_delay_ms);

// Receiver buffer whose reference delay follows an exponentially weighted
// estimate of the one-way delay of played packets (gain 1/16).
class AdaptiveJitterBuffer {
 public:
  AdaptiveJitterBuffer(JitterBufferConfig cfg, double initial_delay_ms);

  BufferVerdict decide(const PacketRecord& packet, double arrival_ms);
  double reference_delay() const noexcept { return estimate_; }

 private:
  JitterBufferConfig cfg_;
  double estimate_;
};

// Extends 16-bit sequence numbers to 64 bits, following the highest number
// seen so far (forward jumps below 2^15 advance, larger ones count as old).
class SequenceUnwrapper {
 public:
  std::uint64_t unwrap(std::uint16_t seq);

 private:
  bool started_ = false;
  std::uint64_t highest_ = 0;
};

enum class TraceVerdict { Play, Late, Lost };

// One line of the JSON-lines packet trace.
struct TraceEvent {
  std::uint32_t ssrc = 0;
  std::uint16_t seq = 0;
  double ts_ms = 0.0;
  double sent_ms = 0.0;
  std::optional<double> arrival_ms;
  TraceVerdict verdict = TraceVerdict::Play;
};

std::string to_json_line(const TraceEvent& e);
TraceEvent trace_event_from_json_line(const std::string& line);
void write_trace(std::ostream& os, const std::vector<TraceEvent>& events);
std::vector<TraceEvent> read_trace(std::istream& is);

const char* to_string(TraceVerdict v);

}  // namespace lack
