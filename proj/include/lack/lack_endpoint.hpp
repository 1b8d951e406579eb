#pragma once

// LACK sender and receivers: payload substitution, intentional delay,
// harvesting of late packets, and steganogram framing.
//
// Framing: chunk 0 starts with the message length as a 16-bit big-endian
// integer, the message follows, and the last chunk is zero padded to a full
// payload. There is no per-packet marker; the aware receiver harvests every
// packet that misses its playout deadline.

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lack/rtp_media.hpp"

namespace lack {

struct LackSenderConfig {
  double d_lack_ms;
  double peer_buffer_ms;
  double margin_ms;

  LackSenderConfig(double d_lack_ms, double peer_buffer_ms, double margin_ms);
};

// Smallest delay late at both ends, plus the jitter margin.
double negotiate_delay(double buffer_a_ms, double buffer_b_ms, double margin_ms);
// Three jitter standard deviations, at least 1 ms.
double default_margin(double jitter_sd_ms);

using Bytes = std::vector<std::uint8_t>;

struct Steganogram {
  Bytes message;
  std::vector<Bytes> chunks;

  static constexpr std::size_t kMaxMessageBytes = 0xffff;
  static Steganogram frame(Bytes message, std::size_t chunk_bytes);

  // Message bytes carried by the first `chunks_sent` chunks.
  std::size_t message_bytes_in(std::size_t chunks_sent) const;
};

PacketRecord embed(PacketRecord packet, std::span<const std::uint8_t> chunk);

double sender_transmit_time(const PacketRecord& packet, const LackSenderConfig& cfg);

struct PlayVoice {};
struct ExtractBits {
  Bytes payload;
};
struct Drop {};

using AwareDecision = std::variant<PlayVoice, ExtractBits>;
using UnawareDecision = std::variant<PlayVoice, Drop>;

AwareDecision receive_aware(const PacketRecord& packet, double arrival_ms,
                            const JitterBufferConfig& cfg, double base_delay_ms);
UnawareDecision receive_unaware(const PacketRecord& packet, double arrival_ms,
                                const JitterBufferConfig& cfg, double base_delay_ms);

struct ExtractedChunk {
  std::uint16_t seq;
  Bytes payload;
};

struct Gap {
  std::size_t byte_offset;  // within the message
  std::size_t byte_count;
  std::size_t chunk_count;
  bool located;  // false: position unknown, reported at the tail
};

struct Reassembly {
  Bytes message;              // holes are zero filled
  std::size_t declared_length = 0;
  std::size_t chunks_received = 0;
  std::size_t chunks_expected = 0;
  std::vector<Gap> gaps;
  bool complete() const noexcept { return gaps.empty() && chunks_received >= chunks_expected; }
};

// Orders chunks by sequence number (unwrapped in arrival order), strips the
// framing and reports missing extents. `missing_seqs` are sequence numbers the
// receiver never saw; when they account exactly for the shortfall the gaps
// are placed where they occurred.
Reassembly reassemble(std::vector<ExtractedChunk> extracted,
                      std::span<const std::uint16_t> missing_seqs = {});

// {bits_sent, bits_recovered, ber, gaps:[{byte_offset, byte_count, chunk_count, located}]}
std::string extraction_report_json(std::size_t bits_sent, std::size_t bits_recovered,
                                   const std::vector<Gap>& gaps);


}  // namespace lack
