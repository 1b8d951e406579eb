#include "lack/lack_endpoint.hpp"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

#include "lack/errors.hpp"

namespace lack {

LackSenderConfig::LackSenderConfig(double d_lack, double peer_buffer, double margin)
    : d_lack_ms(d_lack), peer_buffer_ms(peer_buffer), margin_ms(margin) {
  if (!(peer_buffer > 0.0) || !(margin >= 0.0)) {
    throw DomainError("LACK sender: buffer must be > 0 and margin >= 0");
  }
  if (!(d_lack > peer_buffer)) {
    throw DomainError("LACK delay must exceed the peer's de-jitter buffer");
  }
}

double negotiate_delay(double buffer_a_ms, double buffer_b_ms, double margin_ms) {
  if (!(buffer_a_ms > 0.0) || !(buffer_b_ms > 0.0) || !(margin_ms >= 0.0)) {
    throw DomainError("negotiate_delay: buffers must be > 0 and margin >= 0");
  }
  return std::max(buffer_a_ms, buffer_b_ms) + margin_ms;
}

double default_margin(double jitter_sd_ms) {
  // Ties at the deadline play, so a jitter-free channel still needs a sliver.
  return std::max(3.0 * jitter_sd_ms, 1.0);
}

Steganogram Steganogram::frame(Bytes message, std::size_t chunk_bytes) {
  if (message.size() > kMaxMessageBytes) {
    throw ChunkingError("steganogram exceeds the 16-bit length prefix");
  }
  if (chunk_bytes < 2) throw ChunkingError("payload too small to carry the length prefix");
  Bytes framed;
  framed.reserve(message.size() + 2);
  framed.push_back(static_cast<std::uint8_t>(message.size() >> 8));
  framed.push_back(static_cast<std::uint8_t>(message.size()));
  framed.insert(framed.end(), message.begin(), message.end());

  Steganogram s{std::move(message), {}};
  for (std::size_t off = 0; off < framed.size(); off += chunk_bytes) {
    const auto end = std::min(framed.size(), off + chunk_bytes);
    Bytes chunk(framed.begin() + static_cast<std::ptrdiff_t>(off),
                framed.begin() + static_cast<std::ptrdiff_t>(end));
    chunk.resize(chunk_bytes, 0);
    s.chunks.push_back(std::move(chunk));
  }
  return s;
}

std::size_t Steganogram::message_bytes_in(std::size_t chunks_sent) const {
  if (chunks.empty() || chunks_sent == 0) return 0;
  const std::size_t framed = chunks_sent * chunks.front().size();
  return std::min(message.size(), framed - 2);
}

PacketRecord embed(PacketRecord packet, std::span<const std::uint8_t> chunk) {
  if (chunk.size() != packet.payload.size()) {
    throw ChunkingError("chunk size differs from the packet payload size");
  }
  packet.payload.assign(chunk.begin(), chunk.end());
  packet.steg_marked = true;
  return packet;
}

double sender_transmit_time(const PacketRecord& packet, const LackSenderConfig& cfg) {
  return packet.steg_marked ? packet.timestamp_ms + cfg.d_lack_ms : packet.timestamp_ms;
}

AwareDecision receive_aware(const PacketRecord& packet, double arrival_ms,
                            const JitterBufferConfig& cfg, double base_delay_ms) {
  if (buffer_decide(cfg, packet, arrival_ms, base_delay_ms) == BufferVerdict::Play) {
    return PlayVoice{};
  }
  return ExtractBits{packet.payload};
}

UnawareDecision receive_unaware(const PacketRecord& packet, double arrival_ms,
                                const JitterBufferConfig& cfg, double base_delay_ms) {
  if (buffer_decide(cfg, packet, arrival_ms, base_delay_ms) == BufferVerdict::Play) {
    return PlayVoice{};
  }
  return Drop{};
}

namespace {

// Extended value of `seq` closest to `anchor`.
std::int64_t nearest_extension(std::uint16_t seq, std::int64_t anchor) {
  const auto diff = static_cast<std::int16_t>(static_cast<std::uint16_t>(seq - anchor));
  return anchor + diff;
}

}  // namespace

Reassembly reassemble(std::vector<ExtractedChunk> extracted,
                      std::span<const std::uint16_t> missing_seqs) {
  Reassembly out;
  if (extracted.empty()) {
    out.chunks_expected = 1;
    out.gaps.push_back({0, 0, 1, false});
    return out;
  }
  const std::size_t chunk_bytes = extracted.front().payload.size();
  for (const auto& c : extracted) {
    if (c.payload.size() != chunk_bytes || chunk_bytes < 2) {
      throw ChunkingError("extracted chunks differ in size");
    }
  }

  SequenceUnwrapper unwrapper;
  std::vector<std::pair<std::int64_t, std::size_t>> order;
  for (std::size_t i = 0; i < extracted.size(); ++i) {
    order.emplace_back(static_cast<std::int64_t>(unwrapper.unwrap(extracted[i].seq)), i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  const Bytes& head = extracted[order.front().second].payload;
  out.declared_length = (std::size_t{head[0]} << 8) | head[1];
  out.chunks_received = extracted.size();
  out.chunks_expected = (out.declared_length + 2 + chunk_bytes - 1) / chunk_bytes;
  const std::size_t shortfall =
      out.chunks_expected > out.chunks_received ? out.chunks_expected - out.chunks_received : 0;

  // Slots in sequence order; nullopt marks a chunk the network lost.
  std::vector<const Bytes*> slots;
  bool located = false;
  if (shortfall > 0 && !missing_seqs.empty()) {
    const std::int64_t first = order.front().first;
    const std::int64_t last = order.back().first;
    const std::int64_t mid = first + (last - first) / 2;
    std::vector<std::int64_t> holes;
    for (auto s : missing_seqs) {
      const std::int64_t ext = nearest_extension(s, mid);
      if (ext > first) holes.push_back(ext);
    }
    std::sort(holes.begin(), holes.end());
    holes.erase(std::unique(holes.begin(), holes.end()), holes.end());
    if (holes.size() == shortfall) {
      located = true;
      std::size_t h = 0;
      for (const auto& [ext, idx] : order) {
        while (h < holes.size() && holes[h] < ext) {
          slots.push_back(nullptr);
          ++h;
        }
        slots.push_back(&extracted[idx].payload);
      }
      for (; h < holes.size(); ++h) slots.push_back(nullptr);
    }
  }
  if (!located) {
    for (const auto& entry : order) slots.push_back(&extracted[entry.second].payload);
  }

  Bytes framed;
  framed.reserve(slots.size() * chunk_bytes);
  for (const Bytes* s : slots) {
    if (s) {
      framed.insert(framed.end(), s->begin(), s->end());
    } else {
      framed.insert(framed.end(), chunk_bytes, 0);
    }
  }
  const std::size_t available = framed.size() - 2;
  const std::size_t kept = std::min(out.declared_length, available);
  out.message.assign(framed.begin() + 2, framed.begin() + 2 + static_cast<std::ptrdiff_t>(kept));

  if (located) {
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (slots[i]) continue;
      const std::size_t begin = i * chunk_bytes - 2;
      const std::size_t end = std::min(out.declared_length, (i + 1) * chunk_bytes - 2);
      if (begin >= end) continue;
      if (!out.gaps.empty() && out.gaps.back().byte_offset + out.gaps.back().byte_count == begin) {
        out.gaps.back().byte_count += end - begin;
        out.gaps.back().chunk_count += 1;
      } else {
        out.gaps.push_back({begin, end - begin, 1, true});
      }
    }
  } else if (shortfall > 0) {
    out.gaps.push_back({kept, out.declared_length - kept, shortfall, false});
  }
  return out;
}

std::string extraction_report_json(std::size_t bits_sent, std::size_t bits_recovered,
                                   const std::vector<Gap>& gaps) {
  if (bits_recovered > bits_sent) throw DomainError("recovered more bits than were sent");
  nlohmann::ordered_json j;
  j["bits_sent"] = bits_sent;
  j["bits_recovered"] = bits_recovered;
  j["ber"] = bits_sent > 0 ? static_cast<double>(bits_sent - bits_recovered) / static_cast<double>(bits_sent)
                           : 0.0;
  j["gaps"] = nlohmann::ordered_json::array();
  for (const auto& g : gaps) {
    j["gaps"].push_back({{"byte_offset", g.byte_offset},
                         {"byte_count", g.byte_count},
                         {"chunk_count", g.chunk_count},
                         {"located", g.located}});
  }
  return j.dump();
}

}  // namespace lack
