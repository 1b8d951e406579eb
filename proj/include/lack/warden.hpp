#pragma once

// Steganalysis: per-call loss statistics, call-duration goodness of fit, and
// an active warden that erases or drops packets too late for playout.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lack/duration_models.hpp"
#include "lack/rtp_media.hpp"

namespace lack {

struct CallLossStats {
  std::uint32_t ssrc = 0;
  std::uint64_t packets_expected = 0;  // from the unwrapped sequence span
  std::uint64_t packets_seen = 0;      // packets usable for playout
  double loss_ratio = 0.0;
  double duration_s = 0.0;
};

// Statistics for one call's trace. Requires at least two events.
CallLossStats call_loss_stats(std::span<const TraceEvent> events);

// Splits a mixed trace into per-SSRC traces, ordered by SSRC.
std::vector<std::vector<TraceEvent>> split_by_ssrc(std::span<const TraceEvent> events);

struct LossThreshold {
  enum class Kind { Absolute, MeanPlusSd };
  Kind kind = Kind::Absolute;
  double value = 0.02;  // the threshold, or c in mean + c * sd

  static LossThreshold absolute(double t) { return {Kind::Absolute, t}; }
  static LossThreshold mean_plus_sd(double c) { return {Kind::MeanPlusSd, c}; }
};

struct ScanRow {
  std::uint32_t ssrc;
  double loss_ratio;
  double duration_s;
  bool flagged;
};

struct ScanResult {
  std::vector<ScanRow> rows;
  std::vector<std::string> warnings;
  double threshold = 0.0;
};

ScanResult passive_loss_scan(std::span<const std::vector<TraceEvent>> traces,
                             LossThreshold threshold);
ScanResult passive_loss_scan(std::span<const CallLossStats> calls, LossThreshold threshold);

// ssrc,loss_ratio,duration_s,flagged
std::string verdict_csv(const ScanResult& scan);

struct FitTest {
  double statistic;
  double p_value;
  bool rejected;
};

// One-sample Kolmogorov-Smirnov statistic sup |F_n - F|.
double ks_statistic(std::span<const double> samples, const DurationModel& reference);
// Asymptotic Kolmogorov tail with Stephens' small-sample correction.
double ks_p_value(double statistic, std::size_t n);
FitTest duration_fit_test(std::span<const double> durations, const DurationModel& reference,
                          double alpha);

enum class WardenAction { Pass, Erased, Dropped };

struct ActiveWardenConfig {
  enum class Mode { Erase, Drop };
  double window_ms;
  Mode action;

  ActiveWardenConfig(double window_ms, Mode action);
};

// Per-SSRC state: smallest one-way delay seen (the baseline) and the newest
// timestamp. A packet's expected arrival is timestamp + baseline.
class StreamTracker {
 public:
  struct Entry {
    double min_delay_ms;
    double max_ts_ms;
    double max_arrival_ms;
  };
  const Entry* find(std::uint32_t ssrc) const;
  // Lag of the packet behind the stream's playout frontier, then records it.
  double observe(std::uint32_t ssrc, double ts_ms, double arrival_ms);

 private:
  std::map<std::uint32_t, Entry> streams_;
};

// Erase zeroes the payload in place and forwards the packet.
WardenAction active_filter(const ActiveWardenConfig& cfg, PacketRecord& packet,
                           double arrival_at_warden_ms, StreamTracker& tracker);

struct WardenSummary {
  std::uint64_t erased = 0;
  std::uint64_t dropped = 0;
  std::uint64_t passed = 0;
  std::uint64_t collateral = 0;  // actions on packets that were not covert carriers

  void record(WardenAction action, bool collateral_damage);
  WardenSummary& operator+=(const WardenSummary& o);
  std::string to_json() const;
};

// Replays stored traces through the active warden in arrival order. Without
// ground truth, an action on a packet the receiver played counts as collateral.
WardenSummary replay_active_warden(const ActiveWardenConfig& cfg,
                                   std::span<const std::vector<TraceEvent>> traces);

struct RocPoint {
  double threshold;
  double tpr;
  double fpr;
};

// Flag rule score > threshold, swept over every distinct score.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const bool> positive);

}  // namespace lack
