#include "lack/warden.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lack/errors.hpp"

namespace lack {

CallLossStats call_loss_stats(std::span<const TraceEvent> events) {
  if (events.size() < 2) throw InsufficientDataError("call trace needs at least two packets");
  std::vector<const TraceEvent*> byts;
  for (const auto& e : events) byts.push_back(&e);
  std::stable_sort(byts.begin(), byts.end(),
                   [](const TraceEvent* a, const TraceEvent* b) { return a->ts_ms < b->ts_ms; });

  SequenceUnwrapper unwrapper;
  std::uint64_t lo = UINT64_MAX;
  std::uint64_t hi = 0;
  std::uint64_t seen = 0;
  for (const auto* e : byts) {
    const std::uint64_t ext = unwrapper.unwrap(e->seq);
    lo = std::min(lo, ext);
    hi = std::max(hi, ext);
    if (e->verdict == TraceVerdict::Play) ++seen;
  }
  CallLossStats s;
  s.ssrc = events.front().ssrc;
  s.packets_expected = hi - lo + 1;
  s.packets_seen = seen;
  s.loss_ratio = std::clamp(
      1.0 - static_cast<double>(seen) / static_cast<double>(s.packets_expected), 0.0, 1.0);
  const double span_ms = byts.back()->ts_ms - byts.front()->ts_ms;
  const auto n = static_cast<double>(s.packets_expected);
  s.duration_s = n > 1.0 ? span_ms * n / (n - 1.0) / 1000.0 : 0.0;
  return s;
}

std::vector<std::vector<TraceEvent>> split_by_ssrc(std::span<const TraceEvent> events) {
  std::map<std::uint32_t, std::vector<TraceEvent>> grouped;
  for (const auto& e : events) grouped[e.ssrc].push_back(e);
  std::vector<std::vector<TraceEvent>> out;
  for (auto& [ssrc, evs] : grouped) out.push_back(std::move(evs));
  return out;
}

ScanResult passive_loss_scan(std::span<const CallLossStats> calls, LossThreshold threshold) {
  ScanResult out;
  if (calls.empty()) throw InsufficientDataError("loss scan needs at least one call");
  if (threshold.kind == LossThreshold::Kind::Absolute) {
    out.threshold = threshold.value;
  } else {
    double mean = 0.0;
    for (const auto& c : calls) mean += c.loss_ratio;
    mean /= static_cast<double>(calls.size());
    double var = 0.0;
    for (const auto& c : calls) var += (c.loss_ratio - mean) * (c.loss_ratio - mean);
    const double sd = calls.size() > 1 ? std::sqrt(var / static_cast<double>(calls.size() - 1)) : 0.0;
    out.threshold = mean + threshold.value * sd;
  }
  for (const auto& c : calls) {
    out.rows.push_back({c.ssrc, c.loss_ratio, c.duration_s, c.loss_ratio > out.threshold});
  }
  return out;
}

ScanResult passive_loss_scan(std::span<const std::vector<TraceEvent>> traces,
                             LossThreshold threshold) {
  if (traces.empty()) throw InsufficientDataError("loss scan needs at least one trace");
  std::vector<CallLossStats> stats;
  std::vector<std::string> warnings;
  for (const auto& t : traces) {
    if (t.size() < 2) {
      warnings.push_back(fmt::format("ssrc {} excluded: {} packet(s) in trace",
                                     t.empty() ? 0u : t.front().ssrc, t.size()));
      continue;
    }
    stats.push_back(call_loss_stats(t));
  }
  if (stats.empty()) {
    ScanResult empty;
    empty.warnings = std::move(warnings);
    empty.threshold = threshold.kind == LossThreshold::Kind::Absolute ? threshold.value : 0.0;
    return empty;
  }
  ScanResult out = passive_loss_scan(std::span<const CallLossStats>(stats), threshold);
  out.warnings = std::move(warnings);
  return out;
}

std::string verdict_csv(const ScanResult& scan) {
  std::string out = "ssrc,loss_ratio,duration_s,flagged\n";
  for (const auto& r : scan.rows) {
    out += fmt::format("{},{},{},{}\n", r.ssrc, r.loss_ratio, r.duration_s, r.flagged ? 1 : 0);
  }
  return out;
}

double ks_statistic(std::span<const double> samples, const DurationModel& reference) {
  std::vector<double> xs(samples.begin(), samples.end());
  std::sort(xs.begin(), xs.end());
  const auto n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = 1.0 - evaluate(reference, std::max(0.0, xs[i])).survival;
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_p_value(double statistic, std::size_t n) {
  const double rn = std::sqrt(static_cast<double>(n));
  const double lambda = (rn + 0.12 + 0.11 / rn) * statistic;
  if (lambda <= 0.0) return 1.0;
  constexpr double pi = std::numbers::pi;
  double p = 0.0;
  if (lambda < 1.18) {
    // Jacobi theta form, fast for small lambda.
    double sum = 0.0;
    for (int j = 1; j <= 20; ++j) {
      const double k = 2.0 * j - 1.0;
      sum += std::exp(-k * k * pi * pi / (8.0 * lambda * lambda));
    }
    p = 1.0 - std::sqrt(2.0 * pi) / lambda * sum;
  } else {
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
      const double term = std::exp(-2.0 * j * j * lambda * lambda);
      sum += (j % 2 == 1 ? term : -term);
      if (term < 1e-17) break;
    }
    p = 2.0 * sum;
  }
  return std::clamp(p, 0.0, 1.0);
}

FitTest duration_fit_test(std::span<const double> durations, const DurationModel& reference,
                          double alpha) {
  if (durations.size() < 20) {
    throw InsufficientDataError("duration fit test needs at least 20 calls");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("significance must lie in (0, 1)");
  const double d = ks_statistic(durations, reference);
  const double p = ks_p_value(d, durations.size());
  return {d, p, p < alpha};
}

ActiveWardenConfig::ActiveWardenConfig(double window, Mode mode) : window_ms(window), action(mode) {
  if (!(window > 0.0)) throw DomainError("active warden window must be > 0");
}

const StreamTracker::Entry* StreamTracker::find(std::uint32_t ssrc) const {
  const auto it = streams_.find(ssrc);
  return it == streams_.end() ? nullptr : &it->second;
}

double StreamTracker::observe(std::uint32_t ssrc, double ts_ms, double arrival_ms) {
  const double delay = arrival_ms - ts_ms;
  auto [it, inserted] = streams_.try_emplace(ssrc, Entry{delay, ts_ms, arrival_ms});
  Entry& e = it->second;
  const double lag = inserted ? 0.0 : delay - e.min_delay_ms;
  e.min_delay_ms = std::min(e.min_delay_ms, delay);
  if (ts_ms > e.max_ts_ms) {
    e.max_ts_ms = ts_ms;
    e.max_arrival_ms = arrival_ms;
  }
  return lag;
}

WardenAction active_filter(const ActiveWardenConfig& cfg, PacketRecord& packet,
                           double arrival_at_warden_ms, StreamTracker& tracker) {
  const double lag = tracker.observe(packet.ssrc, packet.timestamp_ms, arrival_at_warden_ms);
  if (lag <= cfg.window_ms) return WardenAction::Pass;
  if (cfg.action == ActiveWardenConfig::Mode::Drop) return WardenAction::Dropped;
  std::fill(packet.payload.begin(), packet.payload.end(), std::uint8_t{0});
  return WardenAction::Erased;
}

void WardenSummary::record(WardenAction action, bool collateral_damage) {
  switch (action) {
    case WardenAction::Pass: ++passed; return;
    case WardenAction::Erased: ++erased; break;
    case WardenAction::Dropped: ++dropped; break;
  }
  if (collateral_damage) ++collateral;
}

WardenSummary& WardenSummary::operator+=(const WardenSummary& o) {
  erased += o.erased;
  dropped += o.dropped;
  passed += o.passed;
  collateral += o.collateral;
  return *this;
}

std::string WardenSummary::to_json() const {
  nlohmann::ordered_json j;
  j["erased"] = erased;
  j["dropped"] = dropped;
  j["passed"] = passed;
  j["collateral"] = collateral;
  return j.dump();
}

WardenSummary replay_active_warden(const ActiveWardenConfig& cfg,
                                   std::span<const std::vector<TraceEvent>> traces) {
  WardenSummary summary;
  StreamTracker tracker;
  std::vector<const TraceEvent*> arrived;
  for (const auto& t : traces) {
    for (const auto& e : t) {
      if (e.arrival_ms) arrived.push_back(&e);
    }
  }
  std::stable_sort(arrived.begin(), arrived.end(), [](const TraceEvent* a, const TraceEvent* b) {
    if (*a->arrival_ms != *b->arrival_ms) return *a->arrival_ms < *b->arrival_ms;
    return a->seq < b->seq;
  });
  for (const auto* e : arrived) {
    PacketRecord p;
    p.ssrc = e->ssrc;
    p.seq = e->seq;
    p.timestamp_ms = e->ts_ms;
    const auto action = active_filter(cfg, p, *e->arrival_ms, tracker);
    summary.record(action, e->verdict == TraceVerdict::Play);
  }
  return summary;
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const bool> positive) {
  if (scores.size() != positive.size()) throw DomainError("roc: scores and labels differ in size");
  const auto pos = static_cast<double>(std::count(positive.begin(), positive.end(), true));
  const double neg = static_cast<double>(positive.size()) - pos;
  std::vector<double> thresholds(scores.begin(), scores.end());
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  thresholds.insert(thresholds.begin(), std::numeric_limits<double>::infinity());
  std::vector<RocPoint> out;
  for (double th : thresholds) {
    double tp = 0.0;
    double fp = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] > th) (positive[i] ? tp : fp) += 1.0;
    }
    out.push_back({th, pos > 0 ? tp / pos : 0.0, neg > 0 ? fp / neg : 0.0});
  }
  // The lowest threshold flags everything.
  out.push_back({-std::numeric_limits<double>::infinity(), pos > 0 ? 1.0 : 0.0, neg > 0 ? 1.0 : 0.0});
  return out;
}

}  // namespace lack
