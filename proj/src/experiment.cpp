#include "lack/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <memory>
#include <thread>

#include "lack/errors.hpp"
#include "lack/lack_endpoint.hpp"

namespace lack {
namespace {

using json = nlohmann::json;

enum StreamPurpose : std::uint64_t { kRole = 1, kDuration, kVoice, kScheduler, kChannel, kMessage };

SchedulerMode parse_mode(const std::string& s) {
  if (s == "distribution") return SchedulerMode::DistributionDriven;
  if (s == "approx") return SchedulerMode::ApproxLinear;
  if (s == "online") return SchedulerMode::OnlineMeasurement;
  if (s == "fixed-rate") return SchedulerMode::FixedRate;
  throw ConfigError("unknown scheduler mode: " + s);
}

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

std::size_t bit_errors(const Bytes& sent, const Bytes& got, std::size_t bits) {
  std::size_t errors = 0;
  for (std::size_t bit = 0; bit < bits; bit += 8) {
    const std::size_t byte = bit / 8;
    const std::size_t width = std::min<std::size_t>(8, bits - bit);
    // Compare the leading `width` bits of the byte.
    const auto mask = static_cast<std::uint8_t>(0xff << (8 - width));
    const std::uint8_t a = sent[byte];
    const std::uint8_t b = byte < got.size() ? got[byte] : static_cast<std::uint8_t>(~a);
    errors += static_cast<std::size_t>(std::popcount(static_cast<std::uint8_t>((a ^ b) & mask)));
  }
  return errors;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

DurationModel parse_duration_model(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "weibull") return DurationModel::weibull(j.at("k").get<double>(), j.at("lambda").get<double>());
  if (type == "exponential") return DurationModel::exponential(j.at("mean").get<double>());
  if (type == "weibull_moments") {
    return DurationModel(fit_weibull(j.at("mean").get<double>(), j.at("cv").get<double>()));
  }
  if (type == "empirical") return DurationModel(EmpiricalPiecewise::fastweb());
  if (type == "samples") return DurationModel(SampleBased(j.at("values").get<std::vector<double>>()));
  throw ConfigError("unknown duration model type: " + type);
}

ExperimentConfig parse_experiment_config(const json& j, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  try {
    if (j.contains("duration_model")) cfg.duration_model = parse_duration_model(j.at("duration_model"));
    if (j.contains("codec")) {
      const auto& c = j.at("codec");
      if (c.is_string()) {
        cfg.codec = builtin_codec(c.get<std::string>());
      } else {
        cfg.codec = override_codec(builtin_codec(c.at("name").get<std::string>()), c);
      }
    }
    if (j.contains("channel")) {
      const auto& c = j.at("channel");
      cfg.channel.base_delay_ms = c.value("base_delay_ms", cfg.channel.base_delay_ms);
      cfg.channel.jitter_sd_ms = c.value("jitter_sd_ms", cfg.channel.jitter_sd_ms);
      cfg.channel.p_loss = c.value("p_loss", cfg.channel.p_loss);
      cfg.channel.gamma_shape = c.value("gamma_shape", cfg.channel.gamma_shape);
      const auto law = c.value("jitter_law", std::string("truncated-normal"));
      if (law == "truncated-normal") cfg.channel.jitter_law = JitterLaw::TruncatedNormal;
      else if (law == "gamma") cfg.channel.jitter_law = JitterLaw::Gamma;
      else throw ConfigError("unknown jitter law: " + law);
    }
    if (j.contains("jitter_buffer")) {
      const auto& b = j.at("jitter_buffer");
      cfg.buffer = JitterBufferConfig(b.value("size_ms", 60.0), b.value("adaptive", false));
    }
    cfg.sender_buffer_ms = cfg.buffer.size_ms;
    if (j.contains("lack")) {
      const auto& l = j.at("lack");
      cfg.sender_buffer_ms = l.value("sender_buffer_ms", cfg.sender_buffer_ms);
      if (l.contains("margin_ms") && !l.at("margin_ms").is_null()) {
        cfg.margin_ms = l.at("margin_ms").get<double>();
      }
      if (l.contains("message_file")) {
        const auto path = base_dir / l.at("message_file").get<std::string>();
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ConfigError("cannot open message file: " + path.string());
        cfg.message = Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
      }
    }
    if (j.contains("scheduler")) {
      const auto& s = j.at("scheduler");
      auto& sc = cfg.scheduler;
      sc.s_bits = s.value("s_bits", sc.s_bits);
      sc.mode = parse_mode(s.value("mode", std::string("distribution")));
      sc.mos_floor = s.value("mos_floor", sc.mos_floor);
      sc.plc = s.value("plc", sc.plc);
      sc.fixed_rate_bps = s.value("fixed_rate_bps", sc.fixed_rate_bps);
      sc.report_interval_s = s.value("report_interval_s", sc.report_interval_s);
      if (s.contains("step_s")) sc.step_s = s.at("step_s").get<double>();
      const auto sel = s.value("selection", std::string("bernoulli"));
      if (sel == "bernoulli") sc.selection = EmbeddingSelector::Kind::Bernoulli;
      else if (sel == "deterministic") sc.selection = EmbeddingSelector::Kind::Deterministic;
      else throw ConfigError("unknown selection kind: " + sel);
    }
    if (j.contains("warden")) {
      const auto& w = j.at("warden");
      const auto type = w.value("type", std::string("none"));
      if (type == "none") {
        cfg.warden.kind = WardenSpec::Kind::None;
      } else if (type == "passive") {
        cfg.warden.kind = WardenSpec::Kind::Passive;
        if (w.contains("sd_multiplier")) {
          cfg.warden.threshold = LossThreshold::mean_plus_sd(w.at("sd_multiplier").get<double>());
        } else {
          cfg.warden.threshold = LossThreshold::absolute(w.value("threshold", 0.02));
        }
      } else if (type == "active") {
        cfg.warden.kind = WardenSpec::Kind::Active;
        cfg.warden.window_ms = w.value("window_ms", cfg.warden.window_ms);
        const auto action = w.value("action", std::string("drop"));
        if (action == "drop") cfg.warden.action = ActiveWardenConfig::Mode::Drop;
        else if (action == "erase") cfg.warden.action = ActiveWardenConfig::Mode::Erase;
        else throw ConfigError("unknown warden action: " + action);
      } else {
        throw ConfigError("unknown warden type: " + type);
      }
    }
    if (j.contains("mos")) {
      const auto& m = j.at("mos");
      cfg.mos = MosParams(m.value("alpha", cfg.mos.alpha), m.value("beta", cfg.mos.beta),
                          m.value("gamma", cfg.mos.gamma));
    }
    cfg.n_calls = j.value("n_calls", cfg.n_calls);
    cfg.lack_fraction = j.value("lack_fraction", cfg.lack_fraction);
    cfg.seed = j.value("seed", cfg.seed);
    if (cfg.message) cfg.scheduler.s_bits = 8.0 * static_cast<double>(cfg.message->size());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid experiment config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_experiment_config(j, std::filesystem::path(path).parent_path());
}

void ExperimentConfig::validate() const {
  try {
    channel.validate();
    if (n_calls < 1) throw ConfigError("n_calls must be >= 1");
    if (!(lack_fraction >= 0.0 && lack_fraction <= 1.0)) {
      throw ConfigError("lack_fraction must lie in [0, 1]");
    }
    if (!(scheduler.s_bits >= 0.0) || scheduler.s_bits != std::floor(scheduler.s_bits)) {
      throw ConfigError("scheduler.s_bits must be a whole number >= 0");
    }
    if (std::ceil(scheduler.s_bits / 8.0) > static_cast<double>(Steganogram::kMaxMessageBytes)) {
      throw ConfigError("scheduler.s_bits exceeds the 65535-byte steganogram limit");
    }
    if (scheduler.mode == SchedulerMode::FixedRate && !(scheduler.fixed_rate_bps > 0.0)) {
      throw ConfigError("fixed-rate mode needs scheduler.fixed_rate_bps > 0");
    }
    if (!(scheduler.report_interval_s > 0.0)) throw ConfigError("report interval must be > 0");
    if (scheduler.step_s && !(*scheduler.step_s > 0.0)) throw ConfigError("step_s must be > 0");
    if (warden.kind == WardenSpec::Kind::Active) {
      ActiveWardenConfig(warden.window_ms, warden.action);
    }
    LackSenderConfig(lack_delay_ms(), buffer.size_ms, margin_ms.value_or(default_margin(channel.jitter_sd_ms)));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid experiment config: ") + e.what());
  }
}

double ExperimentConfig::lack_delay_ms() const {
  return negotiate_delay(sender_buffer_ms, buffer.size_ms,
                         margin_ms.value_or(default_margin(channel.jitter_sd_ms)));
}

// ---------------------------------------------------------------------------
// One call

CallOutcome run_call(const ExperimentConfig& cfg, std::uint64_t call_index, bool keep_trace) {
  const std::uint64_t call_seed = derive_seed(cfg.seed, call_index);
  RandomStream role_rng(derive_seed(call_seed, kRole));
  RandomStream duration_rng(derive_seed(call_seed, kDuration));
  RandomStream voice_rng(derive_seed(call_seed, kVoice));
  RandomStream sched_rng(derive_seed(call_seed, kScheduler));
  RandomStream channel_rng(derive_seed(call_seed, kChannel));
  RandomStream message_rng(derive_seed(call_seed, kMessage));

  CallOutcome out;
  CallMetrics& m = out.metrics;
  m.call_index = call_index;
  m.lack_active = cfg.lack_fraction >= 1.0 ||
                  (cfg.lack_fraction > 0.0 && std::bernoulli_distribution(cfg.lack_fraction)(role_rng));
  m.duration_s = sample_duration(cfg.duration_model, duration_rng);

  const auto ssrc = static_cast<std::uint32_t>(voice_rng());
  std::vector<PacketRecord> packets = generate_stream(cfg.codec, m.duration_s, ssrc, voice_rng);
  m.packets = packets.size();

  const double margin = cfg.margin_ms.value_or(default_margin(cfg.channel.jitter_sd_ms));
  const LackSenderConfig sender(cfg.lack_delay_ms(), cfg.buffer.size_ms, margin);

  Bytes message;
  if (cfg.message) {
    message = *cfg.message;
  } else {
    message.resize(static_cast<std::size_t>(std::ceil(cfg.scheduler.s_bits / 8.0)));
    for (auto& b : message) b = static_cast<std::uint8_t>(message_rng());
  }
  const Steganogram steg = Steganogram::frame(message, cfg.codec.payload_bytes());
  const double chunk_bits = 8.0 * static_cast<double>(cfg.codec.payload_bytes());
  const double framed_bits = 8.0 * static_cast<double>(message.size() + 2);

  SchedulerState sched = SchedulerState::start(framed_bits, cfg.duration_model, cfg.scheduler.mode,
                                               cfg.scheduler.step_s.value_or(cfg.codec.frame_ms / 1000.0));
  sched.fixed_rate_bps = cfg.scheduler.fixed_rate_bps;
  // Static modes plan with the configured network loss; the online mode starts
  // from a loss-free estimate and learns from receiver reports.
  const bool online = cfg.scheduler.mode == SchedulerMode::OnlineMeasurement;
  sched.ir_cap = cap_from_quality(cfg.codec, cfg.mos, online ? 0.0 : cfg.channel.p_loss,
                                  cfg.scheduler.mos_floor, cfg.scheduler.plc);
  EmbeddingSelector selector(cfg.scheduler.selection);

  // Sender side, in media order.
  std::vector<std::optional<double>> arrival(packets.size());
  std::vector<double> sent(packets.size());
  std::size_t chunks_sent = 0;
  const double report_ms = cfg.scheduler.report_interval_s * 1000.0;
  double next_report = report_ms;
  std::size_t interval_start = 0;
  for (std::size_t i = 0; i < packets.size(); ++i) {
    PacketRecord& p = packets[i];
    if (online && p.timestamp_ms >= next_report) {
      // Receiver report for the interval just closed: unusable packets minus
      // the ones this sender delayed on purpose.
      std::size_t unusable = 0;
      std::size_t marked = 0;
      for (std::size_t k = interval_start; k < i; ++k) {
        const auto& q = packets[k];
        if (q.steg_marked) ++marked;
        if (!arrival[k] || buffer_decide(cfg.buffer, q, *arrival[k], cfg.channel.base_delay_ms) ==
                               BufferVerdict::Late) {
          ++unusable;
        }
      }
      const double n = static_cast<double>(i - interval_start);
      const double p_est =
          n > 0 ? std::clamp((static_cast<double>(unusable) - static_cast<double>(marked)) / n, 0.0, 1.0) : 0.0;
      try {
        sched.ir_cap = cap_from_quality(cfg.codec, cfg.mos, p_est, cfg.scheduler.mos_floor, cfg.scheduler.plc);
      } catch (const QualityInfeasibleError&) {
        sched.ir_cap = 0.0;
      }
      interval_start = i;
      next_report += report_ms * std::floor((p.timestamp_ms - next_report) / report_ms + 1.0);
    }
    if (m.lack_active && chunks_sent < steg.chunks.size()) {
      sched.elapsed = p.timestamp_ms / 1000.0;
      bool chosen = false;
      try {
        chosen = selector.select(sched, cfg.codec, sched_rng);
      } catch (const ConditioningError&) {
        chosen = false;  // past the support of the duration law
      }
      if (chosen) {
        p = embed(std::move(p), steg.chunks[chunks_sent]);
        ++chunks_sent;
        sched.s_remaining = std::max(0.0, framed_bits - static_cast<double>(chunks_sent) * chunk_bits);
      }
    }
    sent[i] = sender_transmit_time(p, sender);
    arrival[i] = transmit(cfg.channel, sent[i], channel_rng);
  }
  m.steg_packets = chunks_sent;

  // Network side, in arrival order with (arrival, seq) tie-break.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < packets.size(); ++i) {
    if (arrival[i]) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (*arrival[a] != *arrival[b]) return *arrival[a] < *arrival[b];
    return packets[a].seq < packets[b].seq;
  });

  std::vector<bool> dropped_by_warden(packets.size(), false);
  if (cfg.warden.kind == WardenSpec::Kind::Active) {
    const ActiveWardenConfig wcfg(cfg.warden.window_ms, cfg.warden.action);
    StreamTracker tracker;
    for (std::size_t i : order) {
      const auto action = active_filter(wcfg, packets[i], *arrival[i], tracker);
      m.warden_summary.record(action, !packets[i].steg_marked);
      if (action == WardenAction::Dropped) dropped_by_warden[i] = true;
    }
    m.warden_collateral = m.warden_summary.collateral;
    m.warden_flagged = m.warden_summary.erased + m.warden_summary.dropped > 0;
  }

  // Receiver.
  std::vector<TraceVerdict> verdict(packets.size(), TraceVerdict::Lost);
  std::vector<ExtractedChunk> extracted;
  std::optional<AdaptiveJitterBuffer> adaptive;
  if (cfg.buffer.adaptive) adaptive.emplace(cfg.buffer, cfg.channel.base_delay_ms);
  for (std::size_t i : order) {
    if (dropped_by_warden[i]) continue;
    const PacketRecord& p = packets[i];
    const BufferVerdict v = adaptive ? adaptive->decide(p, *arrival[i])
                                     : buffer_decide(cfg.buffer, p, *arrival[i], cfg.channel.base_delay_ms);
    verdict[i] = v == BufferVerdict::Play ? TraceVerdict::Play : TraceVerdict::Late;
    if (m.lack_active && v == BufferVerdict::Late) extracted.push_back({p.seq, p.payload});
  }

  std::size_t played = 0;
  std::size_t network_bad = 0;
  for (std::size_t i = 0; i < packets.size(); ++i) {
    if (verdict[i] == TraceVerdict::Play) ++played;
    if (!arrival[i] || (!packets[i].steg_marked && !dropped_by_warden[i] && verdict[i] == TraceVerdict::Late)) {
      ++network_bad;
    }
  }
  const auto n = static_cast<double>(packets.size());
  m.voice_loss_ratio_total = 1.0 - static_cast<double>(played) / n;
  m.voice_loss_ratio_network = static_cast<double>(network_bad) / n;
  m.mos_final = mos(cfg.mos, std::min(1.0, m.voice_loss_ratio_total), 0.0);

  if (m.lack_active && chunks_sent > 0) {
    std::vector<std::uint16_t> missing;
    std::size_t first_arrived = packets.size();
    std::size_t last_arrived = 0;
    for (std::size_t i = 0; i < packets.size(); ++i) {
      if (verdict[i] != TraceVerdict::Lost) {
        first_arrived = std::min(first_arrived, i);
        last_arrived = i;
      }
    }
    for (std::size_t i = first_arrived; i < last_arrived; ++i) {
      if (verdict[i] == TraceVerdict::Lost) missing.push_back(packets[i].seq);
    }
    Reassembly r = reassemble(std::move(extracted), missing);
    const std::size_t sent_bytes = steg.message_bytes_in(chunks_sent);
    const std::size_t sent_bits =
        std::min(8 * sent_bytes, static_cast<std::size_t>(cfg.scheduler.s_bits));
    const std::size_t errors = bit_errors(message, r.message, sent_bits);
    m.steg_bits_sent = static_cast<double>(sent_bits);
    m.steg_bits_recovered = static_cast<double>(sent_bits - errors);
    m.steg_ber = sent_bits > 0 ? static_cast<double>(errors) / static_cast<double>(sent_bits) : 0.0;
    m.steg_gaps = std::move(r.gaps);
    out.recovered_message = std::move(r.message);
  }

  std::vector<TraceEvent> trace;
  trace.reserve(packets.size());
  for (std::size_t i = 0; i < packets.size(); ++i) {
    const bool reached = arrival[i] && !dropped_by_warden[i];
    trace.push_back({packets[i].ssrc, packets[i].seq, packets[i].timestamp_ms, sent[i],
                     reached ? arrival[i] : std::nullopt, verdict[i]});
  }
  if (trace.size() >= 2) {
    const CallLossStats stats = call_loss_stats(trace);
    m.observed_loss_ratio = stats.loss_ratio;
    if (cfg.warden.kind == WardenSpec::Kind::Passive &&
        cfg.warden.threshold.kind == LossThreshold::Kind::Absolute) {
      m.warden_flagged = stats.loss_ratio > cfg.warden.threshold.value;
    }
  }
  if (keep_trace) out.trace = std::move(trace);
  return out;
}

// ---------------------------------------------------------------------------
// Experiment

ExperimentReport run_experiment(const ExperimentConfig& cfg, unsigned threads, bool keep_traces) {
  cfg.validate();
  ExperimentReport report;
  std::vector<CallOutcome> outcomes(cfg.n_calls);
  std::vector<std::exception_ptr> errors(std::max(1u, threads));
  std::atomic<std::uint64_t> next{0};
  auto worker = [&](unsigned id) {
    try {
      for (std::uint64_t i = next++; i < cfg.n_calls; i = next++) {
        outcomes[i] = run_call(cfg, i, keep_traces);
      }
    } catch (...) {
      errors[id] = std::current_exception();
      next = cfg.n_calls;
    }
  };
  if (threads <= 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (auto& o : outcomes) {
    report.calls.push_back(o.metrics);
    if (keep_traces) report.traces.push_back(std::move(o.trace));
    if (cfg.message) report.recovered.push_back(std::move(o.recovered_message));
  }

  // Population-relative threshold needs every call first.
  std::optional<double> passive_threshold;
  if (cfg.warden.kind == WardenSpec::Kind::Passive) {
    std::vector<CallLossStats> stats;
    for (const auto& c : report.calls) {
      CallLossStats s;
      s.loss_ratio = c.observed_loss_ratio;
      stats.push_back(s);
    }
    const ScanResult scan = passive_loss_scan(std::span<const CallLossStats>(stats), cfg.warden.threshold);
    passive_threshold = scan.threshold;
    for (std::size_t i = 0; i < report.calls.size(); ++i) report.calls[i].warden_flagged = scan.rows[i].flagged;
  }

  auto& agg = report.aggregate;
  agg["n_calls"] = cfg.n_calls;
  agg["lack_calls"] = std::count_if(report.calls.begin(), report.calls.end(),
                                    [](const CallMetrics& c) { return c.lack_active; });
  agg["seed"] = cfg.seed;

  const Table table = per_call_table(report.calls);
  nlohmann::ordered_json metrics;
  for (std::size_t col = 2; col < table.columns.size(); ++col) {
    std::vector<double> v;
    for (const auto& row : table.rows) v.push_back(row[col]);
    metrics[table.columns[col]] = {{"mean", mean_of(v)}, {"sd", sd_of(v)}};
  }
  agg["metrics"] = metrics;

  double recovered = 0.0;
  double duration = 0.0;
  for (const auto& c : report.calls) {
    recovered += c.steg_bits_recovered;
    duration += c.duration_s;
  }
  agg["effective_steg_bandwidth_bps"] = duration > 0.0 ? recovered / duration : 0.0;

  nlohmann::ordered_json w;
  w["type"] = cfg.warden.kind == WardenSpec::Kind::None      ? "none"
              : cfg.warden.kind == WardenSpec::Kind::Passive ? "passive"
                                                             : "active";
  double tp = 0, fp = 0, pos = 0, neg = 0;
  for (const auto& c : report.calls) {
    (c.lack_active ? pos : neg) += 1.0;
    if (c.warden_flagged) (c.lack_active ? tp : fp) += 1.0;
  }
  w["tpr"] = pos > 0 ? tp / pos : 0.0;
  w["fpr"] = neg > 0 ? fp / neg : 0.0;
  if (passive_threshold) w["threshold"] = *passive_threshold;
  if (cfg.warden.kind == WardenSpec::Kind::Active) {
    WardenSummary total;
    for (const auto& c : report.calls) total += c.warden_summary;
    w["summary"] = json::parse(total.to_json());
  }
  if (cfg.warden.kind == WardenSpec::Kind::Passive) {
    std::vector<double> scores;
    const auto labels = std::make_unique<bool[]>(report.calls.size());
    for (std::size_t i = 0; i < report.calls.size(); ++i) {
      scores.push_back(report.calls[i].observed_loss_ratio);
      labels[i] = report.calls[i].lack_active;
    }
    auto roc = nlohmann::ordered_json::array();
    for (const auto& p : roc_curve(scores, std::span<const bool>(labels.get(), scores.size()))) {
      roc.push_back({{"threshold", std::isfinite(p.threshold) ? json(p.threshold) : json(nullptr)},
                     {"tpr", p.tpr},
                     {"fpr", p.fpr}});
    }
    w["roc"] = roc;
  }
  agg["warden"] = w;
  return report;
}

Table per_call_table(const std::vector<CallMetrics>& calls) {
  Table t;
  t.columns = {"call_index",
               "lack",
               "duration_s",
               "steg_bits_sent",
               "steg_bits_recovered",
               "steg_ber",
               "voice_loss_ratio_network",
               "voice_loss_ratio_total",
               "mos_final",
               "warden_flagged",
               "warden_collateral"};
  for (const auto& c : calls) {
    t.rows.push_back({static_cast<double>(c.call_index), c.lack_active ? 1.0 : 0.0, c.duration_s,
                      c.steg_bits_sent, c.steg_bits_recovered, c.steg_ber,
                      c.voice_loss_ratio_network, c.voice_loss_ratio_total, c.mos_final,
                      c.warden_flagged ? 1.0 : 0.0, static_cast<double>(c.warden_collateral)});
  }
  return t;
}

// ---------------------------------------------------------------------------
// Curves

Table duration_curve(const DurationModel& model, double t_max, double dt) {
  if (!(t_max > 0.0) || !(dt > 0.0)) throw DomainError("curve grid must have t_max > 0, dt > 0");
  Table t;
  t.columns = {"t", "survival", "density", "cond_mean", "lo", "hi"};
  const auto steps = static_cast<long>(std::floor(t_max / dt + 1e-9));
  for (long i = 0; i <= steps; ++i) {
    const double x = static_cast<double>(i) * dt;
    const Evaluation e = evaluate(model, x);
    if (!(e.survival > kMinSurvival)) break;
    const Bracket b = conditional_mean_bounds(model, x);
    t.rows.push_back({x, e.survival, e.density, conditional_mean(model, x), b.lo, b.hi});
  }
  return t;
}

Table schedule_curve(const DurationModel& model, double s_bits, double t_max, double dt,
                     SchedulerMode mode) {
  Table t;
  t.columns = {"t", "ir", "s_remaining", "x_t", "cond_mean"};
  const RateSchedule sched = build_schedule(SchedulerState::start(s_bits, model, mode), t_max, dt);
  for (const auto& p : sched.points) {
    t.rows.push_back({p.t, p.ir, p.s_remaining, sched.points.front().ir - p.ir, p.cond_mean});
  }
  return t;
}

Table mos_curve(const MosParams& params, const std::vector<double>& p_loss_grid,
                const std::vector<double>& p_lack_values) {
  Table t;
  t.columns = {"p_loss", "p_lack", "mos"};
  for (double lack : p_lack_values) {
    for (double loss : p_loss_grid) t.rows.push_back({loss, lack, mos(params, loss, lack)});
  }
  return t;
}

}  // namespace lack
