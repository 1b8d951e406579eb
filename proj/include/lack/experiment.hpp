#pragma once

// End-to-end call simulation: sender (scheduler + embedder) -> channel ->
// optional active warden -> receiver, plus experiment configuration and
// aggregate reporting.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lack/duration_models.hpp"
#include "lack/insertion_scheduler.hpp"
#include "lack/lack_endpoint.hpp"
#include "lack/network_channel.hpp"
#include "lack/rtp_media.hpp"
#include "lack/table.hpp"
#include "lack/voice_quality.hpp"
#include "lack/warden.hpp"

namespace lack {

struct SchedulerSpec {
  double s_bits = 1000.0;
  SchedulerMode mode = SchedulerMode::DistributionDriven;
  double mos_floor = 0.0;  // <= gamma: no MOS constraint, codec budget only
  bool plc = false;
  double fixed_rate_bps = 0.0;
  EmbeddingSelector::Kind selection = EmbeddingSelector::Kind::Bernoulli;
  double report_interval_s = 5.0;
  std::optional<double> step_s;  // defaults to one packet interval
};

struct WardenSpec {
  enum class Kind { None, Passive, Active };
  Kind kind = Kind::None;
  LossThreshold threshold;
  double window_ms = 50.0;
  ActiveWardenConfig::Mode action = ActiveWardenConfig::Mode::Drop;
};

struct ExperimentConfig {
  DurationModel duration_model = DurationModel::exponential(kReferenceMeanDuration);
  CodecProfile codec = builtin_codec("G.711");
  ChannelConfig channel;
  JitterBufferConfig buffer;
  double sender_buffer_ms = 60.0;     // the other endpoint's de-jitter buffer
  std::optional<double> margin_ms;    // defaults to 3 jitter SDs, at least 1 ms
  SchedulerSpec scheduler;
  WardenSpec warden;
  MosParams mos = MosParams::skype();
  std::uint64_t n_calls = 1;
  double lack_fraction = 1.0;
  std::uint64_t seed = 1;
  std::optional<Bytes> message;  // fixed steganogram; random s_bits/8 bytes otherwise

  // Throws ConfigError describing the first invalid field.
  void validate() const;
  double lack_delay_ms() const;
};

// Parses the JSON experiment document; every error becomes ConfigError.
// Relative message_file paths resolve against `base_dir`.
ExperimentConfig parse_experiment_config(const nlohmann::json& j,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::string& path);
DurationModel parse_duration_model(const nlohmann::json& j);

struct CallMetrics {
  std::uint64_t call_index = 0;
  bool lack_active = false;
  double duration_s = 0.0;
  double steg_bits_sent = 0.0;
  double steg_bits_recovered = 0.0;
  double steg_ber = 0.0;
  double voice_loss_ratio_network = 0.0;
  double voice_loss_ratio_total = 0.0;
  double mos_final = 0.0;
  double observed_loss_ratio = 0.0;  // what a passive warden measures
  bool warden_flagged = false;
  std::uint64_t warden_collateral = 0;
  std::uint64_t packets = 0;
  std::uint64_t steg_packets = 0;
  WardenSummary warden_summary;
  std::vector<Gap> steg_gaps;
};

struct CallOutcome {
  CallMetrics metrics;
  std::vector<TraceEvent> trace;
  Bytes recovered_message;
};

CallOutcome run_call(const ExperimentConfig& cfg, std::uint64_t call_index,
                     bool keep_trace = false);

struct ExperimentReport {
  std::vector<CallMetrics> calls;
  std::vector<std::vector<TraceEvent>> traces;  // empty unless requested
  std::vector<Bytes> recovered;                 // per call, only with a fixed message
  nlohmann::ordered_json aggregate;
};

// Runs every call (on `threads` workers) and merges results in call order.
ExperimentReport run_experiment(const ExperimentConfig& cfg, unsigned threads = 1,
                                bool keep_traces = false);

// call_index,lack,duration_s,... in the documented column order.
Table per_call_table(const std::vector<CallMetrics>& calls);

// Curve families.
Table duration_curve(const DurationModel& model, double t_max, double dt);
Table schedule_curve(const DurationModel& model, double s_bits, double t_max, double dt,
                     SchedulerMode mode = SchedulerMode::DistributionDriven);
Table mos_curve(const MosParams& params, const std::vector<double>& p_loss_grid,
                const std::vector<double>& p_lack_values);

}  // namespace lack
