// Golden files pin column orders, field names and number rendering.
// Run with LACK_UPDATE_GOLDEN=1 to rewrite them after an intended change.

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "lack/experiment.hpp"

using namespace lack;

namespace {

void check_golden(const std::string& name, const std::string& actual) {
  const std::string path = std::string(LACK_GOLDEN_DIR) + "/" + name;
  if (std::getenv("LACK_UPDATE_GOLDEN")) {
    std::ofstream(path, std::ios::binary) << actual;
  }
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing golden file " << path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK_MESSAGE(ss.str() == actual, "golden mismatch: " << name);
}

std::vector<std::vector<TraceEvent>> sample_traces() {
  std::vector<std::vector<TraceEvent>> out(2);
  for (int i = 0; i < 6; ++i) {
    const double ts = 20.0 * i;
    out[0].push_back({1001, static_cast<std::uint16_t>(65533 + i), ts, ts, ts + 21.5, TraceVerdict::Play});
    out[1].push_back({2002, static_cast<std::uint16_t>(10 + i), ts, ts, ts + 20.0, TraceVerdict::Play});
  }
  out[0][2].arrival_ms.reset();
  out[0][2].verdict = TraceVerdict::Lost;
  out[1][3].sent_ms = 60.0 + 80.0;
  out[1][3].arrival_ms = 60.0 + 80.0 + 20.0;
  out[1][3].verdict = TraceVerdict::Late;
  return out;
}

ExperimentConfig small_experiment() {
  return parse_experiment_config(nlohmann::json::parse(R"({
    "duration_model": {"type": "weibull", "k": 1.0, "lambda": 30.0},
    "codec": "G.711",
    "channel": {"base_delay_ms": 20, "jitter_sd_ms": 4, "p_loss": 0.01},
    "jitter_buffer": {"size_ms": 60},
    "scheduler": {"s_bits": 2000, "mode": "fixed-rate", "fixed_rate_bps": 640},
    "warden": {"type": "passive", "threshold": 0.02},
    "n_calls": 4, "lack_fraction": 0.5, "seed": 2024
  })"));
}

}  // namespace

TEST_CASE("trace json lines") {
  std::ostringstream os;
  for (const auto& t : sample_traces()) write_trace(os, t);
  check_golden("trace.jsonl", os.str());
}

TEST_CASE("verdict csv and warden summary") {
  const auto traces = sample_traces();
  check_golden("verdicts.csv", verdict_csv(passive_loss_scan(traces, LossThreshold::absolute(0.02))));
  const auto summary = replay_active_warden(ActiveWardenConfig(50, ActiveWardenConfig::Mode::Erase), traces);
  check_golden("warden_summary.json", summary.to_json() + "\n");
}

TEST_CASE("curve csv") {
  check_golden("duration.csv", duration_curve(DurationModel::weibull(2.0, 132.37), 4, 1).to_csv());
  check_golden("schedule.csv",
               schedule_curve(DurationModel::weibull(0.5, 58.65), 1000, 4, 1).to_csv());
  check_golden("mos.csv", mos_curve(MosParams::skype(), {0.0, 0.02, 0.05}, {0.0, 0.005}).to_csv());
  check_golden("mos.json", mos_curve(MosParams::skype(), {0.0, 0.02}, {0.005}).to_json() + "\n");
}

TEST_CASE("extraction report") {
  const std::vector<Gap> gaps = {{158, 160, 1, true}, {478, 22, 1, false}};
  check_golden("extraction.json", extraction_report_json(4000, 3712, gaps) + "\n");
}

TEST_CASE("experiment outputs") {
  const auto report = run_experiment(small_experiment());
  check_golden("calls.csv", per_call_table(report.calls).to_csv());
  check_golden("aggregate.json", report.aggregate.dump(1) + "\n");
}
