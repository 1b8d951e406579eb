#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / ("lacksim_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(LACKSIM_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

const char* kSimConfig = R"({
  "duration_model": {"type": "weibull", "k": 0.8, "lambda": 103.54},
  "codec": "G.711",
  "channel": {"base_delay_ms": 20, "jitter_sd_ms": 3, "p_loss": 0.01},
  "scheduler": {"s_bits": 1000, "mode": "distribution"},
  "warden": {"type": "passive", "threshold": 0.02},
  "n_calls": 6, "lack_fraction": 0.5, "seed": 5
})";

}  // namespace

TEST_CASE("simulate writes every report and is repeatable") {
  const auto dir = scratch();
  write(dir / "sim.json", kSimConfig);
  const std::string base = "simulate --config " + (dir / "sim.json").string();
  REQUIRE(run(base + " --out " + (dir / "a").string() + " --traces") == 0);
  REQUIRE(run(base + " --out " + (dir / "b").string() + " --traces --threads 3") == 0);
  for (const char* f : {"calls.csv", "aggregate.json", "extraction.jsonl", "traces.jsonl"}) {
    CAPTURE(f);
    CHECK(fs::file_size(dir / "a" / f) > 0);
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  REQUIRE(run(base + " --out " + (dir / "c").string() + " --seed 6") == 0);
  CHECK(slurp(dir / "a" / "calls.csv") != slurp(dir / "c" / "calls.csv"));
  REQUIRE(run(base + " --out " + (dir / "j").string() + " --format json") == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "j" / "calls.json")).size() == 6);

  // Stored traces feed the detector.
  write(dir / "detect.json", R"({"passive": {"threshold": 0.02}, "active": {"window_ms": 50}})");
  REQUIRE(run("detect --config " + (dir / "detect.json").string() + " --out " + (dir / "d").string() + " " +
              (dir / "a" / "traces.jsonl").string()) == 0);
  const auto verdicts = slurp(dir / "d" / "verdicts.csv");
  CHECK(verdicts.rfind("ssrc,loss_ratio,duration_s,flagged\n", 0) == 0);
  const auto summary = nlohmann::json::parse(slurp(dir / "d" / "warden_summary.json"));
  CHECK(summary.contains("collateral"));
  fs::remove_all(dir);
}

TEST_CASE("message files round trip") {
  const auto dir = scratch();
  std::string message;
  for (int i = 0; i < 300; ++i) message.push_back(static_cast<char>(i * 7));
  write(dir / "secret.bin", message);
  write(dir / "sim.json", R"({
    "duration_model": {"type": "samples", "values": [30.0]},
    "channel": {"jitter_sd_ms": 1},
    "lack": {"message_file": "secret.bin"},
    "scheduler": {"mode": "fixed-rate", "fixed_rate_bps": 640},
    "n_calls": 1
  })");
  REQUIRE(run("simulate --config " + (dir / "sim.json").string() + " --out " + (dir / "o").string()) == 0);
  CHECK(slurp(dir / "o" / "recovered_0.bin") == message);
  fs::remove_all(dir);
}

TEST_CASE("analyze and mos") {
  const auto dir = scratch();
  REQUIRE(run("analyze --out " + (dir / "an").string()) == 0);
  CHECK(fs::exists(dir / "an" / "duration_7.csv"));
  CHECK(slurp(dir / "an" / "schedule_0.csv").rfind("t,ir,s_remaining,x_t,cond_mean\n", 0) == 0);
  REQUIRE(run("mos --out " + (dir / "m").string()) == 0);
  CHECK(slurp(dir / "m" / "mos.csv").rfind("p_loss,p_lack,mos\n0,0,4.1529\n", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("exit codes") {
  const auto dir = scratch();
  CHECK(run("simulate --config " + (dir / "missing.json").string()) == 2);
  write(dir / "bad.json", R"({"n_calls": 0})");
  CHECK(run("simulate --config " + (dir / "bad.json").string() + " --out " + dir.string()) == 2);
  write(dir / "broken.json", "{not json");
  CHECK(run("analyze --config " + (dir / "broken.json").string() + " --out " + dir.string()) == 2);
  CHECK(run("simulate --format xml") == 2);
  CHECK(run("frobnicate") == 2);
  write(dir / "hard.json", R"({"channel": {"p_loss": 0.1}, "scheduler": {"mos_floor": 4.0}})");
  CHECK(run("simulate --config " + (dir / "hard.json").string() + " --out " + dir.string()) == 3);
  write(dir / "mos.json", R"({"mos_floor": 4.0, "p_network": 0.1})");
  CHECK(run("mos --config " + (dir / "mos.json").string() + " --out " + dir.string()) == 3);
  CHECK(run("--help") == 0);
  fs::remove_all(dir);
}
