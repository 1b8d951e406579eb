// lacksim: curve analysis, call simulation, trace detection and MOS sweeps.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lack/errors.hpp"
#include "lack/experiment.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lack;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kInfeasible = 3 };

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::string format = "csv";
};

json read_json(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string render(const Table& t, const std::string& format) {
  return format == "json" ? t.to_json() + "\n" : t.to_csv();
}

std::vector<double> grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw ConfigError("grid needs step > 0 and max >= min");
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

SchedulerMode mode_from(const std::string& s) {
  if (s == "distribution") return SchedulerMode::DistributionDriven;
  if (s == "approx") return SchedulerMode::ApproxLinear;
  throw ConfigError("analyze supports modes distribution and approx, got " + s);
}

int run_analyze(const CommonOptions& o) {
  const json cfg = read_json(o.config);
  std::vector<DurationModel> models;
  try {
    if (cfg.contains("models")) {
      for (const auto& m : cfg.at("models")) models.push_back(parse_duration_model(m));
    } else {
      for (const auto& r : reference_weibulls()) models.push_back(DurationModel::weibull(r.shape, r.scale));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid model: ") + e.what());
  }
  const double t_max = cfg.value("t_max", 600.0);
  const double dt = cfg.value("dt", 1.0);
  const double s_bits = cfg.value("s_bits", 1000.0);
  const SchedulerMode mode = mode_from(cfg.value("mode", std::string("distribution")));
  const auto curves = cfg.value("curves", std::vector<std::string>{"duration", "schedule"});

  fs::create_directories(o.out);
  json index = json::array();
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto& m = models[i];
    json entry = {{"index", i}, {"model", m.describe()}};
    for (const auto& c : curves) {
      const std::string name = c + "_" + std::to_string(i) + "." + o.format;
      if (c == "duration") {
        write_file(fs::path(o.out) / name, render(duration_curve(m, t_max, dt), o.format));
      } else if (c == "schedule") {
        write_file(fs::path(o.out) / name, render(schedule_curve(m, s_bits, t_max, dt, mode), o.format));
      } else {
        throw ConfigError("unknown curve family: " + c);
      }
      entry[c] = name;
    }
    index.push_back(entry);
  }
  write_file(fs::path(o.out) / "index.json", index.dump(1) + "\n");
  return kOk;
}

int run_mos(const CommonOptions& o) {
  const json cfg = read_json(o.config);
  MosParams params = MosParams::skype();
  if (cfg.contains("mos")) {
    const auto& m = cfg.at("mos");
    params = MosParams(m.value("alpha", params.alpha), m.value("beta", params.beta),
                       m.value("gamma", params.gamma));
  }
  const auto loss = grid(cfg.value("p_loss_min", 0.0), cfg.value("p_loss_max", 0.2),
                         cfg.value("p_loss_step", 0.01));
  const auto lack_values =
      cfg.value("p_lack", std::vector<double>{0.0, 0.005, 0.01, 0.02, 0.03, 0.05});
  fs::create_directories(o.out);
  write_file(fs::path(o.out) / ("mos." + o.format), render(mos_curve(params, loss, lack_values), o.format));

  if (cfg.contains("mos_floor")) {
    const double floor = cfg.at("mos_floor").get<double>();
    const double p_net = cfg.value("p_network", 0.0);
    const CodecProfile codec = builtin_codec(cfg.value("codec", std::string("G.711")));
    const bool plc = cfg.value("plc", false);
    nlohmann::ordered_json b;
    b["p_network"] = p_net;
    b["mos_floor"] = floor;
    b["max_p_lack"] = max_p_lack(params, p_net, floor);
    b["codec"] = codec.name;
    b["ir_cap_bps"] = cap_from_quality(codec, params, p_net, floor, plc);
    write_file(fs::path(o.out) / "budget.json", b.dump(1) + "\n");
  }
  return kOk;
}

int run_simulate(const CommonOptions& o, unsigned threads, bool traces) {
  if (o.config.empty()) throw ConfigError("simulate needs --config");
  ExperimentConfig cfg = load_experiment_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  const ExperimentReport report = run_experiment(cfg, threads, traces);

  fs::create_directories(o.out);
  const fs::path out(o.out);
  write_file(out / ("calls." + o.format), render(per_call_table(report.calls), o.format));
  write_file(out / "aggregate.json", report.aggregate.dump(1) + "\n");
  std::string extraction;
  for (const auto& c : report.calls) {
    extraction += extraction_report_json(static_cast<std::size_t>(c.steg_bits_sent),
                                         static_cast<std::size_t>(c.steg_bits_recovered), c.steg_gaps);
    extraction += '\n';
  }
  write_file(out / "extraction.jsonl", extraction);
  if (traces) {
    std::ofstream t(out / "traces.jsonl", std::ios::binary);
    for (const auto& tr : report.traces) write_trace(t, tr);
  }
  for (std::size_t i = 0; i < report.recovered.size(); ++i) {
    if (!report.calls[i].lack_active) continue;
    const auto& bytes = report.recovered[i];
    write_file(out / ("recovered_" + std::to_string(i) + ".bin"),
               std::string(bytes.begin(), bytes.end()));
  }
  return kOk;
}

int run_detect(const CommonOptions& o, const std::vector<std::string>& trace_args) {
  const json cfg = read_json(o.config);
  std::vector<std::string> paths = trace_args;
  const fs::path base = o.config.empty() ? fs::path() : fs::path(o.config).parent_path();
  for (const auto& p : cfg.value("traces", std::vector<std::string>{})) paths.push_back((base / p).string());
  if (paths.empty()) throw ConfigError("detect needs at least one trace file");

  std::vector<TraceEvent> events;
  for (const auto& p : paths) {
    std::ifstream in(p);
    if (!in) throw ConfigError("cannot open trace: " + p);
    auto ev = read_trace(in);
    events.insert(events.end(), ev.begin(), ev.end());
  }
  const auto calls = split_by_ssrc(events);

  fs::create_directories(o.out);
  const fs::path out(o.out);
  const json passive = cfg.value("passive", json::object());
  const LossThreshold threshold = passive.contains("sd_multiplier")
                                      ? LossThreshold::mean_plus_sd(passive.at("sd_multiplier").get<double>())
                                      : LossThreshold::absolute(passive.value("threshold", 0.02));
  const ScanResult scan = passive_loss_scan(calls, threshold);
  for (const auto& w : scan.warnings) std::cerr << "warning: " << w << "\n";
  if (o.format == "json") {
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : scan.rows) {
      rows.push_back({{"ssrc", r.ssrc}, {"loss_ratio", r.loss_ratio}, {"duration_s", r.duration_s},
                      {"flagged", r.flagged}});
    }
    write_file(out / "verdicts.json", rows.dump(1) + "\n");
  } else {
    write_file(out / "verdicts.csv", verdict_csv(scan));
  }

  if (cfg.contains("active")) {
    const auto& a = cfg.at("active");
    const auto action = a.value("action", std::string("drop"));
    if (action != "drop" && action != "erase") throw ConfigError("unknown warden action: " + action);
    const ActiveWardenConfig wcfg(a.value("window_ms", 50.0), action == "drop"
                                                                  ? ActiveWardenConfig::Mode::Drop
                                                                  : ActiveWardenConfig::Mode::Erase);
    write_file(out / "warden_summary.json", replay_active_warden(wcfg, calls).to_json() + "\n");
  }

  if (cfg.contains("duration_fit")) {
    const auto& d = cfg.at("duration_fit");
    const DurationModel ref = parse_duration_model(d.at("model"));
    std::vector<double> durations;
    for (const auto& r : scan.rows) durations.push_back(r.duration_s);
    const FitTest t = duration_fit_test(durations, ref, d.value("alpha", 0.05));
    nlohmann::ordered_json j;
    j["n"] = durations.size();
    j["statistic"] = t.statistic;
    j["p_value"] = t.p_value;
    j["rejected"] = t.rejected;
    write_file(out / "duration_fit.json", j.dump(1) + "\n");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LACK covert channel laboratory"};
  app.require_subcommand(1);
  CommonOptions opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "JSON configuration file");
    sub->add_option("--seed", opts.seed, "Override the experiment seed");
    sub->add_option("--out", opts.out, "Output directory")->capture_default_str();
    sub->add_option("--format", opts.format, "Table format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
  };
  auto* analyze = app.add_subcommand("analyze", "Duration and insertion-rate curve families");
  auto* simulate = app.add_subcommand("simulate", "Run an experiment from a config");
  auto* detect = app.add_subcommand("detect", "Run wardens over JSON-lines traces");
  auto* mos_cmd = app.add_subcommand("mos", "MOS versus network loss sweep");
  for (auto* s : {analyze, simulate, detect, mos_cmd}) add_common(s);
  unsigned threads = 1;
  bool traces = false;
  simulate->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  simulate->add_flag("--traces", traces, "Also write traces.jsonl");
  std::vector<std::string> trace_files;
  detect->add_option("traces", trace_files, "Trace files (JSON lines)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*analyze) return run_analyze(opts);
    if (*simulate) return run_simulate(opts, threads, traces);
    if (*detect) return run_detect(opts, trace_files);
    if (*mos_cmd) return run_mos(opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const QualityInfeasibleError& e) {
    std::cerr << "quality infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
