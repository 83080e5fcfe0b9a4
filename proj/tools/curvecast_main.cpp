#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "curvecast/config.hpp"
#include "curvecast/report.hpp"
#include "curvecast/synth.hpp"

namespace fs = std::filesystem;
using namespace curvecast;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 42;
  bool seed_given = false;

  std::string events_path;
  std::string profiles_path;
  bool synth = false;
  int couples = 0;
  int days = 0;
  int weeks = 0;

  std::string curves_path;
  int prefix = 0;
  double horizon = 0;
  std::string targets = "0.75,0.9";
};

CommunityConfig community_config(const CliOptions& opt) {
  CommunityConfig cfg = opt.config_path.empty() ? CommunityConfig{} : load_config(opt.config_path);
  if (opt.seed_given) cfg.seed = opt.seed;
  if (opt.couples > 0) cfg.n_couples = opt.couples;
  if (opt.weeks > 0) cfg.days = 7 * opt.weeks;
  else if (opt.days > 0) cfg.days = opt.days;
  validate_config(cfg);
  return cfg;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::vector<double> parse_targets(const std::string& spec) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= spec.size()) {
    std::size_t pos = spec.find(',', start);
    std::string cell = spec.substr(start, pos - start);
    if (!cell.empty()) out.push_back(std::stod(cell));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

// Events + profiles from disk, or generated in memory with --synth.
EventLog obtain_log(const CliOptions& opt, const fs::path* persist_dir) {
  if (opt.synth) {
    CommunityConfig cfg = community_config(opt);
    auto comm = generate_community(cfg);
    auto log = generate_events(comm, cfg);
    if (persist_dir)
      write_event_log(log, *persist_dir / "events.csv", *persist_dir / "profiles.csv");
    return log;
  }
  if (opt.events_path.empty() || opt.profiles_path.empty())
    throw std::runtime_error("need --events and --profiles, or --synth");
  return parse_event_log(opt.events_path, opt.profiles_path);
}

int run_days(const CliOptions& opt, const EventLog& log) {
  if (opt.weeks > 0) return 7 * opt.weeks;
  if (opt.days > 0) return opt.days;
  std::int64_t max_t = 0;
  for (const auto& ev : log.events) max_t = std::max(max_t, ev.time.seconds);
  return static_cast<int>(max_t / 86400) + 1;
}

RunConfig run_config(const CliOptions& opt, const EventLog& log) {
  RunConfig rc;
  rc.days = run_days(opt, log);
  rc.seed = opt.seed;
  if (opt.prefix > 0) rc.prefix_k = opt.prefix;
  rc.horizon_days = opt.horizon > 0 ? opt.horizon : 3.0 * rc.days;
  rc.targets = parse_targets(opt.targets);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning-curve experiments on mobile behavioral event logs"};
  app.require_subcommand(1);
  app.fallthrough();

  CliOptions opt;
  app.add_option("--seed", opt.seed, "Seed for generation and evaluation")
      ->each([&](const std::string&) { opt.seed_given = true; });
  app.add_option("--config", opt.config_path, "Community config file");
  app.add_option("--out", opt.out_dir, "Output directory");

  auto add_data_options = [&](CLI::App* cmd) {
    cmd->add_option("--events", opt.events_path, "Event log CSV");
    cmd->add_option("--profiles", opt.profiles_path, "Participant profiles CSV");
    cmd->add_flag("--synth", opt.synth, "Generate a synthetic community instead of reading files");
    cmd->add_option("--couples", opt.couples, "Couples in the synthetic community");
    cmd->add_option("--days", opt.days, "Days to generate / evaluate");
    cmd->add_option("--weeks", opt.weeks, "Horizon in weeks (overrides --days)");
  };

  auto* cmd_generate = app.add_subcommand("generate", "Write a synthetic event log and profiles");
  cmd_generate->add_option("--couples", opt.couples, "Couples in the community");
  cmd_generate->add_option("--days", opt.days, "Days of activity");
  cmd_generate->add_option("--weeks", opt.weeks, "Horizon in weeks (overrides --days)");

  auto* cmd_evaluate = app.add_subcommand("evaluate", "Evaluate all tasks on day prefixes");
  add_data_options(cmd_evaluate);

  auto* cmd_fit = app.add_subcommand("fit", "Fit growth curves to an evaluated curves CSV");
  cmd_fit->add_option("--curves", opt.curves_path, "curves.csv from evaluate")->required();

  auto* cmd_forecast = app.add_subcommand("forecast", "Forecast from a curve prefix");
  cmd_forecast->add_option("--curves", opt.curves_path, "curves.csv from evaluate")->required();
  cmd_forecast->add_option("--prefix", opt.prefix, "Points to fit on");
  cmd_forecast->add_option("--horizon", opt.horizon, "Extrapolation horizon in days");
  cmd_forecast->add_option("--targets", opt.targets, "Comma-separated target values");

  auto* cmd_correlate = app.add_subcommand("correlate", "Correlate task curves");
  cmd_correlate->add_option("--curves", opt.curves_path, "curves.csv from evaluate")->required();

  auto* cmd_report = app.add_subcommand("report", "Run everything and write the full bundle");
  add_data_options(cmd_report);
  cmd_report->add_option("--prefix", opt.prefix, "Forecast prefix length");
  cmd_report->add_option("--horizon", opt.horizon, "Extrapolation horizon in days");
  cmd_report->add_option("--targets", opt.targets, "Comma-separated target values");

  CLI11_PARSE(app, argc, argv);

  try {
    const fs::path dir = opt.out_dir;

    if (cmd_generate->parsed()) {
      CommunityConfig cfg = community_config(opt);
      auto comm = generate_community(cfg);
      auto log = generate_events(comm, cfg);
      fs::create_directories(dir);
      write_event_log(log, dir / "events.csv", dir / "profiles.csv");
      write_file(dir / "community.cfg", render_config(cfg));
      std::printf("wrote %zu events for %zu participants to %s\n", log.events.size(),
                  log.participants.size(), dir.string().c_str());
      return 0;
    }

    if (cmd_evaluate->parsed()) {
      auto log = obtain_log(opt, nullptr);
      RunConfig rc = run_config(opt, log);
      auto curves = run_incremental(log, rc);
      auto bundle = build_report(curves, rc);
      fs::create_directories(dir);
      write_file(dir / "curves.csv", render_curves_csv(bundle));
      std::printf("wrote %s\n", (dir / "curves.csv").string().c_str());
      return bundle.partial ? 2 : 0;
    }

    if (cmd_fit->parsed() || cmd_forecast->parsed() || cmd_correlate->parsed()) {
      auto curves = parse_curves_csv(read_file(opt.curves_path));
      RunConfig rc;
      if (opt.prefix > 0) rc.prefix_k = opt.prefix;
      double max_days = 1;
      for (const auto& c : curves)
        max_days = std::max(max_days,
                            c.times.back() * (c.unit == TimeUnit::weeks ? 7.0 : 1.0));
      rc.horizon_days = opt.horizon > 0 ? opt.horizon : 3.0 * max_days;
      rc.targets = parse_targets(opt.targets);
      auto bundle = build_report(curves, rc);
      fs::create_directories(dir);
      if (cmd_fit->parsed()) write_file(dir / "fits.json", render_fits_json(bundle));
      if (cmd_forecast->parsed())
        write_file(dir / "forecasts.json", render_forecasts_json(bundle));
      if (cmd_correlate->parsed())
        write_file(dir / "correlation.csv", render_correlation_csv(bundle));
      return bundle.partial ? 2 : 0;
    }

    // report: the whole pipeline
    fs::create_directories(dir);
    auto log = obtain_log(opt, &dir);
    RunConfig rc = run_config(opt, log);
    auto bundle = run_pipeline(log, rc);
    write_report(bundle, dir);
    std::printf("report written to %s (%d task%s, %s)\n", dir.string().c_str(),
                static_cast<int>(bundle.tasks.size()), bundle.tasks.size() == 1 ? "" : "s",
                bundle.partial ? "partial" : "complete");
    return bundle.partial ? 2 : 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
