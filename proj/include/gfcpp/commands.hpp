#pragma once

// Subcommand implementations behind tools/gfcpp.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gfcpp/analytics.hpp"
#include "gfcpp/config.hpp"
#include "gfcpp/error.hpp"
#include "gfcpp/fde.hpp"
#include "gfcpp/io.hpp"
#include "gfcpp/parallel.hpp"
#include "gfcpp/processes.hpp"

namespace gfcpp::commands {

enum ExitCode : int { kPass = 0, kStatisticalFailure = 1, kConfigError = 2, kInternalError = 3 };

inline config::ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return config::parse(buf.str());
}

inline nlohmann::ordered_json spec_json(const ProcessSpec& spec) {
  nlohmann::ordered_json j;
  j["arrival"] = spec.arrival == ArrivalKind::Poisson ? "poisson" : "time_changed";
  j["lambda"] = spec.lambda;
  j["multiplier"] = spec.multiplier;
  if (spec.arrival == ArrivalKind::TimeChanged) j["clock"] = spec.clock.name();
  j["jump"] = spec.jump.name();
  return j;
}

inline processes::MonteCarloOptions mc_options(const config::ExperimentConfig& cfg, unsigned workers) {
  processes::MonteCarloOptions mc;
  mc.seed = cfg.seed;
  mc.workers = workers;
  mc.passage.operational_steps = cfg.operational_steps;
  return mc;
}

/// Writes one CSV per path plus manifest.json; returns the manifest.
inline nlohmann::ordered_json cmd_simulate(const config::ExperimentConfig& cfg, unsigned workers,
                                           std::ostream* log = nullptr) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("output directory " + dir.string() + " is not writable");

  const auto mc = mc_options(cfg, workers);
  std::vector<std::string> files(cfg.paths);
  std::atomic<std::size_t> done{0};
  std::mutex log_mutex;
  std::size_t next_report = 1;
  parallel_for(cfg.paths, workers, [&](std::size_t i) {
    auto rng = mc.stream(i);
    std::vector<double> t, v;
    if (cfg.spec.arrival == ArrivalKind::Poisson) {
      const auto path = processes::simulate_cpp(cfg.spec.rate(), cfg.spec.jump, cfg.horizon, rng);
      if (cfg.mode == config::OutputMode::Events) {
        t = path.event_times;
        v = path.cumulative_values;
      } else {
        t = processes::uniform_grid(cfg.horizon, cfg.grid);
        for (double x : t) v.push_back(path.value_at(x));
      }
    } else {
      const auto path = processes::simulate_gfcpp(cfg.spec, cfg.horizon, cfg.grid, rng, mc.passage);
      if (cfg.mode == config::OutputMode::Events) {
        t = path.events.event_times;
        v = path.events.cumulative_values;
      } else {
        t = path.grid;
        v = path.values;
      }
    }
    char name[32];
    std::snprintf(name, sizeof name, "path_%06zu.csv", i);
    io::write_csv(dir / name, t, v);
    files[i] = name;
    const std::size_t finished = ++done;
    if (log) {
      std::lock_guard lock(log_mutex);
      while (next_report <= 10 && finished * 10 >= next_report * cfg.paths) {
        *log << "simulate: " << next_report * 10 << "% (" << finished << "/" << cfg.paths << " paths)\n";
        ++next_report;
      }
    }
  });

  nlohmann::ordered_json manifest;
  manifest["config_hash"] = cfg.hash();
  manifest["seed"] = cfg.seed;
  manifest["process"] = spec_json(cfg.spec);
  manifest["horizon"] = cfg.horizon;
  manifest["grid"] = cfg.grid;
  manifest["mode"] = cfg.mode == config::OutputMode::Grid ? "grid" : "events";
  manifest["paths"] = cfg.paths;
  manifest["files"] = files;
  io::write_json(dir / "manifest.json", manifest);
  return manifest;
}

struct ReportOutcome {
  nlohmann::ordered_json json;
  /// "pass", "fail", "inconclusive" or "error"
  std::string status;
  int exit_code = kPass;
};

/// Runs one report kind and writes report_<kind>.json into the output
/// directory. An infinite jump moment is reported in the JSON `error`
/// field with the configuration-error exit code.
inline ReportOutcome cmd_report(const config::ExperimentConfig& cfg, const std::string& kind, unsigned workers) {
  namespace fs = std::filesystem;
  if (!config::report_kinds().count(kind)) throw ConfigError("unknown report kind '" + kind + "'");
  const auto mc = mc_options(cfg, workers);
  ReportOutcome out;
  nlohmann::ordered_json body;
  body["kind"] = kind;
  body["config_hash"] = cfg.hash();
  body["seed"] = cfg.seed;
  body["process"] = spec_json(cfg.spec);

  try {
    if (kind == "moments") {
      analytics::ClockMomentOptions clock;
      clock.mc.seed = cfg.seed;
      clock.mc.workers = workers;
      const auto report = analytics::moment_check(cfg.spec, cfg.report_t, cfg.report_s, cfg.report_paths, mc, clock);
      body["paths"] = cfg.report_paths;
      body["result"] = report.to_json();
      out.status = report.max_abs_z() < 3.0 ? "pass" : "fail";
    } else if (kind == "lrd") {
      if (cfg.spec.arrival != ArrivalKind::TimeChanged || cfg.spec.clock.kind != BernsteinKind::TemperedStable)
        throw ConfigError("lrd report requires a tempered-stable clock");
      if (jumps::jump_moments(cfg.spec.jump).mean != 0.0)
        throw ConfigError("lrd report requires a zero-mean jump law (jump.kind = symmetric_sign)");
      analytics::LrdOptions opts;
      opts.s = cfg.lrd_s;
      opts.t_grid = analytics::geometric_grid(cfg.lrd_t_min, cfg.lrd_t_max, cfg.lrd_points);
      opts.paths = cfg.report_paths;
      opts.mc = mc;
      opts.mc.passage.operational_steps = cfg.lrd_operational_steps;
      const auto result = analytics::lrd_slope(cfg.spec, opts);
      body["result"] = result.to_json();
      out.status = (result.fit.slope >= -0.6 && result.fit.slope <= -0.4) ? "pass" : "fail";
    } else if (kind == "martingale") {
      const auto result = analytics::martingale_test(cfg.spec, cfg.martingale_pairs, cfg.report_paths, mc);
      body["paths"] = cfg.report_paths;
      body["result"] = result.to_json();
      out.status = result.max_abs_z() < 3.0 ? "pass" : "fail";
    } else if (kind == "dde") {
      if (!cfg.spec.jump.discrete() || cfg.spec.jump.kind == JumpKind::SymmetricSign)
        throw ConfigError("dde report requires a discrete jump law on {1,2,...}");
      if (cfg.spec.arrival != ArrivalKind::TimeChanged) throw ConfigError("dde report requires a time-changed clock");
      fde::ResidualOptions opts;
      opts.h = cfg.dde_h;
      opts.source = cfg.dde_source;
      opts.paths = cfg.report_paths;
      opts.mc = mc;
      opts.report_times.clear();
      const auto steps = static_cast<std::size_t>(std::floor(cfg.dde_t_max / cfg.dde_h + 1e-9));
      const std::size_t stride = std::max<std::size_t>(1, steps / 16);
      for (std::size_t i = stride; i <= steps; i += stride) opts.report_times.push_back(static_cast<double>(i) * cfg.dde_h);
      const auto result = fde::dde_residual(cfg.spec, cfg.dde_n_max, opts);
      body["result"] = result.to_json();
      out.status = result.status;
    } else {
      if (cfg.spec.jump.kind != JumpKind::Exponential)
        throw ConfigError("representation report requires exponential jumps in the base process");
      const auto result =
          analytics::identity_check(cfg.representation, cfg.spec, cfg.representation_t, cfg.report_paths, mc);
      body["result"] = result.to_json();
      out.status = result.ks.p_value > 0.01 ? "pass" : "fail";
    }
    out.exit_code = out.status == "fail" ? kStatisticalFailure : kPass;
  } catch (const MomentUndefined& e) {
    body["error"] = e.what();
    out.status = "error";
    out.exit_code = kConfigError;
  }
  body["status"] = out.status;

  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("output directory " + dir.string() + " is not writable");
  io::write_json(dir / ("report_" + kind + ".json"), body);
  out.json = std::move(body);
  return out;
}

}  // namespace gfcpp::commands
