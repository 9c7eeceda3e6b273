#pragma once

// Flat key-value experiment configuration:
//
//   # comment
//   seed = 42
//   process.lambda = 4
//   clock.kind = tempered_stable
//
// Keys are dotted names, one assignment per line. Unknown keys, repeated
// keys and malformed values are reported with their line number.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gfcpp/error.hpp"
#include "gfcpp/fde.hpp"
#include "gfcpp/jumps.hpp"
#include "gfcpp/processes.hpp"
#include "gfcpp/specfun.hpp"

namespace gfcpp::config {

struct Entry {
  std::string value;
  int line = 0;
};

using RawConfig = std::map<std::string, Entry>;

namespace detail {
inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline bool valid_key(const std::string& k) {
  if (k.empty() || k.front() == '.' || k.back() == '.') return false;
  return std::all_of(k.begin(), k.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '.';
  });
}
}  // namespace detail

inline RawConfig parse_text(const std::string& text) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", number);
    const auto key = detail::trim(std::string_view(body).substr(0, eq));
    const auto value = detail::trim(std::string_view(body).substr(eq + 1));
    if (!detail::valid_key(key)) throw ConfigError("invalid key '" + key + "'", number);
    if (value.empty()) throw ConfigError("missing value for '" + key + "'", number);
    if (raw.count(key)) {
      throw ConfigError("duplicate key '" + key + "' (first set on line " + std::to_string(raw[key].line) + ")",
                        number);
    }
    raw[key] = {value, number};
  }
  return raw;
}

/// Sorted `key=value` lines; the input of the config hash.
inline std::string canonical_text(const RawConfig& raw) {
  std::string out;
  for (const auto& [k, e] : raw) out += k + "=" + e.value + "\n";
  return out;
}

/// 64-bit FNV-1a of the canonical text, as 16 hex digits.
inline std::string config_hash(const RawConfig& raw) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_text(raw)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

enum class OutputMode { Grid, Events };

struct ExperimentConfig {
  ProcessSpec spec;
  std::uint64_t seed = 0;
  double horizon = 1.0;
  std::size_t grid = 100;
  std::size_t paths = 1;
  OutputMode mode = OutputMode::Grid;
  std::string output_dir = "out";
  std::size_t operational_steps = 10000;

  std::vector<std::string> reports;
  std::size_t report_paths = 10000;
  double report_t = 1.0;
  std::optional<double> report_s;

  double lrd_s = 1.0;
  double lrd_t_min = 2.0;
  double lrd_t_max = 200.0;
  std::size_t lrd_points = 12;
  std::size_t lrd_operational_steps = 4000;

  std::vector<std::pair<double, double>> martingale_pairs{{0.5, 1.0}, {1.0, 2.0}};

  int dde_n_max = 2;
  fde::PmfSource dde_source = fde::PmfSource::MonteCarlo;
  double dde_h = 1.0 / 128.0;
  double dde_t_max = 2.0;

  processes::Representation representation = processes::Representation::stable(1.0);
  double representation_t = 1.0;

  RawConfig raw;

  std::string hash() const { return config_hash(raw); }
};

inline const std::set<std::string>& report_kinds() {
  static const std::set<std::string> kinds{"moments", "lrd", "martingale", "dde", "representation"};
  return kinds;
}

namespace detail {

class Reader {
 public:
  explicit Reader(const RawConfig& raw) : raw_(raw) {}

  bool has(const std::string& key) const { return raw_.count(key) > 0; }
  int line(const std::string& key) const { return has(key) ? raw_.at(key).line : 0; }

  std::optional<std::string> str(const std::string& key) {
    used_.insert(key);
    if (!has(key)) return std::nullopt;
    return raw_.at(key).value;
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const auto v = str(key);
    if (!v) {
      if (fallback) return *fallback;
      throw ConfigError("missing required key '" + key + "'");
    }
    double out = 0.0;
    const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
    if (res.ec != std::errc() || res.ptr != v->data() + v->size() || !std::isfinite(out))
      throw ConfigError("'" + key + "' expects a number, got '" + *v + "'", line(key));
    return out;
  }

  std::uint64_t integer(const std::string& key, std::optional<std::uint64_t> fallback = std::nullopt) {
    const auto v = str(key);
    if (!v) {
      if (fallback) return *fallback;
      throw ConfigError("missing required key '" + key + "'");
    }
    std::uint64_t out = 0;
    const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
    if (res.ec != std::errc() || res.ptr != v->data() + v->size())
      throw ConfigError("'" + key + "' expects a nonnegative integer, got '" + *v + "'", line(key));
    return out;
  }

  std::string choice(const std::string& key, const std::vector<std::string>& options,
                     std::optional<std::string> fallback = std::nullopt) {
    const auto v = str(key);
    if (!v) {
      if (fallback) return *fallback;
      throw ConfigError("missing required key '" + key + "'");
    }
    if (std::find(options.begin(), options.end(), *v) == options.end()) {
      std::string list;
      for (const auto& o : options) list += (list.empty() ? "" : ", ") + o;
      throw ConfigError("'" + key + "' must be one of: " + list + " (got '" + *v + "')", line(key));
    }
    return *v;
  }

  void reject_unused() const {
    for (const auto& [k, e] : raw_)
      if (!used_.count(k)) throw ConfigError("unknown key '" + k + "'", e.line);
  }

  /// Runs a constructor and maps its std::invalid_argument to a ConfigError
  /// at the line of `key`.
  template <class F>
  auto guarded(const std::string& key, F&& f) -> decltype(f()) {
    try {
      return f();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what(), line(key));
    }
  }

 private:
  const RawConfig& raw_;
  std::set<std::string> used_;
};

inline BernsteinDescriptor read_descriptor(Reader& r, const std::string& prefix) {
  const auto kind = r.choice(prefix + ".kind", {"stable", "tempered_stable", "inverse_gaussian"});
  if (kind == "stable") {
    const double a = r.number(prefix + ".alpha");
    return r.guarded(prefix + ".alpha", [&] { return BernsteinDescriptor::stable(a); });
  }
  if (kind == "tempered_stable") {
    const double a = r.number(prefix + ".alpha");
    const double mu = r.number(prefix + ".mu");
    return r.guarded(prefix + ".mu", [&] { return BernsteinDescriptor::tempered_stable(a, mu); });
  }
  const double d = r.number(prefix + ".delta");
  const double g = r.number(prefix + ".gamma");
  return r.guarded(prefix + ".gamma", [&] { return BernsteinDescriptor::inverse_gaussian(d, g); });
}

inline JumpLaw read_jump(Reader& r) {
  const auto kind = r.choice("jump.kind", {"exponential", "mittag_leffler", "tempered_mittag_leffler", "bernstein",
                                           "discrete_uniform", "truncated_geometric", "logarithmic",
                                           "symmetric_sign"});
  if (kind == "exponential") {
    const double eta = r.number("jump.eta");
    return r.guarded("jump.eta", [&] { return JumpLaw::exponential(eta); });
  }
  if (kind == "mittag_leffler") {
    const double beta = r.number("jump.beta");
    const double eta = r.number("jump.eta");
    return r.guarded("jump.beta", [&] { return JumpLaw::mittag_leffler(beta, eta); });
  }
  if (kind == "tempered_mittag_leffler") {
    const double beta = r.number("jump.beta");
    const double eta = r.number("jump.eta");
    const double nu = r.number("jump.nu");
    return r.guarded("jump.nu", [&] { return JumpLaw::tempered_mittag_leffler(beta, eta, nu); });
  }
  if (kind == "bernstein") {
    const auto g = read_descriptor(r, "jump.g");
    const double eta = r.number("jump.eta");
    return r.guarded("jump.eta", [&] { return JumpLaw::bernstein_type(g, eta); });
  }
  if (kind == "discrete_uniform") {
    const auto k = r.integer("jump.k");
    return r.guarded("jump.k", [&] { return JumpLaw::discrete_uniform(static_cast<int>(std::min<std::uint64_t>(k, 1u << 20))); });
  }
  if (kind == "truncated_geometric") {
    const double rho = r.number("jump.rho");
    const auto k = r.integer("jump.k");
    return r.guarded("jump.rho", [&] {
      return JumpLaw::truncated_geometric(rho, static_cast<int>(std::min<std::uint64_t>(k, 1u << 20)));
    });
  }
  if (kind == "logarithmic") {
    const double q = r.number("jump.q");
    return r.guarded("jump.q", [&] { return JumpLaw::logarithmic(q); });
  }
  return JumpLaw::symmetric_sign();
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline double parse_number(const std::string& text, const std::string& key, int line) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ConfigError("'" + key + "': cannot parse '" + text + "' as a number", line);
  return v;
}

}  // namespace detail

inline ExperimentConfig from_raw(const RawConfig& raw) {
  detail::Reader r(raw);
  ExperimentConfig c;
  c.raw = raw;
  c.seed = r.integer("seed");

  const auto arrival = r.choice("process.arrival", {"poisson", "time_changed"});
  const double lambda = r.number("process.lambda");
  const auto multiplier = r.integer("process.multiplier", 1);
  const auto jump = detail::read_jump(r);
  if (arrival == "time_changed") {
    const auto clock = detail::read_descriptor(r, "clock");
    c.spec = r.guarded("process.multiplier", [&] {
      return ProcessSpec::time_changed(lambda, clock, jump, static_cast<int>(std::min<std::uint64_t>(multiplier, 1u << 20)));
    });
  } else {
    c.spec = r.guarded("process.multiplier", [&] {
      return ProcessSpec::poisson(lambda, jump, static_cast<int>(std::min<std::uint64_t>(multiplier, 1u << 20)));
    });
  }

  c.horizon = r.number("simulate.horizon", 1.0);
  if (!(c.horizon > 0.0)) throw ConfigError("simulate.horizon must be > 0", r.line("simulate.horizon"));
  c.grid = r.integer("simulate.grid", 100);
  if (c.grid < 1) throw ConfigError("simulate.grid must be >= 1", r.line("simulate.grid"));
  c.paths = r.integer("simulate.paths", 1);
  c.mode = r.choice("simulate.mode", {"grid", "events"}, "grid") == "grid" ? OutputMode::Grid : OutputMode::Events;
  c.output_dir = r.str("output.dir").value_or("out");
  c.operational_steps = r.integer("mc.operational_steps", 10000);
  if (c.operational_steps < 1) throw ConfigError("mc.operational_steps must be >= 1", r.line("mc.operational_steps"));

  if (const auto kinds = r.str("report.kinds")) {
    for (const auto& k : detail::split(*kinds, ',')) {
      if (!report_kinds().count(k)) throw ConfigError("unknown report kind '" + k + "'", r.line("report.kinds"));
      c.reports.push_back(k);
    }
  }
  c.report_paths = r.integer("report.paths", 10000);
  c.report_t = r.number("report.t", 1.0);
  if (!(c.report_t > 0.0)) throw ConfigError("report.t must be > 0", r.line("report.t"));
  if (r.has("report.s")) {
    c.report_s = r.number("report.s");
    if (!(*c.report_s >= 0.0 && *c.report_s <= c.report_t))
      throw ConfigError("report.s must lie in [0, report.t]", r.line("report.s"));
  }

  c.lrd_s = r.number("report.lrd.s", 1.0);
  c.lrd_t_min = r.number("report.lrd.t_min", 2.0);
  c.lrd_t_max = r.number("report.lrd.t_max", 200.0);
  c.lrd_points = r.integer("report.lrd.points", 12);
  c.lrd_operational_steps = r.integer("report.lrd.operational_steps", 4000);
  if (!(c.lrd_s > 0.0 && c.lrd_t_min > c.lrd_s && c.lrd_t_max > c.lrd_t_min) || c.lrd_points < 2)
    throw ConfigError("report.lrd: need 0 < s < t_min < t_max and points >= 2", r.line("report.lrd.t_min"));

  if (const auto pairs = r.str("report.martingale.pairs")) {
    c.martingale_pairs.clear();
    const int ln = r.line("report.martingale.pairs");
    for (const auto& p : detail::split(*pairs, ',')) {
      const auto parts = detail::split(p, ':');
      if (parts.size() != 2) throw ConfigError("report.martingale.pairs expects s:t items", ln);
      const double s = detail::parse_number(parts[0], "report.martingale.pairs", ln);
      const double t = detail::parse_number(parts[1], "report.martingale.pairs", ln);
      if (!(s >= 0.0 && s <= t)) throw ConfigError("report.martingale.pairs needs 0 <= s <= t", ln);
      c.martingale_pairs.emplace_back(s, t);
    }
  }

  c.dde_n_max = static_cast<int>(r.integer("report.dde.n_max", 2));
  c.dde_source = r.choice("report.dde.source", {"monte_carlo", "semi_analytic"}, "monte_carlo") == "monte_carlo"
                     ? fde::PmfSource::MonteCarlo
                     : fde::PmfSource::SemiAnalytic;
  c.dde_h = r.number("report.dde.h", 1.0 / 128.0);
  c.dde_t_max = r.number("report.dde.t_max", 2.0);
  if (!(c.dde_h > 0.0 && c.dde_t_max >= 2.0 * c.dde_h))
    throw ConfigError("report.dde: need h > 0 and t_max >= 2h", r.line("report.dde.h"));

  const auto rep = r.choice("report.representation.kind", {"stable", "tempered_stable", "subordinator"}, "stable");
  if (rep == "subordinator") {
    c.representation = processes::Representation::subordinator(detail::read_descriptor(r, "report.representation.g"));
  } else {
    const double beta = r.number("report.representation.beta", 1.0);
    if (!(beta > 0.0 && beta <= 1.0))
      throw ConfigError("report.representation.beta must lie in (0,1]", r.line("report.representation.beta"));
    if (rep == "stable") {
      c.representation = processes::Representation::stable(beta);
    } else {
      const double nu = r.number("report.representation.nu");
      if (!(nu >= 0.0)) throw ConfigError("report.representation.nu must be >= 0", r.line("report.representation.nu"));
      c.representation = processes::Representation::tempered_stable(beta, nu);
    }
  }
  c.representation_t = r.number("report.representation.t", 1.0);

  r.reject_unused();
  return c;
}

inline ExperimentConfig parse(const std::string& text) { return from_raw(parse_text(text)); }

/// Replaces the seed entry, keeping its line number.
inline void override_seed(RawConfig& raw, std::uint64_t seed) {
  const int line = raw.count("seed") ? raw["seed"].line : 0;
  raw["seed"] = {std::to_string(seed), line};
}

struct Preset {
  std::string name;
  std::string description;
  std::string text;
};

/// The twelve parameter bundles: rows cpp / iig / itss (plain Poisson,
/// inverse inverse-Gaussian clock, inverse tempered-stable clock) by jump
/// columns exponential / mittag_leffler / discrete_uniform / logarithmic.
inline std::vector<Preset> presets() {
  struct Row {
    std::string name, label, clock;
  };
  struct Column {
    std::string name, label, jump;
  };
  const std::vector<Row> rows{
      {"cpp", "compound Poisson", "process.arrival = poisson\n"},
      {"iig", "inverse inverse-Gaussian clock",
       "process.arrival = time_changed\nclock.kind = inverse_gaussian\nclock.delta = 0.3\nclock.gamma = 1\n"},
      {"itss", "inverse tempered-stable clock",
       "process.arrival = time_changed\nclock.kind = tempered_stable\nclock.alpha = 0.7\nclock.mu = 2\n"},
  };
  const std::vector<Column> cols{
      {"exponential", "exponential jumps (eta = 2)", "jump.kind = exponential\njump.eta = 2\n"},
      {"mittag_leffler", "Mittag-Leffler jumps (beta = 0.9, eta = 2)",
       "jump.kind = mittag_leffler\njump.beta = 0.9\njump.eta = 2\n"},
      {"discrete_uniform", "order-5 discrete-uniform jumps at rate 5 lambda",
       "jump.kind = discrete_uniform\njump.k = 5\nprocess.multiplier = 5\n"},
      {"logarithmic", "logarithmic jumps (q = 0.5)", "jump.kind = logarithmic\njump.q = 0.5\n"},
  };
  std::vector<Preset> out;
  for (const auto& row : rows) {
    for (const auto& col : cols) {
      Preset p;
      p.name = row.name + "_" + col.name;
      p.description = row.label + ", " + col.label + ", lambda = 4";
      p.text = "# " + p.description + "\n" + "seed = 20240601\n" + row.clock + "process.lambda = 4\n" + col.jump +
               "simulate.horizon = 10\nsimulate.grid = 1000\nsimulate.paths = 5\nsimulate.mode = grid\n" +
               "output.dir = out/" + p.name + "\nreport.kinds = moments\nreport.t = 1\n";
      out.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace gfcpp::config
