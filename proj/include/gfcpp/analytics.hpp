#pragma once

// Analytic moments of time-changed compound Poisson processes, Monte Carlo
// estimators and the statistical checks built on them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "gfcpp/error.hpp"
#include "gfcpp/jumps.hpp"
#include "gfcpp/parallel.hpp"
#include "gfcpp/processes.hpp"
#include "gfcpp/rng.hpp"
#include "gfcpp/specfun.hpp"
#include "gfcpp/subordinators.hpp"

namespace gfcpp {
namespace analytics {

using processes::Estimate;
using processes::MonteCarloOptions;

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// One compared statistic. `se` combines the empirical standard error with
/// the Monte Carlo error of the analytic side, when it has one.
struct MomentField {
  double analytic = kNaN;
  double analytic_se = 0.0;
  double empirical = kNaN;
  double empirical_se = kNaN;
  double se = kNaN;
  double z = kNaN;

  void finalize() {
    se = std::sqrt(empirical_se * empirical_se + analytic_se * analytic_se);
    if (se > 0.0) {
      z = (empirical - analytic) / se;
    } else {
      z = empirical == analytic ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), empirical - analytic);
    }
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["analytic"] = analytic;
    j["empirical"] = empirical;
    j["se"] = se;
    j["z"] = z;
    return j;
  }
};

/// Mean and variance of Y_f(t) and, when a second time s is given,
/// Cov[Y_f(s), Y_f(t)].
struct MomentReport {
  double t = 0.0;
  std::optional<double> s;
  MomentField mean;
  MomentField variance;
  std::optional<MomentField> covariance;
  std::vector<std::string> warnings;

  void finalize() {
    mean.finalize();
    variance.finalize();
    if (covariance) covariance->finalize();
  }

  double max_abs_z() const {
    double m = std::max(std::abs(mean.z), std::abs(variance.z));
    if (covariance) m = std::max(m, std::abs(covariance->z));
    return m;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["t"] = t;
    if (s) j["s"] = *s;
    j["mean"] = mean.to_json();
    j["variance"] = variance.to_json();
    if (covariance) j["covariance"] = covariance->to_json();
    j["warnings"] = warnings;
    return j;
  }
};

/// Monte Carlo controls for second-order moments of E_f.
struct ClockMomentOptions {
  std::size_t draws = 100000;
  std::size_t operational_steps = 1000;
  MonteCarloOptions mc{1, std::uint64_t{1} << 40, 1, {}};
};

/// First and second moments of E_f at t (and s). Means come from specfun;
/// Var[E_f(t)] is closed form for the stable family and Monte Carlo
/// otherwise; Cov[E_f(s), E_f(t)] is always Monte Carlo.
struct ClockMoments {
  double mean_t = 0.0;
  double mean_s = 0.0;
  Estimate var_t;
  Estimate cov_st;
};

namespace detail {

/// Grouped jackknife over at most 100 contiguous groups for a statistic of
/// paired samples (x_i, y_i) computed from the sums (n, Sx, Sy, Sxy, Sxx).
struct PairSums {
  double n = 0, sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
  PairSums& operator+=(const PairSums& o) {
    n += o.n; sx += o.sx; sy += o.sy; sxy += o.sxy; sxx += o.sxx; syy += o.syy;
    return *this;
  }
  PairSums operator-(const PairSums& o) const {
    return {n - o.n, sx - o.sx, sy - o.sy, sxy - o.sxy, sxx - o.sxx, syy - o.syy};
  }
  double mean_y() const { return sy / n; }
  double var_y() const { return (syy - sy * sy / n) / (n - 1.0); }
  double cov() const { return (sxy - sx * sy / n) / (n - 1.0); }
};

template <class Stat>
Estimate grouped_jackknife(std::span<const double> x, std::span<const double> y, Stat stat) {
  const std::size_t n = y.size();
  const std::size_t groups = std::min<std::size_t>(100, n);
  std::vector<PairSums> g(groups);
  for (std::size_t i = 0; i < n; ++i) {
    auto& s = g[i * groups / n];
    const double xi = x[i], yi = y[i];
    s.n += 1; s.sx += xi; s.sy += yi; s.sxy += xi * yi; s.sxx += xi * xi; s.syy += yi * yi;
  }
  PairSums total;
  for (const auto& s : g) total += s;
  Estimate e;
  e.value = stat(total);
  if (groups < 2) return e;
  std::vector<double> leave(groups);
  for (std::size_t k = 0; k < groups; ++k) leave[k] = stat(total - g[k]);
  const double mean = std::accumulate(leave.begin(), leave.end(), 0.0) / groups;
  double ss = 0.0;
  for (double v : leave) ss += (v - mean) * (v - mean);
  e.se = std::sqrt((groups - 1.0) / groups * ss);
  return e;
}

}  // namespace detail

inline ClockMoments clock_moments(const ProcessSpec& spec, double t, std::optional<double> s,
                                  const ClockMomentOptions& opts = {}) {
  ClockMoments out;
  if (spec.arrival == ArrivalKind::Poisson) {
    out.mean_t = t;
    out.mean_s = s.value_or(0.0);
    return out;
  }
  const auto& d = spec.clock;
  out.mean_t = specfun::mean_inverse_subordinator(d, t);
  out.mean_s = s ? specfun::mean_inverse_subordinator(d, *s) : 0.0;
  const bool stable = d.kind == BernsteinKind::Stable ||
                      (d.kind == BernsteinKind::TemperedStable && d.mu == 0.0);
  if (stable) {
    const double a = d.alpha;
    out.var_t.value = 2.0 * std::pow(t, 2.0 * a) / std::tgamma(1.0 + 2.0 * a) - out.mean_t * out.mean_t;
    if (!s) return out;
  }
  if (t == 0.0 && (!s || *s == 0.0)) return out;

  std::vector<double> times{t};
  if (s) times.push_back(*s);
  std::sort(times.begin(), times.end());
  const double horizon = times.back();
  const double dr = subordinators::operational_step(d, horizon, opts.operational_steps);
  std::vector<double> et(opts.draws), es(opts.draws);
  parallel_for(opts.draws, opts.mc.workers, [&](std::size_t i) {
    auto rng = opts.mc.stream(i);
    const auto e = subordinators::sample_inverse_on_grid(d, times, dr, rng, opts.mc.passage.max_steps);
    et[i] = times.size() == 1 || times[1] == t ? e.back() : e.front();
    es[i] = s ? (times.front() == *s ? e.front() : e.back()) : 0.0;
  });
  if (!stable) {
    out.var_t = detail::grouped_jackknife(et, et, [](const detail::PairSums& p) { return p.var_y(); });
  }
  if (s) out.cov_st = detail::grouped_jackknife(es, et, [](const detail::PairSums& p) { return p.cov(); });
  return out;
}

/// Analytic half of the moment report:
///   mean     = L E[E_f(t)] E[X]
///   variance = L E[E_f(t)] E[X^2] + (L E[X])^2 Var[E_f(t)]
///   cov      = L E[E_f(s)] E[X^2] + (L E[X])^2 Cov[E_f(s), E_f(t)],  s <= t
/// with L = lambda * multiplier.
inline MomentReport analytic_moments(const ProcessSpec& spec, double t, std::optional<double> s = {},
                                     const ClockMomentOptions& opts = {}) {
  if (!(t >= 0.0)) throw std::domain_error("analytic_moments: t must be >= 0");
  if (s && !(*s >= 0.0 && *s <= t)) throw std::domain_error("analytic_moments: need 0 <= s <= t");
  const auto jm = jumps::jump_moments(spec.jump);
  if (jm.mean_infinite || jm.second_infinite)
    throw MomentUndefined("analytic_moments: jump law " + spec.jump.name() + " has infinite moments");
  MomentReport r;
  r.t = t;
  r.s = s;
  const auto cm = clock_moments(spec, t, s, opts);
  const double rate = spec.rate();
  const double drift = rate * jm.mean;
  r.mean.analytic = drift * cm.mean_t;
  r.variance.analytic = rate * cm.mean_t * jm.second_moment + drift * drift * cm.var_t.value;
  r.variance.analytic_se = drift * drift * cm.var_t.se;
  if (s) {
    MomentField c;
    c.analytic = rate * cm.mean_s * jm.second_moment + drift * drift * cm.cov_st.value;
    c.analytic_se = drift * drift * cm.cov_st.se;
    r.covariance = c;
  }
  return r;
}

/// Empirical half: sample mean and variance of Y(t), covariance of
/// (Y(s), Y(t)) paired on the same path; grouped-jackknife standard errors.
inline MomentReport empirical_moments(std::span<const double> y_t, std::span<const double> y_s = {}) {
  if (y_t.size() < 100) throw InsufficientData("empirical_moments: at least 100 paths are required");
  if (!y_s.empty() && y_s.size() != y_t.size())
    throw std::invalid_argument("empirical_moments: paired samples must have equal length");
  MomentReport r;
  const auto mean = detail::grouped_jackknife(y_t, y_t, [](const detail::PairSums& p) { return p.mean_y(); });
  const auto var = detail::grouped_jackknife(y_t, y_t, [](const detail::PairSums& p) { return p.var_y(); });
  r.mean.empirical = mean.value;
  r.mean.empirical_se = mean.se;
  r.variance.empirical = std::max(0.0, var.value);
  r.variance.empirical_se = var.se;
  if (std::all_of(y_t.begin(), y_t.end(), [&](double v) { return v == y_t.front(); })) {
    r.variance.empirical = 0.0;
    r.warnings.emplace_back("zero variance: all samples are equal");
  }
  if (!y_s.empty()) {
    const auto cov = detail::grouped_jackknife(y_s, y_t, [](const detail::PairSums& p) { return p.cov(); });
    MomentField c;
    c.empirical = cov.value;
    c.empirical_se = cov.se;
    r.covariance = c;
  }
  return r;
}

/// Merges analytic and empirical halves and computes z-scores.
inline MomentReport combine(MomentReport analytic, const MomentReport& empirical) {
  auto take = [](MomentField& a, const MomentField& e) {
    a.empirical = e.empirical;
    a.empirical_se = e.empirical_se;
  };
  take(analytic.mean, empirical.mean);
  take(analytic.variance, empirical.variance);
  if (analytic.covariance && empirical.covariance) take(*analytic.covariance, *empirical.covariance);
  analytic.warnings.insert(analytic.warnings.end(), empirical.warnings.begin(), empirical.warnings.end());
  analytic.finalize();
  return analytic;
}

/// Values of Y_f at a common set of ordered times for each path.
struct PathSamples {
  std::vector<double> times;
  /// values[k][i]: Y_f(times[k]) on path i
  std::vector<std::vector<double>> values;
  /// clock[k][i]: E_f(times[k]) on path i
  std::vector<std::vector<double>> clock;
};

inline PathSamples sample_paths(const ProcessSpec& spec, std::vector<double> times, std::size_t paths,
                                const MonteCarloOptions& opts = {}) {
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  PathSamples out;
  out.times = times;
  out.values.assign(times.size(), std::vector<double>(paths));
  out.clock.assign(times.size(), std::vector<double>(paths));
  parallel_for(paths, opts.workers, [&](std::size_t i) {
    auto rng = opts.stream(i);
    const auto c = processes::simulate_on_times(spec, times, rng, opts.passage);
    for (std::size_t k = 0; k < times.size(); ++k) {
      out.values[k][i] = c.values[k];
      out.clock[k][i] = c.clock[k];
    }
  });
  return out;
}

namespace detail {
inline std::size_t time_index(const PathSamples& p, double t) {
  const auto it = std::find(p.times.begin(), p.times.end(), t);
  if (it == p.times.end()) throw std::invalid_argument("time not present in path samples");
  return static_cast<std::size_t>(it - p.times.begin());
}
}  // namespace detail

/// Simulates `paths` paths and compares the empirical moments with the
/// analytic ones. Analytic Monte Carlo draws use streams disjoint from the
/// path streams.
inline MomentReport moment_check(const ProcessSpec& spec, double t, std::optional<double> s, std::size_t paths,
                                 const MonteCarloOptions& opts = {}, ClockMomentOptions clock_opts = {}) {
  auto analytic = analytic_moments(spec, t, s, clock_opts);
  std::vector<double> times{t};
  if (s) times.push_back(*s);
  const auto samples = sample_paths(spec, times, paths, opts);
  const auto& yt = samples.values[detail::time_index(samples, t)];
  const auto emp = s ? empirical_moments(yt, samples.values[detail::time_index(samples, *s)])
                     : empirical_moments(yt);
  return combine(std::move(analytic), emp);
}

struct LinearFit {
  double slope = kNaN;
  double intercept = kNaN;
  double slope_se = kNaN;
  std::size_t points = 0;
};

/// Least-squares fit of log y against log x over the points with y > 0.
inline LinearFit loglog_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("loglog_fit: length mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 4)
    throw InsufficientData("loglog_fit: fewer than 4 positive points (" + std::to_string(lx.size()) + ")");
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw InsufficientData("loglog_fit: all abscissae coincide");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - fit.intercept - fit.slope * lx[i];
    rss += r * r;
  }
  fit.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
  fit.points = lx.size();
  return fit;
}

/// n points spaced geometrically from a to b inclusive.
inline std::vector<double> geometric_grid(double a, double b, std::size_t n) {
  if (!(a > 0.0 && b > a) || n < 2) throw std::invalid_argument("geometric_grid: need 0 < a < b, n >= 2");
  std::vector<double> g(n);
  const double ratio = std::log(b / a) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = a * std::exp(ratio * static_cast<double>(i));
  g.back() = b;
  return g;
}

/// Pearson correlation of paired samples; NaN when either side is constant.
inline double correlation(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0 && syy > 0.0)) return kNaN;
  return sxy / std::sqrt(sxx * syy);
}

struct LrdOptions {
  double s = 1.0;
  std::vector<double> t_grid = geometric_grid(2.0, 200.0, 12);
  std::size_t paths = 100000;
  MonteCarloOptions mc{1, 0, 1, {4000, 200'000'000}};
};

struct LrdResult {
  LinearFit fit;
  std::vector<double> t;
  std::vector<double> corr;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["slope_se"] = fit.slope_se;
    j["points"] = fit.points;
    j["t"] = t;
    j["correlation"] = corr;
    return j;
  }
};

/// Correlations Corr(Y(s), Y(t_k)) from path samples and the log-log fit.
inline LrdResult lrd_from_samples(const PathSamples& samples, double s, std::span<const double> t_grid) {
  LrdResult r;
  const auto& ys = samples.values[detail::time_index(samples, s)];
  for (double t : t_grid) {
    r.t.push_back(t);
    r.corr.push_back(correlation(ys, samples.values[detail::time_index(samples, t)]));
  }
  r.fit = loglog_fit(r.t, r.corr);
  return r;
}

/// Decay exponent of Corr(Y_f(s), Y_f(t)) in t, from `paths` simulated
/// paths; nonpositive correlations are left out of the fit.
inline LrdResult lrd_slope(const ProcessSpec& spec, const LrdOptions& opts = {}) {
  if (opts.t_grid.size() < 4) throw InsufficientData("lrd_slope: need at least 4 time points");
  if (!(opts.t_grid.front() > opts.s)) throw std::invalid_argument("lrd_slope: t grid must start after s");
  std::vector<double> times(opts.t_grid);
  times.push_back(opts.s);
  const auto samples = sample_paths(spec, times, opts.paths, opts.mc);
  return lrd_from_samples(samples, opts.s, opts.t_grid);
}

struct MartingaleRow {
  double s = 0.0;
  double t = 0.0;
  double mean = 0.0;
  double se = 0.0;
  double z = 0.0;
};

struct MartingaleResult {
  std::vector<MartingaleRow> rows;
  bool dropped_jump_mean = false;

  double max_abs_z() const {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, std::abs(r.z));
    return m;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["dropped_jump_mean"] = dropped_jump_mean;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : rows)
      arr.push_back({{"s", r.s}, {"t", r.t}, {"mean", r.mean}, {"se", r.se}, {"z", r.z}});
    j["pairs"] = std::move(arr);
    return j;
  }
};

/// Mean of the compensated increment M(t) - M(s), M = Y_f - L E_f E[X],
/// for each pair. With `drop_jump_mean` the compensator omits E[X].
inline MartingaleResult martingale_from_samples(const ProcessSpec& spec, const PathSamples& samples,
                                                std::span<const std::pair<double, double>> pairs,
                                                bool drop_jump_mean = false) {
  const auto jm = jumps::jump_moments(spec.jump);
  if (jm.mean_infinite) throw MomentUndefined("martingale_test: jump mean is infinite");
  const double drift = spec.rate() * (drop_jump_mean ? 1.0 : jm.mean);
  MartingaleResult out;
  out.dropped_jump_mean = drop_jump_mean;
  const std::size_t n = samples.values.front().size();
  std::vector<double> inc(n);
  for (const auto& [s, t] : pairs) {
    const std::size_t is = detail::time_index(samples, s);
    const std::size_t it = detail::time_index(samples, t);
    for (std::size_t i = 0; i < n; ++i)
      inc[i] = (samples.values[it][i] - drift * samples.clock[it][i]) -
               (samples.values[is][i] - drift * samples.clock[is][i]);
    if (s == t) std::fill(inc.begin(), inc.end(), 0.0);
    const auto e = processes::mean_with_se(inc);
    MartingaleRow row{s, t, e.value, e.se, 0.0};
    row.z = e.se > 0.0 ? e.value / e.se : (e.value == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    out.rows.push_back(row);
  }
  return out;
}

inline MartingaleResult martingale_test(const ProcessSpec& spec, std::span<const std::pair<double, double>> pairs,
                                        std::size_t paths, const MonteCarloOptions& opts = {},
                                        bool drop_jump_mean = false) {
  std::vector<double> times;
  for (const auto& [s, t] : pairs) {
    if (!(s >= 0.0 && s <= t)) throw std::invalid_argument("martingale_test: pairs need 0 <= s <= t");
    times.push_back(s);
    times.push_back(t);
  }
  const auto samples = sample_paths(spec, times, paths, opts);
  return martingale_from_samples(spec, samples, pairs, drop_jump_mean);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Asymptotic Kolmogorov distribution tail Q(x) = 2 sum (-1)^{k-1} e^{-2k^2x^2}.
inline double kolmogorov_tail(double x) {
  if (x < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Two-sample Kolmogorov-Smirnov statistic with the asymptotic p-value
/// (Stephens' small-sample correction of the scaled statistic).
inline KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsResult r;
  r.statistic = d;
  const double en = std::sqrt(na * nb / (na + nb));
  r.p_value = kolmogorov_tail((en + 0.12 + 0.11 / en) * d);
  return r;
}

/// Mean of exp(-s X) over the sample for each s, with standard errors.
inline std::vector<Estimate> empirical_laplace(std::span<const double> samples, std::span<const double> s_grid) {
  if (samples.empty()) throw std::invalid_argument("empirical_laplace: empty sample");
  std::vector<Estimate> out;
  std::vector<double> v(samples.size());
  for (double s : s_grid) {
    if (!(s >= 0.0)) throw std::domain_error("empirical_laplace: s must be >= 0");
    if (s == 0.0) {
      out.push_back({1.0, 0.0});
      continue;
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i] < 0.0) throw std::domain_error("empirical_laplace: samples must be nonnegative");
      v[i] = std::exp(-s * samples[i]);
    }
    out.push_back(processes::mean_with_se(v));
  }
  return out;
}

struct IdentityResult {
  std::string name;
  double t = 0.0;
  std::size_t samples = 0;
  KsResult ks;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["identity"] = name;
    j["t"] = t;
    j["samples"] = samples;
    j["statistic"] = ks.statistic;
    j["p_value"] = ks.p_value;
    return j;
  }
};

inline std::string representation_name(const processes::Representation& rep) {
  switch (rep.kind) {
    case processes::Representation::Kind::StableAtExpCpp: return "stable_at_exponential_cpp";
    case processes::Representation::Kind::TemperedStableAtExpCpp: return "tempered_stable_at_exponential_cpp";
    case processes::Representation::Kind::SubordinatorAtExpCpp: return "subordinator_at_exponential_cpp";
  }
  return "?";
}

/// KS comparison at time t between the process with jump law
/// rep.direct_law(eta) and the outer subordinator of `rep` evaluated at the
/// exponential-jump process `base`. The two sides use disjoint streams.
inline IdentityResult identity_check(const processes::Representation& rep, const ProcessSpec& base, double t,
                                     std::size_t samples, const MonteCarloOptions& opts = {}) {
  if (base.jump.kind != JumpKind::Exponential)
    throw std::invalid_argument("identity_check: base process needs exponential jumps");
  ProcessSpec direct = base;
  direct.jump = rep.direct_law(base.jump.eta);
  std::vector<double> lhs(samples), rhs(samples);
  const double times[] = {t};
  parallel_for(samples, opts.workers, [&](std::size_t i) {
    auto rng = opts.stream(i);
    lhs[i] = processes::simulate_on_times(direct, times, rng, opts.passage).values.front();
    auto rng2 = opts.stream(samples + i);
    rhs[i] = processes::simulate_representation(rep, base, t, rng2, opts.passage);
  });
  IdentityResult r;
  r.name = representation_name(rep);
  r.t = t;
  r.samples = samples;
  r.ks = ks_two_sample(lhs, rhs);
  return r;
}

struct DoubleTransformOptions {
  double dr = 2e-3;
  double tail_tolerance = 1e-12;
  std::uint64_t max_steps = 100'000'000;
};

struct DoubleTransformPoint {
  double y = 0.0;
  double s = 0.0;
  Estimate estimate;
  double exact = 0.0;
  /// Upper bound y * dr * exact on the bias from the grid first passage.
  double bias_budget = 0.0;

  bool passed() const { return std::abs(estimate.value - exact) <= 3.0 * estimate.se + bias_budget; }
};

/// Monte Carlo estimate of int_0^inf e^{-s t} E[e^{-y E_f(t)}] dt, compared
/// with f(s) / (s (y + f(s))). On each path E_f = k dr on [D_{k-1}, D_k), so
/// the time integral is summed exactly cell by cell until the remaining
/// contribution is below the tail tolerance.
inline std::vector<DoubleTransformPoint> inverse_double_laplace(const BernsteinDescriptor& d,
                                                                std::span<const double> ys,
                                                                std::span<const double> ss, std::size_t paths,
                                                                const MonteCarloOptions& opts = {},
                                                                const DoubleTransformOptions& dt = {}) {
  if (ys.empty() || ss.empty()) throw std::invalid_argument("inverse_double_laplace: empty grid");
  const double y_min = *std::min_element(ys.begin(), ys.end());
  const double s_min = *std::min_element(ss.begin(), ss.end());
  if (!(y_min >= 0.0 && s_min > 0.0)) throw std::domain_error("inverse_double_laplace: need y >= 0, s > 0");
  const std::size_t ny = ys.size(), ns = ss.size();
  std::vector<std::vector<double>> values(ny * ns, std::vector<double>(paths));
  parallel_for(paths, opts.workers, [&](std::size_t p) {
    auto rng = opts.stream(p);
    std::vector<double> acc(ny * ns, 0.0);
    double level = 0.0;
    for (std::uint64_t k = 1;; ++k) {
      if (k > dt.max_steps) throw CoverageError("inverse_double_laplace: step cap reached");
      const double next = level + subordinators::sample_increment(d, dt.dr, rng);
      const double r = static_cast<double>(k) * dt.dr;
      for (std::size_t a = 0; a < ny; ++a) {
        const double wy = std::exp(-ys[a] * r);
        for (std::size_t b = 0; b < ns; ++b)
          acc[a * ns + b] += wy * (std::exp(-ss[b] * level) - std::exp(-ss[b] * next)) / ss[b];
      }
      level = next;
      if (std::exp(-s_min * level - y_min * r) / s_min < dt.tail_tolerance) break;
    }
    for (std::size_t c = 0; c < ny * ns; ++c) values[c][p] = acc[c];
  });
  std::vector<DoubleTransformPoint> out;
  for (std::size_t a = 0; a < ny; ++a) {
    for (std::size_t b = 0; b < ns; ++b) {
      DoubleTransformPoint pt;
      pt.y = ys[a];
      pt.s = ss[b];
      pt.estimate = processes::mean_with_se(values[a * ns + b]);
      const double f = specfun::bernstein_eval(d, pt.s);
      pt.exact = f / (pt.s * (pt.y + f));
      pt.bias_budget = pt.y * dt.dr * pt.exact;
      out.push_back(pt);
    }
  }
  return out;
}

}  // namespace analytics
}  // namespace gfcpp
