#pragma once

// Compound Poisson paths, their inverse-subordinator time changes,
// subordinator-composition representations and pmf evaluation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gfcpp/jumps.hpp"
#include "gfcpp/parallel.hpp"
#include "gfcpp/rng.hpp"
#include "gfcpp/specfun.hpp"
#include "gfcpp/subordinators.hpp"

namespace gfcpp {

/// Compound Poisson sample path: ordered event epochs and the cumulative
/// value right after each event. The value is 0 before the first event.
struct EventPath {
  std::vector<double> event_times;
  std::vector<double> cumulative_values;
  double horizon = 0.0;

  double value_at(double t) const {
    const auto it = std::upper_bound(event_times.begin(), event_times.end(), t);
    if (it == event_times.begin()) return 0.0;
    return cumulative_values[static_cast<std::size_t>(it - event_times.begin()) - 1];
  }

  void validate(bool positive_jumps) const {
    if (event_times.size() != cumulative_values.size())
      throw std::invalid_argument("EventPath: length mismatch");
    for (std::size_t i = 0; i < event_times.size(); ++i) {
      if (event_times[i] < 0.0 || event_times[i] > horizon)
        throw std::invalid_argument("EventPath: event outside [0, T]");
      if (i > 0 && !(event_times[i] > event_times[i - 1]))
        throw std::invalid_argument("EventPath: event times must be strictly increasing");
      const double prev = i > 0 ? cumulative_values[i - 1] : 0.0;
      if (positive_jumps && cumulative_values[i] < prev)
        throw std::invalid_argument("EventPath: cumulative values must be nondecreasing");
    }
  }
};

enum class ArrivalKind { Poisson, TimeChanged };

/// Arrival mechanism plus jump law. Order-k processes run the Poisson clock
/// at rate k * lambda (multiplier = k); everything else uses multiplier 1.
struct ProcessSpec {
  ArrivalKind arrival = ArrivalKind::Poisson;
  double lambda = 1.0;
  BernsteinDescriptor clock{};
  JumpLaw jump{};
  int multiplier = 1;

  static ProcessSpec poisson(double lambda, const JumpLaw& jump, int multiplier = 1) {
    ProcessSpec s{ArrivalKind::Poisson, lambda, {}, jump, multiplier};
    s.validate();
    return s;
  }

  static ProcessSpec time_changed(double lambda, const BernsteinDescriptor& clock,
                                  const JumpLaw& jump, int multiplier = 1) {
    ProcessSpec s{ArrivalKind::TimeChanged, lambda, clock, jump, multiplier};
    s.validate();
    return s;
  }

  double rate() const noexcept { return lambda * multiplier; }

  void validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
      throw std::invalid_argument("ProcessSpec: lambda must be > 0");
    const bool has_k = jump.kind == JumpKind::DiscreteUniform || jump.kind == JumpKind::TruncatedGeometric;
    if (multiplier != 1 && !(has_k && multiplier == jump.k))
      throw std::invalid_argument("ProcessSpec: rate multiplier must be 1 or the jump order k");
  }
};

namespace processes {

/// Shared Monte Carlo controls: path i uses RngStream(seed, stream_offset + i).
struct MonteCarloOptions {
  std::uint64_t seed = 1;
  std::uint64_t stream_offset = 0;
  unsigned workers = 1;
  subordinators::FirstPassageOptions passage{};

  RngStream stream(std::size_t path) const { return RngStream(seed, stream_offset + path); }
};

/// Exponential inter-arrivals at rate lambda, iid jumps, up to T.
inline EventPath simulate_cpp(double lambda, const JumpLaw& law, double T, RngStream& rng) {
  if (!(lambda > 0.0)) throw std::invalid_argument("simulate_cpp: lambda must be > 0");
  if (!(T >= 0.0)) throw std::invalid_argument("simulate_cpp: T must be >= 0");
  EventPath path;
  path.horizon = T;
  double t = 0.0;
  double v = 0.0;
  while (true) {
    t += rng.exponential() / lambda;
    if (t > T) break;
    v += jumps::sample_jump(law, rng);
    path.event_times.push_back(t);
    path.cumulative_values.push_back(v);
  }
  return path;
}

/// Clock and process values at a set of ordered calendar times.
struct ClockedSample {
  std::vector<double> times;
  std::vector<double> clock;   ///< E_f(t), or t itself for Poisson arrivals
  std::vector<double> values;  ///< Y_f(t)
  /// Grid index at which each arrival is first visible (one entry per arrival).
  std::vector<std::size_t> arrival_index;
};

/// Samples E_f on `times`, then runs the compound Poisson process in
/// operational time and reads it at E_f(t_i). The operational step is
/// derived from the largest requested time.
inline ClockedSample simulate_on_times(const ProcessSpec& spec, std::span<const double> times,
                                       RngStream& rng,
                                       const subordinators::FirstPassageOptions& passage = {}) {
  spec.validate();
  ClockedSample out;
  out.times.assign(times.begin(), times.end());
  if (times.empty()) return out;
  if (spec.arrival == ArrivalKind::TimeChanged) {
    const double horizon = times.back();
    if (horizon > 0.0) {
      const double dr = subordinators::operational_step(spec.clock, horizon, passage.operational_steps);
      out.clock = subordinators::sample_inverse_on_grid(spec.clock, times, dr, rng, passage.max_steps);
    } else {
      out.clock.assign(times.size(), 0.0);
    }
  } else {
    subordinators::detail::check_time_grid(times);
    out.clock = out.times;
  }

  const double rate = spec.rate();
  out.values.resize(times.size());
  double next = rng.exponential() / rate;
  double v = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    while (next <= out.clock[i]) {
      v += jumps::sample_jump(spec.jump, rng);
      out.arrival_index.push_back(i);
      next += rng.exponential() / rate;
    }
    out.values[i] = v;
  }
  return out;
}

/// Uniform calendar grid 0, T/n, ..., T.
inline std::vector<double> uniform_grid(double T, std::size_t n) {
  if (!(T > 0.0) || n < 1) throw std::invalid_argument("uniform_grid: need T > 0 and n >= 1");
  std::vector<double> g(n + 1);
  for (std::size_t i = 0; i <= n; ++i) g[i] = T * static_cast<double>(i) / static_cast<double>(n);
  g.back() = T;
  return g;
}

/// Time-changed path on a calendar grid with reconstructed event epochs.
struct TimeChangedPath {
  std::vector<double> grid;
  std::vector<double> clock;
  std::vector<double> values;
  /// Events placed at the first grid point where the operational clock
  /// passes each arrival; arrivals sharing a grid point are merged.
  EventPath events;
};

inline TimeChangedPath simulate_gfcpp(const ProcessSpec& spec, double T, std::size_t n_grid,
                                      RngStream& rng,
                                      const subordinators::FirstPassageOptions& passage = {}) {
  if (spec.arrival != ArrivalKind::TimeChanged)
    throw std::invalid_argument("simulate_gfcpp: arrival must be time-changed");
  const auto grid = uniform_grid(T, n_grid);
  auto sample = simulate_on_times(spec, grid, rng, passage);
  TimeChangedPath path;
  path.grid = std::move(sample.times);
  path.clock = std::move(sample.clock);
  path.values = std::move(sample.values);
  path.events.horizon = T;
  for (std::size_t idx : sample.arrival_index) {
    if (!path.events.event_times.empty() && path.events.event_times.back() == path.grid[idx]) continue;
    path.events.event_times.push_back(path.grid[idx]);
    path.events.cumulative_values.push_back(path.values[idx]);
  }
  return path;
}

/// Outer subordinator in a subordinator-composition identity.
struct Representation {
  enum class Kind { StableAtExpCpp, TemperedStableAtExpCpp, SubordinatorAtExpCpp };
  Kind kind = Kind::StableAtExpCpp;
  double beta = 1.0;
  double nu = 0.0;
  BernsteinDescriptor g{};

  static Representation stable(double beta) { return {Kind::StableAtExpCpp, beta, 0.0, {}}; }
  static Representation tempered_stable(double beta, double nu) {
    return {Kind::TemperedStableAtExpCpp, beta, nu, {}};
  }
  static Representation subordinator(const BernsteinDescriptor& g) {
    return {Kind::SubordinatorAtExpCpp, 1.0, 0.0, g};
  }

  /// Jump law whose direct simulation the composition should reproduce.
  JumpLaw direct_law(double eta) const {
    switch (kind) {
      case Kind::StableAtExpCpp: return JumpLaw::mittag_leffler(beta, eta);
      case Kind::TemperedStableAtExpCpp: return JumpLaw::tempered_mittag_leffler(beta, eta, nu);
      case Kind::SubordinatorAtExpCpp: return JumpLaw::bernstein_type(g, eta);
    }
    return {};
  }
};

/// Evaluates the outer subordinator of `rep` at the value Y(T) of the
/// exponential-jump process `base`: one draw of D(Y_f^eta(T)).
inline double simulate_representation(const Representation& rep, const ProcessSpec& base, double T,
                                      RngStream& rng,
                                      const subordinators::FirstPassageOptions& passage = {}) {
  if (base.jump.kind != JumpKind::Exponential)
    throw std::invalid_argument("simulate_representation: base process needs exponential jumps");
  const double times[] = {T};
  const double inner = simulate_on_times(base, times, rng, passage).values.front();
  if (inner == 0.0) return 0.0;
  switch (rep.kind) {
    case Representation::Kind::StableAtExpCpp:
      if (rep.beta == 1.0) return inner;
      return subordinators::sample_stable_increment(rep.beta, inner, rng);
    case Representation::Kind::TemperedStableAtExpCpp:
      if (rep.beta == 1.0) return inner;
      return subordinators::sample_tempered_stable_increment(rep.beta, rep.nu, inner, rng);
    case Representation::Kind::SubordinatorAtExpCpp:
      return subordinators::sample_increment(rep.g, inner, rng);
  }
  return 0.0;
}

/// pmf of a compound Poisson sum with positive integer jumps, for a Poisson
/// number of terms with a given mean. Convolution powers F^{*m}(n) for
/// m, n <= n_max are tabulated once.
class CompoundPoissonPmf {
 public:
  CompoundPoissonPmf(const JumpLaw& law, int n_max) : n_max_(n_max) {
    if (!law.discrete() || law.kind == JumpKind::SymmetricSign)
      throw std::invalid_argument("CompoundPoissonPmf: needs a discrete law on {1,2,...}");
    if (n_max < 0) throw std::invalid_argument("CompoundPoissonPmf: n_max must be >= 0");
    const std::size_t width = static_cast<std::size_t>(n_max) + 1;
    std::vector<double> p(width, 0.0);
    // Unbounded support is cut where the remaining mass is below 1e-12.
    double mass = 0.0;
    for (int j = 1; j <= n_max; ++j) {
      if (law.max_support() > 0 && j > law.max_support()) break;
      p[j] = law.pmf(j);
      mass += p[j];
      if (law.max_support() < 0 && 1.0 - mass < 1e-12) break;
    }
    conv_.assign(width * width, 0.0);
    conv_[0] = 1.0;  // F^{*0} = point mass at 0
    for (int m = 1; m <= n_max; ++m) {
      for (int n = m; n <= n_max; ++n) {
        double acc = 0.0;
        for (int j = 1; j <= n - (m - 1); ++j) acc += p[j] * at(m - 1, n - j);
        conv_[static_cast<std::size_t>(m) * width + n] = acc;
      }
    }
  }

  int n_max() const noexcept { return n_max_; }

  /// F^{*m}(n).
  double convolution(int m, int n) const { return at(m, n); }

  /// P(Y = n) when the number of jumps is Poisson(mean_arrivals).
  double operator()(int n, double mean_arrivals) const {
    if (n < 0) throw std::domain_error("CompoundPoissonPmf: n must be >= 0");
    if (n > n_max_) throw std::out_of_range("CompoundPoissonPmf: n exceeds the tabulated range");
    if (mean_arrivals <= 0.0) return n == 0 ? 1.0 : 0.0;
    const double log_mean = std::log(mean_arrivals);
    double acc = 0.0;
    for (int m = 0; m <= n; ++m) {
      const double c = at(m, n);
      if (c == 0.0) continue;
      acc += c * std::exp(-mean_arrivals + m * log_mean - std::lgamma(m + 1.0));
    }
    return acc;
  }

 private:
  double at(int m, int n) const {
    return conv_[static_cast<std::size_t>(m) * (static_cast<std::size_t>(n_max_) + 1) + n];
  }

  int n_max_;
  std::vector<double> conv_;
};

/// P(Y(t) = n) for a compound Poisson process with rate lambda.
inline double cpp_pmf(double lambda, const JumpLaw& law, int n, double t) {
  if (n < 0) throw std::domain_error("cpp_pmf: n must be >= 0");
  if (!(lambda > 0.0) || !(t >= 0.0)) throw std::invalid_argument("cpp_pmf: need lambda > 0, t >= 0");
  return CompoundPoissonPmf(law, n)(n, lambda * t);
}

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// Mean and standard error of a sample.
inline Estimate mean_with_se(std::span<const double> xs) {
  Estimate e;
  if (xs.empty()) return e;
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  e.value = sum / n;
  if (xs.size() < 2) return e;
  double ss = 0.0;
  for (double x : xs) ss += (x - e.value) * (x - e.value);
  e.se = std::sqrt(ss / (n - 1.0) / n);
  return e;
}

/// Monte Carlo mixture estimate of P(Y_f(t) = n): cpp_pmf at rate
/// lambda * multiplier averaged over draws of E_f(t).
inline Estimate gfcpp_pmf_mc(const ProcessSpec& spec, int n, double t, std::size_t paths,
                             const MonteCarloOptions& opts = {}) {
  if (!spec.jump.discrete()) throw std::invalid_argument("gfcpp_pmf_mc: discrete jump law required");
  if (spec.arrival != ArrivalKind::TimeChanged)
    throw std::invalid_argument("gfcpp_pmf_mc: time-changed arrivals required");
  if (n < 0) throw std::domain_error("gfcpp_pmf_mc: n must be >= 0");
  if (paths < 2) throw std::invalid_argument("gfcpp_pmf_mc: need at least 2 paths");
  const CompoundPoissonPmf pmf(spec.jump, n);
  std::vector<double> draws(paths);
  const double dr = t > 0.0 ? subordinators::operational_step(spec.clock, t, opts.passage.operational_steps) : 1.0;
  parallel_for(paths, opts.workers, [&](std::size_t i) {
    auto rng = opts.stream(i);
    const double times[] = {t};
    const double e = t > 0.0 ? subordinators::sample_inverse_on_grid(spec.clock, times, dr, rng,
                                                                     opts.passage.max_steps)[0]
                             : 0.0;
    draws[i] = pmf(n, spec.rate() * e);
  });
  return mean_with_se(draws);
}

}  // namespace processes
}  // namespace gfcpp
