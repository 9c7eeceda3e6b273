#pragma once

// Subordinator increments, operational-time paths and first-passage
// (inverse subordinator) sampling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gfcpp/error.hpp"
#include "gfcpp/rng.hpp"
#include "gfcpp/specfun.hpp"

namespace gfcpp {

/// Grid-indexed nondecreasing path: a subordinator D_f(r) on a uniform
/// operational grid, or an inverse subordinator E_f(t) on a calendar grid.
struct MonotonePath {
  std::vector<double> times;
  std::vector<double> values;

  std::size_t size() const noexcept { return times.size(); }

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const {
    if (times.empty() || times.size() != values.size())
      throw std::invalid_argument("MonotonePath: times and values must be non-empty and equal length");
    if (times.front() != 0.0) throw std::invalid_argument("MonotonePath: times must start at 0");
    if (values.front() != 0.0) throw std::invalid_argument("MonotonePath: values[0] must be 0");
    for (std::size_t i = 1; i < times.size(); ++i) {
      if (!(times[i] > times[i - 1]))
        throw std::invalid_argument("MonotonePath: times must be strictly increasing");
      if (values[i] < values[i - 1])
        throw std::invalid_argument("MonotonePath: values must be nondecreasing");
    }
  }
};

namespace subordinators {

/// Standard one-sided stable variate with E[exp(-sS)] = exp(-s^alpha)
/// (Kanter / Chambers-Mallows-Stuck representation).
inline double sample_standard_stable(double alpha, RngStream& rng) {
  const double u = std::numbers::pi * rng.uniform();
  const double w = rng.exponential();
  const double log_s = std::log(std::sin(alpha * u)) - std::log(std::sin(u)) / alpha +
                       (1.0 - alpha) / alpha * (std::log(std::sin((1.0 - alpha) * u)) - std::log(w));
  return std::exp(log_s);
}

inline double sample_stable_increment(double alpha, double dt, RngStream& rng) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("stable increment: alpha in (0,1)");
  if (!(dt > 0.0)) throw std::invalid_argument("stable increment: dt must be > 0");
  return std::pow(dt, 1.0 / alpha) * sample_standard_stable(alpha, rng);
}

inline constexpr std::uint64_t kTemperedRejectionCap = 1'000'000;

/// Tempered stable increment by exponential tilting: a stable draw X is kept
/// with probability exp(-mu X).
inline double sample_tempered_stable_increment(double alpha, double mu, double dt, RngStream& rng) {
  if (!(mu >= 0.0)) throw std::invalid_argument("tempered stable increment: mu must be >= 0");
  if (mu == 0.0) return sample_stable_increment(alpha, dt, rng);
  for (std::uint64_t i = 0; i < kTemperedRejectionCap; ++i) {
    const double x = sample_stable_increment(alpha, dt, rng);
    if (rng.uniform() <= std::exp(-mu * x)) return x;
  }
  throw SamplerStall("tempered stable rejection exceeded 1e6 iterations (alpha=" +
                     std::to_string(alpha) + ", mu=" + std::to_string(mu) +
                     ", dt=" + std::to_string(dt) + ")");
}

/// Inverse Gaussian increment with E[exp(-sX)] = exp(-dt delta (sqrt(2s+gamma^2)-gamma)),
/// i.e. IG(mean = delta dt / gamma, shape = (delta dt)^2), via the
/// Michael-Schucany-Haas transformation.
inline double sample_ig_increment(double delta, double gamma, double dt, RngStream& rng) {
  if (!(delta > 0.0 && gamma > 0.0)) throw std::invalid_argument("IG increment: delta, gamma > 0");
  if (!(dt > 0.0)) throw std::invalid_argument("IG increment: dt must be > 0");
  const double m = delta * dt / gamma;
  const double l = (delta * dt) * (delta * dt);
  const double z = rng.normal();
  const double a = m * z * z;
  if (a == 0.0) return m;
  const double b = std::sqrt(a * a + 4.0 * l * a);
  // Smaller root m (B - A) / (A + B), written without cancellation.
  const double x = 4.0 * m * l * a / ((a + b) * (a + b));
  return rng.uniform() <= m / (m + x) ? x : m * m / x;
}

inline double sample_increment(const BernsteinDescriptor& d, double dt, RngStream& rng) {
  switch (d.kind) {
    case BernsteinKind::Stable:
      return sample_stable_increment(d.alpha, dt, rng);
    case BernsteinKind::TemperedStable:
      return sample_tempered_stable_increment(d.alpha, d.mu, dt, rng);
    case BernsteinKind::InverseGaussian:
      return sample_ig_increment(d.delta, d.gamma, dt, rng);
  }
  return 0.0;
}

/// Cumulative sums of n iid increments over [0, T], dt = T/n.
inline MonotonePath subordinator_path(const BernsteinDescriptor& d, double T, std::size_t n,
                                      RngStream& rng) {
  if (!(T > 0.0)) throw std::invalid_argument("subordinator_path: T must be > 0");
  if (n < 1) throw std::invalid_argument("subordinator_path: n must be >= 1");
  const double dt = T / static_cast<double>(n);
  MonotonePath path;
  path.times.resize(n + 1);
  path.values.resize(n + 1);
  path.times[0] = 0.0;
  path.values[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    path.times[i] = static_cast<double>(i) * dt;
    path.values[i] = path.values[i - 1] + sample_increment(d, dt, rng);
  }
  return path;
}

namespace detail {
inline void check_time_grid(std::span<const double> t_grid) {
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= 0.0)) throw std::invalid_argument("time grid must be nonnegative");
    if (i > 0 && t_grid[i] < t_grid[i - 1]) throw std::invalid_argument("time grid must be ordered");
  }
}
}  // namespace detail

/// First-passage levels of a discretized subordinator: for each t, the
/// smallest grid r with D(r) > t (t = 0 maps to 0).
inline MonotonePath inverse_path(const MonotonePath& d_path, std::span<const double> t_grid) {
  d_path.validate();
  detail::check_time_grid(t_grid);
  MonotonePath out;
  out.times.assign(t_grid.begin(), t_grid.end());
  out.values.resize(t_grid.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    if (t == 0.0) {
      out.values[i] = 0.0;
      continue;
    }
    while (k < d_path.size() && !(d_path.values[k] > t)) ++k;
    if (k == d_path.size())
      throw CoverageError("inverse_path: t=" + std::to_string(t) +
                          " exceeds the simulated subordinator range " +
                          std::to_string(d_path.values.back()) +
                          "; use a longer operational-time horizon");
    out.values[i] = d_path.times[k];
  }
  return out;
}

/// Operational resolution controls for first-passage sampling.
struct FirstPassageOptions {
  /// Steps covering the initial operational horizon 1.5 E[E_f(T)].
  std::size_t operational_steps = 10000;
  /// Hard cap on the number of subordinator increments per path.
  std::uint64_t max_steps = 200'000'000;
};

/// Operational step for a calendar horizon T: the initial horizon
/// 1.5 E[E_f(T)] split into `steps` cells.
inline double operational_step(const BernsteinDescriptor& d, double T, std::size_t steps) {
  if (!(T > 0.0)) throw std::invalid_argument("operational_step: T must be > 0");
  if (steps < 1) throw std::invalid_argument("operational_step: steps must be >= 1");
  return 1.5 * specfun::mean_inverse_subordinator(d, T) / static_cast<double>(steps);
}

/// Samples E_f on an ordered calendar grid by stepping D_f with step `dr`
/// until it passes each grid time in turn. Consumes exactly the increments
/// subordinator_path would draw on the same stream with the same step.
inline std::vector<double> sample_inverse_on_grid(const BernsteinDescriptor& d,
                                                  std::span<const double> t_grid, double dr,
                                                  RngStream& rng,
                                                  std::uint64_t max_steps = FirstPassageOptions{}.max_steps) {
  detail::check_time_grid(t_grid);
  if (!(dr > 0.0)) throw std::invalid_argument("sample_inverse_on_grid: dr must be > 0");
  std::vector<double> out(t_grid.size(), 0.0);
  double level = 0.0;
  std::uint64_t k = 0;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    if (t == 0.0) continue;
    while (!(level > t)) {
      if (++k > max_steps)
        throw CoverageError("sample_inverse_on_grid: subordinator did not pass t=" +
                            std::to_string(t) + " within the step cap");
      level += sample_increment(d, dr, rng);
    }
    out[i] = static_cast<double>(k) * dr;
  }
  return out;
}

/// Operational-time path with step `dr` whose horizon starts at n steps and
/// doubles until D_f exceeds T.
inline MonotonePath operational_path(const BernsteinDescriptor& d, double T, double dr,
                                     std::size_t n, RngStream& rng) {
  if (!(T > 0.0 && dr > 0.0 && n >= 1))
    throw std::invalid_argument("operational_path: need T > 0, dr > 0, n >= 1");
  MonotonePath path;
  path.times.push_back(0.0);
  path.values.push_back(0.0);
  std::size_t target = n;
  while (true) {
    while (path.times.size() <= target) {
      path.times.push_back(static_cast<double>(path.times.size()) * dr);
      path.values.push_back(path.values.back() + sample_increment(d, dr, rng));
    }
    if (path.values.back() > T) return path;
    target *= 2;
  }
}

}  // namespace subordinators
}  // namespace gfcpp
