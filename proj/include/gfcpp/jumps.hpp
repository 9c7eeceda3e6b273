#pragma once

// Jump-size laws: samplers, Laplace transforms and first two moments.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "gfcpp/rng.hpp"
#include "gfcpp/specfun.hpp"
#include "gfcpp/subordinators.hpp"

namespace gfcpp {

enum class JumpKind {
  Exponential,
  MittagLeffler,
  TemperedMittagLeffler,
  BernsteinType,
  DiscreteUniform,
  TruncatedGeometric,
  Logarithmic,
  /// +-1 with probability 1/2 each. Zero-mean law needed only by the
  /// long-range-dependence check; not one of the modelled jump laws.
  SymmetricSign,
};

/// Tagged parameter record for a jump-size distribution.
///
///   Exponential(eta)                    density eta e^{-eta x}
///   MittagLeffler(beta, eta)            LT eta / (s^beta + eta), beta in (0,1]
///   TemperedMittagLeffler(beta, eta, nu) LT eta / (eta + (s+nu)^beta - nu^beta)
///   BernsteinType(g, eta)               LT eta / (g(s) + eta)
///   DiscreteUniform(k)                  P(j) = 1/k on {1..k}
///   TruncatedGeometric(rho, k)          P(j) = (1-rho) rho^{j-1} / (1-rho^k) on {1..k}
///   Logarithmic(q)                      P(j) = -q^j / (j ln(1-q)) on {1,2,...}
struct JumpLaw {
  JumpKind kind = JumpKind::Exponential;
  double eta = 1.0;
  double beta = 1.0;
  double nu = 0.0;
  BernsteinDescriptor g{};
  int k = 1;
  double rho = 0.0;
  double q = 0.5;

  static JumpLaw exponential(double eta) {
    check_rate(eta);
    JumpLaw law;
    law.kind = JumpKind::Exponential;
    law.eta = eta;
    return law;
  }
  static JumpLaw mittag_leffler(double beta, double eta) {
    check_rate(eta);
    check_beta(beta);
    JumpLaw law;
    law.kind = JumpKind::MittagLeffler;
    law.beta = beta;
    law.eta = eta;
    return law;
  }
  static JumpLaw tempered_mittag_leffler(double beta, double eta, double nu) {
    check_rate(eta);
    check_beta(beta);
    if (!(nu >= 0.0)) throw std::invalid_argument("tempered Mittag-Leffler: nu must be >= 0");
    JumpLaw law;
    law.kind = JumpKind::TemperedMittagLeffler;
    law.beta = beta;
    law.eta = eta;
    law.nu = nu;
    return law;
  }
  static JumpLaw bernstein_type(const BernsteinDescriptor& g, double eta) {
    check_rate(eta);
    JumpLaw law;
    law.kind = JumpKind::BernsteinType;
    law.g = g;
    law.eta = eta;
    return law;
  }
  static JumpLaw discrete_uniform(int k) {
    check_k(k);
    JumpLaw law;
    law.kind = JumpKind::DiscreteUniform;
    law.k = k;
    return law;
  }
  static JumpLaw truncated_geometric(double rho, int k) {
    check_k(k);
    if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("truncated geometric: rho in [0,1)");
    JumpLaw law;
    law.kind = JumpKind::TruncatedGeometric;
    law.rho = rho;
    law.k = k;
    return law;
  }
  static JumpLaw logarithmic(double q) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("logarithmic: q in (0,1)");
    JumpLaw law;
    law.kind = JumpKind::Logarithmic;
    law.q = q;
    return law;
  }
  static JumpLaw symmetric_sign() {
    JumpLaw law;
    law.kind = JumpKind::SymmetricSign;
    return law;
  }

  bool discrete() const noexcept {
    return kind == JumpKind::DiscreteUniform || kind == JumpKind::TruncatedGeometric ||
           kind == JumpKind::Logarithmic || kind == JumpKind::SymmetricSign;
  }

  /// Largest atom of a bounded discrete law, or -1 when unbounded.
  int max_support() const noexcept {
    switch (kind) {
      case JumpKind::DiscreteUniform:
      case JumpKind::TruncatedGeometric:
        return k;
      case JumpKind::SymmetricSign:
        return 1;
      default:
        return -1;
    }
  }

  /// P(X = j) for discrete laws.
  double pmf(int j) const {
    switch (kind) {
      case JumpKind::DiscreteUniform:
        return (j >= 1 && j <= k) ? 1.0 / k : 0.0;
      case JumpKind::TruncatedGeometric:
        if (j < 1 || j > k) return 0.0;
        return (1.0 - rho) * std::pow(rho, j - 1) / (1.0 - std::pow(rho, k));
      case JumpKind::Logarithmic:
        if (j < 1) return 0.0;
        return -std::pow(q, j) / (j * std::log1p(-q));
      case JumpKind::SymmetricSign:
        return (j == 1 || j == -1) ? 0.5 : 0.0;
      default:
        throw std::logic_error("pmf requested for a continuous jump law");
    }
  }

  std::string name() const {
    switch (kind) {
      case JumpKind::Exponential: return "exponential";
      case JumpKind::MittagLeffler: return "mittag_leffler";
      case JumpKind::TemperedMittagLeffler: return "tempered_mittag_leffler";
      case JumpKind::BernsteinType: return "bernstein";
      case JumpKind::DiscreteUniform: return "discrete_uniform";
      case JumpKind::TruncatedGeometric: return "truncated_geometric";
      case JumpKind::Logarithmic: return "logarithmic";
      case JumpKind::SymmetricSign: return "symmetric_sign";
    }
    return "?";
  }

 private:
  static void check_rate(double eta) {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("jump law: eta must be > 0");
  }
  static void check_beta(double beta) {
    if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("jump law: beta must lie in (0,1]");
  }
  static void check_k(int k) {
    if (k < 1) throw std::invalid_argument("jump law: k must be a positive integer");
  }
};

namespace jumps {

/// One draw from the law. Mittag-Leffler-type laws are drawn as a
/// (tempered) stable subordinator, or D_g, evaluated at an Exp(eta) time.
inline double sample_jump(const JumpLaw& law, RngStream& rng) {
  switch (law.kind) {
    case JumpKind::Exponential:
      return rng.exponential() / law.eta;
    case JumpKind::MittagLeffler: {
      const double tau = rng.exponential() / law.eta;
      if (law.beta == 1.0) return tau;
      return std::pow(tau, 1.0 / law.beta) * subordinators::sample_standard_stable(law.beta, rng);
    }
    case JumpKind::TemperedMittagLeffler: {
      const double tau = rng.exponential() / law.eta;
      if (law.beta == 1.0) return tau;
      return subordinators::sample_tempered_stable_increment(law.beta, law.nu, tau, rng);
    }
    case JumpKind::BernsteinType: {
      const double tau = rng.exponential() / law.eta;
      return subordinators::sample_increment(law.g, tau, rng);
    }
    case JumpKind::DiscreteUniform:
      return static_cast<double>(rng.uniform_int(1, law.k));
    case JumpKind::TruncatedGeometric: {
      double u = rng.uniform();
      for (int j = 1; j < law.k; ++j) {
        u -= law.pmf(j);
        if (u <= 0.0) return j;
      }
      return law.k;
    }
    case JumpKind::Logarithmic: {
      // Sequential inversion of the log-series cdf.
      double u = rng.uniform();
      double p = -law.q / std::log1p(-law.q);
      int j = 1;
      while (u > p && j < 100'000'000) {
        u -= p;
        p *= law.q * j / (j + 1.0);
        ++j;
      }
      return j;
    }
    case JumpKind::SymmetricSign:
      return rng.uniform() < 0.5 ? -1.0 : 1.0;
  }
  return 0.0;
}

/// E[exp(-s X)].
inline double jump_lt(const JumpLaw& law, double s) {
  if (!(s >= 0.0)) throw std::domain_error("jump_lt: s must be >= 0");
  if (s == 0.0) return 1.0;
  switch (law.kind) {
    case JumpKind::Exponential:
      return law.eta / (law.eta + s);
    case JumpKind::MittagLeffler:
      return law.eta / (std::pow(s, law.beta) + law.eta);
    case JumpKind::TemperedMittagLeffler: {
      const auto tilt = BernsteinDescriptor{BernsteinKind::TemperedStable, law.beta, law.nu, 1.0, 1.0};
      const double g = law.beta == 1.0 ? s : specfun::bernstein_eval(tilt, s);
      return law.eta / (law.eta + g);
    }
    case JumpKind::BernsteinType:
      return law.eta / (specfun::bernstein_eval(law.g, s) + law.eta);
    case JumpKind::DiscreteUniform:
    case JumpKind::TruncatedGeometric: {
      double acc = 0.0;
      for (int j = 1; j <= law.k; ++j) acc += law.pmf(j) * std::exp(-s * j);
      return acc;
    }
    case JumpKind::Logarithmic:
      return std::log1p(-law.q * std::exp(-s)) / std::log1p(-law.q);
    case JumpKind::SymmetricSign:
      return std::cosh(s);
  }
  return 0.0;
}

struct JumpMoments {
  double mean = 0.0;
  double second_moment = 0.0;
  bool mean_infinite = false;
  bool second_infinite = false;

  double variance() const { return second_moment - mean * mean; }
};

namespace detail {
// Moments of a law with LT eta / (eta + g(s)) from g'(0) and g''(0):
// E[X] = g'(0)/eta, E[X^2] = 2 (g'(0)/eta)^2 - g''(0)/eta.
inline JumpMoments moments_from_exponent(double g1, double g2, double eta) {
  JumpMoments m;
  if (!std::isfinite(g1)) {
    m.mean = m.second_moment = std::numeric_limits<double>::infinity();
    m.mean_infinite = m.second_infinite = true;
    return m;
  }
  m.mean = g1 / eta;
  m.second_moment = 2.0 * m.mean * m.mean - g2 / eta;
  return m;
}

inline std::pair<double, double> exponent_derivatives_at_zero(const BernsteinDescriptor& g) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (g.kind) {
    case BernsteinKind::Stable:
      return {inf, -inf};
    case BernsteinKind::TemperedStable:
      if (g.mu == 0.0) return {inf, -inf};
      return {g.alpha * std::pow(g.mu, g.alpha - 1.0),
              g.alpha * (g.alpha - 1.0) * std::pow(g.mu, g.alpha - 2.0)};
    case BernsteinKind::InverseGaussian:
      return {g.delta / g.gamma, -g.delta / (g.gamma * g.gamma * g.gamma)};
  }
  return {inf, -inf};
}
}  // namespace detail

/// First two moments; heavy-tailed laws report infinite flags instead of values.
inline JumpMoments jump_moments(const JumpLaw& law) {
  switch (law.kind) {
    case JumpKind::Exponential:
      return {1.0 / law.eta, 2.0 / (law.eta * law.eta), false, false};
    case JumpKind::MittagLeffler:
      if (law.beta == 1.0) return {1.0 / law.eta, 2.0 / (law.eta * law.eta), false, false};
      return detail::moments_from_exponent(std::numeric_limits<double>::infinity(), 0.0, law.eta);
    case JumpKind::TemperedMittagLeffler: {
      if (law.beta == 1.0) return {1.0 / law.eta, 2.0 / (law.eta * law.eta), false, false};
      const auto tilt = BernsteinDescriptor{BernsteinKind::TemperedStable, law.beta, law.nu, 1.0, 1.0};
      const auto [g1, g2] = detail::exponent_derivatives_at_zero(tilt);
      return detail::moments_from_exponent(g1, g2, law.eta);
    }
    case JumpKind::BernsteinType: {
      const auto [g1, g2] = detail::exponent_derivatives_at_zero(law.g);
      return detail::moments_from_exponent(g1, g2, law.eta);
    }
    case JumpKind::DiscreteUniform: {
      const double k = law.k;
      return {(k + 1.0) / 2.0, (k + 1.0) * (2.0 * k + 1.0) / 6.0, false, false};
    }
    case JumpKind::TruncatedGeometric: {
      JumpMoments m;
      for (int j = 1; j <= law.k; ++j) {
        m.mean += j * law.pmf(j);
        m.second_moment += static_cast<double>(j) * j * law.pmf(j);
      }
      return m;
    }
    case JumpKind::Logarithmic: {
      const double l = std::log1p(-law.q);
      const double q = law.q;
      return {-q / ((1.0 - q) * l), -q / ((1.0 - q) * (1.0 - q) * l), false, false};
    }
    case JumpKind::SymmetricSign:
      return {0.0, 1.0, false, false};
  }
  return {};
}

}  // namespace jumps
}  // namespace gfcpp
