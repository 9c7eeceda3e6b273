#pragma once

// Bernstein functions of the three driftless subordinator families, their
// Levy tails, the Mittag-Leffler series, incomplete gamma functions and the
// mean of the inverse subordinator.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "gfcpp/error.hpp"

namespace gfcpp {

enum class BernsteinKind { Stable, TemperedStable, InverseGaussian };

/// Parameter record selecting one of the three Laplace exponents
///   Stable:          f(s) = s^alpha
///   TemperedStable:  f(s) = (s + mu)^alpha - mu^alpha
///   InverseGaussian: f(s) = delta (sqrt(2 s + gamma^2) - gamma)
/// Construct through the named factories; they validate parameter ranges.
struct BernsteinDescriptor {
  BernsteinKind kind = BernsteinKind::Stable;
  double alpha = 0.5;
  double mu = 0.0;
  double delta = 1.0;
  double gamma = 1.0;

  static BernsteinDescriptor stable(double alpha) {
    check_alpha(alpha);
    return {BernsteinKind::Stable, alpha, 0.0, 1.0, 1.0};
  }

  static BernsteinDescriptor tempered_stable(double alpha, double mu) {
    check_alpha(alpha);
    if (!(mu >= 0.0) || !std::isfinite(mu))
      throw std::invalid_argument("tempered stable: mu must be finite and >= 0");
    return {BernsteinKind::TemperedStable, alpha, mu, 1.0, 1.0};
  }

  static BernsteinDescriptor inverse_gaussian(double delta, double gamma) {
    if (!(delta > 0.0) || !std::isfinite(delta))
      throw std::invalid_argument("inverse Gaussian: delta must be > 0");
    if (!(gamma > 0.0) || !std::isfinite(gamma))
      throw std::invalid_argument("inverse Gaussian: gamma must be > 0");
    return {BernsteinKind::InverseGaussian, 0.5, 0.0, delta, gamma};
  }

  /// Exponent p of the small-s singularity nu_bar(s) ~ s^{-p}.
  double tail_exponent() const noexcept {
    return kind == BernsteinKind::InverseGaussian ? 0.5 : alpha;
  }

  /// f'(0); infinite for the pure stable family.
  double mean_rate() const {
    switch (kind) {
      case BernsteinKind::Stable:
        return std::numeric_limits<double>::infinity();
      case BernsteinKind::TemperedStable:
        return mu > 0.0 ? alpha * std::pow(mu, alpha - 1.0)
                        : std::numeric_limits<double>::infinity();
      case BernsteinKind::InverseGaussian:
        return delta / gamma;
    }
    return 0.0;
  }

  std::string name() const {
    switch (kind) {
      case BernsteinKind::Stable: return "stable";
      case BernsteinKind::TemperedStable: return "tempered_stable";
      case BernsteinKind::InverseGaussian: return "inverse_gaussian";
    }
    return "?";
  }

  friend bool operator==(const BernsteinDescriptor&, const BernsteinDescriptor&) = default;

 private:
  static void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
      throw std::invalid_argument("alpha must lie in (0,1), got " + std::to_string(alpha));
  }
};

namespace specfun {

inline double bernstein_eval(const BernsteinDescriptor& d, double s) {
  if (!(s >= 0.0)) throw std::domain_error("bernstein_eval: s must be >= 0");
  switch (d.kind) {
    case BernsteinKind::Stable:
      return std::pow(s, d.alpha);
    case BernsteinKind::TemperedStable:
      if (d.mu == 0.0) return std::pow(s, d.alpha);
      // expm1 form keeps precision for s << mu
      return std::pow(d.mu, d.alpha) * std::expm1(d.alpha * std::log1p(s / d.mu));
    case BernsteinKind::InverseGaussian: {
      const double g2 = d.gamma * d.gamma;
      // delta (sqrt(2s+g^2) - g) rewritten without cancellation
      return d.delta * 2.0 * s / (std::sqrt(2.0 * s + g2) + d.gamma);
    }
  }
  return 0.0;
}

/// Principal-branch continuation of f to complex s (used by Talbot inversion).
inline std::complex<double> bernstein_eval(const BernsteinDescriptor& d, std::complex<double> s) {
  switch (d.kind) {
    case BernsteinKind::Stable:
      return std::pow(s, d.alpha);
    case BernsteinKind::TemperedStable:
      return std::pow(s + d.mu, d.alpha) - std::pow(d.mu, d.alpha);
    case BernsteinKind::InverseGaussian:
      return d.delta * 2.0 * s / (std::sqrt(2.0 * s + d.gamma * d.gamma) + d.gamma);
  }
  return {};
}

/// Series arguments beyond this magnitude are refused.
inline constexpr double kMittagLefflerMaxArg = 10.0;

/// E_{a,b}(z) = sum_n z^n / Gamma(a n + b) for a in (0,1], b > 0, |z| <= 10.
///
/// Summation stops once the terms are decreasing and the geometric bound on
/// the remainder is below `tol`. The result is certified to `tol` absolute
/// (relative when |E| > 1); when cancellation among large alternating terms
/// makes that impossible in double precision a DivergenceError is thrown.
inline double mittag_leffler(double a, double b, double z, double tol = 1e-12) {
  if (!(a > 0.0 && a <= 1.0)) throw std::domain_error("mittag_leffler: a must lie in (0,1]");
  if (!(b > 0.0)) throw std::domain_error("mittag_leffler: b must be > 0");
  if (!std::isfinite(z) || std::abs(z) > kMittagLefflerMaxArg)
    throw DivergenceError("mittag_leffler: |z| exceeds the series bound " +
                          std::to_string(kMittagLefflerMaxArg));
  if (z == 0.0) return 1.0 / std::tgamma(b);

  constexpr int kMaxTerms = 5000;
  const double log_abs_z = std::log(std::abs(z));
  double sum = 0.0;
  double max_term = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int n = 0; n < kMaxTerms; ++n) {
    const double mag = std::exp(n * log_abs_z - std::lgamma(a * n + b));
    const double term = (z < 0.0 && (n & 1)) ? -mag : mag;
    sum += term;
    max_term = std::max(max_term, mag);
    const double ratio = mag / prev;
    prev = mag;
    if (n > 0 && ratio < 1.0) {
      const double remainder = mag * ratio / (1.0 - ratio);
      if (remainder < 0.1 * tol * std::max(1.0, std::abs(sum))) {
        converged = true;
        break;
      }
    }
  }
  if (!converged) throw DivergenceError("mittag_leffler: series did not converge");
  const double roundoff = 8.0 * std::numeric_limits<double>::epsilon() * max_term;
  if (roundoff > tol * std::max(1.0, std::abs(sum)))
    throw DivergenceError("mittag_leffler: cancellation prevents certifying the tolerance at z=" +
                          std::to_string(z));
  return sum;
}

/// gamma(a; x) = int_0^x u^{a-1} e^{-u} du.
inline double incomplete_gamma_lower(double a, double x) {
  if (!(a > 0.0)) throw std::domain_error("incomplete_gamma_lower: a must be > 0");
  if (!(x >= 0.0)) throw std::domain_error("incomplete_gamma_lower: x must be >= 0");
  if (x == 0.0) return 0.0;
  return boost::math::tgamma_lower(a, x);
}

/// Gamma(a; x) = int_x^inf u^{a-1} e^{-u} du.
inline double incomplete_gamma_upper(double a, double x) {
  if (!(a > 0.0)) throw std::domain_error("incomplete_gamma_upper: a must be > 0");
  if (!(x >= 0.0)) throw std::domain_error("incomplete_gamma_upper: x must be >= 0");
  if (x == 0.0) return std::tgamma(a);
  return boost::math::tgamma(a, x);
}

/// Tail nu_bar(s) = nu(s, inf) of the Levy measure of a descriptor.
struct LevyTail {
  BernsteinDescriptor descriptor;

  /// s^p nu_bar(s), bounded as s -> 0 (p = descriptor.tail_exponent()).
  double scaled(double s) const {
    const auto& d = descriptor;
    switch (d.kind) {
      case BernsteinKind::Stable:
        return 1.0 / std::tgamma(1.0 - d.alpha);
      case BernsteinKind::TemperedStable: {
        if (d.mu == 0.0 || s == 0.0) return 1.0 / std::tgamma(1.0 - d.alpha);
        // (alpha/Gamma(1-alpha)) int_s^inf e^{-mu x} x^{-1-alpha} dx after
        // x = s w^{-1/alpha}, which absorbs the power singularity.
        const double ms = d.mu * s;
        const double inv_alpha = 1.0 / d.alpha;
        auto integrand = [ms, inv_alpha](double w) { return std::exp(-ms * std::pow(w, -inv_alpha)); };
        const double value = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(
            integrand, 0.0, 1.0, 30, 1e-10);
        return value / std::tgamma(1.0 - d.alpha);
      }
      case BernsteinKind::InverseGaussian: {
        const double g2 = d.gamma * d.gamma;
        const double x = 0.5 * g2 * s;
        const double upper = x == 0.0 ? std::sqrt(std::numbers::pi) : boost::math::tgamma(0.5, x);
        return std::sqrt(2.0 / std::numbers::pi) * d.delta * std::exp(-x) -
               d.delta * d.gamma / std::sqrt(std::numbers::pi) * std::sqrt(s) * upper;
      }
    }
    return 0.0;
  }

  double operator()(double s) const {
    if (!(s > 0.0)) throw std::domain_error("levy tail: s must be > 0");
    return std::pow(s, -descriptor.tail_exponent()) * scaled(s);
  }
};

inline double levy_tail_eval(const LevyTail& tail, double s) { return tail(s); }

/// Fixed-Talbot numerical inverse Laplace transform of `transform` at t > 0.
template <class Transform>
double talbot_inverse(Transform&& transform, double t, int nodes = 32) {
  if (!(t > 0.0)) throw std::domain_error("talbot_inverse: t must be > 0");
  using cplx = std::complex<double>;
  const double r = 2.0 * nodes / (5.0 * t);
  double acc = 0.5 * std::real(transform(cplx(r, 0.0))) * std::exp(r * t);
  for (int k = 1; k < nodes; ++k) {
    const double theta = k * std::numbers::pi / nodes;
    const double cot = std::cos(theta) / std::sin(theta);
    const cplx s(r * theta * cot, r * theta);
    const double sigma = theta + (theta * cot - 1.0) * cot;
    acc += std::real(std::exp(t * s) * transform(s) * cplx(1.0, sigma));
  }
  return r / nodes * acc;
}

/// E[E_f(t)], the mean first-passage time of the subordinator above t.
///
/// Stable: t^alpha / Gamma(1+alpha). Tempered stable (mu > 0):
///   mu^{-alpha} sum_{n>=0} gamma(alpha(n+1); mu t) / Gamma(alpha(n+1)),
/// truncated once a term drops below 1e-10 of the running sum (at most 1e4
/// terms). Inverse Gaussian: Talbot inversion of 1/(s f(s)).
inline double mean_inverse_subordinator(const BernsteinDescriptor& d, double t) {
  if (!(t >= 0.0)) throw std::domain_error("mean_inverse_subordinator: t must be >= 0");
  if (t == 0.0) return 0.0;
  if (d.kind == BernsteinKind::Stable ||
      (d.kind == BernsteinKind::TemperedStable && d.mu == 0.0))
    return std::pow(t, d.alpha) / std::tgamma(1.0 + d.alpha);

  if (d.kind == BernsteinKind::TemperedStable) {
    constexpr int kMaxTerms = 10000;
    const double x = d.mu * t;
    double sum = 0.0;
    for (int n = 0; n < kMaxTerms; ++n) {
      const double term = boost::math::gamma_p(d.alpha * (n + 1), x);
      sum += term;
      if (term < 1e-10 * sum) return sum * std::pow(d.mu, -d.alpha);
    }
    throw TruncationError("mean_inverse_subordinator: series not converged after 1e4 terms (mu t = " +
                          std::to_string(x) + ")");
  }

  return talbot_inverse(
      [&d](std::complex<double> s) { return 1.0 / (s * bernstein_eval(d, s)); }, t);
}

/// E[exp(-rate E_f(t))] via Talbot inversion of f(s) / (s (rate + f(s))).
/// This is the probability of no arrival by t for a time-changed Poisson
/// process with intensity `rate`.
inline double laplace_inverse_subordinator(const BernsteinDescriptor& d, double rate, double t) {
  if (!(t >= 0.0)) throw std::domain_error("laplace_inverse_subordinator: t must be >= 0");
  if (t == 0.0) return 1.0;
  return talbot_inverse(
      [&d, rate](std::complex<double> s) {
        const auto f = bernstein_eval(d, s);
        return f / (s * (rate + f));
      },
      t);
}

}  // namespace specfun
}  // namespace gfcpp
