#pragma once

// Generalized Caputo-Djrbashian and Riemann-Liouville derivatives with
// Levy-tail kernels, and residual checks of the pmf differential-difference
// equations of time-changed compound Poisson processes.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "json.hpp"

#include "gfcpp/parallel.hpp"
#include "gfcpp/processes.hpp"
#include "gfcpp/specfun.hpp"
#include "gfcpp/subordinators.hpp"

namespace gfcpp {
namespace fde {

/// Exact kernel cell integrals for piecewise-linear product integration on
/// a uniform grid with step h:
///   W_j = int_{jh}^{(j+1)h} nu_bar(s) ds
///   V_j = int_{jh}^{(j+1)h} ((s - jh)/h) nu_bar(s) ds
class KernelQuadrature {
 public:
  KernelQuadrature(const BernsteinDescriptor& d, double h, std::size_t cells)
      : descriptor_(d), tail_{d}, h_(h) {
    if (!(h > 0.0)) throw std::invalid_argument("KernelQuadrature: h must be > 0");
    if (cells < 1) throw std::invalid_argument("KernelQuadrature: need at least one cell");
    weights_.resize(cells);
    moments_.resize(cells);
    for (std::size_t j = 0; j < cells; ++j) compute_cell(j);
  }

  const BernsteinDescriptor& descriptor() const noexcept { return descriptor_; }
  double h() const noexcept { return h_; }
  std::size_t cells() const noexcept { return weights_.size(); }
  /// All three families are driftless.
  double drift() const noexcept { return 0.0; }

  double weight(std::size_t j) const { return weights_.at(j); }
  double first_moment(std::size_t j) const { return moments_.at(j); }
  double tail(double t) const { return tail_(t); }

 private:
  // s = u^{1/(1-p)} turns s^{-p} ds into du / (1-p), leaving the bounded
  // factor s^p nu_bar(s) = tail_.scaled(s).
  void compute_cell(std::size_t j) {
    const double p = descriptor_.tail_exponent();
    const double q = 1.0 - p;
    const double a = static_cast<double>(j) * h_;
    const double b = a + h_;
    const double ua = std::pow(a, q);
    const double ub = std::pow(b, q);
    auto w_integrand = [&](double u) { return tail_.scaled(std::pow(u, 1.0 / q)) / q; };
    auto v_integrand = [&](double u) {
      const double s = std::pow(u, 1.0 / q);
      return (s - a) / h_ * tail_.scaled(s) / q;
    };
    using gk = boost::math::quadrature::gauss_kronrod<double, 31>;
    weights_[j] = gk::integrate(w_integrand, ua, ub, 10, 1e-9);
    moments_[j] = gk::integrate(v_integrand, ua, ub, 10, 1e-9);
  }

  BernsteinDescriptor descriptor_;
  specfun::LevyTail tail_;
  double h_;
  std::vector<double> weights_;
  std::vector<double> moments_;
};

namespace detail {
inline void check_grid(std::span<const double> u, const KernelQuadrature& kq) {
  if (u.size() < 3) throw std::invalid_argument("fractional derivative: need at least 3 grid points");
  if (u.size() - 1 > kq.cells())
    throw std::invalid_argument("fractional derivative: grid longer than the kernel quadrature");
}
}  // namespace detail

/// Caputo-Djrbashian derivative int_0^t u'(t-s) nu_bar(s) ds of samples
/// u_n = u(nh). With v = u - u(0) interpolated piecewise linearly,
/// J_n = int_0^{t_n} v(t_n - s) nu_bar(s) ds is exact on the interpolant and
/// the derivative is (J_n - J_{n-1}) / h. Element 0 is NaN (undefined).
inline std::vector<double> cd_derivative(std::span<const double> u, const KernelQuadrature& kq) {
  detail::check_grid(u, kq);
  const std::size_t n_points = u.size();
  const double u0 = u[0];
  std::vector<double> j_vals(n_points, 0.0);
  for (std::size_t n = 1; n < n_points; ++n) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double w = kq.weight(j);
      const double v = kq.first_moment(j);
      acc += (w - v) * (u[n - j] - u0) + v * (u[n - j - 1] - u0);
    }
    j_vals[n] = acc;
  }
  std::vector<double> out(n_points);
  out[0] = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t n = 1; n < n_points; ++n) out[n] = (j_vals[n] - j_vals[n - 1]) / kq.h();
  return out;
}

/// Riemann-Liouville derivative, built as cd + nu_bar(t) u(0).
inline std::vector<double> rl_derivative(std::span<const double> u, const KernelQuadrature& kq) {
  auto out = cd_derivative(u, kq);
  for (std::size_t n = 1; n < out.size(); ++n) out[n] += kq.tail(static_cast<double>(n) * kq.h()) * u[0];
  return out;
}

enum class PmfSource { SemiAnalytic, MonteCarlo };

/// P(Y_f(t) = n) for n <= n_max on the grid t_i = i h, i = 0..steps, by
/// Talbot inversion of sum_m F^{*m}(n) f(s)/s * L^m / (L + f(s))^{m+1},
/// L = lambda * multiplier.
inline std::vector<std::vector<double>> semi_analytic_pmf(const ProcessSpec& spec, int n_max, double h,
                                                          std::size_t steps) {
  if (spec.arrival != ArrivalKind::TimeChanged)
    throw std::invalid_argument("semi_analytic_pmf: time-changed arrivals required");
  const processes::CompoundPoissonPmf conv(spec.jump, n_max);
  const double rate = spec.rate();
  std::vector<std::vector<double>> out(static_cast<std::size_t>(n_max) + 1,
                                       std::vector<double>(steps + 1, 0.0));
  for (int n = 0; n <= n_max; ++n) {
    out[n][0] = n == 0 ? 1.0 : 0.0;
    auto transform = [&](std::complex<double> s) {
      const auto f = specfun::bernstein_eval(spec.clock, s);
      const auto base = rate / (rate + f);
      std::complex<double> acc = 0.0;
      std::complex<double> power = 1.0 / (rate + f);
      for (int m = 0; m <= n; ++m) {
        const double c = conv.convolution(m, n);
        if (c != 0.0) acc += c * power;
        power *= base;
      }
      return f / s * acc;
    };
    for (std::size_t i = 1; i <= steps; ++i)
      out[n][i] = specfun::talbot_inverse(transform, static_cast<double>(i) * h);
  }
  return out;
}

struct ResidualOptions {
  double h = 1.0 / 128.0;
  /// Calendar times at which rows are reported; must be multiples of h.
  std::vector<double> report_times{0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0,
                                   1.125, 1.25, 1.375, 1.5, 1.625, 1.75, 1.875, 2.0};
  PmfSource source = PmfSource::SemiAnalytic;
  std::size_t paths = 20000;
  std::size_t batches = 40;
  /// Smooth Monte Carlo curves when SE / signal exceeds this ratio.
  double smoothing_threshold = 0.05;
  /// Half-width (grid points) of the local quadratic smoother.
  std::size_t smoothing_half_width = 4;
  processes::MonteCarloOptions mc{};
};

struct ResidualRow {
  int n = 0;
  double t = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double sigma = 0.0;
  std::string status;
};

struct ResidualReport {
  std::vector<ResidualRow> rows;
  double discretization_budget = 0.0;
  double max_abs_residual = 0.0;
  /// max |L - R| / (3 sigma + budget)
  double max_ratio = 0.0;
  bool smoothed = false;
  std::string status;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["status"] = status;
    j["discretization_budget"] = discretization_budget;
    j["max_abs_residual"] = max_abs_residual;
    j["max_ratio"] = max_ratio;
    j["smoothed"] = smoothed;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      nlohmann::ordered_json row;
      row["n"] = r.n;
      row["t"] = r.t;
      row["lhs"] = r.lhs;
      row["rhs"] = r.rhs;
      row["residual"] = r.residual;
      row["sigma"] = r.sigma;
      row["status"] = r.status;
      arr.push_back(std::move(row));
    }
    j["rows"] = std::move(arr);
    return j;
  }
};

namespace detail {

/// Right-hand side -L P(n) + L sum_{j=1}^{n} p_j P(n-j), L = lambda * multiplier.
inline double dde_rhs(const ProcessSpec& spec, const std::vector<std::vector<double>>& pmf, int n,
                      std::size_t i) {
  const double rate = spec.rate();
  double acc = -pmf[n][i];
  for (int j = 1; j <= n; ++j) acc += spec.jump.pmf(j) * pmf[n - j][i];
  return rate * acc;
}

/// Local quadratic least-squares smoother with a fixed half-width; the
/// first point is kept.
inline std::vector<double> smooth_local_quadratic(std::span<const double> y, std::size_t half_width) {
  const std::size_t n = y.size();
  std::vector<double> out(y.begin(), y.end());
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t lo = i >= half_width ? i - half_width : 0;
    const std::size_t hi = std::min(n - 1, i + half_width);
    // Normal equations for y ~ c0 + c1 x + c2 x^2 with x = k - i.
    double s[5] = {0, 0, 0, 0, 0};
    double r[3] = {0, 0, 0};
    for (std::size_t k = lo; k <= hi; ++k) {
      const double x = static_cast<double>(k) - static_cast<double>(i);
      double p = 1.0;
      for (int e = 0; e < 5; ++e) {
        s[e] += p;
        if (e < 3) r[e] += p * y[k];
        p *= x;
      }
    }
    // Cramer's rule for c0.
    const double a11 = s[0], a12 = s[1], a13 = s[2];
    const double a22 = s[2], a23 = s[3], a33 = s[4];
    const double det = a11 * (a22 * a33 - a23 * a23) - a12 * (a12 * a33 - a23 * a13) +
                       a13 * (a12 * a23 - a22 * a13);
    if (std::abs(det) < 1e-12) continue;
    const double det0 = r[0] * (a22 * a33 - a23 * a23) - a12 * (r[1] * a33 - a23 * r[2]) +
                        a13 * (r[1] * a23 - a22 * r[2]);
    out[i] = det0 / det;
  }
  return out;
}

inline std::vector<std::size_t> report_indices(const std::vector<double>& times, double h) {
  std::vector<std::size_t> idx;
  for (double t : times) {
    const double k = std::round(t / h);
    if (!(t > 0.0) || std::abs(k * h - t) > 1e-9 * std::max(1.0, t))
      throw std::invalid_argument("dde_residual: report times must be positive multiples of h");
    idx.push_back(static_cast<std::size_t>(k));
  }
  return idx;
}

/// kappa * max_t |L_h - L_{h/2}| on the n = 0 semi-analytic row, with
/// kappa = 1 / (1 - 2^{-1/2}) covering convergence orders down to 1/2.
inline double discretization_budget(const ProcessSpec& spec, double h, std::size_t steps,
                                    const std::vector<std::size_t>& report) {
  const double kappa = 1.0 / (1.0 - std::sqrt(0.5));
  const auto coarse = semi_analytic_pmf(spec, 0, h, steps);
  const auto fine = semi_analytic_pmf(spec, 0, 0.5 * h, 2 * steps);
  const KernelQuadrature kq_fine(spec.clock, 0.5 * h, 2 * steps);
  const KernelQuadrature kq_coarse(spec.clock, h, steps);
  const auto l_coarse = cd_derivative(coarse[0], kq_coarse);
  const auto l_fine = cd_derivative(fine[0], kq_fine);
  double worst = 0.0;
  for (std::size_t i : report) worst = std::max(worst, std::abs(l_coarse[i] - l_fine[2 * i]));
  return kappa * worst;
}

}  // namespace detail

/// Residuals of the pmf differential-difference system
///   D^f_t P(n, t) = -L P(n, t) + L sum_{j=1}^{n} p_j P(n - j, t)
/// for a time-changed compound Poisson process with positive integer jumps.
/// Monte Carlo uncertainty is the standard error across path batches of the
/// residual itself; a row passes when |L - R| <= 3 sigma + budget and is
/// inconclusive when 3 sigma exceeds max(|L|, |R|).
inline ResidualReport dde_residual(const ProcessSpec& spec, int n_max, const ResidualOptions& opts = {}) {
  if (spec.arrival != ArrivalKind::TimeChanged)
    throw std::invalid_argument("dde_residual: time-changed arrivals required");
  if (!spec.jump.discrete() || spec.jump.kind == JumpKind::SymmetricSign)
    throw std::invalid_argument("dde_residual: a discrete jump law on {1,2,...} is required");
  if (n_max < 0) throw std::invalid_argument("dde_residual: n_max must be >= 0");
  if (opts.report_times.empty()) throw std::invalid_argument("dde_residual: no report times");

  const double h = opts.h;
  const auto report = detail::report_indices(opts.report_times, h);
  const std::size_t steps = *std::max_element(report.begin(), report.end());
  if (steps < 2) throw std::invalid_argument("dde_residual: need at least 3 grid points");
  const KernelQuadrature kq(spec.clock, h, steps);
  const std::size_t rows = static_cast<std::size_t>(n_max) + 1;

  ResidualReport out;
  out.discretization_budget = detail::discretization_budget(spec, h, steps, report);

  // lhs/rhs means and residual sigma per (n, report index)
  std::vector<std::vector<double>> lhs(rows), rhs(rows), sigma(rows, std::vector<double>(report.size(), 0.0));

  if (opts.source == PmfSource::SemiAnalytic) {
    const auto pmf = semi_analytic_pmf(spec, n_max, h, steps);
    for (std::size_t n = 0; n < rows; ++n) {
      const auto l = cd_derivative(pmf[n], kq);
      for (std::size_t i : report) {
        lhs[n].push_back(l[i]);
        rhs[n].push_back(detail::dde_rhs(spec, pmf, static_cast<int>(n), i));
      }
    }
  } else {
    const std::size_t batches = std::max<std::size_t>(2, opts.batches);
    if (opts.paths < 2 * batches) throw std::invalid_argument("dde_residual: too few paths for the batch count");
    const processes::CompoundPoissonPmf conv(spec.jump, n_max);
    const auto grid = processes::uniform_grid(static_cast<double>(steps) * h, steps);
    const double dr = subordinators::operational_step(spec.clock, grid.back(), opts.mc.passage.operational_steps);
    const double rate = spec.rate();

    // batch_pmf[b][n][i]: batch mean of the mixture pmf
    std::vector<std::vector<std::vector<double>>> batch_pmf(
        batches, std::vector<std::vector<double>>(rows, std::vector<double>(steps + 1, 0.0)));
    parallel_for(batches, opts.mc.workers, [&](std::size_t b) {
      const std::size_t lo = opts.paths * b / batches;
      const std::size_t hi = opts.paths * (b + 1) / batches;
      auto& acc = batch_pmf[b];
      for (std::size_t p = lo; p < hi; ++p) {
        auto rng = opts.mc.stream(p);
        const auto e = subordinators::sample_inverse_on_grid(spec.clock, grid, dr, rng, opts.mc.passage.max_steps);
        for (std::size_t i = 0; i <= steps; ++i)
          for (std::size_t n = 0; n < rows; ++n) acc[n][i] += conv(static_cast<int>(n), rate * e[i]);
      }
      const double count = static_cast<double>(hi - lo);
      for (auto& row : acc)
        for (double& v : row) v /= count;
    });

    // Decide on smoothing from the pooled curves.
    double worst_ratio = 0.0;
    for (std::size_t n = 0; n < rows; ++n) {
      for (std::size_t i : report) {
        double mean = 0.0, ss = 0.0;
        for (std::size_t b = 0; b < batches; ++b) mean += batch_pmf[b][n][i];
        mean /= static_cast<double>(batches);
        for (std::size_t b = 0; b < batches; ++b) ss += (batch_pmf[b][n][i] - mean) * (batch_pmf[b][n][i] - mean);
        const double se = std::sqrt(ss / (batches - 1.0) / batches);
        if (mean > 0.0) worst_ratio = std::max(worst_ratio, se / mean);
      }
    }
    out.smoothed = worst_ratio > opts.smoothing_threshold;
    if (out.smoothed) {
      for (auto& batch : batch_pmf)
        for (auto& row : batch) row = detail::smooth_local_quadratic(row, opts.smoothing_half_width);
    }

    std::vector<std::vector<std::vector<double>>> batch_l(batches, std::vector<std::vector<double>>(rows));
    for (std::size_t b = 0; b < batches; ++b)
      for (std::size_t n = 0; n < rows; ++n) batch_l[b][n] = cd_derivative(batch_pmf[b][n], kq);

    const double nb = static_cast<double>(batches);
    for (std::size_t n = 0; n < rows; ++n) {
      for (std::size_t r = 0; r < report.size(); ++r) {
        const std::size_t i = report[r];
        double l_mean = 0.0, r_mean = 0.0;
        std::vector<double> res(batches);
        for (std::size_t b = 0; b < batches; ++b) {
          const double l = batch_l[b][n][i];
          const double rr = detail::dde_rhs(spec, batch_pmf[b], static_cast<int>(n), i);
          l_mean += l;
          r_mean += rr;
          res[b] = l - rr;
        }
        l_mean /= nb;
        r_mean /= nb;
        lhs[n].push_back(l_mean);
        rhs[n].push_back(r_mean);
        sigma[n][r] = processes::mean_with_se(res).se;
      }
    }
  }

  bool any_fail = false;
  bool any_inconclusive = false;
  for (std::size_t n = 0; n < rows; ++n) {
    for (std::size_t r = 0; r < report.size(); ++r) {
      ResidualRow row;
      row.n = static_cast<int>(n);
      row.t = static_cast<double>(report[r]) * h;
      row.lhs = lhs[n][r];
      row.rhs = rhs[n][r];
      row.residual = row.lhs - row.rhs;
      row.sigma = sigma[n][r];
      const double tol = 3.0 * row.sigma + out.discretization_budget;
      const double signal = std::max(std::abs(row.lhs), std::abs(row.rhs));
      if (3.0 * row.sigma > signal) {
        row.status = "inconclusive";
        any_inconclusive = true;
      } else if (std::abs(row.residual) <= tol) {
        row.status = "pass";
      } else {
        row.status = "fail";
        any_fail = true;
      }
      out.max_abs_residual = std::max(out.max_abs_residual, std::abs(row.residual));
      if (tol > 0.0) out.max_ratio = std::max(out.max_ratio, std::abs(row.residual) / tol);
      out.rows.push_back(std::move(row));
    }
  }
  out.status = any_fail ? "fail" : (any_inconclusive ? "inconclusive" : "pass");
  return out;
}

}  // namespace fde
}  // namespace gfcpp
