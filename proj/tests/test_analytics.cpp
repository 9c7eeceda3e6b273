#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "gfcpp/analytics.hpp"

using namespace gfcpp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Second moment of E_f(t) by Laplace inversion of 2 / (s f(s)^2).
double clock_second_moment(const BernsteinDescriptor& d, double t) {
  return specfun::talbot_inverse(
      [&](std::complex<double> s) {
        const auto f = specfun::bernstein_eval(d, s);
        return 2.0 / (s * f * f);
      },
      t);
}

// Mittag-Leffler variates by the Kozubowski-Rachev mixture formula.
double ml_variate(double beta, double eta, RngStream& rng) {
  const double pi = std::numbers::pi;
  const double u = rng.uniform(), v = rng.uniform();
  const double mix = std::sin(beta * pi) / std::tan(beta * pi * v) - std::cos(beta * pi);
  return std::pow(eta, -1.0 / beta) * -std::log(u) * std::pow(mix, 1.0 / beta);
}

}  // namespace

TEST_CASE("log-log fit recovers a power law") {
  const auto x = analytics::geometric_grid(2.0, 200.0, 12);
  CHECK(x.front() == 2.0);
  CHECK(x.back() == 200.0);
  CHECK(x.size() == 12);
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -0.5));
  const auto fit = analytics::loglog_fit(x, y);
  CHECK_THAT(fit.slope, WithinAbs(-0.5, 1e-12));
  CHECK_THAT(fit.intercept, WithinAbs(std::log(3.0), 1e-12));
  CHECK(fit.points == 12);

  y[3] = -1.0;
  y[5] = 0.0;
  CHECK(analytics::loglog_fit(x, y).points == 10);
  const std::vector<double> few_x{1, 2, 3, 4, 5}, few_y{1, -1, 2, 0, 3};
  CHECK_THROWS_AS(analytics::loglog_fit(few_x, few_y), InsufficientData);
  CHECK_THROWS_AS(analytics::geometric_grid(0.0, 1.0, 3), std::invalid_argument);
}

TEST_CASE("correlation of paired samples") {
  const std::vector<double> a{1, 2, 3, 4}, b{2, 4, 6, 8}, c{4, 3, 2, 1}, k{1, 1, 1, 1};
  CHECK_THAT(analytics::correlation(a, b), WithinAbs(1.0, 1e-15));
  CHECK_THAT(analytics::correlation(a, c), WithinAbs(-1.0, 1e-15));
  CHECK(std::isnan(analytics::correlation(a, k)));
}

TEST_CASE("kolmogorov tail and two-sample statistic") {
  CHECK_THAT(analytics::kolmogorov_tail(1.36), WithinAbs(0.0494, 5e-4));
  CHECK_THAT(analytics::kolmogorov_tail(1.0), WithinAbs(0.26999967, 1e-7));
  CHECK(analytics::kolmogorov_tail(0.0) == 1.0);
  const std::vector<double> a{1, 2, 3, 4}, b{1, 2, 3, 4}, c{5, 6, 7, 8};
  CHECK(analytics::ks_two_sample(a, b).statistic == 0.0);
  CHECK(analytics::ks_two_sample(a, c).statistic == 1.0);
  CHECK_THROWS_AS(analytics::ks_two_sample(a, std::vector<double>{}), std::invalid_argument);

  RngStream rng(51, 0);
  std::vector<double> x(5000), y(5000), z(5000);
  for (auto& v : x) v = rng.normal();
  for (auto& v : y) v = rng.normal();
  for (auto& v : z) v = rng.normal() + 0.2;
  CHECK(analytics::ks_two_sample(x, y).p_value > 0.01);
  CHECK(analytics::ks_two_sample(x, z).p_value < 1e-6);
}

TEST_CASE("mittag-leffler jump sampler matches an independent mixture sampler") {
  for (double beta : {0.6, 0.9}) {
    RngStream a(52, 0), b(52, 1);
    std::vector<double> x(20000), y(20000);
    for (auto& v : x) v = jumps::sample_jump(JumpLaw::mittag_leffler(beta, 2.0), a);
    for (auto& v : y) v = ml_variate(beta, 2.0, b);
    INFO("beta " << beta);
    CHECK(analytics::ks_two_sample(x, y).p_value > 0.01);
  }
}

TEST_CASE("empirical laplace transform of exponential draws") {
  RngStream rng(53, 0);
  std::vector<double> x(50000);
  for (auto& v : x) v = rng.exponential() / 2.0;
  const std::vector<double> s{0.0, 1.0, 4.0};
  const auto lt = analytics::empirical_laplace(x, s);
  CHECK(lt[0].value == 1.0);
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(std::abs(lt[i].value - 2.0 / (2.0 + s[i])) < 4.0 * lt[i].se);
  CHECK_THROWS_AS(analytics::empirical_laplace(std::vector<double>{-1.0}, s), std::domain_error);
}

TEST_CASE("grouped jackknife reproduces the standard error of a mean") {
  RngStream rng(54, 0);
  std::vector<double> x(10000);
  for (auto& v : x) v = 3.0 * rng.normal();
  const auto e = analytics::detail::grouped_jackknife(
      x, x, [](const analytics::detail::PairSums& p) { return p.mean_y(); });
  CHECK_THAT(e.se, WithinRel(3.0 / 100.0, 0.15));
}

TEST_CASE("poisson arrivals give the classical compound Poisson moments") {
  const auto spec = ProcessSpec::poisson(3.0, JumpLaw::exponential(2.0));
  const auto r = analytics::analytic_moments(spec, 2.0, 1.0);
  CHECK_THAT(r.mean.analytic, WithinAbs(3.0, 1e-14));
  CHECK_THAT(r.variance.analytic, WithinAbs(3.0, 1e-14));
  CHECK_THAT(r.covariance->analytic, WithinAbs(1.5, 1e-14));
  const auto checked = analytics::moment_check(spec, 2.0, 1.0, 20000);
  CHECK(checked.max_abs_z() < 4.0);
}

TEST_CASE("stable clock variance closed form agrees with Laplace inversion") {
  for (double alpha : {0.4, 0.9})
    for (double t : {0.5, 2.0}) {
      const auto spec = ProcessSpec::time_changed(1.0, BernsteinDescriptor::stable(alpha), JumpLaw::exponential(1.0));
      const auto cm = analytics::clock_moments(spec, t, std::nullopt);
      const double m2 = clock_second_moment(spec.clock, t);
      CHECK_THAT(cm.var_t.value, WithinRel(m2 - cm.mean_t * cm.mean_t, 1e-8));
    }
}

TEST_CASE("clock variance by Monte Carlo agrees with Laplace inversion") {
  for (const auto& d : {BernsteinDescriptor::tempered_stable(0.7, 2.0), BernsteinDescriptor::inverse_gaussian(0.3, 1.0)}) {
    const auto spec = ProcessSpec::time_changed(1.0, d, JumpLaw::exponential(1.0));
    analytics::ClockMomentOptions opts;
    opts.draws = 40000;
    const double t = 1.0;
    const auto cm = analytics::clock_moments(spec, t, std::nullopt, opts);
    const double exact = clock_second_moment(d, t) - cm.mean_t * cm.mean_t;
    // grid first passage overshoots by at most one operational step
    const double dr = subordinators::operational_step(d, t, opts.operational_steps);
    INFO(d.name() << " mc " << cm.var_t.value << " +- " << cm.var_t.se << " exact " << exact);
    CHECK(std::abs(cm.var_t.value - exact) <= 4.0 * cm.var_t.se + 2.0 * dr * cm.mean_t + dr * dr);
  }
}

TEST_CASE("moment checks reject infinite jump moments and small samples") {
  const auto spec = ProcessSpec::time_changed(1.0, BernsteinDescriptor::stable(0.5), JumpLaw::mittag_leffler(0.7, 1.0));
  CHECK_THROWS_AS(analytics::analytic_moments(spec, 1.0), MomentUndefined);
  CHECK_THROWS_AS(analytics::empirical_moments(std::vector<double>(50, 1.0)), InsufficientData);
  const auto flat = analytics::empirical_moments(std::vector<double>(200, 1.0));
  CHECK(flat.variance.empirical == 0.0);
  CHECK(flat.warnings.size() == 1);
}

TEST_CASE("time-changed moments match simulation") {
  const auto spec = ProcessSpec::time_changed(2.0, BernsteinDescriptor::tempered_stable(0.7, 2.0),
                                              JumpLaw::truncated_geometric(0.5, 3), 3);
  processes::MonteCarloOptions mc;
  mc.seed = 55;
  mc.passage.operational_steps = 2000;
  analytics::ClockMomentOptions clock;
  clock.draws = 40000;
  const auto r = analytics::moment_check(spec, 1.0, 0.5, 20000, mc, clock);
  INFO(r.to_json().dump());
  CHECK(r.max_abs_z() < 4.0);
}

TEST_CASE("martingale statistic on synthetic samples") {
  const auto spec = ProcessSpec::poisson(2.0, JumpLaw::exponential(1.0));
  analytics::PathSamples p;
  p.times = {0.5, 1.0};
  p.values = {{1.0, 2.0, 0.0}, {3.0, 2.0, 1.0}};
  p.clock = {{0.5, 0.5, 0.5}, {1.0, 1.0, 1.0}};
  const std::pair<double, double> pair{0.5, 1.0};
  const auto r = analytics::martingale_from_samples(spec, p, std::span(&pair, 1));
  CHECK_THAT(r.rows[0].mean, WithinAbs(0.0, 1e-15));
  const auto rd = analytics::martingale_from_samples(spec, p, std::span(&pair, 1), true);
  CHECK(rd.dropped_jump_mean);
}

TEST_CASE("compensated compound Poisson increments are centred") {
  const auto spec = ProcessSpec::poisson(4.0, JumpLaw::exponential(2.0));
  const std::vector<std::pair<double, double>> pairs{{0.5, 1.0}, {1.0, 2.0}};
  CHECK(analytics::martingale_test(spec, pairs, 20000).max_abs_z() < 4.0);
  CHECK(analytics::martingale_test(spec, pairs, 20000, {}, true).max_abs_z() > 4.0);
  const std::vector<std::pair<double, double>> bad{{1.0, 0.5}};
  CHECK_THROWS_AS(analytics::martingale_test(spec, bad, 10), std::invalid_argument);
}

TEST_CASE("double Laplace transform of the inverse subordinator") {
  const auto d = BernsteinDescriptor::tempered_stable(0.7, 2.0);
  const std::vector<double> ys{0.5, 2.0}, ss{1.0};
  analytics::DoubleTransformOptions dt;
  dt.dr = 5e-3;
  const auto pts = analytics::inverse_double_laplace(d, ys, ss, 3000, {}, dt);
  REQUIRE(pts.size() == 2);
  for (const auto& p : pts) {
    INFO("y=" << p.y << " est " << p.estimate.value << " +- " << p.estimate.se << " exact " << p.exact);
    CHECK(p.passed());
  }
  CHECK_THROWS_AS(analytics::inverse_double_laplace(d, ys, std::vector<double>{0.0}, 10), std::domain_error);
}

TEST_CASE("degenerate samples and zero-length increments") {
  const auto lt = analytics::empirical_laplace(std::vector<double>(10, 1.5), std::vector<double>{0.0, 2.0});
  CHECK(lt[0].value == 1.0);
  CHECK_THAT(lt[1].value, WithinRel(std::exp(-3.0), 1e-14));

  const auto spec = ProcessSpec::poisson(2.0, JumpLaw::exponential(1.0));
  analytics::PathSamples p;
  p.times = {1.0};
  p.values = {{1.0, 2.0, 0.5}};
  p.clock = {{1.0, 1.0, 1.0}};
  const std::pair<double, double> same{1.0, 1.0};
  const auto r = analytics::martingale_from_samples(spec, p, std::span(&same, 1));
  CHECK(r.rows[0].mean == 0.0);
}

TEST_CASE("unit-index stable representation reproduces exponential jumps") {
  const auto base = ProcessSpec::time_changed(4.0, BernsteinDescriptor::stable(0.9), JumpLaw::exponential(2.0));
  processes::MonteCarloOptions mc;
  mc.seed = 56;
  mc.passage.operational_steps = 1000;
  const auto r = analytics::identity_check(processes::Representation::stable(1.0), base, 1.0, 5000, mc);
  CHECK(r.ks.p_value > 0.01);
}
