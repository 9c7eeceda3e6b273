#include <catch_amalgamated.hpp>

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <vector>

#include "gfcpp/analytics.hpp"
#include "gfcpp/error.hpp"
#include "gfcpp/parallel.hpp"
#include "gfcpp/rng.hpp"
#include "gfcpp/specfun.hpp"
#include "gfcpp/subordinators.hpp"

using namespace gfcpp;

namespace {

struct Summary {
  double mean = 0.0;
  double se = 0.0;
};

template <class F>
Summary summarize(std::size_t n, F draw) {
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = draw();
    s += x;
    s2 += x * x;
  }
  const double m = s / n;
  return {m, std::sqrt((s2 / n - m * m) / (n - 1))};
}

void check_within(const Summary& est, double exact, double z = 4.0) {
  INFO("estimate " << est.mean << " +- " << est.se << ", exact " << exact);
  CHECK(std::abs(est.mean - exact) <= z * est.se + 1e-12);
}

}  // namespace

TEST_CASE("rng streams are reproducible and distinct") {
  RngStream a(7, 3), b(7, 3), c(7, 4), d(8, 3);
  bool differs_stream = false, differs_seed = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x > 0.0);
    CHECK(x < 1.0);
    differs_stream |= x != c.uniform();
    differs_seed |= x != d.uniform();
  }
  CHECK(differs_stream);
  CHECK(differs_seed);
}

TEST_CASE("standard stable variates have Laplace transform exp(-s^alpha)") {
  for (double alpha : {0.3, 0.6, 0.9}) {
    RngStream rng(11, static_cast<std::uint64_t>(alpha * 10));
    std::vector<double> xs(100000);
    for (auto& x : xs) x = subordinators::sample_standard_stable(alpha, rng);
    for (double s : {0.5, 1.0, 2.0}) {
      std::size_t i = 0;
      const auto est = summarize(xs.size(), [&] { return std::exp(-s * xs[i++]); });
      check_within(est, std::exp(-std::pow(s, alpha)));
    }
  }
}

TEST_CASE("tempered stable increments match their Laplace transform and mean") {
  const double alpha = 0.7, mu = 2.0, dt = 0.4;
  RngStream rng(12, 0);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = subordinators::sample_tempered_stable_increment(alpha, mu, dt, rng);
  std::size_t i = 0;
  check_within(summarize(xs.size(), [&] { return xs[i++]; }), dt * alpha * std::pow(mu, alpha - 1.0));
  for (double s : {0.5, 3.0}) {
    i = 0;
    const auto est = summarize(xs.size(), [&] { return std::exp(-s * xs[i++]); });
    check_within(est, std::exp(-dt * (std::pow(s + mu, alpha) - std::pow(mu, alpha))));
  }
}

TEST_CASE("inverse gaussian increments match their Laplace transform and mean") {
  const double delta = 0.3, gamma = 1.0;
  for (double dt : {0.01, 1.0, 5.0}) {
    RngStream rng(13, static_cast<std::uint64_t>(dt * 100));
    std::vector<double> xs(100000);
    for (auto& x : xs) x = subordinators::sample_ig_increment(delta, gamma, dt, rng);
    std::size_t i = 0;
    check_within(summarize(xs.size(), [&] { return xs[i++]; }), delta * dt / gamma);
    for (double s : {0.5, 4.0}) {
      i = 0;
      const auto est = summarize(xs.size(), [&] { return std::exp(-s * xs[i++]); });
      check_within(est, std::exp(-dt * delta * (std::sqrt(2.0 * s + gamma * gamma) - gamma)));
    }
  }
}

TEST_CASE("subordinator paths are valid and nondecreasing") {
  RngStream rng(14, 0);
  for (const auto& d : {BernsteinDescriptor::stable(0.8), BernsteinDescriptor::tempered_stable(0.7, 2.0),
                        BernsteinDescriptor::inverse_gaussian(0.3, 1.0)}) {
    const auto path = subordinators::subordinator_path(d, 3.0, 500, rng);
    CHECK_NOTHROW(path.validate());
    CHECK(path.size() == 501);
    CHECK(path.times.back() == Catch::Approx(3.0));
  }
  CHECK_THROWS_AS(subordinators::subordinator_path(BernsteinDescriptor::stable(0.5), 0.0, 10, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(subordinators::subordinator_path(BernsteinDescriptor::stable(0.5), 1.0, 0, rng),
                  std::invalid_argument);
}

TEST_CASE("monotone path validation rejects broken invariants") {
  MonotonePath p{{0.0, 1.0, 2.0}, {0.0, 1.0, 0.5}};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {{0.0, 1.0, 1.0}, {0.0, 1.0, 2.0}};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {{0.0, 1.0}, {0.1, 1.0}};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {{}, {}};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("inverse path takes the first grid level strictly above t") {
  const MonotonePath d{{0.0, 0.5, 1.0, 1.5, 2.0}, {0.0, 0.2, 0.2, 1.0, 3.0}};
  const std::vector<double> t{0.0, 0.1, 0.2, 0.5, 1.0, 2.9};
  const auto e = subordinators::inverse_path(d, t);
  CHECK(e.values == std::vector<double>{0.0, 0.5, 1.5, 1.5, 2.0, 2.0});
  CHECK_THROWS_AS(subordinators::inverse_path(d, std::vector<double>{3.0}), CoverageError);
  CHECK_THROWS_AS(subordinators::inverse_path(d, std::vector<double>{1.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(subordinators::inverse_path(d, std::vector<double>{-1.0}), std::invalid_argument);
}

TEST_CASE("first-passage sampling agrees with inverting a stored path") {
  const auto d = BernsteinDescriptor::tempered_stable(0.7, 2.0);
  const std::vector<double> t{0.0, 0.3, 1.0, 2.5, 4.0};
  const double dr = 0.01;
  RngStream a(15, 1), b(15, 1);
  const auto streamed = subordinators::sample_inverse_on_grid(d, t, dr, a);
  const auto path = subordinators::subordinator_path(d, 40.0, 4000, b);
  const auto stored = subordinators::inverse_path(path, t);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(streamed[i] == Catch::Approx(stored.values[i]).margin(1e-9));
}

TEST_CASE("first-passage step cap raises a coverage error") {
  RngStream rng(16, 0);
  CHECK_THROWS_AS(subordinators::sample_inverse_on_grid(BernsteinDescriptor::inverse_gaussian(0.3, 1.0),
                                                         std::vector<double>{100.0}, 1e-3, rng, 10),
                  CoverageError);
}

TEST_CASE("operational path doubles until it covers the horizon") {
  RngStream rng(17, 0);
  const auto d = BernsteinDescriptor::inverse_gaussian(0.3, 1.0);
  const auto path = subordinators::operational_path(d, 5.0, 0.05, 4, rng);
  CHECK_NOTHROW(path.validate());
  CHECK(path.values.back() > 5.0);
  const std::size_t cells = path.size() - 1;
  CHECK((cells & (cells - 1)) == 0);
}

TEST_CASE("stable inverse subordinator has Mittag-Leffler Laplace transform") {
  const double alpha = 0.6, t = 1.0;
  const auto d = BernsteinDescriptor::stable(alpha);
  const double dr = subordinators::operational_step(d, t, 2000);
  std::vector<double> e(20000);
  parallel_for(e.size(), 1, [&](std::size_t i) {
    RngStream rng(18, i);
    e[i] = subordinators::sample_inverse_on_grid(d, std::vector<double>{t}, dr, rng)[0];
  });
  for (double lambda : {0.5, 2.0}) {
    std::size_t i = 0;
    const auto est = summarize(e.size(), [&] { return std::exp(-lambda * e[i++]); });
    // right-endpoint discretization shifts E up by at most dr
    const double exact = specfun::mittag_leffler(alpha, 1.0, -lambda * std::pow(t, alpha));
    INFO("lambda " << lambda);
    CHECK(std::abs(est.mean - exact) <= 4.0 * est.se + lambda * dr);
  }
}

TEST_CASE("inverse subordinator mean matches the analytic renewal function") {
  for (const auto& d : {BernsteinDescriptor::tempered_stable(0.7, 2.0), BernsteinDescriptor::inverse_gaussian(0.3, 1.0)}) {
    for (double t : {0.5, 2.0}) {
      const double dr = subordinators::operational_step(d, t, 2000);
      std::vector<double> e(20000);
      parallel_for(e.size(), 1, [&](std::size_t i) {
        RngStream rng(19, i);
        e[i] = subordinators::sample_inverse_on_grid(d, std::vector<double>{t}, dr, rng)[0];
      });
      std::size_t i = 0;
      const auto est = summarize(e.size(), [&] { return e[i++]; });
      const double exact = specfun::mean_inverse_subordinator(d, t);
      INFO(d.name() << " t=" << t);
      CHECK(std::abs(est.mean - exact) <= 4.0 * est.se + dr);
    }
  }
}

TEST_CASE("operational step scales the mean clock horizon") {
  const auto d = BernsteinDescriptor::stable(0.5);
  CHECK(subordinators::operational_step(d, 1.0, 100) ==
        Catch::Approx(1.5 * specfun::mean_inverse_subordinator(d, 1.0) / 100.0));
  CHECK_THROWS_AS(subordinators::operational_step(d, 0.0, 100), std::invalid_argument);
  CHECK_THROWS_AS(subordinators::operational_step(d, 1.0, 0), std::invalid_argument);
}

TEST_CASE("parallel_for results do not depend on the worker count") {
  std::vector<double> one(257), four(257);
  auto job = [](std::vector<double>& out) {
    return [&out](std::size_t i) {
      RngStream rng(20, i);
      out[i] = subordinators::sample_ig_increment(1.0, 1.0, 0.5, rng);
    };
  };
  parallel_for(one.size(), 1, job(one));
  parallel_for(four.size(), 4, job(four));
  CHECK(one == four);
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}

TEST_CASE("half-stable increments follow the closed Levy cdf") {
  // P(X <= x) = erfc(1 / (2 sqrt(x))) for alpha = 1/2, dt = 1
  const double y = boost::math::erfc_inv(0.5);
  const double median = 1.0 / (4.0 * y * y);
  CHECK_THAT(median, Catch::Matchers::WithinAbs(1.099, 1e-3));
  RngStream rng(15, 0);
  const std::size_t n = 100000;
  std::size_t below = 0;
  double lt = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = subordinators::sample_stable_increment(0.5, 1.0, rng);
    below += x <= median;
    lt += std::exp(-x);
  }
  CHECK(std::abs(static_cast<double>(below) / n - 0.5) < 4.0 * std::sqrt(0.25 / n));
  CHECK(std::abs(lt / n - std::exp(-1.0)) < 0.01);
}

TEST_CASE("stable increments scale as dt to the power 1/alpha") {
  RngStream a(16, 0), b(16, 1);
  std::vector<double> unit(10000), scaled(10000);
  for (auto& x : unit) x = subordinators::sample_stable_increment(0.5, 1.0, a);
  for (auto& x : scaled) x = subordinators::sample_stable_increment(0.5, 16.0, b) / 256.0;
  CHECK(analytics::ks_two_sample(unit, scaled).p_value > 0.01);
}

TEST_CASE("untempered increments are stable increments") {
  RngStream a(17, 0), b(17, 1);
  std::vector<double> st(10000), ts(10000);
  for (auto& x : st) x = subordinators::sample_stable_increment(0.7, 1.0, a);
  for (auto& x : ts) x = subordinators::sample_tempered_stable_increment(0.7, 0.0, 1.0, b);
  CHECK(analytics::ks_two_sample(st, ts).p_value > 0.01);
}

TEST_CASE("inverse gaussian increments have variance delta dt / gamma^3") {
  RngStream rng(18, 0);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = subordinators::sample_ig_increment(0.3, 1.0, 1.0, rng);
  double m = 0.0;
  for (double x : xs) m += x;
  m /= xs.size();
  std::size_t i = 0;
  const auto var = summarize(xs.size(), [&] {
    const double d = xs[i++] - m;
    return d * d;
  });
  check_within(var, 0.3);
}
