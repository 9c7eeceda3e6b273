#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gfcpp/jumps.hpp"
#include "gfcpp/rng.hpp"

using namespace gfcpp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

struct Summary {
  double mean, se;
};

Summary lt_estimate(const JumpLaw& law, double s, std::size_t n, std::uint64_t stream) {
  RngStream rng(31, stream);
  double a = 0.0, a2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::exp(-s * jumps::sample_jump(law, rng));
    a += v;
    a2 += v * v;
  }
  const double m = a / n;
  return {m, std::sqrt((a2 / n - m * m) / (n - 1))};
}

std::vector<JumpLaw> positive_laws() {
  return {JumpLaw::exponential(2.0),
          JumpLaw::mittag_leffler(0.7, 1.5),
          JumpLaw::mittag_leffler(1.0, 1.5),
          JumpLaw::tempered_mittag_leffler(0.8, 1.0, 0.5),
          JumpLaw::bernstein_type(BernsteinDescriptor::inverse_gaussian(0.3, 1.0), 2.0),
          JumpLaw::bernstein_type(BernsteinDescriptor::tempered_stable(0.6, 1.0), 1.0),
          JumpLaw::discrete_uniform(5),
          JumpLaw::truncated_geometric(0.5, 5),
          JumpLaw::logarithmic(0.6)};
}

}  // namespace

TEST_CASE("samplers reproduce the Laplace transform of every jump law") {
  std::uint64_t stream = 0;
  for (const auto& law : positive_laws()) {
    for (double s : {0.3, 1.0, 3.0}) {
      const auto est = lt_estimate(law, s, 40000, stream++);
      INFO(law.name() << " s=" << s << " est " << est.mean << " exact " << jumps::jump_lt(law, s));
      CHECK(std::abs(est.mean - jumps::jump_lt(law, s)) <= 4.0 * est.se);
    }
  }
}

TEST_CASE("positive jump laws draw positive sizes") {
  RngStream rng(32, 0);
  for (const auto& law : positive_laws())
    for (int i = 0; i < 2000; ++i) CHECK(jumps::sample_jump(law, rng) > 0.0);
}

TEST_CASE("discrete pmfs sum to one and match their Laplace transform") {
  for (const auto& law : {JumpLaw::discrete_uniform(1), JumpLaw::discrete_uniform(7),
                          JumpLaw::truncated_geometric(0.0, 4), JumpLaw::truncated_geometric(0.9, 6)}) {
    double total = 0.0, lt = 0.0;
    for (int j = -2; j <= law.k + 2; ++j) {
      total += law.pmf(j);
      if (j >= 1) lt += law.pmf(j) * std::exp(-0.7 * j);
    }
    CHECK_THAT(total, WithinAbs(1.0, 1e-14));
    CHECK_THAT(jumps::jump_lt(law, 0.7), WithinAbs(lt, 1e-14));
  }
  const auto log_law = JumpLaw::logarithmic(0.6);
  double total = 0.0, lt = 0.0;
  for (int j = 1; j <= 400; ++j) {
    total += log_law.pmf(j);
    lt += log_law.pmf(j) * std::exp(-0.7 * j);
  }
  CHECK_THAT(total, WithinAbs(1.0, 1e-13));
  CHECK_THAT(jumps::jump_lt(log_law, 0.7), WithinAbs(lt, 1e-13));
  CHECK(JumpLaw::truncated_geometric(0.0, 4).pmf(1) == 1.0);
  CHECK_THROWS_AS(JumpLaw::exponential(1.0).pmf(1), std::logic_error);
}

TEST_CASE("jump laws reduce to their special cases") {
  for (double s : {0.1, 1.0, 10.0}) {
    CHECK_THAT(jumps::jump_lt(JumpLaw::mittag_leffler(1.0, 2.0), s),
               WithinRel(jumps::jump_lt(JumpLaw::exponential(2.0), s), 1e-15));
    CHECK_THAT(jumps::jump_lt(JumpLaw::tempered_mittag_leffler(0.6, 2.0, 0.0), s),
               WithinRel(jumps::jump_lt(JumpLaw::mittag_leffler(0.6, 2.0), s), 1e-13));
    CHECK_THAT(jumps::jump_lt(JumpLaw::bernstein_type(BernsteinDescriptor::stable(0.6), 2.0), s),
               WithinRel(jumps::jump_lt(JumpLaw::mittag_leffler(0.6, 2.0), s), 1e-13));
  }
  CHECK(jumps::jump_lt(JumpLaw::logarithmic(0.3), 0.0) == 1.0);
}

TEST_CASE("closed-form moments agree with the pmf and with transform derivatives") {
  for (const auto& law : {JumpLaw::discrete_uniform(5), JumpLaw::truncated_geometric(0.5, 5),
                          JumpLaw::logarithmic(0.6)}) {
    double m1 = 0.0, m2 = 0.0;
    for (int j = 1; j <= 2000; ++j) {
      m1 += j * law.pmf(j);
      m2 += static_cast<double>(j) * j * law.pmf(j);
    }
    const auto m = jumps::jump_moments(law);
    CHECK_THAT(m.mean, WithinRel(m1, 1e-12));
    CHECK_THAT(m.second_moment, WithinRel(m2, 1e-12));
  }

  // Central differences of the Laplace transform at 0 serve as the oracle.
  const double h = 1e-4;
  for (const auto& law : {JumpLaw::exponential(2.0), JumpLaw::tempered_mittag_leffler(0.8, 1.0, 0.5),
                          JumpLaw::bernstein_type(BernsteinDescriptor::inverse_gaussian(0.3, 1.0), 2.0),
                          JumpLaw::bernstein_type(BernsteinDescriptor::tempered_stable(0.6, 1.0), 1.0)}) {
    const double l0 = 1.0, l1 = jumps::jump_lt(law, h), l2 = jumps::jump_lt(law, 2 * h);
    const double l3 = jumps::jump_lt(law, 3 * h);
    const double d1 = -(-11.0 * l0 + 18.0 * l1 - 9.0 * l2 + 2.0 * l3) / (6.0 * h);
    const double d2 = (2.0 * l0 - 5.0 * l1 + 4.0 * l2 - l3) / (h * h);
    const auto m = jumps::jump_moments(law);
    INFO(law.name());
    CHECK_THAT(m.mean, WithinRel(d1, 1e-5));
    CHECK_THAT(m.second_moment, WithinRel(d2, 1e-3));
  }
}

TEST_CASE("heavy-tailed laws flag infinite moments") {
  const auto ml = jumps::jump_moments(JumpLaw::mittag_leffler(0.7, 1.0));
  CHECK(ml.mean_infinite);
  CHECK(ml.second_infinite);
  const auto bs = jumps::jump_moments(JumpLaw::bernstein_type(BernsteinDescriptor::stable(0.5), 1.0));
  CHECK(bs.mean_infinite);
  const auto ex = jumps::jump_moments(JumpLaw::exponential(2.0));
  CHECK_FALSE(ex.mean_infinite);
  CHECK(ex.variance() == Catch::Approx(0.25));
  const auto sign = jumps::jump_moments(JumpLaw::symmetric_sign());
  CHECK(sign.mean == 0.0);
  CHECK(sign.variance() == 1.0);
}

TEST_CASE("symmetric sign law is balanced") {
  RngStream rng(33, 0);
  int sum = 0;
  for (int i = 0; i < 40000; ++i) {
    const double x = jumps::sample_jump(JumpLaw::symmetric_sign(), rng);
    CHECK(std::abs(x) == 1.0);
    sum += static_cast<int>(x);
  }
  CHECK(std::abs(sum) <= 4 * 200);
  CHECK(JumpLaw::symmetric_sign().discrete());
  CHECK(JumpLaw::symmetric_sign().max_support() == 1);
}

TEST_CASE("jump law factories validate parameters") {
  CHECK_THROWS_AS(JumpLaw::exponential(0.0), std::invalid_argument);
  CHECK_THROWS_AS(JumpLaw::mittag_leffler(1.2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(JumpLaw::mittag_leffler(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(JumpLaw::tempered_mittag_leffler(0.5, 1.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(JumpLaw::discrete_uniform(0), std::invalid_argument);
  CHECK_THROWS_AS(JumpLaw::truncated_geometric(1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(JumpLaw::logarithmic(1.0), std::invalid_argument);
  CHECK_THROWS_AS(jumps::jump_lt(JumpLaw::exponential(1.0), -1.0), std::domain_error);
}

TEST_CASE("discrete samplers reproduce their atoms") {
  const std::size_t n = 100000;
  auto frequency = [&](const JumpLaw& law, int atom, std::uint64_t stream) {
    RngStream rng(33, stream);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) hits += jumps::sample_jump(law, rng) == atom;
    return static_cast<double>(hits) / n;
  };
  for (int j = 1; j <= 5; ++j) {
    const double p = frequency(JumpLaw::discrete_uniform(5), j, j);
    CHECK(std::abs(p - 0.2) < 4.0 * std::sqrt(0.2 * 0.8 / n));
  }
  const double p1 = 0.5 / std::log(2.0);
  CHECK_THAT(JumpLaw::logarithmic(0.5).pmf(1), WithinAbs(0.7213, 1e-4));
  CHECK(std::abs(frequency(JumpLaw::logarithmic(0.5), 1, 9) - p1) < 4.0 * std::sqrt(p1 * (1.0 - p1) / n));
  RngStream rng(33, 10);
  for (int i = 0; i < 100; ++i) CHECK(jumps::sample_jump(JumpLaw::truncated_geometric(0.5, 1), rng) == 1.0);
}

TEST_CASE("long truncated geometric laws approach the geometric law") {
  const double rho = 0.5;
  const auto law = JumpLaw::truncated_geometric(rho, 50);
  for (int j = 1; j <= 10; ++j) CHECK_THAT(law.pmf(j), WithinAbs((1.0 - rho) * std::pow(rho, j - 1), 1e-6));
}

TEST_CASE("documented jump moments") {
  const auto e = jumps::jump_moments(JumpLaw::exponential(2.0));
  CHECK(e.mean == 0.5);
  CHECK(e.second_moment == 0.5);
  const auto u = jumps::jump_moments(JumpLaw::discrete_uniform(5));
  CHECK_THAT(u.mean, WithinAbs(3.0, 1e-14));
  CHECK_THAT(u.second_moment, WithinAbs(11.0, 1e-14));
  CHECK_THAT(jumps::jump_moments(JumpLaw::logarithmic(0.5)).mean, WithinAbs(1.0 / std::log(2.0), 1e-14));
  CHECK(jumps::jump_lt(JumpLaw::exponential(2.0), 2.0) == 0.5);
  CHECK(jumps::jump_lt(JumpLaw::truncated_geometric(0.5, 2), 0.0) == 1.0);
}
