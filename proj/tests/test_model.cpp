#include <cmath>

#include "doctest.h"
#include "robdet/errors.hpp"
#include "robdet/model.hpp"
#include "robdet/rng.hpp"
#include "robdet/sampler.hpp"

using namespace robdet;

namespace {

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

NominalModel mean_shifted() {
  return NominalModel::gaussian_pair({-1.0, 1.0}, {1.0, 1.0});
}

NominalModel mean_var_shifted() {
  return NominalModel::gaussian_pair({-1.0, 1.0}, {1.0, 2.0});
}

}  // namespace

TEST_CASE("quadrature settings validate") {
  Quadrature q;
  q.panels = 4;
  q.nodes_per_panel = 8;
  CHECK_THROWS_AS(q.validate(), OutOfRange);  // 32 nodes < 64
  q.panels = 512;
  q.abs_tol = 0.0;
  CHECK_THROWS_AS(q.validate(), OutOfRange);
}

TEST_CASE("trapezoid rule converges on smooth integrands") {
  const NominalModel model = mean_shifted();
  Quadrature q;
  q.rule = QuadRule::trapezoid;
  q.abs_tol = 1e-8;
  const double m = integrate([&](double y) { return model.f0(y); }, model.support(), q);
  CHECK(m == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("stalled refinement is reported") {
  Quadrature q;
  q.abs_tol = 1e-15;
  q.rel_tol = 1e-16;
  q.max_refinements = 1;
  auto kinked = [](double y) { return std::sqrt(std::abs(y - 0.37331)); };
  CHECK_THROWS_AS(integrate(kinked, -1.0, 1.0, q), NonConvergence);
}

TEST_CASE("invalid regions are rejected") {
  IntervalUnion u;
  CHECK_THROWS_AS(u.add(std::nan(""), 1.0), InvalidRegion);
  u.add(0.0, 1.0);
  u.add(2.0, 3.0);
  u.add(0.5, 2.5);  // bridges the gap
  CHECK(u.parts().size() == 1);
  CHECK(u.total_length() == doctest::Approx(3.0));
}

TEST_CASE("nominal densities integrate to one") {
  const NominalModel model = mean_var_shifted();
  const double m0 = integrate([&](double y) { return model.f0(y); }, model.support());
  const double m1 = integrate([&](double y) { return model.f1(y); }, model.support());
  CHECK(m0 == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(m1 == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("level-set mass matches the Gaussian cdf") {
  // For the mean-shifted pair l(y) <= 1 iff y <= 0, so the f0 mass of the
  // region equals Phi(1).
  const NominalModel model = mean_shifted();
  const IntervalUnion region = model.profile().below(0.0);
  const double m = integrate([&](double y) { return model.f0(y); }, region);
  CHECK(m == doctest::Approx(std_normal_cdf(1.0)).epsilon(1e-9));
}

TEST_CASE("empty region integrates to zero") {
  const NominalModel model = mean_shifted();
  const IntervalUnion region = model.profile().below(model.profile().ess_inf() - 1.0);
  CHECK(region.is_empty());
  CHECK(integrate([&](double y) { return model.f1(y); }, region) == 0.0);
}

TEST_CASE("integrate is linear") {
  const NominalModel model = mean_var_shifted();
  CounterRng rng(7);
  const IntervalUnion region = model.profile().below(0.7);
  for (int trial = 0; trial < 5; ++trial) {
    const double a = 4.0 * rng.next_u01() - 2.0;
    const double w = 2.0 * rng.next_u01();
    auto g = [&](double y) { return model.f0(y) * std::cos(w * y); };
    auto h = [&](double y) { return model.f1(y); };
    const double lhs = integrate([&](double y) { return a * g(y) + h(y); }, region);
    const double rhs = a * integrate(g, region) + integrate(h, region);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("level sets partition the support") {
  const NominalModel model = mean_var_shifted();
  const LogLrProfile& prof = model.profile();
  for (double t : {-1.0, -0.3, 0.0, 0.4, 2.0, 10.0}) {
    const double below = integrate([&](double y) { return model.f0(y); }, prof.below(t));
    const double above = integrate([&](double y) { return model.f0(y); }, prof.above(t));
    CHECK(below + above == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("non-monotone ratio resolves to interval unions") {
  const NominalModel model = mean_var_shifted();
  const LogLrProfile& prof = model.profile();
  CHECK_FALSE(prof.monotone_nondecreasing());
  // log l is a parabola; a level just above its minimum cuts two roots.
  const double t = prof.ess_inf() + 0.5;
  CHECK(prof.below(t).parts().size() == 1);
  CHECK(prof.above(t).parts().size() == 2);

  const NominalModel shifted = mean_shifted();
  CHECK(shifted.profile().monotone_nondecreasing());
}

TEST_CASE("kl divergence closed forms") {
  const NominalModel model = mean_shifted();
  CHECK(kl_divergence(model, 0, 0) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(kl_divergence(model, 0, 1) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(kl_divergence(model, 1, 0) == doctest::Approx(2.0).epsilon(1e-9));

  // Variance-shifted closed form: log(s1/s0) + (s0^2 + dm^2)/(2 s1^2) - 1/2.
  const NominalModel mv = mean_var_shifted();
  const double expected01 = std::log(2.0 / 1.0) + (1.0 + 4.0) / (2.0 * 4.0) - 0.5;
  const double expected10 = std::log(1.0 / 2.0) + (4.0 + 4.0) / 2.0 - 0.5;
  // The truncated tails carry a large log-ratio, so the closed form is only
  // reproduced to the truncation mass times that ratio.
  CHECK(kl_divergence(mv, 0, 1) == doctest::Approx(expected01).epsilon(1e-8));
  CHECK(kl_divergence(mv, 1, 0) == doctest::Approx(expected10).epsilon(1e-8));
}

TEST_CASE("kl divergence rejects support mismatch") {
  const NominalModel model = mean_shifted();
  const Density narrow{[](double y) {
    return (y > -0.5 && y < 0.5) ? -0.5 * y * y : -1e6;
  }};
  CHECK_THROWS_AS(kl_divergence(model.density(0), narrow, model.support()), SupportMismatch);
}

TEST_CASE("divergence suite") {
  const NominalModel same = NominalModel::gaussian_pair({0.0, 1.0}, {0.0, 1.0});
  const DivergenceSuite zero = divergence_suite(same);
  CHECK(zero.kl_01 == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(zero.kl_10 == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(zero.chi2_sym == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(zero.hellinger2 == doctest::Approx(0.0).epsilon(1e-10));

  const DivergenceSuite s = divergence_suite(mean_shifted());
  CHECK(s.kl_01 == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(s.kl_10 == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(s.chi2_sym == doctest::Approx(2.0 * (std::exp(4.0) - 1.0)).epsilon(1e-5));
  CHECK(s.hellinger2 == doctest::Approx(1.0 - std::exp(-0.5)).epsilon(1e-9));
  CHECK(s.hellinger2 >= 0.0);
  CHECK(s.hellinger2 <= 1.0);

  // Squared Hellinger ties to the Bhattacharyya coefficient.
  const DivergenceSuite mv = divergence_suite(NominalModel::gaussian_pair({-1.0, 1.0}, {1.0, 2.0}));
  const double db = 0.25 * 4.0 / 5.0 + 0.5 * std::log(5.0 / 4.0);
  CHECK(mv.hellinger2 == doctest::Approx(1.0 - std::exp(-db)).epsilon(1e-9));
}

TEST_CASE("symmetry detection") {
  CHECK(mean_shifted().is_symmetric());
  CHECK_FALSE(mean_var_shifted().is_symmetric());
}

TEST_CASE("swapped model flips the ratio") {
  const NominalModel model = mean_var_shifted();
  const NominalModel sw = model.swapped();
  CHECK(sw.log_lr(0.3) == doctest::Approx(-model.log_lr(0.3)).epsilon(1e-12));
}

TEST_CASE("cdf sampler tracks the density") {
  const NominalModel model = mean_shifted();
  const CdfSampler sampler(model.density(0), model.y_min(), model.y_max());
  CHECK(sampler.total_mass() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sampler.cdf(-1.0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(sampler.cdf(0.0) == doctest::Approx(std_normal_cdf(1.0)).epsilon(1e-6));

  CounterRng rng(11);
  long below = 0;
  const long n = 200000;
  for (long i = 0; i < n; ++i)
    if (sampler.sample(rng) <= -1.0) ++below;
  CHECK(std::abs(below / static_cast<double>(n) - 0.5) < 0.005);
}

TEST_CASE("counter rng is reproducible and partition independent") {
  CounterRng a(42), b(42);
  for (int i = 0; i < 16; ++i) CHECK(a.next_u64() == b.next_u64());
  CounterRng s1 = CounterRng(42).substream(3);
  CounterRng s2 = CounterRng(42).substream(3);
  CHECK(s1.next_u64() == s2.next_u64());
  CounterRng s3 = CounterRng(42).substream(4);
  CHECK(s1.next_u64() != s3.next_u64());
}
