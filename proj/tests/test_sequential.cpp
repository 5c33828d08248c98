#include <cmath>
#include <numeric>

#include "doctest.h"
#include "robdet/errors.hpp"
#include "robdet/sequential.hpp"

using namespace robdet;

namespace {

NominalModel mean_shifted() { return NominalModel::gaussian_pair({-1.0, 1.0}, {1.0, 1.0}); }
NominalModel mean_var_shifted() { return NominalModel::gaussian_pair({-1.0, 1.0}, {1.0, 2.0}); }

double stop_mass(const SprtRun& run) {
  return std::accumulate(run.stop_dist.begin(), run.stop_dist.end(), 0.0);
}

}  // namespace

TEST_CASE("empty band stops at the first sample") {
  const NominalModel model = mean_var_shifted();
  const MTestSolution sol = solve_m_test(model, 0.05, 0.05);
  const MixedDensity d0 = statistic_distribution(model, robust_llr(model, sol),
                                                 lfd_density(model, sol, 0), 0, {}, 0.005);
  SprtConfig cfg;
  cfg.log_t_l = -0.0;
  cfg.log_t_u = 0.0;
  const SprtRun run = sprt_exact_run(d0, cfg);
  REQUIRE(run.stop_dist.size() == 1);
  CHECK(run.stop_dist[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(run.expected_n == doctest::Approx(1.0));
  CHECK(run.truncated_mass == doctest::Approx(0.0));
  CHECK(run.p_reject + run.p_accept == doctest::Approx(1.0).epsilon(1e-9));

  // Same convention in the Monte Carlo path.
  cfg.mc_runs = 2000;
  const SprtRun mc = sprt_monte_carlo_run(model, robust_llr(model, sol),
                                          lfd_density(model, sol, 0), cfg);
  CHECK(mc.expected_n == doctest::Approx(1.0));
}

TEST_CASE("exact recursion conserves mass") {
  const NominalModel model = mean_var_shifted();
  const MTestSolution sol = solve_m_test(model, 0.01, 0.01);
  const PiecewiseLLR llr = robust_llr(model, sol);
  const MixedDensity d1 = statistic_distribution(model, llr, lfd_density(model, sol, 1), 0, {},
                                                 0.005);
  SprtConfig cfg;
  cfg.log_t_l = -2.5;
  cfg.log_t_u = 2.5;
  const SprtRun run = sprt_exact_run(d1, cfg);
  CHECK(stop_mass(run) + run.truncated_mass == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(run.p_reject + run.p_accept == doctest::Approx(stop_mass(run)).epsilon(1e-10));
  CHECK(run.truncated_mass < 1e-3);
  CHECK(run.expected_n >= 1.0);
}

TEST_CASE("wald drift approximation in the wide-band regime") {
  // Small drift keeps the overshoot negligible relative to the band.
  const NominalModel model = NominalModel::gaussian_pair({-0.25, 1.0}, {0.25, 1.0});
  const PiecewiseLLR llr = PiecewiseLLR::nominal();
  const MixedDensity d1 = statistic_distribution(model, llr, model.density(1), 0, {}, 0.005);
  SprtConfig cfg;
  cfg.log_t_l = -5.0;
  cfg.log_t_u = 5.0;
  const SprtRun run = sprt_exact_run(d1, cfg);
  const double drift = llr_mean(model, llr, model.density(1));
  CHECK(drift == doctest::Approx(0.125).epsilon(1e-6));
  CHECK(run.expected_n == doctest::Approx(cfg.log_t_u / drift).epsilon(0.10));
}

TEST_CASE("exact recursion agrees with monte carlo") {
  const NominalModel model = mean_var_shifted();
  const MTestSolution sol = solve_m_test(model, 0.01, 0.01);
  const PiecewiseLLR llr = robust_llr(model, sol);
  const Density g0 = lfd_density(model, sol, 0);
  const Density g1 = lfd_density(model, sol, 1);
  const MixedDensity d0 = statistic_distribution(model, llr, g0, 0, {}, 0.005);
  const MixedDensity d1 = statistic_distribution(model, llr, g1, 0, {}, 0.005);

  for (auto [tl, tu] : {std::pair{-1.8, 1.2}, std::pair{-0.9, 2.1}}) {
    SprtConfig cfg;
    cfg.log_t_l = tl;
    cfg.log_t_u = tu;
    cfg.mc_runs = 60000;
    const SprtResult exact = sprt_exact(d0, d1, cfg);
    const SprtResult mc = sprt_monte_carlo(model, llr, g0, g1, cfg);
    CHECK(std::abs(exact.alpha - mc.alpha) < 3.0 * mc.run0.se_reject);
    CHECK(std::abs(exact.beta - mc.beta) < 3.0 * mc.run1.se_accept);
    CHECK(std::abs(exact.en0 - mc.en0) < 3.0 * mc.run0.se_n);
    CHECK(std::abs(exact.en1 - mc.en1) < 3.0 * mc.run1.se_n);
  }
}

TEST_CASE("widening the band trades errors for samples") {
  const NominalModel model = mean_shifted();
  const MTestSolution sol = solve_m_test_symmetric(model, 0.05);
  const PiecewiseLLR llr = robust_llr(model, sol);
  const MixedDensity d0 = statistic_distribution(model, llr, lfd_density(model, sol, 0), 0, {},
                                                 0.005);
  double prev_alpha = 1.0, prev_en = 0.0;
  for (double width : {1.0, 2.0, 3.0, 4.0}) {
    SprtConfig cfg;
    cfg.log_t_l = -width;
    cfg.log_t_u = width;
    const SprtRun run = sprt_exact_run(d0, cfg);
    CHECK(run.p_reject <= prev_alpha + 1e-10);
    CHECK(run.expected_n >= prev_en - 1e-10);
    prev_alpha = run.p_reject;
    prev_en = run.expected_n;
  }
}

TEST_CASE("monte carlo is invariant to worker partitioning") {
  const NominalModel model = mean_shifted();
  const HTestSolution sol = solve_h_test(model, 0.05, 0.05);
  const PiecewiseLLR llr = robust_llr(model, sol);
  SprtConfig cfg;
  cfg.log_t_l = -1.5;
  cfg.log_t_u = 1.5;
  cfg.mc_runs = 20000;
  cfg.workers = 1;
  const SprtRun one = sprt_monte_carlo_run(model, llr, model.density(0), cfg);
  cfg.workers = 4;
  const SprtRun four = sprt_monte_carlo_run(model, llr, model.density(0), cfg);
  CHECK(one.p_reject == four.p_reject);
  CHECK(one.expected_n == four.expected_n);
}

TEST_CASE("stopping-time ordering under the clipped lfd") {
  // The H0 LFD of the clipped test pushes the statistic stochastically
  // upward, so the upper threshold is hit first more often than under the
  // nominal observations.
  const NominalModel model = mean_shifted();
  const HTestSolution sol = solve_h_test(model, 0.1, 0.1);
  const PiecewiseLLR llr = robust_llr(model, sol);
  for (auto [tl, tu] : {std::pair{-2.0, 2.0}, std::pair{-4.0, 1.0}, std::pair{-1.0, 3.0}}) {
    SprtConfig cfg;
    cfg.log_t_l = tl;
    cfg.log_t_u = tu;
    cfg.mc_runs = 30000;
    const SprtRun lfd = sprt_monte_carlo_run(model, llr, lfd_density(model, sol, 0), cfg);
    cfg.seed += 1;
    const SprtRun nom = sprt_monte_carlo_run(model, llr, model.density(0), cfg);
    const double se = std::hypot(lfd.se_reject, nom.se_reject);
    CHECK(lfd.p_reject >= nom.p_reject - 3.0 * se);
  }
}

TEST_CASE("truncation is reported when the band never drains") {
  const NominalModel model = mean_shifted();
  const PiecewiseLLR llr = PiecewiseLLR::nominal();
  const MixedDensity d = statistic_distribution(model, llr, model.density(0), 0, {}, 0.01);
  SprtConfig cfg;
  cfg.log_t_l = -500.0;
  cfg.log_t_u = 500.0;
  cfg.max_n = 3;
  CHECK_THROWS_AS(sprt_exact_run(d, cfg), TruncationExceeded);
}

TEST_CASE("threshold scan produces consistent diagnostics") {
  const NominalModel model = mean_shifted();
  EpsParams eps;
  eps.eps0 = eps.eps1 = 0.05;
  SprtConfig cfg;
  cfg.mc_runs = 5000;
  const std::vector<double> tls{-2.0, -1.0};
  const std::vector<double> tus{1.0, 2.0};
  const auto points = minimax_scan(model, TestFamily::m, eps, tls, tus, cfg, false, 1);
  REQUIRE(points.size() == 4);
  for (const ScanPoint& pt : points) {
    CHECK(pt.own0.p_reject + pt.own0.p_accept + pt.own0.truncated_mass ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pt.alt0.p_reject + pt.alt0.p_accept + pt.alt0.truncated_mass ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pt.own0.runs == 5000);
  }
}
