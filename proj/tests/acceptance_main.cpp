// Acceptance suite: one line per criterion, nonzero exit when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "robdet/fixed_sample.hpp"
#include "robdet/lfd.hpp"
#include "robdet/limits.hpp"
#include "robdet/llr.hpp"
#include "robdet/sequential.hpp"

using namespace robdet;

namespace {

struct Check {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << (detail.str().empty() ? "" : "; ") << what;
    }
  }
  void note(const std::string& s) {
    detail << (detail.str().empty() ? "" : "; ") << s;
  }
};

NominalModel mean_shifted() { return NominalModel::gaussian_pair({-1.0, 1.0}, {1.0, 1.0}); }
NominalModel mean_var_shifted() { return NominalModel::gaussian_pair({-1.0, 1.0}, {1.0, 2.0}); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// --------------------------------------------------------------------------

void criterion_1(Check& c) {  // equal-radius limit of the mean-shifted pair
  const double limit = chernoff_distance(mean_shifted());
  c.note("limit=" + fmt(limit));
  c.require(std::abs(limit - 0.5) <= 1e-3, "equal-radius limit off 0.5 by more than 1e-3");
}

void criterion_2(Check& c) {  // equal-radius limit of the mean+variance pair
  const double limit = chernoff_distance(mean_var_shifted());
  c.note("limit=" + fmt(limit));
  c.require(std::abs(limit - 0.338) <= 5e-3, "equal-radius limit off 0.338 by more than 5e-3");
}

void criterion_3(Check& c) {  // KL-ball solver constraint satisfaction
  const NominalModel model = mean_var_shifted();
  const MTestSolution sol = solve_m_test(model, 0.15, 0.05);
  c.note("residuals=(" + fmt(sol.residual0) + "," + fmt(sol.residual1) + ")");
  c.require(std::abs(sol.residual0) < 1e-8 && std::abs(sol.residual1) < 1e-8,
            "solver residuals above 1e-8");

  for (int hyp : {0, 1}) {
    const Density g = lfd_density(model, sol, hyp);
    const double mass =
        integrate([&](double y) { return g.pdf(y); }, model.support(), g.breakpoints);
    c.require(std::abs(mass - 1.0) <= 1e-6, "lfd mass deviates from 1 by more than 1e-6");
    const double target = hyp == 0 ? 0.15 : 0.05;
    const double d = kl_divergence(g, model.density(hyp), model.support());
    c.require(std::abs(d - target) <= 1e-4,
              "divergence " + fmt(d) + " misses eps" + std::to_string(hyp) + " by more than 1e-4");
  }
}

void criterion_4(Check& c) {  // saddle value over random ball members
  const NominalModel model = mean_var_shifted();
  Quadrature q;
  q.panels = 128;
  const MTestSolution sol = solve_m_test(model, 0.15, 0.05, q);
  const PiecewiseLLR llr = robust_llr(model, sol);
  const double pe0 = error_probability(model, llr, lfd_density(model, sol, 0), 0, q);
  const double pe1 = error_probability(model, llr, lfd_density(model, sol, 1), 1, q);

  CounterRng rng(20240613);
  int violations = 0;
  for (int i = 0; i < 100; ++i) {
    const Density g0 = random_ball_member(model, 0, 0.15, rng, q);
    const Density g1 = random_ball_member(model, 1, 0.05, rng, q);
    if (error_probability(model, llr, g0, 0, q) > pe0 + 1e-6) ++violations;
    if (error_probability(model, llr, g1, 1, q) > pe1 + 1e-6) ++violations;
  }
  c.note("violations=" + std::to_string(violations) + "/200");
  c.require(violations == 0, "error probability exceeded the LFD value");
}

void criterion_5(Check& c) {  // symmetric reduction
  const NominalModel model = mean_shifted();
  const double eps = 0.1;
  const MTestSolution sym = solve_m_test_symmetric(model, eps);
  const MTestSolution gen = solve_m_test(model, eps, eps);

  c.require(std::abs(sym.k - 1.0 / sym.l_u) <= 1e-6, "k != 1/l_u");
  c.require(std::abs(sym.l_l - gen.l_l) <= 1e-6 && std::abs(sym.l_u - gen.l_u) <= 1e-6,
            "1-D and 2-D solvers disagree beyond 1e-6");

  const Density g0 = lfd_density(model, sym, 0);
  const Density g1 = lfd_density(model, sym, 1);
  double worst = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double y = model.y_min() + (model.y_max() - model.y_min()) * i / 2000;
    worst = std::max(worst, std::abs(g0.pdf(y) - g1.pdf(-y)));
  }
  c.note("mirror_sup=" + fmt(worst));
  c.require(worst < 1e-6, "g0(y) != g1(-y) beyond 1e-6");
}

void criterion_6(Check& c) {  // strict monotonicity of the radius curve
  for (const NominalModel& model : {mean_shifted(), mean_var_shifted()}) {
    const LimitCurve curve = m_limit_curve(model, 201);
    int bad = 0;
    for (std::size_t i = 0; i + 1 < curve.samples.size(); ++i) {
      if (!(curve.samples[i + 1].eps0 > curve.samples[i].eps0)) ++bad;
      if (!(curve.samples[i + 1].eps1 < curve.samples[i].eps1)) ++bad;
    }
    c.require(bad == 0, "sign violations on the 201-point grid");
  }
}

void criterion_7(Check& c) {  // rate function equals the tilt curve
  const NominalModel model = mean_var_shifted();
  const PiecewiseLLR llr = PiecewiseLLR::nominal();
  Quadrature q;
  q.panels = 128;
  double worst = 0.0;
  for (int i = 1; i <= 50; ++i) {
    const double u = static_cast<double>(i) / 51.0;
    const LimitCurvePoint p = tilt_eps_pair(model, u, q);
    const double t = p.eps0 - p.eps1;
    const RateValue i0 = rate_function(model, llr, model.density(0), t, q);
    const RateValue i1 = rate_function(model, llr, model.density(1), t, q);
    worst = std::max({worst, std::abs(i0.value - p.eps0), std::abs(i1.value - p.eps1)});
  }
  c.note("max_dev=" + fmt(worst));
  c.require(worst < 1e-4, "rate/tilt deviation at or above 1e-4");
}

void criterion_8(Check& c) {  // mixed densities vs Monte Carlo
  const NominalModel model = mean_var_shifted();
  const long runs = 1000000;

  auto compare = [&](const char* tag, const MixedDensity& d0, const MixedDensity& d1,
                     const FixedSampleTest& test, const Density& o0, const Density& o1,
                     std::uint64_t seed) {
    const auto [alpha, beta] = error_probabilities(d0, d1, 0.0);
    const ErrorEstimate fa =
        empirical_error(test, model, o0, ErrorKind::false_alarm, runs, seed);
    const ErrorEstimate miss =
        empirical_error(test, model, o1, ErrorKind::miss, runs, seed + 1);
    c.require(std::abs(fa.rate - alpha) <= 3.0 * fa.std_error,
              std::string(tag) + ": alpha off by more than 3 SE");
    c.require(std::abs(miss.rate - beta) <= 3.0 * miss.std_error,
              std::string(tag) + ": beta off by more than 3 SE");
  };

  const HTestSolution h = solve_h_test(model, 0.02, 0.02);
  compare("h", llr_density_h(model, h, 0), llr_density_h(model, h, 1), make_h_test(model, h, 1),
          lfd_density(model, h, 0), lfd_density(model, h, 1), 101);

  const MTestSolution m = solve_m_test(model, 0.15, 0.05);
  compare("m", llr_density_m(model, m, 0), llr_density_m(model, m, 1), make_m_test(model, m, 1),
          lfd_density(model, m, 0), lfd_density(model, m, 1), 202);

  const CompositeSolution cc = solve_c_test(model, 0.15, 0.05, 0.02, 0.02);
  compare("c", llr_density_c(model, cc, 0), llr_density_c(model, cc, 1),
          make_c_test(model, cc, 1), lfd_density(model, cc, 0), lfd_density(model, cc, 1), 303);
}

void criterion_9(Check& c) {  // exact SPRT recursion vs Monte Carlo
  const NominalModel model = mean_var_shifted();
  const MTestSolution sol = solve_m_test(model, 0.01, 0.01);
  const PiecewiseLLR llr = robust_llr(model, sol);
  const Density g0 = lfd_density(model, sol, 0);
  const Density g1 = lfd_density(model, sol, 1);
  const MixedDensity d0 = statistic_distribution(model, llr, g0, 0, {}, 0.005);
  const MixedDensity d1 = statistic_distribution(model, llr, g1, 0, {}, 0.005);

  int bad = 0;
  for (double tl : {-3.0, -2.4, -1.8, -1.2, -0.6}) {
    for (double tu : {0.6, 1.2, 1.8, 2.4, 3.0}) {
      SprtConfig cfg;
      cfg.log_t_l = tl;
      cfg.log_t_u = tu;
      cfg.mc_runs = 100000;
      cfg.seed = 424242;
      const SprtResult exact = sprt_exact(d0, d1, cfg);
      const SprtResult mc = sprt_monte_carlo(model, llr, g0, g1, cfg);
      if (std::abs(exact.alpha - mc.alpha) > 3.0 * mc.run0.se_reject) ++bad;
      if (std::abs(exact.beta - mc.beta) > 3.0 * mc.run1.se_accept) ++bad;
      if (std::abs(exact.en0 - mc.en0) > 3.0 * mc.run0.se_n) ++bad;
      if (std::abs(exact.en1 - mc.en1) > 3.0 * mc.run1.se_n) ++bad;
    }
  }
  c.note("mismatches=" + std::to_string(bad) + "/100");
  c.require(bad == 0, "exact vs Monte Carlo beyond 3 SE");
}

void criterion_10(Check& c) {  // stopping-time ordering of the clipped test
  const NominalModel model = mean_shifted();
  const HTestSolution sol = solve_h_test(model, 0.1, 0.1);
  const PiecewiseLLR llr = robust_llr(model, sol);
  const Density lfd0 = lfd_density(model, sol, 0);

  int bad = 0;
  for (int i = 1; i <= 10; ++i) {
    for (int j = 1; j <= 10; ++j) {
      SprtConfig cfg;
      cfg.log_t_l = -0.5 * i;
      cfg.log_t_u = 0.5 * j;
      cfg.mc_runs = 20000;
      cfg.seed = 77;
      const SprtRun lfd_run = sprt_monte_carlo_run(model, llr, lfd0, cfg);
      cfg.seed = 78;
      const SprtRun nom_run = sprt_monte_carlo_run(model, llr, model.density(0), cfg);
      const double se = std::hypot(lfd_run.se_reject, nom_run.se_reject);
      if (lfd_run.p_reject < nom_run.p_reject - 3.0 * se) ++bad;
    }
  }
  c.note("violations=" + std::to_string(bad) + "/100");
  c.require(bad == 0, "upper-exit ordering violated beyond 3 SE");
}

void criterion_11(Check& c) {  // sequential KL-ball test degrades off its LFD
  const NominalModel model = mean_var_shifted();
  EpsParams eps;
  eps.eps0 = eps.eps1 = 0.01;
  std::vector<double> tls, tus;
  for (int i = 1; i <= 10; ++i) {
    tls.push_back(-0.6 * i);
    tus.push_back(0.6 * i);
  }
  SprtConfig cfg;
  cfg.grid_step = 0.01;
  const auto points = minimax_scan(model, TestFamily::m, eps, tls, tus, cfg, /*exact=*/true,
                                   /*hypothesis_mask=*/1);
  int above = 0;
  for (const ScanPoint& p : points)
    if (p.alt0.p_reject > p.own0.p_reject) ++above;
  c.note("ratio>1 on " + std::to_string(above) + "/" + std::to_string(points.size()));
  c.require(above > static_cast<int>(points.size() * 9) / 10,
            "alpha ratio above 1 on 90% of the grid not met");
}

void criterion_12(Check& c) {  // single-sample error oracle
  const NominalModel model = mean_shifted();
  const FixedSampleTest test = make_nominal_test(1);
  const long runs = 1000000;
  const ErrorEstimate fa =
      empirical_error(test, model, model.density(0), ErrorKind::false_alarm, runs, 5150);
  const ErrorEstimate miss =
      empirical_error(test, model, model.density(1), ErrorKind::miss, runs, 5151);
  const double pe = 0.5 * (fa.rate + miss.rate);
  const double se = 0.5 * std::hypot(fa.std_error, miss.std_error);
  const double phi_m1 = 0.5 * std::erfc(1.0 / std::sqrt(2.0));
  c.note("pe=" + fmt(pe) + " target=" + fmt(phi_m1));
  c.require(std::abs(pe - phi_m1) <= 3.0 * se, "error probability off Phi(-1) by more than 3 SE");
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* name;
    std::function<void(Check&)> run;
    double time_limit_s;  // 0 = unbounded
  };
  const std::vector<Entry> entries{
      {1, "equal-radius limit, mean-shifted pair = 0.5 +- 1e-3", criterion_1, 1.0},
      {2, "equal-radius limit, mean+variance pair = 0.338 +- 5e-3", criterion_2, 5.0},
      {3, "KL-ball solver: masses, divergences, residuals", criterion_3, 10.0},
      {4, "saddle value over 100 random ball members per hypothesis", criterion_4, 0.0},
      {5, "symmetric reduction: mirrored LFDs and 1-D/2-D agreement", criterion_5, 0.0},
      {6, "radius curve strictly monotone on 201 points, both pairs", criterion_6, 0.0},
      {7, "rate function matches the tilt curve within 1e-4", criterion_7, 0.0},
      {8, "single-sample (alpha, beta) vs 1e6-run Monte Carlo, h/m/c", criterion_8, 0.0},
      {9, "SPRT exact recursion vs 1e5-run Monte Carlo on a 5x5 grid", criterion_9, 300.0},
      {10, "sequential clipped-test upper-exit ordering on a 10x10 grid", criterion_10, 0.0},
      {11, "sequential KL-ball alpha ratio > 1 on > 90% of a 10x10 grid", criterion_11, 0.0},
      {12, "single-sample nominal error equals Phi(-1) within 3 SE", criterion_12, 0.0},
  };

  int failures = 0;
  for (const Entry& e : entries) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      e.run(check);
    } catch (const std::exception& ex) {
      check.pass = false;
      check.note(std::string("exception: ") + ex.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (e.time_limit_s > 0.0 && seconds > e.time_limit_s) {
      check.pass = false;
      check.note("runtime " + fmt(seconds) + "s over limit " + fmt(e.time_limit_s) + "s");
    }
    std::printf("[%s] criterion %2d: %s (%s) [%.1fs]\n", check.pass ? "PASS" : "FAIL", e.id,
                e.name, check.detail.str().c_str(), seconds);
    std::fflush(stdout);
    if (!check.pass) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(entries.size()) - failures,
              entries.size());
  return failures == 0 ? 0 : 1;
}
