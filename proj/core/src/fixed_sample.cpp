#include "robdet/fixed_sample.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "robdet/errors.hpp"
#include "robdet/sampler.hpp"

namespace robdet {

namespace {

struct Tally {
  double statistic = 0.0;
  double threshold = 0.0;
  double tie_reject_prob = 0.5;
};

// Log-domain statistic and threshold for each test form. All forms reduce
// to comparing sum log l̂ against zero; the display keeps the per-form
// threshold explicit and feeds the tie randomization.
Tally tally(const FixedSampleTest& test, const NominalModel& model,
            std::span<const double> obs) {
  Tally t;
  double delta_sum = 0.0;
  int middle_count = 0;
  switch (test.form) {
    case TestForm::nominal:
      for (double y : obs) t.statistic += model.log_lr(y);
      t.threshold = 0.0;
      break;
    case TestForm::m_test: {
      for (double y : obs) {
        const double logl = model.log_lr(y);
        const double d = test.llr.delta(logl);
        t.statistic += logl + d * (test.log_ll - test.log_lu);
        if (logl >= test.log_ll && logl <= test.log_lu) {
          delta_sum += d;
          ++middle_count;
        }
      }
      t.threshold = static_cast<double>(obs.size()) * test.log_ll;
      if (middle_count > 0) t.tie_reject_prob = delta_sum / middle_count;
      break;
    }
    case TestForm::h_test: {
      int n1 = 0, n2 = 0;
      for (double y : obs) {
        const double logl = model.log_lr(y);
        if (logl >= test.log_cu)
          ++n1;
        else if (logl <= test.log_cl)
          ++n2;
        else
          t.statistic += logl;
      }
      t.threshold = -(n1 * test.log_cu + n2 * test.log_cl);
      break;
    }
    case TestForm::c_test: {
      int n1 = 0, n2 = 0;
      for (double y : obs) {
        const double logl = model.log_lr(y);
        const double d = test.llr.delta(logl);
        const double inner = logl + (d - 1.0) * test.log_ll - d * test.log_lu;
        if (inner >= test.log_cu) {
          ++n1;
        } else if (inner <= test.log_cl) {
          ++n2;
        } else {
          t.statistic += inner;
          if (logl >= test.log_ll && logl <= test.log_lu) {
            delta_sum += d;
            ++middle_count;
          }
        }
      }
      t.threshold = -(n1 * test.log_cu + n2 * test.log_cl);
      if (middle_count > 0) t.tie_reject_prob = delta_sum / middle_count;
      break;
    }
    case TestForm::soft_sign: {
      for (double y : obs) t.statistic += test.llr.delta(model.log_lr(y));
      t.threshold = 0.5 * static_cast<double>(obs.size());
      break;
    }
    case TestForm::sign_test: {
      for (double y : obs)
        if (model.log_lr(y) > 0.0) t.statistic += 1.0;
      t.threshold = 0.5 * static_cast<double>(obs.size());
      break;
    }
  }
  return t;
}

}  // namespace

FixedSampleTest make_nominal_test(int n) {
  FixedSampleTest t;
  t.form = TestForm::nominal;
  t.n = n;
  return t;
}

FixedSampleTest make_m_test(const NominalModel& model, const MTestSolution& sol, int n) {
  FixedSampleTest t;
  t.form = TestForm::m_test;
  t.n = n;
  t.llr = robust_llr(model, sol);
  t.log_ll = sol.degenerate() ? 0.0 : sol.log_ll();
  t.log_lu = sol.degenerate() ? 0.0 : sol.log_lu();
  return t;
}

FixedSampleTest make_h_test(const NominalModel& model, const HTestSolution& sol, int n) {
  FixedSampleTest t;
  t.form = TestForm::h_test;
  t.n = n;
  t.llr = robust_llr(model, sol);
  t.log_cl = std::log(sol.c_l);
  t.log_cu = std::log(sol.c_u);
  return t;
}

FixedSampleTest make_c_test(const NominalModel& model, const CompositeSolution& sol, int n) {
  FixedSampleTest t;
  t.form = TestForm::c_test;
  t.n = n;
  t.llr = robust_llr(model, sol);
  t.log_ll = sol.inner.degenerate() ? 0.0 : sol.inner.log_ll();
  t.log_lu = sol.inner.degenerate() ? 0.0 : sol.inner.log_lu();
  t.log_cl = std::log(sol.c_l);
  t.log_cu = std::log(sol.c_u);
  return t;
}

FixedSampleTest make_soft_sign_test(const NominalModel& model, const MTestSolution& sol, int n) {
  FixedSampleTest t;
  t.form = TestForm::soft_sign;
  t.n = n;
  t.llr = robust_llr(model, sol);
  t.log_ll = sol.log_ll();
  t.log_lu = sol.log_lu();
  return t;
}

FixedSampleTest make_sign_test(int n) {
  FixedSampleTest t;
  t.form = TestForm::sign_test;
  t.n = n;
  return t;
}

Decision decide(const FixedSampleTest& test, const NominalModel& model,
                std::span<const double> observations, CounterRng& rng) {
  const Tally t = tally(test, model, observations);
  const double gap = t.statistic - t.threshold;
  const double tie_tol = 1e-12 * (1.0 + std::abs(t.threshold));
  if (gap > tie_tol) return Decision::reject_h0;
  if (gap < -tie_tol) return Decision::accept_h0;
  return rng.next_u01() < t.tie_reject_prob ? Decision::reject_h0 : Decision::accept_h0;
}

double limiting_m_statistic(const NominalModel& model, const MTestSolution& sol,
                            std::span<const double> observations) {
  const PiecewiseLLR llr = robust_llr(model, sol);
  double s = 0.0;
  for (double y : observations) s += llr.delta_y(model, y);
  return s;
}

ErrorEstimate empirical_error(const FixedSampleTest& test, const NominalModel& model,
                              const Density& obs_density, ErrorKind kind, long runs,
                              std::uint64_t seed, int workers) {
  if (runs < 1) throw OutOfRange("empirical_error: runs must be >= 1");
  const CdfSampler sampler(obs_density, model.y_min(), model.y_max());
  const Decision counted = kind == ErrorKind::false_alarm ? Decision::reject_h0
                                                          : Decision::accept_h0;
  workers = std::clamp(workers, 1, 16);

  std::vector<long> counts(workers, 0);
  auto work = [&](int w) {
    std::vector<double> obs(test.n);
    long local = 0;
    for (long r = w; r < runs; r += workers) {
      CounterRng rng(seed, static_cast<std::uint64_t>(r));
      for (int i = 0; i < test.n; ++i) obs[i] = sampler.sample(rng);
      if (decide(test, model, obs, rng) == counted) ++local;
    }
    counts[w] = local;
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  long hits = 0;
  for (long c : counts) hits += c;
  ErrorEstimate est;
  est.runs = runs;
  est.rate = static_cast<double>(hits) / static_cast<double>(runs);
  est.std_error = std::sqrt(std::max(est.rate * (1.0 - est.rate), 1e-300) /
                            static_cast<double>(runs));
  return est;
}

}  // namespace robdet
