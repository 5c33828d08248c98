#pragma once

#include <cstdint>
#include <span>

#include "robdet/lfd.hpp"
#include "robdet/model.hpp"
#include "robdet/rng.hpp"

namespace robdet {

enum class TestForm { m_test, h_test, c_test, nominal, soft_sign, sign_test };

enum class Decision { accept_h0, reject_h0 };

/// n-sample robust test in the log domain. Decisions are deterministic
/// given the observation vector and the randomization stream; exact ties at
/// the threshold are resolved by the rule's randomization.
struct FixedSampleTest {
  TestForm form = TestForm::nominal;
  int n = 1;
  PiecewiseLLR llr = PiecewiseLLR::nominal();
  // Display parameters for the form-specific threshold.
  double log_ll = 0.0;  // m/c
  double log_lu = 0.0;
  double log_cl = 0.0;  // h: clip thresholds on l; c: thresholds on the inner ratio
  double log_cu = 0.0;
};

FixedSampleTest make_nominal_test(int n);
FixedSampleTest make_m_test(const NominalModel& model, const MTestSolution& sol, int n);
FixedSampleTest make_h_test(const NominalModel& model, const HTestSolution& sol, int n);
FixedSampleTest make_c_test(const NominalModel& model, const CompositeSolution& sol, int n);
FixedSampleTest make_soft_sign_test(const NominalModel& model, const MTestSolution& sol, int n);
FixedSampleTest make_sign_test(int n);

Decision decide(const FixedSampleTest& test, const NominalModel& model,
                std::span<const double> observations, CounterRng& rng);

/// Soft sign statistic: the sum of the randomized rule over the samples.
double limiting_m_statistic(const NominalModel& model, const MTestSolution& sol,
                            std::span<const double> observations);

enum class ErrorKind { false_alarm, miss };

struct ErrorEstimate {
  double rate = 0.0;
  double std_error = 0.0;
  long runs = 0;
};

/// Monte Carlo error rate of the test when observations follow obs_density.
/// Each run draws its own substream keyed by the run index, so the result
/// is independent of how runs are partitioned across workers.
ErrorEstimate empirical_error(const FixedSampleTest& test, const NominalModel& model,
                              const Density& obs_density, ErrorKind kind, long runs,
                              std::uint64_t seed, int workers = 2);

}  // namespace robdet
