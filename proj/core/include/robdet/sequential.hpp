#pragma once

#include <cstdint>
#include <vector>

#include "robdet/lfd.hpp"
#include "robdet/llr.hpp"
#include "robdet/model.hpp"

namespace robdet {

/// Threshold pair and evaluation settings for the sequential test. The walk
/// continues while log_t_l < S_n < log_t_u; S_n >= log_t_u rejects H0 and
/// S_n <= log_t_l accepts it (rejection is checked first when the band is
/// degenerate).
struct SprtConfig {
  double log_t_l = -3.0;
  double log_t_u = 3.0;
  int max_n = 10000;
  long mc_runs = 100000;
  std::uint64_t seed = 1;
  double grid_step = 0.005;      // lattice step of the exact recursion
  double truncation_tol = 1e-3;  // accepted in-band mass at max_n
  int workers = 2;

  void validate() const;
};

/// Outcome of running the sequential test under one observation model.
/// expected_n is the mean stopping time over stopped paths; stop_dist[i] is
/// P[N = i+1] and sums to 1 - truncated_mass.
struct SprtRun {
  double p_reject = 0.0;
  double p_accept = 0.0;
  double truncated_mass = 0.0;
  double expected_n = 0.0;
  std::vector<double> stop_dist;
  // Monte Carlo dispersion (zero for the exact recursion).
  double se_reject = 0.0;
  double se_accept = 0.0;
  double se_n = 0.0;
  long runs = 0;
};

/// Paired evaluation: alpha from the H0-model run, beta from the H1-model
/// run, expected sample counts from both.
struct SprtResult {
  double alpha = 0.0;
  double beta = 0.0;
  double en0 = 0.0;
  double en1 = 0.0;
  SprtRun run0;
  SprtRun run1;
};

/// Exact stopping-time recursion: the single-sample log l̂ distribution is
/// folded onto a lattice of step grid_step (atoms as mean-preserving
/// two-point splits, exact when on-lattice) and the in-band state density is
/// convolved with it step by step. Throws TruncationExceeded when more than
/// truncation_tol of the mass is still in the band at max_n.
SprtRun sprt_exact_run(const MixedDensity& llr_density, const SprtConfig& config);

SprtResult sprt_exact(const MixedDensity& d0, const MixedDensity& d1, const SprtConfig& config);

/// Seeded Monte Carlo walk of S_n = sum log l̂(Y_i), Y_i ~ obs.
SprtRun sprt_monte_carlo_run(const NominalModel& model, const PiecewiseLLR& llr,
                             const Density& obs, const SprtConfig& config);

SprtResult sprt_monte_carlo(const NominalModel& model, const PiecewiseLLR& llr,
                            const Density& obs0, const Density& obs1, const SprtConfig& config);

enum class TestFamily { m, h, a, c };

struct EpsParams {
  double eps0 = 0.0;
  double eps1 = 0.0;
  double eps0_c = 0.0;
  double eps1_c = 0.0;
};

/// One grid point of the robustness scan: the chosen family's sequential
/// test evaluated under its own LFD observations and under the alternative
/// family's LFDs (a-test for m/c, m-test for a, nominals for h).
struct ScanPoint {
  double log_tl = 0.0;
  double log_tu = 0.0;
  SprtRun own0, alt0;  // observation model for hypothesis 0
  SprtRun own1, alt1;  // observation model for hypothesis 1
};

std::vector<ScanPoint> minimax_scan(const NominalModel& model, TestFamily family,
                                    const EpsParams& eps, const std::vector<double>& log_tls,
                                    const std::vector<double>& log_tus, const SprtConfig& config,
                                    bool exact = false, int hypothesis_mask = 3);

}  // namespace robdet
