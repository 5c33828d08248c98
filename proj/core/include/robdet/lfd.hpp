#pragma once

#include <vector>

#include "robdet/model.hpp"
#include "robdet/quadrature.hpp"
#include "robdet/rng.hpp"

namespace robdet {

/// Robust likelihood ratio as a piecewise map of the nominal log ratio.
/// Each branch covers a log-l interval and evaluates
///     log l̂ = log_coef + power * log l,
/// with contiguous branches that agree at the breakpoints. Every solved
/// family produces powers >= 0, so l̂ is non-decreasing in l.
class PiecewiseLLR {
 public:
  struct Branch {
    double logl_lo;
    double logl_hi;
    double log_coef;
    double power;
  };

  PiecewiseLLR(std::vector<Branch> branches, double delta_logl_lo, double delta_logl_hi);

  /// Identity map (the nominal likelihood ratio itself).
  static PiecewiseLLR nominal();

  double log_eval(double logl) const;
  double eval(double logl) const;
  double log_eval_y(const NominalModel& model, double y) const {
    return log_eval(model.log_lr(y));
  }

  /// Randomized decision rule against the unit threshold: 0 below the tie
  /// region, 1 above, log-interpolated inside it (a jump to 1/2 when the tie
  /// region is a single point).
  double delta(double logl) const;
  double delta_y(const NominalModel& model, double y) const { return delta(model.log_lr(y)); }

  /// Largest log l with log l̂ <= t (so {l̂ <= c} maps to a level set of l).
  double logl_upper_bound(double t) const;
  /// Smallest log l with log l̂ >= t.
  double logl_lower_bound(double t) const;

  const std::vector<Branch>& branches() const { return branches_; }
  double delta_logl_lo() const { return delta_lo_; }
  double delta_logl_hi() const { return delta_hi_; }

 private:
  std::vector<Branch> branches_;
  double delta_lo_, delta_hi_;
};

/// Solved KL-ball least favorable pair. The thresholds (l_l, l_u) bracket 1,
/// the constructed densities integrate to one and sit on the ball boundary,
/// and l̂ is l/l_l below the box, 1 inside it, l/l_u above it.
struct MTestSolution {
  double l_l = 1.0;
  double l_u = 1.0;
  double k = 1.0;
  double z = 1.0;
  double exponent = 0.0;  // log k / log(l_u / l_l)
  double eps0 = 0.0;
  double eps1 = 0.0;
  double residual0 = 0.0;
  double residual1 = 0.0;
  int iterations = 0;

  bool degenerate() const { return l_l == 1.0 && l_u == 1.0; }
  double log_ll() const;
  double log_lu() const;
};

/// Clipped-likelihood-ratio (contamination) solution. c_l and c_u are the
/// clip thresholds on the nominal ratio and b = (1-eps1)/(1-eps0).
struct HTestSolution {
  double c_l = 0.0;
  double c_u = 0.0;
  double b = 1.0;
  double eps0_c = 0.0;
  double eps1_c = 0.0;
  double residual_l = 0.0;
  double residual_u = 0.0;
  bool nominal_lr_monotone = true;
};

/// Exponential-tilt (asymptotically robust) solution.
struct ATestSolution {
  double u = 0.0;
  double v = 0.0;
  double ku = 1.0;   // k(u)
  double k1v = 1.0;  // k(1 - v)
  double threshold = 0.0;
  double eps0 = 0.0;
  double eps1 = 0.0;
  double residual_u = 0.0;
  double residual_v = 0.0;
};

/// KL ball further contaminated: the inner pair is clipped at thresholds
/// (c_l, c_u) on the inner ratio ĝ1/ĝ0, so l̂ stays within [b c_l, b c_u].
struct CompositeSolution {
  MTestSolution inner;
  double c_l = 0.0;
  double c_u = 0.0;
  double b = 1.0;
  double eps0_c = 0.0;
  double eps1_c = 0.0;
  bool nominal_lr_monotone = true;
};

/// Contamination clip of an arbitrary solved pair (g0, g1) with ratio map
/// `inner`: thresholds on r = g1/g0 solving the clipped-test equations under
/// the pair itself, so the contaminated pair integrates to one.
struct ClippedPair {
  double c_l = 0.0;
  double c_u = 0.0;
  double b = 1.0;
  double eps0_c = 0.0;
  double eps1_c = 0.0;
  double residual_l = 0.0;
  double residual_u = 0.0;
};

ClippedPair clip_pair(const NominalModel& model, const PiecewiseLLR& inner, const Density& g0,
                      const Density& g1, double eps0_c, double eps1_c, const Quadrature& q = {});

Density clipped_density(const NominalModel& model, const ClippedPair& clip,
                        const PiecewiseLLR& inner, const Density& g0, const Density& g1,
                        int hypothesis);

PiecewiseLLR clipped_llr(const ClippedPair& clip, const PiecewiseLLR& inner);

MTestSolution solve_m_test(const NominalModel& model, double eps0, double eps1,
                           const Quadrature& q = {});

/// One-dimensional fast path for f0(y) = f1(-y) and equal radii; returns
/// l_l = 1/l_u and k = 1/l_u.
MTestSolution solve_m_test_symmetric(const NominalModel& model, double eps,
                                     const Quadrature& q = {});

HTestSolution solve_h_test(const NominalModel& model, double eps0_c, double eps1_c,
                           const Quadrature& q = {});

ATestSolution solve_a_test(const NominalModel& model, double eps0, double eps1,
                           const Quadrature& q = {});

CompositeSolution solve_c_test(const NominalModel& model, double eps0, double eps1, double eps0_c,
                               double eps1_c, const Quadrature& q = {});

Density lfd_density(const NominalModel& model, const MTestSolution& sol, int hypothesis);
Density lfd_density(const NominalModel& model, const HTestSolution& sol, int hypothesis);
Density lfd_density(const NominalModel& model, const ATestSolution& sol, int hypothesis);
Density lfd_density(const NominalModel& model, const CompositeSolution& sol, int hypothesis);

PiecewiseLLR robust_llr(const NominalModel& model, const MTestSolution& sol);
PiecewiseLLR robust_llr(const NominalModel& model, const HTestSolution& sol);
PiecewiseLLR robust_llr(const NominalModel& model, const ATestSolution& sol);
PiecewiseLLR robust_llr(const NominalModel& model, const CompositeSolution& sol);

/// Random member of the KL ball around the chosen nominal, lying on the
/// ball boundary (within a small one-sided tolerance). Built by tilting the
/// nominal with a smooth bounded random score and bisecting the tilt until
/// the divergence reaches eps.
Density random_ball_member(const NominalModel& model, int hypothesis, double eps, CounterRng& rng,
                           const Quadrature& q = {});

/// ∫ δ̂ g (hypothesis 0) or ∫ (1-δ̂) g (hypothesis 1): the single-sample
/// error probability of the randomized rule under density g.
double error_probability(const NominalModel& model, const PiecewiseLLR& llr, const Density& g,
                         int hypothesis, const Quadrature& q = {});

}  // namespace robdet
