#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "robdet/interval.hpp"
#include "robdet/quadrature.hpp"

namespace robdet {

/// Gaussian descriptor; sigma is the standard deviation.
struct GaussianSpec {
  double mean = 0.0;
  double sigma = 1.0;
};

/// A probability density on the model support, held in log space so tail
/// values never underflow before they reach a quadrature node. Piecewise
/// densities list the support points where they are not smooth, so that
/// quadrature can split panels there.
struct Density {
  std::function<double(double)> logpdf;
  std::vector<double> breakpoints;
  double pdf(double y) const { return std::exp(logpdf(y)); }
};

/// Scan of the nominal log likelihood ratio over the truncated support.
/// Level sets {l < c}, {l > c} and bands are resolved to interval unions by
/// locating sign changes of log l(y) - log c on the scan grid and refining
/// each bracket by bisection. A grid of 4096 cells resolves every level set
/// of the smooth nominal families of interest; sub-cell dips are beyond the
/// scan resolution by construction.
class LogLrProfile {
 public:
  LogLrProfile(std::function<double(double)> log_lr, double y_min, double y_max,
               int scan_cells = 4096);

  double y_min() const { return y_min_; }
  double y_max() const { return y_max_; }
  IntervalUnion support() const { return IntervalUnion::single(y_min_, y_max_); }

  double ess_inf() const { return ess_inf_; }  // essential infimum of log l
  double ess_sup() const { return ess_sup_; }
  bool monotone_nondecreasing() const { return monotone_; }

  /// {y : log l(y) <= t} as a union of closed intervals.
  IntervalUnion below(double t) const;
  IntervalUnion above(double t) const { return below_complement(t); }
  IntervalUnion band(double t_lo, double t_hi) const;

  double operator()(double y) const { return log_lr_(y); }

 private:
  IntervalUnion below_complement(double t) const;

  std::function<double(double)> log_lr_;
  double y_min_, y_max_;
  std::vector<double> grid_;
  std::vector<double> values_;
  double ess_inf_ = 0.0, ess_sup_ = 0.0;
  bool monotone_ = false;
};

/// Nominal density pair (f0, f1) with truncated support. All densities are
/// evaluated in log space; the likelihood ratio l = f1/f0 is finite on the
/// support interior. The dominating measure is Lebesgue on [y_min, y_max].
class NominalModel {
 public:
  NominalModel(std::function<double(double)> f0_logpdf, std::function<double(double)> f1_logpdf,
               double y_min, double y_max, std::string family_tag = "custom");

  /// Truncation bounds leave < mass_tol of each nominal outside the support.
  static NominalModel gaussian_pair(GaussianSpec f0, GaussianSpec f1, double mass_tol = 1e-10);

  double f0_logpdf(double y) const { return f0_(y); }
  double f1_logpdf(double y) const { return f1_(y); }
  double logpdf(int hypothesis, double y) const { return hypothesis == 0 ? f0_(y) : f1_(y); }
  double f0(double y) const { return std::exp(f0_(y)); }
  double f1(double y) const { return std::exp(f1_(y)); }
  double log_lr(double y) const { return f1_(y) - f0_(y); }
  double lr(double y) const { return std::exp(log_lr(y)); }

  double y_min() const { return y_min_; }
  double y_max() const { return y_max_; }
  IntervalUnion support() const { return IntervalUnion::single(y_min_, y_max_); }

  const LogLrProfile& profile() const { return *profile_; }
  const std::string& family_tag() const { return family_tag_; }
  const std::optional<std::pair<GaussianSpec, GaussianSpec>>& gaussian() const { return gaussian_; }

  Density density(int hypothesis) const;

  /// Model with the roles of the hypotheses exchanged (l -> 1/l).
  NominalModel swapped() const;

  /// True when f0(y) == f1(-y) within tol on the scan grid and the support
  /// is symmetric about the origin.
  bool is_symmetric(double tol = 1e-9) const;

 private:
  std::function<double(double)> f0_, f1_;
  double y_min_, y_max_;
  std::string family_tag_;
  std::optional<std::pair<GaussianSpec, GaussianSpec>> gaussian_;
  std::shared_ptr<const LogLrProfile> profile_;
};

/// KL divergence D(g, f) = ∫ g ln(g/f) over the support. Throws
/// SupportMismatch when g carries mass where f has essentially none.
double kl_divergence(const Density& g, const Density& f, const IntervalUnion& support,
                     const Quadrature& q = {});

/// Divergences between the two nominals of a model.
double kl_divergence(const NominalModel& model, int from_hypothesis, int to_hypothesis,
                     const Quadrature& q = {});

struct DivergenceSuite {
  double kl_01 = 0.0;       // D(f0, f1)
  double kl_10 = 0.0;       // D(f1, f0)
  double chi2_sym = 0.0;    // chi^2(f0,f1) + chi^2(f1,f0); truncation sensitive for heavy tails
  double hellinger2 = 0.0;  // squared Hellinger distance, in [0, 1]
};

DivergenceSuite divergence_suite(const NominalModel& model, const Quadrature& q = {});

}  // namespace robdet
