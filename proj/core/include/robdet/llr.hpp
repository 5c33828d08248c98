#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "robdet/lfd.hpp"
#include "robdet/model.hpp"

namespace robdet {

/// Distribution on the real line with a gridded continuous part plus point
/// masses. The continuous part is stored as cell-averaged density values
/// between consecutive edges, so summing pdf[i] * (edges[i+1]-edges[i])
/// recovers the continuous mass exactly.
struct MixedDensity {
  struct Atom {
    double x = 0.0;
    double mass = 0.0;
    // Fraction of the atom assigned to "reject H0" when a test threshold
    // lands exactly on it; NaN when no randomization applies.
    double reject_fraction = std::numeric_limits<double>::quiet_NaN();
  };

  std::vector<double> edges;  // n+1 ordered cell edges (empty or >= 2)
  std::vector<double> pdf;    // n cell-averaged values
  std::vector<Atom> atoms;    // sorted by location

  double continuous_mass() const;
  double atom_mass() const;
  double total_mass() const { return continuous_mass() + atom_mass(); }
  double mean() const;
  double variance() const;
};

/// Distribution of log l̂(Y) for Y following the selected LFD of a KL-ball
/// solution: two shifted copies of the nominal log-ratio density and a
/// randomized point mass at zero.
MixedDensity llr_density_m(const NominalModel& model, const MTestSolution& sol, int hypothesis,
                           int cells = 4096, const Quadrature& q = {});

/// Same for the clipped test: a shifted copy of the nominal log-ratio
/// density between point masses at the two clip values.
MixedDensity llr_density_h(const NominalModel& model, const HTestSolution& sol, int hypothesis,
                           int cells = 4096, const Quadrature& q = {});

/// Composite case: clipped atoms, shifted inner pieces, and the randomized
/// middle atom.
MixedDensity llr_density_c(const NominalModel& model, const CompositeSolution& sol, int hypothesis,
                           int cells = 4096, const Quadrature& q = {});

/// Distribution of log l̂(Y) for Y ~ obs, for any piecewise ratio and any
/// observation density. Flat branches become atoms; when a flat branch
/// coincides with the randomized tie region of the rule, the atom carries
/// the conditional rejection fraction. If step > 0 the cell edges are
/// aligned to integer multiples of step (lattice-aligned kernels for the
/// sequential recursion); cells is ignored in that case.
MixedDensity statistic_distribution(const NominalModel& model, const PiecewiseLLR& llr,
                                    const Density& obs, int cells = 4096, const Quadrature& q = {},
                                    double step = 0.0);

/// (alpha, beta) of the single-sample threshold test: alpha is the mass of
/// d0 above t, beta the mass of d1 below t; an atom sitting exactly on t
/// contributes through its rejection fraction (1/2 when unset).
std::pair<double, double> error_probabilities(const MixedDensity& d0, const MixedDensity& d1,
                                              double threshold);

/// log E[exp(u log l̂(Y))] under the observation density.
double log_mgf(const NominalModel& model, const PiecewiseLLR& llr, const Density& obs, double u,
               const Quadrature& q = {});

double llr_mean(const NominalModel& model, const PiecewiseLLR& llr, const Density& obs,
                const Quadrature& q = {});
double llr_variance(const NominalModel& model, const PiecewiseLLR& llr, const Density& obs,
                    const Quadrature& q = {});

struct RateValue {
  double value = 0.0;
  double argmax_u = 0.0;
};

/// Large-deviation rate I(t) = sup_u (t u - log M(u)) by golden-section on
/// the concave objective; also returns the maximizing tilt.
RateValue rate_function(const NominalModel& model, const PiecewiseLLR& llr, const Density& obs,
                        double t, const Quadrature& q = {});

struct RatePoint {
  double t = 0.0;
  double i0 = 0.0;
  double i1 = 0.0;
  double argmax_u0 = 0.0;
  double argmax_u1 = 0.0;
};

}  // namespace robdet
