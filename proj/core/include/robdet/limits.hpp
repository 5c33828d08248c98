#pragma once

#include <vector>

#include "robdet/model.hpp"
#include "robdet/quadrature.hpp"

namespace robdet {

/// One sample of the maximum-radius trade-off curve for KL uncertainty
/// balls: the pair (eps0(u), eps1(u)) of divergences from the nominals to
/// the exponential-tilt density w(y;u)/k(u).
struct LimitCurvePoint {
  double u = 0.0;
  double eps0 = 0.0;
  double eps1 = 0.0;
};

struct LimitCurve {
  std::vector<LimitCurvePoint> samples;
};

/// log k(u) = log ∫ f1^u f0^(1-u) over the support.
double log_tilt_norm(const NominalModel& model, double u, const Quadrature& q = {});

/// (eps0(u), eps1(u)) for a single tilt parameter.
LimitCurvePoint tilt_eps_pair(const NominalModel& model, double u, const Quadrature& q = {});

/// eps0 is increasing and eps1 decreasing in u; endpoints are
/// (0, D(f0,f1)) at u=0 and (D(f1,f0), 0) at u=1.
LimitCurve m_limit_curve(const NominalModel& model, int grid_size, const Quadrature& q = {});

/// Given eps_{which}, returns the largest feasible radius for the other
/// hypothesis, i.e. eps_{1-which}(u*) at the unique u* matching eps_known.
double m_max_partner(const NominalModel& model, double eps_known, int which,
                     const Quadrature& q = {});

/// sup_u -log k(u); equals the equal-radius feasibility limit.
double chernoff_distance(const NominalModel& model, const Quadrature& q = {});

/// -log ∫ sqrt(f0 f1); the u = 1/2 value, and the equal-radius limit for
/// symmetric nominals.
double bhattacharyya_distance(const NominalModel& model, const Quadrature& q = {});

/// Maximum contamination radius for the other hypothesis of the clipped
/// test, given eps_known for hypothesis `which`.
double h_limit(const NominalModel& model, double eps_known, int which, const Quadrature& q = {});

}  // namespace robdet
