#include "robdet/limits.hpp"

#include <algorithm>
#include <cmath>

#include "robdet/errors.hpp"

namespace robdet {

namespace {

// Tilted-density moment ∫ w(y;u) log l(y) dy, normalized by k(u). Evaluated
// against the peak of the tilt exponent so large log-ratios cannot overflow.
struct TiltMoments {
  double log_k;
  double mean_logl;  // E_{w/k}[log l]
};

TiltMoments tilt_moments(const NominalModel& model, double u, const Quadrature& q) {
  auto exponent = [&](double y) {
    return u * model.f1_logpdf(y) + (1.0 - u) * model.f0_logpdf(y);
  };
  const double log_k = log_integrate_exp(exponent, model.support(), q);
  const double mean = integrate(
      [&](double y) { return std::exp(exponent(y) - log_k) * model.log_lr(y); }, model.support(),
      q);
  return {log_k, mean};
}

}  // namespace

double log_tilt_norm(const NominalModel& model, double u, const Quadrature& q) {
  auto exponent = [&](double y) {
    return u * model.f1_logpdf(y) + (1.0 - u) * model.f0_logpdf(y);
  };
  return log_integrate_exp(exponent, model.support(), q);
}

LimitCurvePoint tilt_eps_pair(const NominalModel& model, double u, const Quadrature& q) {
  const TiltMoments m = tilt_moments(model, u, q);
  LimitCurvePoint p;
  p.u = u;
  p.eps0 = -m.log_k + u * m.mean_logl;
  p.eps1 = -m.log_k + (u - 1.0) * m.mean_logl;
  return p;
}

LimitCurve m_limit_curve(const NominalModel& model, int grid_size, const Quadrature& q) {
  if (grid_size < 16) throw OutOfRange("m_limit_curve: grid_size must be >= 16");
  LimitCurve curve;
  curve.samples.reserve(grid_size);
  for (int i = 0; i < grid_size; ++i) {
    const double u = static_cast<double>(i) / (grid_size - 1);
    curve.samples.push_back(tilt_eps_pair(model, u, q));
  }
  return curve;
}

double m_max_partner(const NominalModel& model, double eps_known, int which, const Quadrature& q) {
  if (which != 0 && which != 1) throw OutOfRange("m_max_partner: which must be 0 or 1");
  if (eps_known < 0.0) throw OutOfRange("m_max_partner: eps_known must be >= 0");
  auto known_of = [&](double u) {
    const LimitCurvePoint p = tilt_eps_pair(model, u, q);
    return which == 0 ? p.eps0 : p.eps1;
  };
  const double at_end = known_of(which == 0 ? 1.0 : 0.0);
  if (eps_known > at_end + 1e-12)
    throw OutOfRange("m_max_partner: eps_known exceeds the divergence endpoint");

  // eps0 increases and eps1 decreases in u, so bisection on the matching
  // endpoint orientation finds the unique u*.
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const bool below = known_of(mid) < eps_known;
    const bool move_lo = (which == 0) ? below : !below;
    (move_lo ? lo : hi) = mid;
    if (hi - lo < 1e-10) break;
  }
  const LimitCurvePoint p = tilt_eps_pair(model, 0.5 * (lo + hi), q);
  return which == 0 ? p.eps1 : p.eps0;
}

double chernoff_distance(const NominalModel& model, const Quadrature& q) {
  // -log k(u) is concave in u; golden-section search over [0, 1].
  const double phi = 0.61803398874989485;
  double a = 0.0, b = 1.0;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = -log_tilt_norm(model, x1, q), f2 = -log_tilt_norm(model, x2, q);
  while (b - a > 1e-10) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = -log_tilt_norm(model, x1, q);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = -log_tilt_norm(model, x2, q);
    }
  }
  return std::max(f1, f2);
}

double bhattacharyya_distance(const NominalModel& model, const Quadrature& q) {
  return -log_tilt_norm(model, 0.5, q);
}

double h_limit(const NominalModel& model, double eps_known, int which, const Quadrature& q) {
  if (which != 0 && which != 1) throw OutOfRange("h_limit: which must be 0 or 1");
  if (eps_known < 0.0 || eps_known >= 1.0) throw OutOfRange("h_limit: eps_known must be in [0,1)");
  const NominalModel* m = &model;
  NominalModel swapped = model.swapped();
  if (which == 1) m = &swapped;

  const double k = 1.0 - eps_known;
  const LogLrProfile& prof = m->profile();
  auto f = [&](double u) {
    const double log_ku = std::log(k * u);
    const IntervalUnion region = prof.below(log_ku);
    const double p0 = integrate([&](double y) { return m->f0(y); }, region, q);
    const double p1 = integrate([&](double y) { return m->f1(y); }, region, q);
    return k * u * p0 - p1 - u + 1.0;
  };

  // f is continuous, strictly decreasing while k*u is below ess sup l, and
  // nonpositive beyond it; the first crossing gives the overlap point.
  const double u_top = std::exp(prof.ess_sup()) / k;
  double lo = 1.0;
  if (f(lo) <= 0.0) return 0.0;  // hypotheses already touching at eps=0
  double hi = std::min(u_top * (1.0 + 1e-9), 1e12);
  if (f(hi) > 0.0) hi = u_top + 1.0;  // plateau (k == 1): root sits at the plateau edge
  for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  const double u_root = 0.5 * (lo + hi);
  return std::clamp(1.0 - 1.0 / u_root, 0.0, 1.0);
}

}  // namespace robdet
