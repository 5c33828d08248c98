#include "robdet/lfd.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "robdet/errors.hpp"
#include "robdet/limits.hpp"

namespace robdet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double mass(const NominalModel& model, int hyp, const IntervalUnion& region, const Quadrature& q) {
  return integrate([&, hyp](double y) { return std::exp(model.logpdf(hyp, y)); }, region, q);
}

// y-locations where log l crosses the given thresholds; these are the only
// points where a piecewise LFD density loses smoothness.
std::vector<double> level_boundaries(const LogLrProfile& prof,
                                     std::initializer_list<double> thresholds) {
  std::vector<double> pts;
  for (double t : thresholds) {
    if (!std::isfinite(t)) continue;
    const IntervalUnion region = prof.below(t);
    for (const Interval& part : region.parts()) {
      if (part.lo > prof.y_min()) pts.push_back(part.lo);
      if (part.hi < prof.y_max()) pts.push_back(part.hi);
    }
  }
  std::sort(pts.begin(), pts.end());
  return pts;
}

// ---------------------------------------------------------------------------
// KL-ball (m-test) solver internals.
//
// Everything is expressed in (x0, x1) = (log l_l, log l_u). The two residuals
// are the divergence constraints D(ĝ0,f0) = eps0 and D(ĝ1,f1) = eps1 written
// out over the three level-set regions of the nominal ratio.
// ---------------------------------------------------------------------------

struct MParts {
  double x0 = 0.0, x1 = 0.0;
  double k = 0.0, z = 0.0, a = 0.0;
  double r0 = 0.0, r1 = 0.0;
  double mid_mass = 0.0;   // ∫ (l/l_l)^a f1 over the middle band
  double mid_shift = 0.0;  // same integrand times (log l - x0)
  bool valid = false;
};

MParts m_parts(const NominalModel& model, double x0, double x1, double eps0, double eps1,
               const Quadrature& q) {
  MParts p;
  p.x0 = x0;
  p.x1 = x1;
  const LogLrProfile& prof = model.profile();
  const IntervalUnion lower = prof.below(x0);
  const IntervalUnion upper = prof.above(x1);
  const IntervalUnion middle = prof.band(x0, x1);
  if (lower.is_empty() || upper.is_empty()) return p;

  const double l_l = std::exp(x0), l_u = std::exp(x1);
  const double mass0_lo = mass(model, 0, lower, q);
  const double mass1_lo = mass(model, 1, lower, q);
  const double mass0_hi = mass(model, 0, upper, q);
  const double mass1_hi = mass(model, 1, upper, q);

  // expm1 keeps the (l_l - l) and (l - l_u) weights accurate near the box.
  const double num = l_l * integrate(
                               [&](double y) {
                                 return -std::expm1(model.log_lr(y) - x0) * model.f0(y);
                               },
                               lower, q);
  const double den = l_u * integrate(
                               [&](double y) {
                                 return std::expm1(model.log_lr(y) - x1) * model.f0(y);
                               },
                               upper, q);
  if (!(num > 0.0) || !(den > 0.0)) return p;

  p.k = num / den;
  p.a = std::log(p.k) / (x1 - x0);
  auto tilt = [&](double y) {
    return std::exp(model.f1_logpdf(y) + p.a * (model.log_lr(y) - x0));
  };
  p.mid_mass = middle.is_empty() ? 0.0 : integrate(tilt, middle, q);
  p.mid_shift = middle.is_empty()
                    ? 0.0
                    : integrate([&](double y) { return tilt(y) * (model.log_lr(y) - x0); },
                                middle, q);
  p.z = mass1_lo + p.mid_mass + p.k * mass1_hi;
  if (!(p.z > 0.0)) return p;

  const double mid_logl = p.mid_shift + x0 * p.mid_mass;  // ∫ (l/l_l)^a log(l) f1
  const double lhs0 = -std::log(p.z) + (l_l * x0 * mass0_lo + mid_logl + p.a * p.mid_shift +
                                        p.k * l_u * std::log(p.k * l_u) * mass0_hi) /
                                           p.z;
  const double lhs1 =
      -std::log(p.z) + (p.a * p.mid_shift + p.k * std::log(p.k) * mass1_hi) / p.z;
  p.r0 = lhs0 - eps0;
  p.r1 = lhs1 - eps1;
  p.valid = std::isfinite(p.r0) && std::isfinite(p.r1);
  return p;
}

struct MDomain {
  double x0_min, x0_max;  // x0 in [x0_min, x0_max], x0_max < 0
  double x1_min, x1_max;
};

MDomain m_domain(const NominalModel& model) {
  const LogLrProfile& prof = model.profile();
  const double margin = 1e-6 * (prof.ess_sup() - prof.ess_inf());
  return {prof.ess_inf() + margin, -1e-10, 1e-10, prof.ess_sup() - margin};
}

double clampd(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

double res_norm(const MParts& p) {
  if (!p.valid) return kInf;
  return std::max(std::abs(p.r0), std::abs(p.r1));
}

// Damped Newton in (x0, x1) with a finite-difference Jacobian. Returns true
// when the residual norm drops below tol.
bool newton_m(const NominalModel& model, double eps0, double eps1, const Quadrature& q,
              const MDomain& dom, double tol, int max_iters, double& x0, double& x1,
              MParts& parts, int& iters) {
  parts = m_parts(model, x0, x1, eps0, eps1, q);
  for (iters = 0; iters < max_iters; ++iters) {
    if (res_norm(parts) < tol) return true;
    if (!parts.valid) return false;

    const double h0 = 1e-6 * std::max(std::abs(x0), 0.02);
    const double h1 = 1e-6 * std::max(std::abs(x1), 0.02);
    const MParts p0m = m_parts(model, clampd(x0 - h0, dom.x0_min, dom.x0_max), x1, eps0, eps1, q);
    const MParts p0p = m_parts(model, clampd(x0 + h0, dom.x0_min, dom.x0_max), x1, eps0, eps1, q);
    const MParts p1m = m_parts(model, x0, clampd(x1 - h1, dom.x1_min, dom.x1_max), eps0, eps1, q);
    const MParts p1p = m_parts(model, x0, clampd(x1 + h1, dom.x1_min, dom.x1_max), eps0, eps1, q);
    if (!p0m.valid || !p0p.valid || !p1m.valid || !p1p.valid) return false;

    const double j00 = (p0p.r0 - p0m.r0) / (p0p.x0 - p0m.x0);
    const double j10 = (p0p.r1 - p0m.r1) / (p0p.x0 - p0m.x0);
    const double j01 = (p1p.r0 - p1m.r0) / (p1p.x1 - p1m.x1);
    const double j11 = (p1p.r1 - p1m.r1) / (p1p.x1 - p1m.x1);
    const double det = j00 * j11 - j01 * j10;
    if (!std::isfinite(det) || std::abs(det) < 1e-300) return false;
    const double dx0 = -(j11 * parts.r0 - j01 * parts.r1) / det;
    const double dx1 = -(-j10 * parts.r0 + j00 * parts.r1) / det;

    bool stepped = false;
    const double base = res_norm(parts);
    for (double lam = 1.0; lam > 1e-4; lam *= 0.5) {
      const double nx0 = clampd(x0 + lam * dx0, dom.x0_min, dom.x0_max);
      const double nx1 = clampd(x1 + lam * dx1, dom.x1_min, dom.x1_max);
      const MParts trial = m_parts(model, nx0, nx1, eps0, eps1, q);
      if (trial.valid && res_norm(trial) < base * (1.0 - 1e-4 * lam)) {
        x0 = nx0;
        x1 = nx1;
        parts = trial;
        stepped = true;
        break;
      }
    }
    if (!stepped) return false;
  }
  return res_norm(parts) < tol;
}

// Nested-bisection fallback: for a fixed x1, the eps1 residual is solved in
// x0 (scanning for a sign change, then bisecting), and the remaining eps0
// residual is driven to zero over x1 the same way.
bool nested_bisection_m(const NominalModel& model, double eps0, double eps1, const Quadrature& q,
                        const MDomain& dom, double tol, double& x0_out, double& x1_out,
                        MParts& parts) {
  auto inner_x0 = [&](double x1, double& x0_root) {
    const int n = 48;
    double prev_x = dom.x0_max, prev_r = 0.0;
    bool have_prev = false;
    for (int i = 0; i <= n; ++i) {
      const double x = dom.x0_max + (dom.x0_min - dom.x0_max) * i / n;
      const MParts p = m_parts(model, x, x1, eps0, eps1, q);
      if (!p.valid) break;
      if (have_prev && (prev_r < 0.0) != (p.r1 < 0.0)) {
        double lo = std::min(prev_x, x), hi = std::max(prev_x, x);
        for (int it = 0; it < 100; ++it) {
          const double mid = 0.5 * (lo + hi);
          const MParts pm = m_parts(model, mid, x1, eps0, eps1, q);
          if (!pm.valid) return false;
          const double r_lo = m_parts(model, lo, x1, eps0, eps1, q).r1;
          if ((r_lo < 0.0) == (pm.r1 < 0.0))
            lo = mid;
          else
            hi = mid;
        }
        x0_root = 0.5 * (lo + hi);
        return true;
      }
      prev_x = x;
      prev_r = p.r1;
      have_prev = true;
    }
    return false;
  };

  const int n = 48;
  double prev_x1 = 0.0, prev_r0 = 0.0;
  bool have_prev = false;
  for (int i = 1; i <= n; ++i) {
    const double x1 = dom.x1_min + (dom.x1_max - dom.x1_min) * i / n;
    double x0 = 0.0;
    if (!inner_x0(x1, x0)) continue;
    const MParts p = m_parts(model, x0, x1, eps0, eps1, q);
    if (!p.valid) continue;
    if (have_prev && (prev_r0 < 0.0) != (p.r0 < 0.0)) {
      double lo = std::min(prev_x1, x1), hi = std::max(prev_x1, x1);
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        double x0_mid = 0.0;
        if (!inner_x0(mid, x0_mid)) return false;
        const MParts pm = m_parts(model, x0_mid, mid, eps0, eps1, q);
        double x0_lo = 0.0;
        inner_x0(lo, x0_lo);
        const double r_lo = m_parts(model, x0_lo, lo, eps0, eps1, q).r0;
        if ((r_lo < 0.0) == (pm.r0 < 0.0))
          lo = mid;
        else
          hi = mid;
        if (res_norm(pm) < tol) {
          x0_out = x0_mid;
          x1_out = mid;
          parts = pm;
          return true;
        }
      }
      double x0_fin = 0.0;
      const double x1_fin = 0.5 * (lo + hi);
      if (!inner_x0(x1_fin, x0_fin)) return false;
      parts = m_parts(model, x0_fin, x1_fin, eps0, eps1, q);
      x0_out = x0_fin;
      x1_out = x1_fin;
      return res_norm(parts) < tol * 100.0;
    }
    prev_x1 = x1;
    prev_r0 = p.r0;
    have_prev = true;
  }
  return false;
}

MTestSolution identity_m_solution() {
  MTestSolution sol;
  sol.l_l = sol.l_u = sol.k = sol.z = 1.0;
  sol.exponent = 0.0;
  return sol;
}

MTestSolution finish_m_solution(const MParts& parts, double eps0, double eps1, int iters) {
  MTestSolution sol;
  sol.l_l = std::exp(parts.x0);
  sol.l_u = std::exp(parts.x1);
  sol.k = parts.k;
  sol.z = parts.z;
  sol.exponent = parts.a;
  sol.eps0 = eps0;
  sol.eps1 = eps1;
  sol.residual0 = parts.r0;
  sol.residual1 = parts.r1;
  sol.iterations = iters;
  return sol;
}

void check_m_feasible(const NominalModel& model, double eps0, double eps1, const Quadrature& q) {
  const double d10 = kl_divergence(model, 1, 0, q);
  const double d01 = kl_divergence(model, 0, 1, q);
  if (eps0 >= d10 || eps1 >= d01)
    throw Infeasible("m-test: radius reaches the divergence endpoint");
  const double partner = m_max_partner(model, eps0, 0, q);
  if (eps1 >= partner) {
    std::ostringstream msg;
    msg << "m-test: (eps0, eps1) = (" << eps0 << ", " << eps1
        << ") lies outside the feasibility curve (max eps1 = " << partner << ")";
    throw Infeasible(msg.str());
  }
}

// ---------------------------------------------------------------------------
// Clipped-test solver internals, shared by the nominal and composite cases.
// ---------------------------------------------------------------------------

struct ClipCurves {
  std::function<double(double)> mass0_le;  // H0-side mass of {ratio <= c}, argument log c
  std::function<double(double)> mass1_le;
  double log_r_inf = 0.0;
  double log_r_sup = 0.0;
  double total0 = 1.0;
  double total1 = 1.0;
};

struct ClipSolution {
  double c_l, c_u, residual_l, residual_u;
};

ClipSolution solve_clip(const ClipCurves& cv, double eps0_c, double eps1_c) {
  if (eps0_c < 0.0 || eps0_c >= 1.0 || eps1_c < 0.0 || eps1_c >= 1.0)
    throw OutOfRange("clipped test: contamination ratios must lie in [0, 1)");

  auto h1 = [&](double log_c) {
    return (cv.total1 - cv.mass1_le(log_c)) + std::exp(log_c) * cv.mass0_le(log_c);
  };
  auto h2 = [&](double log_c) {
    return cv.mass0_le(log_c) + std::exp(-log_c) * (cv.total1 - cv.mass1_le(log_c));
  };

  ClipSolution out{std::exp(cv.log_r_inf), std::exp(cv.log_r_sup), 0.0, 0.0};
  const double span = cv.log_r_sup - cv.log_r_inf;
  if (eps1_c > 0.0) {
    const double target = 1.0 / (1.0 - eps1_c);
    double lo = cv.log_r_inf, hi = cv.log_r_sup;
    if (h1(hi) < target) throw Infeasible("clipped test: eps1 exceeds the achievable radius");
    for (int i = 0; i < 200 && hi - lo > 1e-14 * (1.0 + span); ++i) {
      const double mid = 0.5 * (lo + hi);
      (h1(mid) < target ? lo : hi) = mid;
    }
    const double log_cl = 0.5 * (lo + hi);
    out.c_l = std::exp(log_cl);
    out.residual_l = h1(log_cl) - target;
  }
  if (eps0_c > 0.0) {
    const double target = 1.0 / (1.0 - eps0_c);
    double lo = cv.log_r_inf, hi = cv.log_r_sup;
    if (h2(lo) < target) throw Infeasible("clipped test: eps0 exceeds the achievable radius");
    for (int i = 0; i < 200 && hi - lo > 1e-14 * (1.0 + span); ++i) {
      const double mid = 0.5 * (lo + hi);
      (h2(mid) > target ? lo : hi) = mid;
    }
    const double log_cu = 0.5 * (lo + hi);
    out.c_u = std::exp(log_cu);
    out.residual_u = h2(log_cu) - target;
  }
  if (!(out.c_l < out.c_u))
    throw Infeasible("clipped test: clip thresholds overlap (c_l >= c_u)");
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// PiecewiseLLR
// ---------------------------------------------------------------------------

PiecewiseLLR::PiecewiseLLR(std::vector<Branch> branches, double delta_logl_lo,
                           double delta_logl_hi)
    : branches_(std::move(branches)), delta_lo_(delta_logl_lo), delta_hi_(delta_logl_hi) {
  if (branches_.empty()) throw InvalidRegion("piecewise llr: no branches");
}

PiecewiseLLR PiecewiseLLR::nominal() {
  return PiecewiseLLR({Branch{-kInf, kInf, 0.0, 1.0}}, 0.0, 0.0);
}

double PiecewiseLLR::log_eval(double logl) const {
  std::size_t lo = 0, hi = branches_.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (logl <= branches_[mid].logl_hi)
      hi = mid;
    else
      lo = mid + 1;
  }
  const Branch& b = branches_[lo];
  return b.log_coef + b.power * logl;
}

double PiecewiseLLR::eval(double logl) const { return std::exp(log_eval(logl)); }

double PiecewiseLLR::delta(double logl) const {
  if (logl < delta_lo_) return 0.0;
  if (logl > delta_hi_) return 1.0;
  if (delta_hi_ > delta_lo_) return (logl - delta_lo_) / (delta_hi_ - delta_lo_);
  return 0.5;
}

double PiecewiseLLR::logl_upper_bound(double t) const {
  double bound = -kInf;
  for (const Branch& b : branches_) {
    if (b.power == 0.0) {
      if (b.log_coef <= t)
        bound = b.logl_hi;
      else
        break;
    } else {
      const double at_hi = b.log_coef + b.power * b.logl_hi;
      if (at_hi <= t) {
        bound = b.logl_hi;
        continue;
      }
      const double at_lo = b.log_coef + b.power * b.logl_lo;
      if (at_lo > t) break;
      bound = std::max(bound, (t - b.log_coef) / b.power);
      break;
    }
  }
  return bound;
}

double PiecewiseLLR::logl_lower_bound(double t) const {
  double bound = kInf;
  for (auto it = branches_.rbegin(); it != branches_.rend(); ++it) {
    const Branch& b = *it;
    if (b.power == 0.0) {
      if (b.log_coef >= t)
        bound = b.logl_lo;
      else
        break;
    } else {
      const double at_lo = b.log_coef + b.power * b.logl_lo;
      if (at_lo >= t) {
        bound = b.logl_lo;
        continue;
      }
      const double at_hi = b.log_coef + b.power * b.logl_hi;
      if (at_hi < t) break;
      bound = std::min(bound, (t - b.log_coef) / b.power);
      break;
    }
  }
  return bound;
}

double MTestSolution::log_ll() const { return std::log(l_l); }
double MTestSolution::log_lu() const { return std::log(l_u); }

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------

MTestSolution solve_m_test(const NominalModel& model, double eps0, double eps1,
                           const Quadrature& q) {
  q.validate();
  if (eps0 < 0.0 || eps1 < 0.0) throw OutOfRange("m-test: radii must be >= 0");
  if (eps0 == 0.0 && eps1 == 0.0) return identity_m_solution();
  if (eps0 == 0.0 || eps1 == 0.0)
    throw OutOfRange("m-test: radii must both be positive (or both zero)");
  check_m_feasible(model, eps0, eps1, q);

  const MDomain dom = m_domain(model);
  const double tol = 1e-9;
  MParts parts;
  int iters = 0;

  double x0 = clampd(-0.1, dom.x0_min, dom.x0_max);
  double x1 = clampd(0.1, dom.x1_min, dom.x1_max);
  if (newton_m(model, eps0, eps1, q, dom, tol, 80, x0, x1, parts, iters))
    return finish_m_solution(parts, eps0, eps1, iters);

  // Continuation from small scaled radii toward the requested pair.
  x0 = clampd(-0.05, dom.x0_min, dom.x0_max);
  x1 = clampd(0.05, dom.x1_min, dom.x1_max);
  int total_iters = iters;
  bool ok = true;
  for (const double scale : {0.05, 0.15, 0.3, 0.55, 0.8, 1.0}) {
    ok = newton_m(model, scale * eps0, scale * eps1, q, dom, tol, 80, x0, x1, parts, iters);
    total_iters += iters;
    if (!ok) break;
  }
  if (ok) return finish_m_solution(parts, eps0, eps1, total_iters);

  if (nested_bisection_m(model, eps0, eps1, q, dom, 1e-7, x0, x1, parts)) {
    // Bisection lands close; a short Newton polish recovers full precision.
    if (newton_m(model, eps0, eps1, q, dom, tol, 20, x0, x1, parts, iters)) total_iters += iters;
    return finish_m_solution(parts, eps0, eps1, total_iters);
  }

  std::ostringstream msg;
  msg << "m-test solver did not converge: residuals (" << parts.r0 << ", " << parts.r1
      << ") at (l_l, l_u) = (" << std::exp(x0) << ", " << std::exp(x1) << ")";
  throw NonConvergence(msg.str());
}

MTestSolution solve_m_test_symmetric(const NominalModel& model, double eps, const Quadrature& q) {
  q.validate();
  if (!model.is_symmetric()) throw NotSymmetric("symmetric m-test: f0(y) != f1(-y)");
  if (eps < 0.0) throw OutOfRange("symmetric m-test: eps must be >= 0");
  if (eps == 0.0) return identity_m_solution();
  const double limit = bhattacharyya_distance(model, q);
  if (eps >= limit) throw Infeasible("symmetric m-test: eps reaches the equal-radius limit");

  const LogLrProfile& prof = model.profile();
  auto residual = [&](double x1) {
    const double root_mass =
        integrate([&](double y) { return std::exp(0.5 * (model.f0_logpdf(y) + model.f1_logpdf(y))); },
                  prof.band(0.0, x1), q);
    const double hi_mass = mass(model, 1, prof.above(x1), q);
    const double lo_mass = mass(model, 1, prof.below(-x1), q);
    const double z = lo_mass + 2.0 * std::exp(-0.5 * x1) * root_mass + std::exp(-x1) * hi_mass;
    return -std::log(z) -
           (std::exp(-0.5 * x1) * x1 * root_mass + std::exp(-x1) * x1 * hi_mass) / z - eps;
  };

  const double margin = 1e-6 * (prof.ess_sup() - prof.ess_inf());
  double lo = 1e-10, hi = prof.ess_sup() - margin;
  if (residual(hi) < 0.0) throw Infeasible("symmetric m-test: eps beyond truncated-support range");
  for (int i = 0; i < 200 && hi - lo > 1e-14 * (1.0 + hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    (residual(mid) < 0.0 ? lo : hi) = mid;
  }
  const double x1 = 0.5 * (lo + hi);
  const MParts parts = m_parts(model, -x1, x1, eps, eps, q);
  MTestSolution sol = finish_m_solution(parts, eps, eps, 0);
  // By symmetry the solved pair satisfies l_l = 1/l_u and k = 1/l_u.
  sol.l_l = 1.0 / sol.l_u;
  return sol;
}

HTestSolution solve_h_test(const NominalModel& model, double eps0_c, double eps1_c,
                           const Quadrature& q) {
  q.validate();
  const LogLrProfile& prof = model.profile();
  ClipCurves cv;
  cv.log_r_inf = prof.ess_inf();
  cv.log_r_sup = prof.ess_sup();
  cv.mass0_le = [&](double log_c) { return mass(model, 0, prof.below(log_c), q); };
  cv.mass1_le = [&](double log_c) { return mass(model, 1, prof.below(log_c), q); };
  cv.total0 = mass(model, 0, model.support(), q);
  cv.total1 = mass(model, 1, model.support(), q);

  const ClipSolution clip = solve_clip(cv, eps0_c, eps1_c);
  HTestSolution sol;
  sol.c_l = clip.c_l;
  sol.c_u = clip.c_u;
  sol.b = (1.0 - eps1_c) / (1.0 - eps0_c);
  sol.eps0_c = eps0_c;
  sol.eps1_c = eps1_c;
  sol.residual_l = clip.residual_l;
  sol.residual_u = clip.residual_u;
  sol.nominal_lr_monotone = prof.monotone_nondecreasing();
  return sol;
}

ATestSolution solve_a_test(const NominalModel& model, double eps0, double eps1,
                           const Quadrature& q) {
  q.validate();
  if (eps0 < 0.0 || eps1 < 0.0) throw OutOfRange("a-test: radii must be >= 0");
  ATestSolution sol;
  sol.eps0 = eps0;
  sol.eps1 = eps1;

  auto solve_u = [&](bool first) {
    // eps0(u) increases and eps1(w) decreases over [0, 1].
    const double target = first ? eps0 : eps1;
    if (target == 0.0) return first ? 0.0 : 1.0;
    const LimitCurvePoint end = tilt_eps_pair(model, first ? 1.0 : 0.0, q);
    if (target >= (first ? end.eps0 : end.eps1))
      throw Infeasible("a-test: radius reaches the divergence endpoint");
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
      const double mid = 0.5 * (lo + hi);
      const LimitCurvePoint p = tilt_eps_pair(model, mid, q);
      const double value = first ? p.eps0 : p.eps1;
      const bool move_lo = first ? (value < target) : (value > target);
      (move_lo ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };

  sol.u = solve_u(true);
  const double w = solve_u(false);
  sol.v = 1.0 - w;
  if (sol.u + sol.v >= 1.0) throw Infeasible("a-test: tilted hypotheses merge (u + v >= 1)");
  sol.ku = std::exp(log_tilt_norm(model, sol.u, q));
  sol.k1v = std::exp(log_tilt_norm(model, w, q));
  sol.threshold = std::log(sol.k1v / sol.ku) / (1.0 - (sol.u + sol.v));
  sol.residual_u = tilt_eps_pair(model, sol.u, q).eps0 - eps0;
  sol.residual_v = tilt_eps_pair(model, w, q).eps1 - eps1;
  return sol;
}

CompositeSolution solve_c_test(const NominalModel& model, double eps0, double eps1, double eps0_c,
                               double eps1_c, const Quadrature& q) {
  CompositeSolution sol;
  sol.inner = (eps0 == 0.0 && eps1 == 0.0) ? identity_m_solution()
                                           : solve_m_test(model, eps0, eps1, q);
  sol.eps0_c = eps0_c;
  sol.eps1_c = eps1_c;
  sol.b = (1.0 - eps1_c) / (1.0 - eps0_c);
  sol.nominal_lr_monotone = model.profile().monotone_nondecreasing();

  const PiecewiseLLR inner_llr = robust_llr(model, sol.inner);
  const Density g0 = lfd_density(model, sol.inner, 0);
  const Density g1 = lfd_density(model, sol.inner, 1);
  const ClippedPair clip = clip_pair(model, inner_llr, g0, g1, eps0_c, eps1_c, q);
  sol.c_l = clip.c_l;
  sol.c_u = clip.c_u;
  return sol;
}

ClippedPair clip_pair(const NominalModel& model, const PiecewiseLLR& inner, const Density& g0,
                      const Density& g1, double eps0_c, double eps1_c, const Quadrature& q) {
  const LogLrProfile& prof = model.profile();
  ClipCurves cv;
  cv.log_r_inf = inner.log_eval(prof.ess_inf());
  cv.log_r_sup = inner.log_eval(prof.ess_sup());
  auto pair_mass = [&](const Density& g, double log_c) {
    const double logl_bound = inner.logl_upper_bound(log_c);
    return integrate([&](double y) { return g.pdf(y); }, prof.below(logl_bound), g.breakpoints,
                     q);
  };
  cv.mass0_le = [&](double log_c) { return pair_mass(g0, log_c); };
  cv.mass1_le = [&](double log_c) { return pair_mass(g1, log_c); };
  cv.total0 = integrate([&](double y) { return g0.pdf(y); }, model.support(), g0.breakpoints, q);
  cv.total1 = integrate([&](double y) { return g1.pdf(y); }, model.support(), g1.breakpoints, q);

  const ClipSolution clip = solve_clip(cv, eps0_c, eps1_c);
  ClippedPair out;
  out.c_l = clip.c_l;
  out.c_u = clip.c_u;
  out.b = (1.0 - eps1_c) / (1.0 - eps0_c);
  out.eps0_c = eps0_c;
  out.eps1_c = eps1_c;
  out.residual_l = clip.residual_l;
  out.residual_u = clip.residual_u;
  return out;
}

Density clipped_density(const NominalModel& model, const ClippedPair& clip,
                        const PiecewiseLLR& inner, const Density& g0, const Density& g1,
                        int hypothesis) {
  const double log_cl = std::log(clip.c_l), log_cu = std::log(clip.c_u);
  const double scale = std::log(hypothesis == 0 ? 1.0 - clip.eps0_c : 1.0 - clip.eps1_c);
  auto logpdf = [&model, g0, g1, inner, log_cl, log_cu, scale, hypothesis](double y) {
    const double log_ratio = inner.log_eval(model.log_lr(y));
    if (hypothesis == 0) {
      if (log_ratio < log_cu) return scale + g0.logpdf(y);
      return scale - log_cu + g1.logpdf(y);
    }
    if (log_ratio > log_cl) return scale + g1.logpdf(y);
    return scale + log_cl + g0.logpdf(y);
  };
  std::vector<double> breaks = g0.breakpoints;
  breaks.insert(breaks.end(), g1.breakpoints.begin(), g1.breakpoints.end());
  const std::vector<double> clip_pts = level_boundaries(
      model.profile(), {inner.logl_upper_bound(log_cl), inner.logl_lower_bound(log_cu)});
  breaks.insert(breaks.end(), clip_pts.begin(), clip_pts.end());
  std::sort(breaks.begin(), breaks.end());
  return Density{logpdf, std::move(breaks)};
}

PiecewiseLLR clipped_llr(const ClippedPair& clip, const PiecewiseLLR& inner) {
  const double log_cl = std::log(clip.c_l), log_cu = std::log(clip.c_u);
  const double log_b = std::log(clip.b);
  const double zeta_l = inner.logl_upper_bound(log_cl);
  const double zeta_u = inner.logl_lower_bound(log_cu);

  std::vector<PiecewiseLLR::Branch> branches;
  branches.push_back({-kInf, zeta_l, log_b + log_cl, 0.0});
  for (const PiecewiseLLR::Branch& b : inner.branches()) {
    const double lo = std::max(b.logl_lo, zeta_l);
    const double hi = std::min(b.logl_hi, zeta_u);
    if (hi > lo) branches.push_back({lo, hi, log_b + b.log_coef, b.power});
  }
  branches.push_back({zeta_u, kInf, log_b + log_cu, 0.0});
  return PiecewiseLLR(std::move(branches), inner.delta_logl_lo(), inner.delta_logl_hi());
}

// ---------------------------------------------------------------------------
// Densities and robust ratios
// ---------------------------------------------------------------------------

Density lfd_density(const NominalModel& model, const MTestSolution& sol, int hypothesis) {
  if (sol.degenerate()) return model.density(hypothesis);
  const double x0 = sol.log_ll(), x1 = sol.log_lu();
  const double log_z = std::log(sol.z), log_k = std::log(sol.k);
  const double a = sol.exponent;
  auto logpdf = [&model, x0, x1, log_z, log_k, a, hypothesis](double y) {
    const double logl = model.log_lr(y);
    if (logl >= x0 && logl <= x1)
      return model.f1_logpdf(y) + a * (logl - x0) - log_z;
    if (hypothesis == 0) {
      if (logl < x0) return model.f0_logpdf(y) + x0 - log_z;
      return model.f0_logpdf(y) + x1 + log_k - log_z;
    }
    if (logl < x0) return model.f1_logpdf(y) - log_z;
    return model.f1_logpdf(y) + log_k - log_z;
  };
  return Density{logpdf, level_boundaries(model.profile(), {x0, x1})};
}

Density lfd_density(const NominalModel& model, const HTestSolution& sol, int hypothesis) {
  const double log_cl = std::log(sol.c_l), log_cu = std::log(sol.c_u);
  const double scale = std::log(hypothesis == 0 ? 1.0 - sol.eps0_c : 1.0 - sol.eps1_c);
  auto logpdf = [&model, log_cl, log_cu, scale, hypothesis](double y) {
    const double logl = model.log_lr(y);
    if (hypothesis == 0) {
      if (logl < log_cu) return scale + model.f0_logpdf(y);
      return scale - log_cu + model.f1_logpdf(y);
    }
    if (logl > log_cl) return scale + model.f1_logpdf(y);
    return scale + log_cl + model.f0_logpdf(y);
  };
  return Density{logpdf, level_boundaries(model.profile(), {log_cl, log_cu})};
}

Density lfd_density(const NominalModel& model, const ATestSolution& sol, int hypothesis) {
  const double tilt = hypothesis == 0 ? sol.u : 1.0 - sol.v;
  const double log_norm = std::log(hypothesis == 0 ? sol.ku : sol.k1v);
  auto logpdf = [&model, tilt, log_norm](double y) {
    return model.f0_logpdf(y) + tilt * model.log_lr(y) - log_norm;
  };
  return Density{logpdf, {}};
}

Density lfd_density(const NominalModel& model, const CompositeSolution& sol, int hypothesis) {
  ClippedPair clip;
  clip.c_l = sol.c_l;
  clip.c_u = sol.c_u;
  clip.b = sol.b;
  clip.eps0_c = sol.eps0_c;
  clip.eps1_c = sol.eps1_c;
  return clipped_density(model, clip, robust_llr(model, sol.inner),
                         lfd_density(model, sol.inner, 0), lfd_density(model, sol.inner, 1),
                         hypothesis);
}

PiecewiseLLR robust_llr(const NominalModel& model, const MTestSolution& sol) {
  (void)model;
  if (sol.degenerate()) return PiecewiseLLR::nominal();
  const double x0 = sol.log_ll(), x1 = sol.log_lu();
  std::vector<PiecewiseLLR::Branch> branches{
      {-kInf, x0, -x0, 1.0}, {x0, x1, 0.0, 0.0}, {x1, kInf, -x1, 1.0}};
  return PiecewiseLLR(std::move(branches), x0, x1);
}

PiecewiseLLR robust_llr(const NominalModel& model, const HTestSolution& sol) {
  (void)model;
  const double log_cl = std::log(sol.c_l), log_cu = std::log(sol.c_u);
  const double log_b = std::log(sol.b);
  std::vector<PiecewiseLLR::Branch> branches{{-kInf, log_cl, log_b + log_cl, 0.0},
                                             {log_cl, log_cu, log_b, 1.0},
                                             {log_cu, kInf, log_b + log_cu, 0.0}};
  const double tie = clampd(-log_b, log_cl, log_cu);
  return PiecewiseLLR(std::move(branches), tie, tie);
}

PiecewiseLLR robust_llr(const NominalModel& model, const ATestSolution& sol) {
  (void)model;
  const double power = 1.0 - sol.u - sol.v;
  const double coef = std::log(sol.ku) - std::log(sol.k1v);
  const double tie = power > 0.0 ? -coef / power : 0.0;
  return PiecewiseLLR({PiecewiseLLR::Branch{-kInf, kInf, coef, power}}, tie, tie);
}

PiecewiseLLR robust_llr(const NominalModel& model, const CompositeSolution& sol) {
  ClippedPair clip;
  clip.c_l = sol.c_l;
  clip.c_u = sol.c_u;
  clip.b = sol.b;
  clip.eps0_c = sol.eps0_c;
  clip.eps1_c = sol.eps1_c;
  return clipped_llr(clip, robust_llr(model, sol.inner));
}

// ---------------------------------------------------------------------------

Density random_ball_member(const NominalModel& model, int hypothesis, double eps, CounterRng& rng,
                           const Quadrature& q) {
  if (!(eps > 0.0)) throw OutOfRange("random_ball_member: eps must be > 0");
  const Density nominal = model.density(hypothesis);

  for (int attempt = 0; attempt < 12; ++attempt) {
    std::array<double, 3> amp{}, freq{}, phase{};
    for (int j = 0; j < 3; ++j) {
      amp[j] = 2.0 * rng.next_u01() - 1.0;
      freq[j] = 0.3 + 2.2 * rng.next_u01();
      phase[j] = 2.0 * M_PI * rng.next_u01();
    }
    auto score = [amp, freq, phase](double y) {
      double s = 0.0;
      for (int j = 0; j < 3; ++j) s += amp[j] * std::cos(freq[j] * y + phase[j]);
      return s;
    };
    auto divergence = [&](double t) {
      auto exponent = [&](double y) { return nominal.logpdf(y) + t * score(y); };
      const double log_norm = log_integrate_exp(exponent, model.support(), q);
      const double mean_score = integrate(
          [&](double y) { return score(y) * std::exp(exponent(y) - log_norm); }, model.support(),
          q);
      return t * mean_score - log_norm;
    };

    double hi = 0.25;
    bool reached = false;
    for (int j = 0; j < 12; ++j) {
      if (divergence(hi) >= eps) {
        reached = true;
        break;
      }
      hi *= 2.0;
    }
    if (!reached) continue;  // score too flat under this nominal; redraw

    double lo = 0.0;
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (lo + hi);
      (divergence(mid) < eps ? lo : hi) = mid;
    }
    // Keep the member inside the ball: use the endpoint with D <= eps.
    const double t = lo;
    auto exponent = [nominal, score, t](double y) { return nominal.logpdf(y) + t * score(y); };
    const double log_norm = log_integrate_exp(exponent, model.support(), q);
    return Density{[exponent, log_norm](double y) { return exponent(y) - log_norm; }};
  }
  throw NonConvergence("random_ball_member: no usable tilt direction found");
}

double error_probability(const NominalModel& model, const PiecewiseLLR& llr, const Density& g,
                         int hypothesis, const Quadrature& q) {
  const LogLrProfile& prof = model.profile();
  const double lo = llr.delta_logl_lo(), hi = llr.delta_logl_hi();
  auto g_mass = [&](const IntervalUnion& region) {
    return region.is_empty() ? 0.0
                             : integrate([&](double y) { return g.pdf(y); }, region,
                                         g.breakpoints, q);
  };
  if (hypothesis == 0) {
    double p = g_mass(prof.above(hi));
    if (hi > lo)
      p += integrate([&](double y) { return llr.delta_y(model, y) * g.pdf(y); },
                     prof.band(lo, hi), g.breakpoints, q);
    return p;
  }
  double p = g_mass(prof.below(lo));
  if (hi > lo)
    p += integrate([&](double y) { return (1.0 - llr.delta_y(model, y)) * g.pdf(y); },
                   prof.band(lo, hi), g.breakpoints, q);
  return p;
}

}  // namespace robdet
