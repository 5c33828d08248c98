#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "robdet/errors.hpp"
#include "robdet/interval.hpp"

namespace robdet {

enum class QuadRule { gauss_legendre, trapezoid };

/// Composite quadrature settings. Panels are distributed over the parts of
/// the region proportionally to their length; the result is accepted once a
/// panel-doubling step changes it by less than max(abs_tol, rel_tol*|I|).
struct Quadrature {
  QuadRule rule = QuadRule::gauss_legendre;
  int panels = 512;
  int nodes_per_panel = 8;
  double abs_tol = 1e-10;
  double rel_tol = 1e-12;
  int max_refinements = 6;

  int node_count() const { return panels * nodes_per_panel; }

  void validate() const {
    if (node_count() < 64) throw OutOfRange("quadrature: node_count must be >= 64");
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw OutOfRange("quadrature: tolerances must be > 0");
    if (panels < 1 || nodes_per_panel < 1) throw OutOfRange("quadrature: panel counts must be >= 1");
  }
};

namespace detail {

/// Gauss-Legendre abscissas/weights on [-1, 1], computed once per order by
/// Newton iteration on the Legendre recurrence.
struct GlRule {
  std::vector<double> x;
  std::vector<double> w;
};

const GlRule& gl_rule(int order);

inline int panels_for(double part_len, double total_len, int budget) {
  if (total_len <= 0.0) return 1;
  const double share = part_len / total_len * static_cast<double>(budget);
  return std::clamp(static_cast<int>(std::ceil(share)), 2, budget);
}

template <class F>
double sweep(F&& f, const IntervalUnion& region, const Quadrature& q, int panel_budget) {
  double total = 0.0;
  const double region_len = region.total_length();
  for (const Interval& part : region.parts()) {
    const int panels = panels_for(part.length(), region_len, panel_budget);
    const double h = part.length() / panels;
    if (q.rule == QuadRule::gauss_legendre) {
      const GlRule& rule = gl_rule(q.nodes_per_panel);
      for (int p = 0; p < panels; ++p) {
        const double mid = part.lo + (p + 0.5) * h;
        const double half = 0.5 * h;
        double acc = 0.0;
        for (std::size_t i = 0; i < rule.x.size(); ++i) acc += rule.w[i] * f(mid + half * rule.x[i]);
        total += half * acc;
      }
    } else {
      const int n = panels * q.nodes_per_panel;
      const double step = part.length() / n;
      double acc = 0.5 * (f(part.lo) + f(part.hi));
      for (int i = 1; i < n; ++i) acc += f(part.lo + i * step);
      total += acc * step;
    }
  }
  return total;
}

}  // namespace detail

/// Integrate f over a finite union of intervals with panel-doubling
/// refinement. Throws NonConvergence if the refinement stalls.
template <class F>
double integrate(F&& f, const IntervalUnion& region, const Quadrature& q = {}) {
  if (region.is_empty()) return 0.0;
  for (const Interval& part : region.parts())
    if (!std::isfinite(part.lo) || !std::isfinite(part.hi) || !(part.hi >= part.lo))
      throw InvalidRegion("integrate: region has non-finite or inverted bounds");

  int budget = q.panels;
  double prev = detail::sweep(f, region, q, budget);
  for (int level = 0; level < q.max_refinements; ++level) {
    budget *= 2;
    const double cur = detail::sweep(f, region, q, budget);
    if (std::abs(cur - prev) <= std::max(q.abs_tol, q.rel_tol * std::abs(cur))) return cur;
    prev = cur;
  }
  throw NonConvergence("integrate: refinement stalled before tolerance");
}

template <class F>
double integrate(F&& f, double lo, double hi, const Quadrature& q = {}) {
  return integrate(std::forward<F>(f), IntervalUnion::single(lo, hi), q);
}

/// Integrate an integrand that is only piecewise smooth: the region parts
/// are cut at the given split points before refinement, so kinks sit on
/// panel boundaries instead of stalling the refinement.
template <class F>
double integrate(F&& f, const IntervalUnion& region, std::span<const double> splits,
                 const Quadrature& q = {}) {
  if (splits.empty()) return integrate(std::forward<F>(f), region, q);
  double total = 0.0;
  std::vector<double> cuts;
  for (const Interval& part : region.parts()) {
    cuts.clear();
    cuts.push_back(part.lo);
    for (double s : splits)
      if (s > part.lo && s < part.hi) cuts.push_back(s);
    cuts.push_back(part.hi);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      if (cuts[i + 1] > cuts[i]) total += integrate(f, IntervalUnion::single(cuts[i], cuts[i + 1]), q);
  }
  return total;
}

/// log of ∫ exp(g) over the region, evaluated with max-subtraction so that
/// large positive or negative exponents never overflow.
template <class F>
double log_integrate_exp(F&& g, const IntervalUnion& region, const Quadrature& q = {}) {
  if (region.is_empty()) return -std::numeric_limits<double>::infinity();

  auto pass = [&](int panel_budget) {
    // Two sweeps: locate the exponent peak, then accumulate shifted.
    double peak = -std::numeric_limits<double>::infinity();
    const double region_len = region.total_length();
    const detail::GlRule& rule = detail::gl_rule(q.nodes_per_panel);
    for (const Interval& part : region.parts()) {
      const int panels = detail::panels_for(part.length(), region_len, panel_budget);
      const double h = part.length() / panels;
      for (int p = 0; p < panels; ++p) {
        const double mid = part.lo + (p + 0.5) * h;
        for (std::size_t i = 0; i < rule.x.size(); ++i)
          peak = std::max(peak, g(mid + 0.5 * h * rule.x[i]));
      }
    }
    if (!std::isfinite(peak)) return peak;
    const double shifted = detail::sweep([&](double y) { return std::exp(g(y) - peak); }, region, q,
                                         panel_budget);
    return peak + std::log(shifted);
  };

  int budget = q.panels;
  double prev = pass(budget);
  for (int level = 0; level < q.max_refinements; ++level) {
    budget *= 2;
    const double cur = pass(budget);
    if (!std::isfinite(cur) && !std::isfinite(prev)) return cur;
    if (std::abs(cur - prev) <= std::max(q.rel_tol * 10.0, q.abs_tol * std::exp(-cur))) return cur;
    prev = cur;
  }
  throw NonConvergence("log_integrate_exp: refinement stalled before tolerance");
}

/// Piecewise-smooth variant of log_integrate_exp: log of a sum of
/// exponential integrals over the region cut at the split points.
template <class F>
double log_integrate_exp(F&& g, const IntervalUnion& region, std::span<const double> splits,
                         const Quadrature& q = {}) {
  if (splits.empty()) return log_integrate_exp(std::forward<F>(g), region, q);
  std::vector<double> parts;
  std::vector<double> cuts;
  double peak = -std::numeric_limits<double>::infinity();
  for (const Interval& part : region.parts()) {
    cuts.clear();
    cuts.push_back(part.lo);
    for (double s : splits)
      if (s > part.lo && s < part.hi) cuts.push_back(s);
    cuts.push_back(part.hi);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      if (!(cuts[i + 1] > cuts[i])) continue;
      const double piece = log_integrate_exp(g, IntervalUnion::single(cuts[i], cuts[i + 1]), q);
      parts.push_back(piece);
      peak = std::max(peak, piece);
    }
  }
  if (!std::isfinite(peak)) return peak;
  double acc = 0.0;
  for (double p : parts) acc += std::exp(p - peak);
  return peak + std::log(acc);
}

/// Bisection root refinement on [a, b]; requires a sign change.
template <class F>
double find_root(F&& f, double a, double b, double fa, double fb, int iters = 200) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  for (int i = 0; i < iters && b - a > 0.0; ++i) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;  // interval at floating resolution
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fa < 0.0) == (fm < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
      fb = fm;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace robdet
