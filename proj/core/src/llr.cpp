#include "robdet/llr.hpp"

#include <algorithm>
#include <cmath>

#include "robdet/errors.hpp"

namespace robdet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double obs_mass(const Density& obs, const IntervalUnion& region, const Quadrature& q) {
  if (region.is_empty()) return 0.0;
  return integrate([&](double y) { return obs.pdf(y); }, region, obs.breakpoints, q);
}

// Cell masses of a shifted restriction: the statistic piece x = logl - shift
// over the log-l band (x_lo + shift, x_hi + shift), weighted by `scale` times
// the density `obs`. Appends edges/pdf for a uniform block of `cells` cells.
void append_shifted_block(MixedDensity& out, const NominalModel& model, const Density& obs,
                          double scale, double shift, double x_lo, double x_hi, int cells,
                          const Quadrature& full_q) {
  if (!(x_hi > x_lo) || cells < 1) return;
  Quadrature q = full_q;  // cells are narrow; a small panel budget is exact
  q.panels = 8;
  const LogLrProfile& prof = model.profile();
  const double h = (x_hi - x_lo) / cells;
  const bool fresh = out.edges.empty();
  if (fresh)
    out.edges.push_back(x_lo);
  // Consecutive blocks share their joint edge.
  for (int i = 0; i < cells; ++i) {
    const double e0 = x_lo + i * h;
    const double e1 = (i == cells - 1) ? x_hi : x_lo + (i + 1) * h;
    const IntervalUnion band = prof.band(e0 + shift, e1 + shift);
    const double cell = scale * obs_mass(obs, band, q);
    out.edges.push_back(e1);
    out.pdf.push_back(cell / (e1 - e0));
  }
}

void sort_atoms(MixedDensity& d) {
  std::sort(d.atoms.begin(), d.atoms.end(),
            [](const MixedDensity::Atom& a, const MixedDensity::Atom& b) { return a.x < b.x; });
}

}  // namespace

double MixedDensity::continuous_mass() const {
  double m = 0.0;
  for (std::size_t i = 0; i < pdf.size(); ++i) m += pdf[i] * (edges[i + 1] - edges[i]);
  return m;
}

double MixedDensity::atom_mass() const {
  double m = 0.0;
  for (const Atom& a : atoms) m += a.mass;
  return m;
}

double MixedDensity::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < pdf.size(); ++i)
    m += pdf[i] * (edges[i + 1] - edges[i]) * 0.5 * (edges[i] + edges[i + 1]);
  for (const Atom& a : atoms) m += a.mass * a.x;
  return m;
}

double MixedDensity::variance() const {
  const double mu = mean();
  double m2 = 0.0;
  for (std::size_t i = 0; i < pdf.size(); ++i) {
    const double c = 0.5 * (edges[i] + edges[i + 1]) - mu;
    const double w = edges[i + 1] - edges[i];
    m2 += pdf[i] * w * (c * c + w * w / 12.0);
  }
  for (const Atom& a : atoms) m2 += a.mass * (a.x - mu) * (a.x - mu);
  return m2;
}

MixedDensity llr_density_m(const NominalModel& model, const MTestSolution& sol, int hypothesis,
                           int cells, const Quadrature& q) {
  const LogLrProfile& prof = model.profile();
  const Density obs = model.density(hypothesis);
  MixedDensity out;
  if (sol.degenerate()) {
    append_shifted_block(out, model, obs, 1.0, 0.0, prof.ess_inf(), prof.ess_sup(), cells, q);
    return out;
  }
  const double x0 = sol.log_ll(), x1 = sol.log_lu();
  const double lo = prof.ess_inf() - x0;  // negative part: x = logl - log l_l
  const double hi = prof.ess_sup() - x1;  // positive part: x = logl - log l_u
  const double scale_lo = (hypothesis == 0 ? sol.l_l : 1.0) / sol.z;
  const double scale_hi = (hypothesis == 0 ? sol.l_u * sol.k : sol.k) / sol.z;

  const int cells_lo = std::max(1, static_cast<int>(std::lround(cells * (-lo) / (hi - lo))));
  append_shifted_block(out, model, obs, scale_lo, x0, lo, 0.0, cells_lo, q);
  append_shifted_block(out, model, obs, scale_hi, x1, 0.0, hi, std::max(1, cells - cells_lo), q);

  // Middle-region point mass at zero, randomized by the conditional mean of
  // the decision rule over that region.
  auto tilt = [&](double y) {
    return std::exp(model.f1_logpdf(y) + sol.exponent * (model.log_lr(y) - x0));
  };
  const IntervalUnion middle = prof.band(x0, x1);
  const double mid_mass = integrate(tilt, middle, q);
  const double mid_shift =
      integrate([&](double y) { return tilt(y) * (model.log_lr(y) - x0); }, middle, q);
  MixedDensity::Atom atom;
  atom.x = 0.0;
  atom.mass = mid_mass / sol.z;
  atom.reject_fraction = mid_mass > 0.0 ? mid_shift / ((x1 - x0) * mid_mass) : 0.5;
  out.atoms.push_back(atom);
  return out;
}

MixedDensity llr_density_h(const NominalModel& model, const HTestSolution& sol, int hypothesis,
                           int cells, const Quadrature& q) {
  const LogLrProfile& prof = model.profile();
  const Density obs = model.density(hypothesis);
  const double log_b = std::log(sol.b);
  const double log_cl = std::log(sol.c_l), log_cu = std::log(sol.c_u);
  const double one_minus_eps = hypothesis == 0 ? 1.0 - sol.eps0_c : 1.0 - sol.eps1_c;

  MixedDensity out;
  append_shifted_block(out, model, obs, one_minus_eps, -log_b, log_b + log_cl, log_b + log_cu,
                       cells, q);

  const double mass_low = obs_mass(model.density(0), prof.below(log_cl), q);
  const double mass_high = obs_mass(model.density(1), prof.above(log_cu), q);
  MixedDensity::Atom low, high;
  low.x = log_b + log_cl;
  high.x = log_b + log_cu;
  if (hypothesis == 0) {
    low.mass = (1.0 - sol.eps0_c) * mass_low;
    high.mass = (1.0 - sol.eps0_c) / sol.c_u * mass_high;
  } else {
    low.mass = sol.c_l * (1.0 - sol.eps1_c) * mass_low;
    high.mass = (1.0 - sol.eps1_c) * mass_high;
  }
  out.atoms.push_back(low);
  out.atoms.push_back(high);
  return out;
}

MixedDensity llr_density_c(const NominalModel& model, const CompositeSolution& sol, int hypothesis,
                           int cells, const Quadrature& q) {
  return statistic_distribution(model, robust_llr(model, sol), lfd_density(model, sol, hypothesis),
                                cells, q);
}

MixedDensity statistic_distribution(const NominalModel& model, const PiecewiseLLR& llr,
                                    const Density& obs, int cells, const Quadrature& q,
                                    double step) {
  const LogLrProfile& prof = model.profile();
  Quadrature cell_q = q;
  cell_q.panels = 8;
  MixedDensity out;

  struct Piece {
    double v_lo, v_hi;    // statistic range
    double logl_lo, logl_hi;
    double power;
    double log_coef;
    bool flat;
  };
  std::vector<Piece> pieces;
  for (const PiecewiseLLR::Branch& b : llr.branches()) {
    const double lo = std::max(b.logl_lo, prof.ess_inf());
    const double hi = std::min(b.logl_hi, prof.ess_sup());
    if (!(hi > lo)) continue;
    Piece p;
    p.logl_lo = lo;
    p.logl_hi = hi;
    p.power = b.power;
    p.log_coef = b.log_coef;
    p.flat = b.power == 0.0;
    p.v_lo = b.log_coef + b.power * lo;
    p.v_hi = b.log_coef + b.power * hi;
    pieces.push_back(p);
  }
  if (pieces.empty()) return out;

  // Flat branches turn into atoms; the randomized tie region of the rule
  // carries its conditional rejection fraction.
  double span = 0.0;
  for (const Piece& p : pieces)
    if (!p.flat) span += p.v_hi - p.v_lo;
  for (const Piece& p : pieces) {
    if (!p.flat) {
      int n;
      if (step > 0.0) {
        n = std::max(1, static_cast<int>(std::ceil((p.v_hi - p.v_lo) / step)));
      } else {
        n = std::max(8, static_cast<int>(std::lround(cells * (p.v_hi - p.v_lo) / span)));
      }
      // Map statistic cells back to log-l bands inside this branch.
      const bool fresh = out.edges.empty();
      if (fresh) out.edges.push_back(p.v_lo);
      for (int i = 0; i < n; ++i) {
        double e0 = p.v_lo + (p.v_hi - p.v_lo) * i / n;
        double e1 = (i == n - 1) ? p.v_hi : p.v_lo + (p.v_hi - p.v_lo) * (i + 1) / n;
        if (step > 0.0) {
          // Align interior edges to the lattice.
          e0 = (i == 0) ? p.v_lo : std::floor(p.v_lo / step + i) * step;
          e1 = (i == n - 1) ? p.v_hi : std::floor(p.v_lo / step + i + 1) * step;
          if (!(e1 > e0)) continue;
        }
        const double l0 = std::max((e0 - p.log_coef) / p.power, p.logl_lo);
        const double l1 = std::min((e1 - p.log_coef) / p.power, p.logl_hi);
        const double cell = obs_mass(obs, prof.band(l0, l1), cell_q);
        out.edges.push_back(e1);
        out.pdf.push_back(cell / (e1 - e0));
      }
    } else {
      MixedDensity::Atom atom;
      atom.x = p.log_coef;
      atom.mass = obs_mass(obs, prof.band(p.logl_lo, p.logl_hi), q);
      const bool is_tie_region = llr.delta_logl_hi() > llr.delta_logl_lo() &&
                                 std::abs(p.logl_lo - llr.delta_logl_lo()) < 1e-12 &&
                                 std::abs(p.logl_hi - llr.delta_logl_hi()) < 1e-12;
      if (is_tie_region && atom.mass > 0.0) {
        const double weighted =
            integrate([&](double y) { return llr.delta_y(model, y) * obs.pdf(y); },
                      prof.band(p.logl_lo, p.logl_hi), obs.breakpoints, q);
        atom.reject_fraction = weighted / atom.mass;
      }
      if (atom.mass > 1e-15) out.atoms.push_back(atom);
    }
  }
  sort_atoms(out);
  return out;
}

std::pair<double, double> error_probabilities(const MixedDensity& d0, const MixedDensity& d1,
                                              double threshold) {
  auto tail = [&](const MixedDensity& d, bool upper) {
    double m = 0.0;
    for (std::size_t i = 0; i < d.pdf.size(); ++i) {
      const double e0 = d.edges[i], e1 = d.edges[i + 1];
      const double w = e1 - e0;
      if (upper) {
        if (e0 >= threshold)
          m += d.pdf[i] * w;
        else if (e1 > threshold)
          m += d.pdf[i] * (e1 - threshold);
      } else {
        if (e1 <= threshold)
          m += d.pdf[i] * w;
        else if (e0 < threshold)
          m += d.pdf[i] * (threshold - e0);
      }
    }
    for (const MixedDensity::Atom& a : d.atoms) {
      const double tol = 1e-12 * (1.0 + std::abs(threshold));
      if (std::abs(a.x - threshold) <= tol) {
        const double f = std::isnan(a.reject_fraction) ? 0.5 : a.reject_fraction;
        m += a.mass * (upper ? f : 1.0 - f);
      } else if (upper ? a.x > threshold : a.x < threshold) {
        m += a.mass;
      }
    }
    return m;
  };
  return {tail(d0, true), tail(d1, false)};
}

double log_mgf(const NominalModel& model, const PiecewiseLLR& llr, const Density& obs, double u,
               const Quadrature& q) {
  const LogLrProfile& prof = model.profile();
  double best = -kInf;
  std::vector<double> parts;
  for (const PiecewiseLLR::Branch& b : llr.branches()) {
    const double lo = std::max(b.logl_lo, prof.ess_inf());
    const double hi = std::min(b.logl_hi, prof.ess_sup());
    if (!(hi > lo)) continue;
    const IntervalUnion region = prof.band(lo, hi);
    if (region.is_empty()) continue;
    const double piece = log_integrate_exp(
        [&](double y) {
          return u * (b.log_coef + b.power * model.log_lr(y)) + obs.logpdf(y);
        },
        region, obs.breakpoints, q);
    parts.push_back(piece);
    best = std::max(best, piece);
  }
  if (parts.empty() || !std::isfinite(best)) return -kInf;
  double acc = 0.0;
  for (double p : parts) acc += std::exp(p - best);
  const double value = best + std::log(acc);
  if (!std::isfinite(value)) throw MgfInfinite("log_mgf: diverged");
  return value;
}

double llr_mean(const NominalModel& model, const PiecewiseLLR& llr, const Density& obs,
                const Quadrature& q) {
  const LogLrProfile& prof = model.profile();
  double acc = 0.0;
  for (const PiecewiseLLR::Branch& b : llr.branches()) {
    const double lo = std::max(b.logl_lo, prof.ess_inf());
    const double hi = std::min(b.logl_hi, prof.ess_sup());
    if (!(hi > lo)) continue;
    acc += integrate(
        [&](double y) { return (b.log_coef + b.power * model.log_lr(y)) * obs.pdf(y); },
        prof.band(lo, hi), obs.breakpoints, q);
  }
  return acc;
}

double llr_variance(const NominalModel& model, const PiecewiseLLR& llr, const Density& obs,
                    const Quadrature& q) {
  const double mu = llr_mean(model, llr, obs, q);
  const LogLrProfile& prof = model.profile();
  double acc = 0.0;
  for (const PiecewiseLLR::Branch& b : llr.branches()) {
    const double lo = std::max(b.logl_lo, prof.ess_inf());
    const double hi = std::min(b.logl_hi, prof.ess_sup());
    if (!(hi > lo)) continue;
    acc += integrate(
        [&](double y) {
          const double d = b.log_coef + b.power * model.log_lr(y) - mu;
          return d * d * obs.pdf(y);
        },
        prof.band(lo, hi), obs.breakpoints, q);
  }
  return acc;
}

RateValue rate_function(const NominalModel& model, const PiecewiseLLR& llr, const Density& obs,
                        double t, const Quadrature& q) {
  const LogLrProfile& prof = model.profile();
  const double v_min = llr.log_eval(prof.ess_inf());
  const double v_max = llr.log_eval(prof.ess_sup());
  if (!(t > std::min(v_min, v_max)) || !(t < std::max(v_min, v_max)))
    throw OutOfRange("rate_function: t outside the attainable statistic range");

  auto objective = [&](double u) { return t * u - log_mgf(model, llr, obs, u, q); };

  // Expand a bracket around the interior maximum of the concave objective.
  double a = -1.0, b = 1.0;
  double fa = objective(a), fb = objective(b);
  const double f_mid = objective(0.0);
  int guard_hi = 0, guard_lo = 0;
  while (fb > std::max(f_mid, fa) && guard_hi++ < 14) {
    b *= 2.0;
    fb = objective(b);
  }
  while (fa > std::max(f_mid, fb) && guard_lo++ < 14) {
    a *= 2.0;
    fa = objective(a);
  }
  if (guard_hi > 14 || guard_lo > 14)
    throw MgfInfinite("rate_function: no interior maximum found");

  const double phi = 0.61803398874989485;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = objective(x1), f2 = objective(x2);
  while (b - a > 1e-10 * (1.0 + std::abs(a) + std::abs(b))) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = objective(x2);
    }
  }
  RateValue out;
  out.argmax_u = f1 > f2 ? x1 : x2;
  out.value = std::max(std::max(f1, f2), 0.0);
  return out;
}

}  // namespace robdet
