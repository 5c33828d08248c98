#include "robdet/model.hpp"

#include <algorithm>
#include <cmath>

#include "robdet/errors.hpp"

namespace robdet {

namespace {

constexpr double kLogTiny = -745.0;  // exp() underflows to 0 below this

double gaussian_logpdf(const GaussianSpec& g, double y) {
  const double z = (y - g.mean) / g.sigma;
  return -0.5 * z * z - std::log(g.sigma) - 0.918938533204672742;  // ln sqrt(2 pi)
}

}  // namespace

LogLrProfile::LogLrProfile(std::function<double(double)> log_lr, double y_min, double y_max,
                           int scan_cells)
    : log_lr_(std::move(log_lr)), y_min_(y_min), y_max_(y_max) {
  if (!(y_max_ > y_min_)) throw InvalidRegion("profile: empty support");
  const int n = std::max(scan_cells, 16);
  grid_.resize(n + 1);
  values_.resize(n + 1);
  const double h = (y_max_ - y_min_) / n;
  for (int i = 0; i <= n; ++i) {
    grid_[i] = (i == n) ? y_max_ : y_min_ + i * h;
    values_[i] = log_lr_(grid_[i]);
    if (!std::isfinite(values_[i]))
      throw InvalidRegion("profile: log likelihood ratio not finite on support");
  }
  ess_inf_ = *std::min_element(values_.begin(), values_.end());
  ess_sup_ = *std::max_element(values_.begin(), values_.end());
  monotone_ = true;
  for (int i = 0; i < n && monotone_; ++i) monotone_ = values_[i + 1] >= values_[i] - 1e-12;

  // Refine the scan extrema by golden-section inside the bracketing cells,
  // so degenerate clip thresholds (eps = 0) land on the true ess inf/sup.
  auto refine = [&](bool want_max) {
    const auto it = want_max ? std::max_element(values_.begin(), values_.end())
                             : std::min_element(values_.begin(), values_.end());
    const std::ptrdiff_t idx = it - values_.begin();
    double a = grid_[std::max<std::ptrdiff_t>(idx - 1, 0)];
    double b = grid_[std::min<std::ptrdiff_t>(idx + 1, n)];
    const double phi = 0.61803398874989485;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = log_lr_(x1), f2 = log_lr_(x2);
    for (int iter = 0; iter < 80 && b - a > 1e-13 * (1.0 + std::abs(a)); ++iter) {
      const bool keep_left = want_max ? (f1 > f2) : (f1 < f2);
      if (keep_left) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - phi * (b - a);
        f1 = log_lr_(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + phi * (b - a);
        f2 = log_lr_(x2);
      }
    }
    return want_max ? std::max(f1, f2) : std::min(f1, f2);
  };
  ess_sup_ = std::max(ess_sup_, refine(true));
  ess_inf_ = std::min(ess_inf_, refine(false));
}

IntervalUnion LogLrProfile::below(double t) const {
  IntervalUnion out;
  if (t >= ess_sup_) return support();
  if (t < ess_inf_) return out;
  const std::size_t n = values_.size();
  auto root_in = [&](std::size_t i) {
    return find_root([&](double y) { return log_lr_(y) - t; }, grid_[i], grid_[i + 1],
                     values_[i] - t, values_[i + 1] - t);
  };
  bool inside = values_[0] <= t;
  double start = inside ? grid_[0] : 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const bool next_in = values_[i + 1] <= t;
    if (inside != next_in) {
      const double r = root_in(i);
      if (inside)
        out.add(start, r);
      else
        start = r;
      inside = next_in;
    }
  }
  if (inside) out.add(start, grid_.back());
  return out;
}

IntervalUnion LogLrProfile::below_complement(double t) const {
  return below(t).complement_within(y_min_, y_max_);
}

IntervalUnion LogLrProfile::band(double t_lo, double t_hi) const {
  if (!(t_hi > t_lo)) return {};
  return below(t_hi).intersect(above(t_lo));
}

NominalModel::NominalModel(std::function<double(double)> f0_logpdf,
                           std::function<double(double)> f1_logpdf, double y_min, double y_max,
                           std::string family_tag)
    : f0_(std::move(f0_logpdf)),
      f1_(std::move(f1_logpdf)),
      y_min_(y_min),
      y_max_(y_max),
      family_tag_(std::move(family_tag)) {
  auto lr = [f0 = f0_, f1 = f1_](double y) { return f1(y) - f0(y); };
  profile_ = std::make_shared<LogLrProfile>(lr, y_min_, y_max_);
}

NominalModel NominalModel::gaussian_pair(GaussianSpec f0, GaussianSpec f1, double mass_tol) {
  if (!(f0.sigma > 0.0) || !(f1.sigma > 0.0)) throw OutOfRange("gaussian_pair: sigma must be > 0");
  if (!(mass_tol > 0.0) || mass_tol >= 1.0) throw OutOfRange("gaussian_pair: bad mass_tol");
  // Solve Phi(-c) = mass_tol / 2 by bisection on the standard normal tail.
  auto tail = [](double c) { return 0.5 * std::erfc(c / std::sqrt(2.0)); };
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (tail(mid) > 0.5 * mass_tol ? lo : hi) = mid;
  }
  const double c = hi;
  const double y_min = std::min(f0.mean - c * f0.sigma, f1.mean - c * f1.sigma);
  const double y_max = std::max(f0.mean + c * f0.sigma, f1.mean + c * f1.sigma);
  NominalModel model([f0](double y) { return gaussian_logpdf(f0, y); },
                     [f1](double y) { return gaussian_logpdf(f1, y); }, y_min, y_max, "gaussian");
  model.gaussian_ = std::make_pair(f0, f1);
  return model;
}

Density NominalModel::density(int hypothesis) const {
  if (hypothesis == 0) return Density{f0_};
  return Density{f1_};
}

NominalModel NominalModel::swapped() const {
  NominalModel m(f1_, f0_, y_min_, y_max_, family_tag_);
  if (gaussian_) m.gaussian_ = std::make_pair(gaussian_->second, gaussian_->first);
  return m;
}

bool NominalModel::is_symmetric(double tol) const {
  if (std::abs(y_min_ + y_max_) > 1e-9 * (1.0 + std::abs(y_max_))) return false;
  const int n = 512;
  for (int i = 0; i <= n; ++i) {
    const double y = y_min_ + (y_max_ - y_min_) * i / n;
    const double a = f0_(y), b = f1_(-y);
    if (a > kLogTiny || b > kLogTiny) {
      if (std::abs(std::exp(a) - std::exp(b)) > tol) return false;
    }
  }
  return true;
}

double kl_divergence(const Density& g, const Density& f, const IntervalUnion& support,
                     const Quadrature& q) {
  // Absolute continuity check on a scan grid before integrating.
  for (const Interval& part : support.parts()) {
    const int n = 512;
    for (int i = 0; i <= n; ++i) {
      const double y = part.lo + part.length() * i / n;
      if (g.logpdf(y) > -27.0 && f.logpdf(y) < kLogTiny)
        throw SupportMismatch("kl_divergence: g has mass where f vanishes");
    }
  }
  auto integrand = [&](double y) {
    const double lg = g.logpdf(y);
    if (lg < kLogTiny) return 0.0;  // 0 * log 0 convention
    return std::exp(lg) * (lg - f.logpdf(y));
  };
  std::vector<double> splits = g.breakpoints;
  splits.insert(splits.end(), f.breakpoints.begin(), f.breakpoints.end());
  return integrate(integrand, support, splits, q);
}

double kl_divergence(const NominalModel& model, int from_hypothesis, int to_hypothesis,
                     const Quadrature& q) {
  return kl_divergence(model.density(from_hypothesis), model.density(to_hypothesis),
                       model.support(), q);
}

DivergenceSuite divergence_suite(const NominalModel& model, const Quadrature& q) {
  DivergenceSuite out;
  out.kl_01 = kl_divergence(model, 0, 1, q);
  out.kl_10 = kl_divergence(model, 1, 0, q);
  auto chi2 = [&](int a, int b) {
    auto integrand = [&](double y) {
      const double la = model.logpdf(a, y), lb = model.logpdf(b, y);
      if (la < kLogTiny) return 0.0;
      return std::exp(2.0 * la - lb);
    };
    return integrate(integrand, model.support(), q) - 1.0;
  };
  out.chi2_sym = chi2(0, 1) + chi2(1, 0);
  const double bc = integrate(
      [&](double y) { return std::exp(0.5 * (model.f0_logpdf(y) + model.f1_logpdf(y))); },
      model.support(), q);
  out.hellinger2 = std::clamp(1.0 - bc, 0.0, 1.0);
  return out;
}

}  // namespace robdet
