#include "robdet/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "robdet/errors.hpp"
#include "robdet/quadrature.hpp"

namespace robdet {

CdfSampler::CdfSampler(const Density& density, double y_min, double y_max, int cells)
    : y_min_(y_min), h_((y_max - y_min) / cells) {
  if (!(y_max > y_min) || cells < 2) throw OutOfRange("sampler: bad support or cell count");
  const auto& rule = detail::gl_rule(4);
  cum_.resize(cells + 1);
  cum_[0] = 0.0;
  for (int i = 0; i < cells; ++i) {
    const double mid = y_min_ + (i + 0.5) * h_;
    double mass = 0.0;
    for (std::size_t k = 0; k < rule.x.size(); ++k)
      mass += rule.w[k] * density.pdf(mid + 0.5 * h_ * rule.x[k]);
    cum_[i + 1] = cum_[i] + 0.5 * h_ * mass;
  }
}

double CdfSampler::sample(double u01) const {
  const double target = u01 * cum_.back();
  const auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
  const std::size_t i = std::min<std::size_t>(
      std::max<std::ptrdiff_t>(it - cum_.begin() - 1, 0), cum_.size() - 2);
  const double cell_mass = cum_[i + 1] - cum_[i];
  const double frac = cell_mass > 0.0 ? (target - cum_[i]) / cell_mass : 0.5;
  return y_min_ + (static_cast<double>(i) + std::clamp(frac, 0.0, 1.0)) * h_;
}

double CdfSampler::cdf(double y) const {
  const double pos = (y - y_min_) / h_;
  if (pos <= 0.0) return 0.0;
  if (pos >= static_cast<double>(cum_.size() - 1)) return 1.0;
  const std::size_t i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  return (cum_[i] + frac * (cum_[i + 1] - cum_[i])) / cum_.back();
}

}  // namespace robdet
