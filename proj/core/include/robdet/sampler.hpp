#pragma once

#include <functional>
#include <vector>

#include "robdet/model.hpp"
#include "robdet/rng.hpp"

namespace robdet {

/// Inverse-CDF sampler over a tabulated density. Cell masses are computed
/// by per-cell Gauss-Legendre and the inverse interpolates linearly within
/// a cell, which keeps event probabilities exact at cell boundaries.
class CdfSampler {
 public:
  CdfSampler(const Density& density, double y_min, double y_max, int cells = 8192);

  double sample(double u01) const;
  double sample(CounterRng& rng) const { return sample(rng.next_u01()); }
  double cdf(double y) const;
  double total_mass() const { return cum_.back(); }

 private:
  double y_min_, h_;
  std::vector<double> cum_;  // cumulative mass at cell edges, cum_[0] = 0
};

}  // namespace robdet
