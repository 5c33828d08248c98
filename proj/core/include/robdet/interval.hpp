#pragma once

#include <vector>

namespace robdet {

/// Closed interval [lo, hi] on the real line.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

/// Finite union of disjoint closed intervals, kept sorted by lower bound.
/// This is the region type every integral in the library runs over;
/// regions are produced by level-set resolution of the likelihood ratio.
class IntervalUnion {
 public:
  IntervalUnion() = default;

  static IntervalUnion single(double lo, double hi) {
    IntervalUnion u;
    u.add(lo, hi);
    return u;
  }

  /// Insert [lo, hi], merging with any overlapping or touching parts.
  /// Degenerate (hi <= lo) inputs are dropped; NaN bounds are rejected.
  void add(double lo, double hi);

  IntervalUnion intersect(const IntervalUnion& other) const;
  IntervalUnion complement_within(double lo, double hi) const;

  bool is_empty() const { return parts_.empty(); }
  double total_length() const;
  const std::vector<Interval>& parts() const { return parts_; }

 private:
  std::vector<Interval> parts_;
};

}  // namespace robdet
