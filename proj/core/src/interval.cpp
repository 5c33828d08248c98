#include "robdet/interval.hpp"

#include <algorithm>
#include <cmath>

#include "robdet/errors.hpp"

namespace robdet {

void IntervalUnion::add(double lo, double hi) {
  if (std::isnan(lo) || std::isnan(hi)) throw InvalidRegion("interval: NaN bound");
  if (!(hi > lo)) return;
  Interval iv{lo, hi};
  std::vector<Interval> merged;
  merged.reserve(parts_.size() + 1);
  bool placed = false;
  for (const Interval& p : parts_) {
    if (p.hi < iv.lo) {
      merged.push_back(p);
    } else if (p.lo > iv.hi) {
      if (!placed) {
        merged.push_back(iv);
        placed = true;
      }
      merged.push_back(p);
    } else {
      iv.lo = std::min(iv.lo, p.lo);
      iv.hi = std::max(iv.hi, p.hi);
    }
  }
  if (!placed) merged.push_back(iv);
  parts_ = std::move(merged);
}

IntervalUnion IntervalUnion::intersect(const IntervalUnion& other) const {
  IntervalUnion out;
  std::size_t i = 0, j = 0;
  while (i < parts_.size() && j < other.parts_.size()) {
    const Interval& a = parts_[i];
    const Interval& b = other.parts_[j];
    const double lo = std::max(a.lo, b.lo);
    const double hi = std::min(a.hi, b.hi);
    if (hi > lo) out.add(lo, hi);
    if (a.hi < b.hi)
      ++i;
    else
      ++j;
  }
  return out;
}

IntervalUnion IntervalUnion::complement_within(double lo, double hi) const {
  IntervalUnion out;
  double cursor = lo;
  for (const Interval& p : parts_) {
    if (p.hi <= lo) continue;
    if (p.lo >= hi) break;
    if (p.lo > cursor) out.add(cursor, std::min(p.lo, hi));
    cursor = std::max(cursor, p.hi);
    if (cursor >= hi) break;
  }
  if (cursor < hi) out.add(cursor, hi);
  return out;
}

double IntervalUnion::total_length() const {
  double len = 0.0;
  for (const Interval& p : parts_) len += p.length();
  return len;
}

}  // namespace robdet
