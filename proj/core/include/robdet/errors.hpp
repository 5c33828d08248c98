#pragma once

#include <stdexcept>
#include <string>

namespace robdet {

/// Base class for all numerical and feasibility failures raised by the
/// library. The CLI maps these to exit code 1; genuine usage errors
/// (bad flags, malformed config) are reported separately with exit code 2.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Quadrature or iterative refinement stalled before reaching tolerance.
struct NonConvergence : Error {
  using Error::Error;
};

/// A region could not be resolved to a finite union of intervals.
struct InvalidRegion : Error {
  using Error::Error;
};

/// g carries mass where f has none; KL divergence is undefined.
struct SupportMismatch : Error {
  using Error::Error;
};

/// Requested robustness radii exceed the feasibility limit; the
/// uncertainty sets overlap and no least favorable pair exists.
struct Infeasible : Error {
  using Error::Error;
};

/// The symmetric fast path was requested for a non-symmetric nominal pair.
struct NotSymmetric : Error {
  using Error::Error;
};

struct OutOfRange : Error {
  using Error::Error;
};

/// Moment generating function diverges at the requested tilt.
struct MgfInfinite : Error {
  using Error::Error;
};

/// Sequential recursion still holds too much mass at the step cap.
struct TruncationExceeded : Error {
  using Error::Error;
};

}  // namespace robdet
