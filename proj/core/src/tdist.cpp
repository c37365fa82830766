#include "clusterfdr/tdist.hpp"

#include <cmath>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "clusterfdr/error.hpp"

namespace clusterfdr {

namespace {

void check_df(double df) {
  if (!(df >= 1.0) || !std::isfinite(df)) {
    throw Error(ErrorKind::InvalidArgument, "degrees of freedom must be >= 1, got " + std::to_string(df));
  }
}

// Upper tail for t >= 0. Picks the incomplete-beta argument that avoids
// forming 1 - x when it would cancel.
double upper_tail_nonnegative(double t, double df) {
  const double t2 = t * t;
  if (t2 < df) {
    const double y = t2 / (df + t2);
    return 0.5 * boost::math::ibetac(0.5, 0.5 * df, y);
  }
  const double x = df / (df + t2);
  return 0.5 * boost::math::ibeta(0.5 * df, 0.5, x);
}

}  // namespace

double t_upper_tail(double t, double df) {
  check_df(df);
  if (std::isnan(t)) throw Error(ErrorKind::InvalidArgument, "t is NaN");
  if (t == 0.0) return 0.5;
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  if (t > 0.0) return upper_tail_nonnegative(t, df);
  return 1.0 - upper_tail_nonnegative(-t, df);
}

double t_upper_quantile(double p, double df) {
  check_df(df);
  if (!(p > 0.0 && p <= 0.5)) {
    throw Error(ErrorKind::InvalidArgument, "tail probability must lie in (0, 0.5], got " + std::to_string(p));
  }
  if (p == 0.5) return 0.0;

  double lo = 0.0;
  double hi = 1.0;
  while (upper_tail_nonnegative(hi, df) > p) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw Error(ErrorKind::InvalidArgument, "quantile out of representable range");
  }
  // tail(lo) > p >= tail(hi)
  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (upper_tail_nonnegative(mid, df) > p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace clusterfdr
