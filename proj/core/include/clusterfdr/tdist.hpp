#pragma once

namespace clusterfdr {

// P(T_df >= t) for Student's t with df degrees of freedom, via the
// regularized incomplete beta function.
double t_upper_tail(double t, double df);

// Inverse of t_upper_tail on p in (0, 0.5]: returns t* >= 0 with
// P(T_df >= t*) = p. Bracketing bisection on the monotone tail.
double t_upper_quantile(double p, double df);

}  // namespace clusterfdr
