#include "clusterfdr/fdr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "clusterfdr/error.hpp"

namespace clusterfdr {

namespace {

// Exact test of a * b <= c * d for finite non-negative doubles. Uses the
// fma residual of each product; see the rounding argument: a rounded
// product strictly below another implies the exact products are ordered.
bool product_leq(double a, double b, double c, double d) {
  const double lhs = a * b;
  const double rhs = c * d;
  if (lhs != rhs) return lhs < rhs;
  const double lhs_err = std::fma(a, b, -lhs);
  const double rhs_err = std::fma(c, d, -rhs);
  return lhs_err <= rhs_err;
}

}  // namespace

FdrResult bh_step_up(std::span<const double> pvals, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "alpha must lie in (0, 1)");
  }
  for (std::size_t i = 0; i < pvals.size(); ++i) {
    if (!(pvals[i] >= 0.0 && pvals[i] <= 1.0)) {
      throw Error(ErrorKind::InvalidP, "p-value at index " + std::to_string(i) + " outside [0, 1]");
    }
  }

  FdrResult result;
  result.alpha = alpha;
  const std::size_t m = pvals.size();
  result.rejected.assign(m, false);
  result.q_values.assign(m, 1.0);
  if (m == 0) return result;

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pvals[a] < pvals[b]; });

  const double md = static_cast<double>(m);
  std::size_t k_star = 0;
  for (std::size_t i = m; i >= 1; --i) {
    // p_(i) * m <= i * alpha
    if (product_leq(pvals[order[i - 1]], md, static_cast<double>(i), alpha)) {
      k_star = i;
      break;
    }
  }
  result.k_star = k_star;

  double running = 1.0;
  for (std::size_t i = m; i >= 1; --i) {
    const std::size_t idx = order[i - 1];
    running = std::min(running, md / static_cast<double>(i) * pvals[idx]);
    double q = std::min(running, 1.0);
    const bool reject = i <= k_star;
    // keep q consistent with the exact decision when rounding lands on the
    // wrong side of alpha
    if (reject && q > alpha) q = alpha;
    if (!reject && q <= alpha) q = std::nextafter(alpha, 1.0);
    result.q_values[idx] = q;
    result.rejected[idx] = reject;
  }
  return result;
}

std::vector<Cluster> apply_fdr_to_clusters(std::vector<Cluster> clusters, double alpha) {
  std::vector<double> p;
  p.reserve(clusters.size());
  for (const Cluster& c : clusters) {
    if (!c.p_uncorrected) {
      throw Error(ErrorKind::MissingP, "cluster " + std::to_string(c.id) + " has no uncorrected p-value");
    }
    p.push_back(*c.p_uncorrected);
  }
  const FdrResult fdr = bh_step_up(p, alpha);
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    clusters[i].q_value = fdr.q_values[i];
    clusters[i].significant_fdr = fdr.rejected[i];
  }
  return clusters;
}

}  // namespace clusterfdr
