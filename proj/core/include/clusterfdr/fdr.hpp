#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "clusterfdr/clustering.hpp"

namespace clusterfdr {

struct FdrResult {
  std::vector<bool> rejected;   // aligned with the input p-values
  std::vector<double> q_values; // BH-adjusted p, clamped to <= 1
  double alpha = 0.0;
  std::size_t k_star = 0;       // number of rejections
};

// Benjamini-Hochberg step-up. k* = max{i : p_(i) <= (i/m) alpha}; the k*
// smallest p-values are rejected. Comparisons against the step-up line are
// exact in the real numbers represented by p and alpha, so boundary ties
// are rejected. rejected[i] <=> q_values[i] <= alpha always holds.
FdrResult bh_step_up(std::span<const double> pvals, double alpha);

// Fills q_value and significant_fdr for one contrast's clusters.
std::vector<Cluster> apply_fdr_to_clusters(std::vector<Cluster> clusters, double alpha);

}  // namespace clusterfdr
