#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "clusterfdr/volume.hpp"

namespace clusterfdr {

struct TMap {
  Volume volume;
  int df = 0;
  // In-mask voxels whose sample variance was exactly 0 (assigned t = 0).
  std::size_t zero_variance_count = 0;
};

// One-sample t over subjects with y_i = signs[i] * subject_i[v]:
// t = mean / (sd / sqrt(N)), sd with divisor N - 1. Out-of-mask voxels are 0.
// All-ones signs give the observed map.
TMap one_sample_tmap(const SubjectStack& stack, std::span<const std::int8_t> signs);

// Observed map (all signs +1).
TMap one_sample_tmap(const SubjectStack& stack);

// Reusable scratch for computing many sign-flipped maps from one stack
// without reallocating. Writes t-values into `out` (size = voxel count).
class TMapWorkspace {
 public:
  explicit TMapWorkspace(const SubjectStack& stack);

  // Returns the zero-variance count.
  std::size_t compute(std::span<const std::int8_t> signs, std::span<double> out);

 private:
  const SubjectStack& stack_;
  std::vector<std::size_t> in_mask_;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

}  // namespace clusterfdr
