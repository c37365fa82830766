#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "clusterfdr/permnull.hpp"
#include "clusterfdr/volume.hpp"

namespace clusterfdr {

// Sphere added to every subject after noise normalization.
struct SignalSphere {
  std::array<double, 3> center{0.0, 0.0, 0.0};  // voxel coordinates
  double radius = 0.0;                          // voxels; inclusive
  double amplitude = 0.0;                       // units of noise sd

  bool contains(const Coord& c) const noexcept;
};

struct SynthConfig {
  Dims dims{20, 20, 20};
  std::size_t n_subjects = 20;
  double fwhm_vox = 2.0;
  std::optional<SignalSphere> signal;
  std::uint64_t master_seed = 0;
  std::uint64_t trial_index = 0;

  void validate() const;
};

// Discrete Gaussian kernel, sigma = fwhm / sqrt(8 ln 2), support
// +-ceil(4 sigma), normalized to sum 1. fwhm 0 gives {1}.
std::vector<double> gaussian_kernel(double fwhm_vox);

// Separable convolution along x, y, z with zero padding.
Volume gaussian_smooth(const Volume& volume, double fwhm_vox);

// Subject s draws its noise from stream
// (derive_seed(master_seed, trial_index), s), smooths it, rescales it to unit
// sample sd over the (full) mask, then adds the signal sphere.
SubjectStack generate_stack(const SynthConfig& cfg);

struct TrialOutcome {
  std::size_t clusters = 0;
  std::size_t discoveries = 0;
  std::size_t false_discoveries = 0;  // rejected clusters peaking outside the signal
  double fdp = 0.0;                   // false / max(discoveries, 1)
};

struct BinomialInterval {
  double lo = 0.0;
  double hi = 1.0;
};

// 95% Wilson score interval for k successes out of n.
BinomialInterval wilson_interval(std::size_t successes, std::size_t n);

struct SimulationSummary {
  std::size_t trials = 0;
  double alpha_fdr = 0.0;
  double mean_fdp = 0.0;
  double mean_discoveries = 0.0;
  double any_rejection_fraction = 0.0;
  BinomialInterval ci95;
  std::vector<TrialOutcome> outcomes;
};

// One complete trial: synthesize, run the sign-flip null, apply BH.
TrialOutcome run_trial(const SynthConfig& cfg, const PermutationConfig& perm);

// Trial t uses trial_index = t and a permutation seed derived from
// (perm.master_seed, t). Parallel over trials with perm.threads workers;
// results do not depend on the worker count.
SimulationSummary run_trials(const SynthConfig& cfg_template, std::size_t trials,
                             const PermutationConfig& perm);

}  // namespace clusterfdr
