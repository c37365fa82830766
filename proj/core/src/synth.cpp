#include "clusterfdr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "clusterfdr/error.hpp"
#include "clusterfdr/fdr.hpp"
#include "clusterfdr/parallel.hpp"
#include "clusterfdr/rng.hpp"

namespace clusterfdr {

namespace {

// Keeps permutation streams apart from the data streams when both derive
// from the same user seed.
constexpr std::uint64_t kPermutationSalt = 0xD1B54A32D192ED03ULL;

}  // namespace

bool SignalSphere::contains(const Coord& c) const noexcept {
  const double dx = static_cast<double>(c.x) - center[0];
  const double dy = static_cast<double>(c.y) - center[1];
  const double dz = static_cast<double>(c.z) - center[2];
  return dx * dx + dy * dy + dz * dz <= radius * radius;
}

void SynthConfig::validate() const {
  if (dims.size() == 0) throw Error(ErrorKind::InvalidArgument, "synthetic dims must be positive");
  if (n_subjects < 2) throw Error(ErrorKind::InvalidArgument, "synthetic stack needs N >= 2");
  if (!(fwhm_vox >= 0.0) || !std::isfinite(fwhm_vox)) {
    throw Error(ErrorKind::InvalidArgument, "fwhm must be finite and >= 0");
  }
  if (signal) {
    if (!(signal->radius >= 0.0)) throw Error(ErrorKind::InvalidArgument, "signal radius must be >= 0");
    if (!std::isfinite(signal->amplitude)) throw Error(ErrorKind::InvalidArgument, "signal amplitude must be finite");
  }
}

std::vector<double> gaussian_kernel(double fwhm_vox) {
  if (!(fwhm_vox >= 0.0) || !std::isfinite(fwhm_vox)) {
    throw Error(ErrorKind::InvalidArgument, "fwhm must be finite and >= 0");
  }
  if (fwhm_vox == 0.0) return {1.0};
  const double sigma = fwhm_vox / std::sqrt(8.0 * std::numbers::ln2);
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(4.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (auto& v : k) v /= sum;
  return k;
}

namespace {

// Convolves along one axis; `stride` is the linear step of that axis and
// `len` its length.
void convolve_axis(const std::vector<double>& in, std::vector<double>& out, const Dims& d, int axis,
                   const std::vector<double>& kernel) {
  const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  const std::size_t len = axis == 0 ? d.nx : axis == 1 ? d.ny : d.nz;
  const std::size_t stride = axis == 0 ? 1 : axis == 1 ? d.nx : d.nx * d.ny;
  for (std::size_t v = 0; v < d.size(); ++v) {
    const Coord c = d.coord(v);
    const auto pos = static_cast<std::ptrdiff_t>(axis == 0 ? c.x : axis == 1 ? c.y : c.z);
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(-radius, -pos);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(radius, static_cast<std::ptrdiff_t>(len) - 1 - pos);
    double acc = 0.0;
    for (std::ptrdiff_t o = lo; o <= hi; ++o) {
      acc += kernel[static_cast<std::size_t>(o + radius)] *
             in[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(v) + o * static_cast<std::ptrdiff_t>(stride))];
    }
    out[v] = acc;
  }
}

}  // namespace

Volume gaussian_smooth(const Volume& volume, double fwhm_vox) {
  const auto kernel = gaussian_kernel(fwhm_vox);
  if (kernel.size() == 1) return volume;
  const Dims& d = volume.dims();
  std::vector<double> a(volume.data().begin(), volume.data().end());
  std::vector<double> b(a.size());
  convolve_axis(a, b, d, 0, kernel);
  convolve_axis(b, a, d, 1, kernel);
  convolve_axis(a, b, d, 2, kernel);
  return Volume(d, std::move(b), volume.voxel_size(), volume.datatype_origin());
}

SubjectStack generate_stack(const SynthConfig& cfg) {
  cfg.validate();
  const Dims& d = cfg.dims;
  const Mask mask = Mask::full(d);
  const std::uint64_t trial_seed = derive_seed(cfg.master_seed, cfg.trial_index);

  std::vector<std::uint8_t> in_signal(d.size(), 0);
  if (cfg.signal) {
    for (std::size_t v = 0; v < d.size(); ++v) in_signal[v] = cfg.signal->contains(d.coord(v)) ? 1 : 0;
  }

  std::vector<Volume> subjects;
  subjects.reserve(cfg.n_subjects);
  for (std::size_t s = 0; s < cfg.n_subjects; ++s) {
    RngStream stream(trial_seed, s);
    std::vector<double> noise(d.size());
    for (auto& x : noise) x = stream.next_standard_normal();
    std::vector<double> field = gaussian_smooth(Volume(d, std::move(noise)), cfg.fwhm_vox).take_data();

    double mean = 0.0;
    for (std::size_t v = 0; v < field.size(); ++v) mean += field[v];
    mean /= static_cast<double>(field.size());
    double ss = 0.0;
    for (double x : field) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(field.size() - 1));
    if (!(sd > 0.0)) throw Error(ErrorKind::InvalidArgument, "synthetic field has zero variance; enlarge dims");

    for (std::size_t v = 0; v < field.size(); ++v) {
      field[v] /= sd;
      if (in_signal[v]) field[v] += cfg.signal->amplitude;
    }
    subjects.emplace_back(d, std::move(field));
  }
  return SubjectStack(std::move(subjects), mask);
}

TrialOutcome run_trial(const SynthConfig& cfg, const PermutationConfig& perm) {
  const SubjectStack stack = generate_stack(cfg);
  const ContrastAnalysis analysis = analyze_contrast(stack, perm);
  const auto clusters = apply_fdr_to_clusters(analysis.clusters, perm.alpha_fdr);

  TrialOutcome out;
  out.clusters = clusters.size();
  for (const Cluster& c : clusters) {
    if (!c.significant_fdr.value_or(false)) continue;
    ++out.discoveries;
    const bool in_signal = cfg.signal && cfg.signal->amplitude != 0.0 && cfg.signal->contains(c.peak_xyz);
    if (!in_signal) ++out.false_discoveries;
  }
  out.fdp = static_cast<double>(out.false_discoveries) /
            static_cast<double>(std::max<std::size_t>(out.discoveries, 1));
  return out;
}

BinomialInterval wilson_interval(std::size_t successes, std::size_t n) {
  if (n == 0) return {0.0, 1.0};
  constexpr double z = 1.959963984540054;
  const double nd = static_cast<double>(n);
  const double phat = static_cast<double>(successes) / nd;
  const double denom = 1.0 + z * z / nd;
  const double centre = (phat + z * z / (2.0 * nd)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / nd + z * z / (4.0 * nd * nd)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

SimulationSummary run_trials(const SynthConfig& cfg_template, std::size_t trials,
                             const PermutationConfig& perm) {
  if (trials < 1) throw Error(ErrorKind::InvalidArgument, "trial count must be >= 1");
  cfg_template.validate();
  perm.validate();

  std::vector<TrialOutcome> outcomes(trials);
  parallel_for(trials, perm.threads, [&] {
    return [&](std::size_t t) {
      SynthConfig cfg = cfg_template;
      cfg.trial_index = t;
      PermutationConfig p = perm;
      p.master_seed = derive_seed(perm.master_seed ^ kPermutationSalt, t);
      p.threads = 1;
      outcomes[t] = run_trial(cfg, p);
    };
  });

  SimulationSummary s;
  s.trials = trials;
  s.alpha_fdr = perm.alpha_fdr;
  std::size_t any = 0;
  double fdp_sum = 0.0;
  double disc_sum = 0.0;
  for (const auto& o : outcomes) {
    fdp_sum += o.fdp;
    disc_sum += static_cast<double>(o.discoveries);
    if (o.discoveries > 0) ++any;
  }
  const double n = static_cast<double>(trials);
  s.mean_fdp = fdp_sum / n;
  s.mean_discoveries = disc_sum / n;
  s.any_rejection_fraction = static_cast<double>(any) / n;
  s.ci95 = wilson_interval(any, trials);
  s.outcomes = std::move(outcomes);
  return s;
}

}  // namespace clusterfdr
