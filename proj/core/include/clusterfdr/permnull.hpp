#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "clusterfdr/clustering.hpp"
#include "clusterfdr/volume.hpp"

namespace clusterfdr {

struct PermutationConfig {
  std::size_t realizations = 5000;
  std::uint64_t master_seed = 0;
  double cdt_p = 0.001;
  Connectivity connectivity = Connectivity::corners26;
  double alpha_fdr = 0.05;
  // Worker cap; 0 means hardware concurrency. Never changes results.
  unsigned threads = 1;

  void validate() const;
};

// Identifies the analysis a null distribution was built for.
struct NullFingerprint {
  double cdt_p = 0.0;
  double t_threshold = 0.0;
  int df = 0;
  Connectivity connectivity = Connectivity::corners26;
  std::uint64_t master_seed = 0;
  std::size_t realizations = 0;

  friend bool operator==(const NullFingerprint&, const NullFingerprint&) = default;
};

// Pooled distribution of the extent of a uniformly chosen cluster within a
// sign-flip realization. Realizations without clusters put their whole
// mass at extent 0.
class ExtentNullDistribution {
 public:
  ExtentNullDistribution(std::map<std::size_t, double> mass, double zero_cluster_fraction,
                         NullFingerprint fingerprint);

  // Pools per-realization extent lists with weight 1/B each. The contribution
  // of a realization with K clusters puts count_k / K at each extent k.
  static ExtentNullDistribution pool(std::span<const std::vector<std::size_t>> realization_extents,
                                     NullFingerprint fingerprint);

  const std::map<std::size_t, double>& mass() const noexcept { return mass_; }
  std::size_t realizations() const noexcept { return fingerprint_.realizations; }
  double zero_cluster_fraction() const noexcept { return zero_cluster_fraction_; }
  const NullFingerprint& fingerprint() const noexcept { return fingerprint_; }

  double mass_at(std::size_t extent) const;
  // sum of mass over extents >= extent, unclamped
  double tail(std::size_t extent) const;

 private:
  std::map<std::size_t, double> mass_;
  double zero_cluster_fraction_;
  NullFingerprint fingerprint_;
};

// P(S >= extent) under the pooled null, floored at 1/(B+1) and capped at 1.
double null_pvalue(const ExtentNullDistribution& dist, std::size_t extent);

ExtentNullDistribution build_null(const SubjectStack& stack, const PermutationConfig& cfg);

// Shares each realization's t-map across several cluster-defining
// thresholds. cfg.cdt_p is ignored in favour of `cdt_ps`.
std::vector<ExtentNullDistribution> build_nulls(const SubjectStack& stack, const PermutationConfig& cfg,
                                                std::span<const double> cdt_ps);

struct ContrastAnalysis {
  std::vector<Cluster> clusters;  // observed, p_uncorrected set
  ExtentNullDistribution null;
  double t_threshold = 0.0;
  int df = 0;
  std::size_t zero_variance_count = 0;  // observed map
};

ContrastAnalysis analyze_contrast(const SubjectStack& stack, const PermutationConfig& cfg);

// One analysis per CDT, sharing realizations.
std::vector<ContrastAnalysis> analyze_contrast(const SubjectStack& stack, const PermutationConfig& cfg,
                                               std::span<const double> cdt_ps);

// JSON null-distribution file (format_version 1).
std::string null_to_json(const ExtentNullDistribution& dist);
ExtentNullDistribution null_from_json(const std::string& text);
void write_null(const ExtentNullDistribution& dist, const std::filesystem::path& path);
ExtentNullDistribution read_null(const std::filesystem::path& path);

}  // namespace clusterfdr
