#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "clusterfdr/stats.hpp"
#include "clusterfdr/volume.hpp"

namespace clusterfdr {

enum class Connectivity : std::uint8_t { faces6, edges18, corners26 };

struct Offset {
  int dx = 0;
  int dy = 0;
  int dz = 0;
};

// Full symmetric neighbor set (6, 18 or 26 offsets).
std::vector<Offset> neighbor_offsets(Connectivity conn);
int neighbor_count(Connectivity conn);
std::optional<Connectivity> connectivity_from_count(int count);
std::string_view to_string(Connectivity conn);

struct Cluster {
  std::size_t id = 0;  // 1-based, extent descending then peak index ascending
  std::size_t extent = 0;
  double peak_t = 0.0;
  Coord peak_xyz;
  std::size_t peak_index = 0;  // linear index of peak_xyz
  std::optional<double> p_uncorrected;
  std::optional<double> q_value;
  std::optional<bool> significant_fdr;
};

// Two-pass union-find labeler with reusable buffers. Supra-threshold set is
// {v in mask : t[v] > threshold}.
class ClusterLabeler {
 public:
  ClusterLabeler(Dims dims, Connectivity conn);

  std::vector<Cluster> extract(std::span<const double> t, const Mask& mask, double threshold);

  // Extents only, unordered; avoids building Cluster records.
  void extents(std::span<const double> t, const Mask& mask, double threshold,
               std::vector<std::size_t>& out);

  const Dims& dims() const noexcept { return dims_; }
  Connectivity connectivity() const noexcept { return conn_; }

 private:
  std::size_t label(std::span<const double> t, const Mask& mask, double threshold);
  std::uint32_t find(std::uint32_t a);

  Dims dims_;
  Connectivity conn_;
  std::vector<Offset> backward_;  // offsets preceding the voxel in scan order
  std::vector<std::uint32_t> labels_;
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> root_slot_;
};

std::vector<Cluster> extract_clusters(const TMap& tmap, const Mask& mask, double t_threshold,
                                      Connectivity conn);

// extent -> number of clusters with that extent
std::map<std::size_t, std::size_t> extent_histogram(std::span<const Cluster> clusters);

}  // namespace clusterfdr
