#include "clusterfdr/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "clusterfdr/error.hpp"

namespace clusterfdr {

std::vector<Offset> neighbor_offsets(Connectivity conn) {
  std::vector<Offset> out;
  for (int dz = -1; dz <= 1; ++dz) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nonzero = (dx != 0) + (dy != 0) + (dz != 0);
        if (nonzero == 0) continue;
        const bool keep = conn == Connectivity::corners26 ||
                          (conn == Connectivity::edges18 && nonzero <= 2) ||
                          (conn == Connectivity::faces6 && nonzero == 1);
        if (keep) out.push_back({dx, dy, dz});
      }
    }
  }
  return out;
}

int neighbor_count(Connectivity conn) {
  switch (conn) {
    case Connectivity::faces6: return 6;
    case Connectivity::edges18: return 18;
    case Connectivity::corners26: return 26;
  }
  return 0;
}

std::optional<Connectivity> connectivity_from_count(int count) {
  switch (count) {
    case 6: return Connectivity::faces6;
    case 18: return Connectivity::edges18;
    case 26: return Connectivity::corners26;
    default: return std::nullopt;
  }
}

std::string_view to_string(Connectivity conn) {
  switch (conn) {
    case Connectivity::faces6: return "faces6";
    case Connectivity::edges18: return "edges18";
    case Connectivity::corners26: return "corners26";
  }
  return "unknown";
}

ClusterLabeler::ClusterLabeler(Dims dims, Connectivity conn) : dims_(dims), conn_(conn) {
  if (dims.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorKind::InvalidArgument, "volume too large for 32-bit labels");
  }
  for (const Offset& o : neighbor_offsets(conn)) {
    if (o.dz < 0 || (o.dz == 0 && o.dy < 0) || (o.dz == 0 && o.dy == 0 && o.dx < 0)) {
      backward_.push_back(o);
    }
  }
  labels_.resize(dims.size());
}

std::uint32_t ClusterLabeler::find(std::uint32_t a) {
  while (parent_[a] != a) {
    parent_[a] = parent_[parent_[a]];
    a = parent_[a];
  }
  return a;
}

std::size_t ClusterLabeler::label(std::span<const double> t, const Mask& mask, double threshold) {
  if (t.size() != dims_.size() || mask.dims() != dims_) {
    throw Error(ErrorKind::DimMismatch, "t-map, mask and labeler dims must agree");
  }
  if (!std::isfinite(threshold)) throw Error(ErrorKind::InvalidArgument, "threshold must be finite");

  const auto nx = static_cast<long>(dims_.nx);
  const auto ny = static_cast<long>(dims_.ny);
  parent_.assign(1, 0);

  std::size_t v = 0;
  for (long z = 0; z < static_cast<long>(dims_.nz); ++z) {
    for (long y = 0; y < ny; ++y) {
      for (long x = 0; x < nx; ++x, ++v) {
        if (!(mask.inside(v) && t[v] > threshold)) {
          labels_[v] = 0;
          continue;
        }
        std::uint32_t current = 0;
        for (const Offset& o : backward_) {
          const long xx = x + o.dx;
          const long yy = y + o.dy;
          const long zz = z + o.dz;
          if (xx < 0 || xx >= nx || yy < 0 || yy >= ny || zz < 0) continue;
          const std::uint32_t nl = labels_[static_cast<std::size_t>(xx + nx * (yy + ny * zz))];
          if (nl == 0) continue;
          const std::uint32_t root = find(nl);
          if (current == 0) {
            current = root;
          } else if (root != current) {
            // union by smaller label keeps roots stable
            if (root < current) {
              parent_[current] = root;
              current = root;
            } else {
              parent_[root] = current;
            }
          }
        }
        if (current == 0) {
          current = static_cast<std::uint32_t>(parent_.size());
          parent_.push_back(current);
        }
        labels_[v] = current;
      }
    }
  }

  // compact roots to 1..K in order of first appearance
  root_slot_.assign(parent_.size(), 0);
  std::uint32_t next = 0;
  for (std::uint32_t l = 1; l < parent_.size(); ++l) {
    const std::uint32_t r = find(l);
    if (root_slot_[r] == 0) root_slot_[r] = ++next;
    root_slot_[l] = root_slot_[r];
  }
  for (auto& l : labels_) {
    if (l != 0) l = root_slot_[l];
  }
  return next;
}

void ClusterLabeler::extents(std::span<const double> t, const Mask& mask, double threshold,
                             std::vector<std::size_t>& out) {
  const std::size_t k = label(t, mask, threshold);
  out.assign(k, 0);
  for (auto l : labels_) {
    if (l != 0) ++out[l - 1];
  }
}

std::vector<Cluster> ClusterLabeler::extract(std::span<const double> t, const Mask& mask,
                                             double threshold) {
  const std::size_t k = label(t, mask, threshold);
  std::vector<Cluster> clusters(k);
  for (auto& c : clusters) c.peak_t = -std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < labels_.size(); ++v) {
    if (labels_[v] == 0) continue;
    Cluster& c = clusters[labels_[v] - 1];
    ++c.extent;
    // strict > keeps the smallest linear index among tied maxima
    if (t[v] > c.peak_t) {
      c.peak_t = t[v];
      c.peak_index = v;
    }
  }
  std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
    if (a.extent != b.extent) return a.extent > b.extent;
    return a.peak_index < b.peak_index;
  });
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    clusters[i].id = i + 1;
    clusters[i].peak_xyz = dims_.coord(clusters[i].peak_index);
  }
  return clusters;
}

std::vector<Cluster> extract_clusters(const TMap& tmap, const Mask& mask, double t_threshold,
                                      Connectivity conn) {
  if (tmap.volume.dims() != mask.dims()) {
    throw Error(ErrorKind::DimMismatch, "t-map and mask dims differ");
  }
  ClusterLabeler labeler(mask.dims(), conn);
  return labeler.extract(tmap.volume.data(), mask, t_threshold);
}

std::map<std::size_t, std::size_t> extent_histogram(std::span<const Cluster> clusters) {
  std::map<std::size_t, std::size_t> hist;
  for (const Cluster& c : clusters) ++hist[c.extent];
  return hist;
}

}  // namespace clusterfdr
