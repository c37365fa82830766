#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clusterfdr/clustering.hpp"

namespace clusterfdr {

// One row of a published cluster table.
struct PublishedCluster {
  std::string contrast_id;
  std::size_t extent = 0;
  double p_rft_fwe = 1.0;
  std::size_t line = 0;  // source line, 0 when not read from a file
};

// An analyzed cluster tagged with the contrast it belongs to.
struct AnalyzedCluster {
  std::string contrast_id;
  Cluster cluster;
};

struct ComparisonRow {
  std::string contrast_id;
  std::size_t cluster_id = 0;
  std::size_t extent = 0;
  double p_rft_fwe = 1.0;
  double p_uncorrected = 1.0;
  double q_value = 1.0;
  bool significant_rft = false;
  bool significant_fdr = false;

  friend bool operator==(const ComparisonRow&, const ComparisonRow&) = default;
};

enum class UnmatchedReason { no_analyzed_cluster, ambiguous_duplicate };
std::string_view to_string(UnmatchedReason reason);

struct UnmatchedPublished {
  PublishedCluster row;
  UnmatchedReason reason;
};

struct JoinResult {
  std::vector<ComparisonRow> rows;
  std::vector<UnmatchedPublished> unmatched_published;
  std::vector<AnalyzedCluster> unmatched_analyzed;
  // contrasts where some (contrast, extent) group had differing counts on
  // the two sides
  std::vector<std::string> ambiguous_contrasts;
};

// Pairs published and analyzed clusters by (contrast_id, extent). Within a
// group both sides are taken in order (published by input order, analyzed by
// cluster id) and paired positionally when the counts agree. Groups with
// differing non-zero counts are reported as ambiguous; nothing is dropped.
// significant_rft = p_rft_fwe <= alpha_rft; significant_fdr = q <= alpha_fdr.
JoinResult join_tables(const std::vector<PublishedCluster>& published,
                       const std::vector<AnalyzedCluster>& analyzed, double alpha_rft = 0.05,
                       double alpha_fdr = 0.05);

struct QuadrantCounts {
  std::size_t rft_sig_fdr_sig = 0;
  std::size_t rft_sig_fdr_nonsig = 0;
  std::size_t rft_nonsig_fdr_sig = 0;
  std::size_t neither = 0;

  std::size_t total() const noexcept {
    return rft_sig_fdr_sig + rft_sig_fdr_nonsig + rft_nonsig_fdr_sig + neither;
  }
  friend bool operator==(const QuadrantCounts&, const QuadrantCounts&) = default;
};

struct ComparisonSummary {
  double alpha_rft = 0.05;
  double alpha_fdr = 0.05;
  QuadrantCounts quadrants;
  std::optional<double> min_p_rft_among_fdr_failures;
  std::optional<double> max_p_rft_among_fdr_successes;
};

// RFT significance is p_rft_fwe <= alpha_rft; FDR significance is the row's
// significant_fdr flag.
ComparisonSummary summarize(const std::vector<ComparisonRow>& rows, double alpha_rft = 0.05,
                            double alpha_fdr = 0.05);

inline constexpr std::string_view kComparisonCsvHeader =
    "contrast_id,cluster_id,extent,p_rft_fwe,p_uncorrected,q_value,significant_rft,significant_fdr";
inline constexpr std::string_view kClusterCsvHeader =
    "contrast_id,cluster_id,extent,peak_t,peak_x,peak_y,peak_z,p_uncorrected,q_value,significant_fdr";

// Rows are written sorted by (contrast_id, cluster_id).
void write_comparison_csv(std::vector<ComparisonRow> rows, const std::filesystem::path& path);
std::vector<ComparisonRow> read_comparison_csv(const std::filesystem::path& path);

// `contrast_id,extent,p_rft_fwe`; extra columns are ignored.
std::vector<PublishedCluster> read_published_csv(const std::filesystem::path& path);

// Per-contrast cluster table as written by `analyze`.
void write_cluster_csv(const std::vector<AnalyzedCluster>& clusters, const std::filesystem::path& path);
// Requires contrast_id, cluster_id, extent, p_uncorrected, q_value and
// significant_fdr; peak columns are optional. An empty file is an empty table.
std::vector<AnalyzedCluster> read_cluster_csv(const std::filesystem::path& path);

struct SvgMarker {
  double x = 0.0;  // -log10(p_rft_fwe)
  double y = 0.0;  // -log10(p_uncorrected)
  bool filled = false;
};

// Data-space marker positions in row order.
std::vector<SvgMarker> scatter_markers(const std::vector<ComparisonRow>& rows);

// 640x480 SVG 1.1 scatter of -log10(p_uncorrected) against -log10(p_rft_fwe)
// with dashed guides at -log10(.05) and -log10(.00001). Output bytes depend
// only on the inputs.
std::string scatter_svg(const std::vector<ComparisonRow>& rows, std::string_view cdt_label);
void write_scatter_svg(const std::vector<ComparisonRow>& rows, const std::filesystem::path& path,
                       std::string_view cdt_label);

}  // namespace clusterfdr
