#include "clusterfdr/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "clusterfdr/csv.hpp"
#include "clusterfdr/error.hpp"

namespace clusterfdr {

std::string_view to_string(UnmatchedReason reason) {
  switch (reason) {
    case UnmatchedReason::no_analyzed_cluster: return "no_analyzed_cluster";
    case UnmatchedReason::ambiguous_duplicate: return "ambiguous_duplicate";
  }
  return "unknown";
}

JoinResult join_tables(const std::vector<PublishedCluster>& published,
                       const std::vector<AnalyzedCluster>& analyzed, double alpha_rft,
                       double alpha_fdr) {
  using Key = std::pair<std::string, std::size_t>;
  std::map<Key, std::vector<const PublishedCluster*>> pub_groups;
  std::map<Key, std::vector<const AnalyzedCluster*>> ana_groups;
  for (const auto& p : published) pub_groups[{p.contrast_id, p.extent}].push_back(&p);
  for (const auto& a : analyzed) ana_groups[{a.contrast_id, a.cluster.extent}].push_back(&a);
  for (auto& [key, group] : ana_groups) {
    std::stable_sort(group.begin(), group.end(), [](const AnalyzedCluster* a, const AnalyzedCluster* b) {
      return a->cluster.id < b->cluster.id;
    });
  }

  JoinResult out;
  std::map<const PublishedCluster*, UnmatchedReason> unmatched;
  std::vector<std::string> ambiguous;
  for (const auto& [key, pubs] : pub_groups) {
    auto it = ana_groups.find(key);
    if (it == ana_groups.end() || it->second.empty()) {
      for (auto* p : pubs) unmatched.emplace(p, UnmatchedReason::no_analyzed_cluster);
      continue;
    }
    auto& anas = it->second;
    if (anas.size() != pubs.size()) {
      for (auto* p : pubs) unmatched.emplace(p, UnmatchedReason::ambiguous_duplicate);
      for (auto* a : anas) out.unmatched_analyzed.push_back(*a);
      ambiguous.push_back(key.first);
      anas.clear();
      continue;
    }
    for (std::size_t i = 0; i < pubs.size(); ++i) {
      const PublishedCluster& p = *pubs[i];
      const Cluster& c = anas[i]->cluster;
      if (!c.p_uncorrected || !c.q_value) {
        throw Error(ErrorKind::MissingP, "analyzed cluster " + std::to_string(c.id) + " of contrast '" +
                                             key.first + "' lacks p_uncorrected or q_value");
      }
      ComparisonRow row;
      row.contrast_id = p.contrast_id;
      row.cluster_id = c.id;
      row.extent = c.extent;
      row.p_rft_fwe = p.p_rft_fwe;
      row.p_uncorrected = *c.p_uncorrected;
      row.q_value = *c.q_value;
      row.significant_rft = p.p_rft_fwe <= alpha_rft;
      row.significant_fdr = *c.q_value <= alpha_fdr;
      out.rows.push_back(std::move(row));
    }
    anas.clear();
  }
  for (const auto& [key, anas] : ana_groups) {
    for (auto* a : anas) out.unmatched_analyzed.push_back(*a);
  }

  // published leftovers keep input order
  for (const auto& p : published) {
    auto it = unmatched.find(&p);
    if (it != unmatched.end()) out.unmatched_published.push_back({p, it->second});
  }
  std::sort(out.rows.begin(), out.rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
    return std::tie(a.contrast_id, a.cluster_id) < std::tie(b.contrast_id, b.cluster_id);
  });
  std::sort(out.unmatched_analyzed.begin(), out.unmatched_analyzed.end(),
            [](const AnalyzedCluster& a, const AnalyzedCluster& b) {
              return std::tie(a.contrast_id, a.cluster.id) < std::tie(b.contrast_id, b.cluster.id);
            });
  std::sort(ambiguous.begin(), ambiguous.end());
  ambiguous.erase(std::unique(ambiguous.begin(), ambiguous.end()), ambiguous.end());
  out.ambiguous_contrasts = std::move(ambiguous);
  return out;
}

ComparisonSummary summarize(const std::vector<ComparisonRow>& rows, double alpha_rft, double alpha_fdr) {
  ComparisonSummary s;
  s.alpha_rft = alpha_rft;
  s.alpha_fdr = alpha_fdr;
  for (const auto& r : rows) {
    const bool rft = r.p_rft_fwe <= alpha_rft;
    if (rft && r.significant_fdr) ++s.quadrants.rft_sig_fdr_sig;
    else if (rft) ++s.quadrants.rft_sig_fdr_nonsig;
    else if (r.significant_fdr) ++s.quadrants.rft_nonsig_fdr_sig;
    else ++s.quadrants.neither;

    if (r.significant_fdr) {
      s.max_p_rft_among_fdr_successes = std::max(s.max_p_rft_among_fdr_successes.value_or(r.p_rft_fwe), r.p_rft_fwe);
    } else {
      s.min_p_rft_among_fdr_failures = std::min(s.min_p_rft_among_fdr_failures.value_or(r.p_rft_fwe), r.p_rft_fwe);
    }
  }
  return s;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  return out;
}

const char* bool_text(bool b) { return b ? "true" : "false"; }

std::size_t parse_count(const csv::Record& rec, std::size_t col, std::string_view name, long long min) {
  const long long v = csv::parse_int(rec, col, name);
  if (v < min) {
    throw Error(ErrorKind::Schema, "line " + std::to_string(rec.line) + ": '" + std::string(name) +
                                       "' must be >= " + std::to_string(min));
  }
  return static_cast<std::size_t>(v);
}

double parse_probability(const csv::Record& rec, std::size_t col, std::string_view name) {
  const double v = csv::parse_double(rec, col, name);
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorKind::Schema, "line " + std::to_string(rec.line) + ": '" + std::string(name) +
                                       "' must be a probability");
  }
  return v;
}

}  // namespace

void write_comparison_csv(std::vector<ComparisonRow> rows, const std::filesystem::path& path) {
  std::sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
    return std::tie(a.contrast_id, a.cluster_id) < std::tie(b.contrast_id, b.cluster_id);
  });
  auto out = open_out(path);
  out << kComparisonCsvHeader << '\n';
  for (const auto& r : rows) {
    out << csv::join({r.contrast_id, std::to_string(r.cluster_id), std::to_string(r.extent),
                      csv::format_double(r.p_rft_fwe), csv::format_double(r.p_uncorrected),
                      csv::format_double(r.q_value), bool_text(r.significant_rft),
                      bool_text(r.significant_fdr)})
        << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

std::vector<ComparisonRow> read_comparison_csv(const std::filesystem::path& path) {
  const auto records = csv::read_file(path);
  if (records.empty()) throw Error(ErrorKind::Schema, path.string() + ": missing header");
  const csv::Header h(records.front());
  const auto c_contrast = h.require("contrast_id");
  const auto c_id = h.require("cluster_id");
  const auto c_extent = h.require("extent");
  const auto c_rft = h.require("p_rft_fwe");
  const auto c_p = h.require("p_uncorrected");
  const auto c_q = h.require("q_value");
  const auto c_srft = h.require("significant_rft");
  const auto c_sfdr = h.require("significant_fdr");
  std::vector<ComparisonRow> rows;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    ComparisonRow r;
    if (c_contrast >= rec.fields.size()) {
      throw Error(ErrorKind::Schema, "line " + std::to_string(rec.line) + ": missing contrast_id");
    }
    r.contrast_id = rec.fields[c_contrast];
    r.cluster_id = parse_count(rec, c_id, "cluster_id", 1);
    r.extent = parse_count(rec, c_extent, "extent", 1);
    r.p_rft_fwe = parse_probability(rec, c_rft, "p_rft_fwe");
    r.p_uncorrected = parse_probability(rec, c_p, "p_uncorrected");
    r.q_value = parse_probability(rec, c_q, "q_value");
    r.significant_rft = csv::parse_bool(rec, c_srft, "significant_rft");
    r.significant_fdr = csv::parse_bool(rec, c_sfdr, "significant_fdr");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<PublishedCluster> read_published_csv(const std::filesystem::path& path) {
  const auto records = csv::read_file(path);
  if (records.empty()) throw Error(ErrorKind::Schema, path.string() + ": missing header");
  const csv::Header h(records.front());
  const auto c_contrast = h.require("contrast_id");
  const auto c_extent = h.require("extent");
  const auto c_rft = h.require("p_rft_fwe");
  std::vector<PublishedCluster> rows;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (c_contrast >= rec.fields.size()) {
      throw Error(ErrorKind::Schema, "line " + std::to_string(rec.line) + ": missing contrast_id");
    }
    PublishedCluster p;
    p.contrast_id = rec.fields[c_contrast];
    p.extent = parse_count(rec, c_extent, "extent", 1);
    p.p_rft_fwe = parse_probability(rec, c_rft, "p_rft_fwe");
    if (p.p_rft_fwe <= 0.0) {
      throw Error(ErrorKind::Schema, "line " + std::to_string(rec.line) + ": 'p_rft_fwe' must be > 0");
    }
    p.line = rec.line;
    rows.push_back(std::move(p));
  }
  return rows;
}

void write_cluster_csv(const std::vector<AnalyzedCluster>& clusters, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kClusterCsvHeader << '\n';
  for (const auto& ac : clusters) {
    const Cluster& c = ac.cluster;
    out << csv::join({ac.contrast_id, std::to_string(c.id), std::to_string(c.extent),
                      csv::format_double(c.peak_t), std::to_string(c.peak_xyz.x),
                      std::to_string(c.peak_xyz.y), std::to_string(c.peak_xyz.z),
                      c.p_uncorrected ? csv::format_double(*c.p_uncorrected) : "",
                      c.q_value ? csv::format_double(*c.q_value) : "",
                      c.significant_fdr ? bool_text(*c.significant_fdr) : ""})
        << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

std::vector<AnalyzedCluster> read_cluster_csv(const std::filesystem::path& path) {
  const auto records = csv::read_file(path);
  if (records.empty()) return {};
  const csv::Header h(records.front());
  const auto c_contrast = h.require("contrast_id");
  const auto c_id = h.require("cluster_id");
  const auto c_extent = h.require("extent");
  const auto c_p = h.require("p_uncorrected");
  const auto c_q = h.require("q_value");
  const auto c_sig = h.require("significant_fdr");
  const auto c_peak = h.find("peak_t");
  const auto c_x = h.find("peak_x");
  const auto c_y = h.find("peak_y");
  const auto c_z = h.find("peak_z");
  std::vector<AnalyzedCluster> out;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (c_contrast >= rec.fields.size()) {
      throw Error(ErrorKind::Schema, "line " + std::to_string(rec.line) + ": missing contrast_id");
    }
    AnalyzedCluster ac;
    ac.contrast_id = rec.fields[c_contrast];
    Cluster& c = ac.cluster;
    c.id = parse_count(rec, c_id, "cluster_id", 1);
    c.extent = parse_count(rec, c_extent, "extent", 1);
    c.p_uncorrected = parse_probability(rec, c_p, "p_uncorrected");
    c.q_value = parse_probability(rec, c_q, "q_value");
    c.significant_fdr = csv::parse_bool(rec, c_sig, "significant_fdr");
    if (c_peak) c.peak_t = csv::parse_double(rec, *c_peak, "peak_t");
    if (c_x && c_y && c_z) {
      c.peak_xyz = {parse_count(rec, *c_x, "peak_x", 0), parse_count(rec, *c_y, "peak_y", 0),
                    parse_count(rec, *c_z, "peak_z", 0)};
    }
    out.push_back(std::move(ac));
  }
  return out;
}

std::vector<SvgMarker> scatter_markers(const std::vector<ComparisonRow>& rows) {
  std::vector<SvgMarker> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    out.push_back({-std::log10(r.p_rft_fwe), -std::log10(r.p_uncorrected), r.significant_fdr});
  }
  return out;
}

namespace {

constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 610.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 420.0;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string px(double v) { return fmt("%.3f", v); }

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

double tick_step(double max) { return max <= 12.0 ? 1.0 : std::ceil(max / 10.0); }

}  // namespace

std::string scatter_svg(const std::vector<ComparisonRow>& rows, std::string_view cdt_label) {
  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"640\" height=\"480\" "
       "viewBox=\"0 0 640 480\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n"
    << "<text x=\"320\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
    << "RFT-FWE vs permutation p, CDT " << xml_escape(cdt_label) << "</text>\n";

  if (rows.empty()) {
    s << "<text class=\"placeholder\" x=\"320\" y=\"240\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"20\">no data</text>\n"
      << "</svg>\n";
    return s.str();
  }

  const auto markers = scatter_markers(rows);
  double max_x = 0.0;
  double max_y = 0.0;
  for (const auto& m : markers) {
    max_x = std::max(max_x, m.x);
    max_y = std::max(max_y, m.y);
  }
  // keep the 1e-5 guide inside the frame
  const double x_max = std::max(6.0, std::ceil(max_x));
  const double y_max = std::max(4.0, std::ceil(max_y));
  auto to_px = [&](double x) { return kLeft + (kRight - kLeft) * x / x_max; };
  auto to_py = [&](double y) { return kBottom - (kBottom - kTop) * y / y_max; };

  s << "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n"
    << "<line x1=\"" << px(kLeft) << "\" y1=\"" << px(kBottom) << "\" x2=\"" << px(kRight) << "\" y2=\""
    << px(kBottom) << "\"/>\n"
    << "<line x1=\"" << px(kLeft) << "\" y1=\"" << px(kBottom) << "\" x2=\"" << px(kLeft) << "\" y2=\""
    << px(kTop) << "\"/>\n"
    << "</g>\n";

  s << "<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"11\">\n";
  const double xs = tick_step(x_max);
  for (double v = 0.0; v <= x_max + 1e-9; v += xs) {
    s << "<line x1=\"" << px(to_px(v)) << "\" y1=\"" << px(kBottom) << "\" x2=\"" << px(to_px(v))
      << "\" y2=\"" << px(kBottom + 5) << "\" stroke=\"black\"/>"
      << "<text x=\"" << px(to_px(v)) << "\" y=\"" << px(kBottom + 18)
      << "\" text-anchor=\"middle\">" << fmt("%.0f", v) << "</text>\n";
  }
  const double ys = tick_step(y_max);
  for (double v = 0.0; v <= y_max + 1e-9; v += ys) {
    s << "<line x1=\"" << px(kLeft - 5) << "\" y1=\"" << px(to_py(v)) << "\" x2=\"" << px(kLeft)
      << "\" y2=\"" << px(to_py(v)) << "\" stroke=\"black\"/>"
      << "<text x=\"" << px(kLeft - 8) << "\" y=\"" << px(to_py(v) + 4)
      << "\" text-anchor=\"end\">" << fmt("%.0f", v) << "</text>\n";
  }
  s << "</g>\n";

  for (double p : {0.05, 0.00001}) {
    const double gx = to_px(-std::log10(p));
    s << "<line class=\"guide\" data-p=\"" << fmt("%g", p) << "\" x1=\"" << px(gx) << "\" y1=\""
      << px(kBottom) << "\" x2=\"" << px(gx) << "\" y2=\"" << px(kTop)
      << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
  }

  s << "<text x=\"" << px((kLeft + kRight) / 2) << "\" y=\"" << px(kHeight - 22)
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
    << "-log10(p RFT-FWE)</text>\n"
    << "<text x=\"18\" y=\"" << px((kTop + kBottom) / 2) << "\" text-anchor=\"middle\" "
    << "font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 "
    << px((kTop + kBottom) / 2) << ")\">-log10(p uncorrected, permutation)</text>\n";

  s << "<g class=\"markers\" stroke=\"#1f4e99\" stroke-width=\"1.5\">\n";
  for (std::size_t i = 0; i < markers.size(); ++i) {
    const auto& m = markers[i];
    s << "<circle cx=\"" << px(to_px(m.x)) << "\" cy=\"" << px(to_py(m.y)) << "\" r=\"4\" fill=\""
      << (m.filled ? "#1f4e99" : "none") << "\" data-x=\"" << fmt("%.10f", m.x) << "\" data-y=\""
      << fmt("%.10f", m.y) << "\" data-contrast=\"" << xml_escape(rows[i].contrast_id)
      << "\" data-cluster=\"" << rows[i].cluster_id << "\"/>\n";
  }
  s << "</g>\n";

  const double lx = kRight - 150;
  s << "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"11\">\n"
    << "<circle cx=\"" << px(lx) << "\" cy=\"" << px(kTop + 10)
    << "\" r=\"4\" fill=\"#1f4e99\" stroke=\"#1f4e99\"/><text x=\"" << px(lx + 10) << "\" y=\""
    << px(kTop + 14) << "\">FDR significant</text>\n"
    << "<circle cx=\"" << px(lx) << "\" cy=\"" << px(kTop + 28)
    << "\" r=\"4\" fill=\"none\" stroke=\"#1f4e99\"/><text x=\"" << px(lx + 10) << "\" y=\""
    << px(kTop + 32) << "\">not FDR significant</text>\n"
    << "</g>\n";
  s << "</svg>\n";
  return s.str();
}

void write_scatter_svg(const std::vector<ComparisonRow>& rows, const std::filesystem::path& path,
                       std::string_view cdt_label) {
  auto out = open_out(path);
  out << scatter_svg(rows, cdt_label);
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace clusterfdr
