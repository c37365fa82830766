#include "clusterfdr/permnull.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "clusterfdr/csv.hpp"
#include "clusterfdr/error.hpp"
#include "clusterfdr/parallel.hpp"
#include "clusterfdr/rng.hpp"
#include "clusterfdr/stats.hpp"
#include "clusterfdr/tdist.hpp"

namespace clusterfdr {

void PermutationConfig::validate() const {
  if (realizations < 1) throw Error(ErrorKind::InvalidArgument, "realization count B must be >= 1");
  if (!(cdt_p > 0.0 && cdt_p < 0.5)) {
    throw Error(ErrorKind::InvalidArgument, "cluster-defining threshold p must lie in (0, 0.5)");
  }
  if (!(alpha_fdr > 0.0 && alpha_fdr < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "FDR alpha must lie in (0, 1)");
  }
}

ExtentNullDistribution::ExtentNullDistribution(std::map<std::size_t, double> mass,
                                               double zero_cluster_fraction,
                                               NullFingerprint fingerprint)
    : mass_(std::move(mass)),
      zero_cluster_fraction_(zero_cluster_fraction),
      fingerprint_(fingerprint) {
  if (fingerprint_.realizations < 1) {
    throw Error(ErrorKind::InvalidArgument, "null distribution needs B >= 1");
  }
  double total = 0.0;
  for (const auto& [extent, m] : mass_) {
    if (!(m >= 0.0) || !std::isfinite(m)) {
      throw Error(ErrorKind::InvalidArgument, "null mass must be finite and non-negative");
    }
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorKind::InvalidArgument, "null mass sums to " + csv::format_double(total) + ", not 1");
  }
}

ExtentNullDistribution ExtentNullDistribution::pool(
    std::span<const std::vector<std::size_t>> realization_extents, NullFingerprint fingerprint) {
  const std::size_t b = realization_extents.size();
  if (b == 0) throw Error(ErrorKind::InvalidArgument, "cannot pool zero realizations");
  fingerprint.realizations = b;

  std::map<std::size_t, double> sums;
  std::size_t empty = 0;
  std::vector<std::size_t> sorted;
  // fixed reduction order: realization ascending, extent ascending
  for (const auto& extents : realization_extents) {
    if (extents.empty()) {
      ++empty;
      continue;
    }
    sorted.assign(extents.begin(), extents.end());
    std::sort(sorted.begin(), sorted.end());
    const double k_total = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      if (sorted[i] == 0) throw Error(ErrorKind::InvalidArgument, "cluster extent must be >= 1");
      sums[sorted[i]] += static_cast<double>(j - i) / k_total;
      i = j;
    }
  }

  const double bd = static_cast<double>(b);
  std::map<std::size_t, double> mass;
  if (empty > 0) mass[0] = static_cast<double>(empty) / bd;
  for (const auto& [extent, s] : sums) mass[extent] = s / bd;
  return ExtentNullDistribution(std::move(mass), static_cast<double>(empty) / bd, fingerprint);
}

double ExtentNullDistribution::mass_at(std::size_t extent) const {
  auto it = mass_.find(extent);
  return it == mass_.end() ? 0.0 : it->second;
}

double ExtentNullDistribution::tail(std::size_t extent) const {
  double sum = 0.0;
  for (auto it = mass_.lower_bound(extent); it != mass_.end(); ++it) sum += it->second;
  return sum;
}

double null_pvalue(const ExtentNullDistribution& dist, std::size_t extent) {
  if (extent < 1) throw Error(ErrorKind::InvalidArgument, "observed cluster extent must be >= 1");
  const double floor = 1.0 / (static_cast<double>(dist.realizations()) + 1.0);
  // the pooled tail can exceed 1 by rounding
  return std::clamp(dist.tail(extent), floor, 1.0);
}

namespace {

int degrees_of_freedom(const SubjectStack& stack) { return static_cast<int>(stack.n() - 1); }

std::vector<double> thresholds_for(std::span<const double> cdt_ps, int df) {
  std::vector<double> out;
  out.reserve(cdt_ps.size());
  for (double p : cdt_ps) out.push_back(t_upper_quantile(p, df));
  return out;
}

}  // namespace

std::vector<ExtentNullDistribution> build_nulls(const SubjectStack& stack, const PermutationConfig& cfg,
                                                std::span<const double> cdt_ps) {
  for (double p : cdt_ps) {
    PermutationConfig check = cfg;
    check.cdt_p = p;
    check.validate();
  }
  if (cdt_ps.empty()) return {};
  const int df = degrees_of_freedom(stack);
  const std::vector<double> thresholds = thresholds_for(cdt_ps, df);
  const std::size_t b = cfg.realizations;

  // results[c][r]: extents of realization r+1 at threshold c
  std::vector<std::vector<std::vector<std::size_t>>> results(
      cdt_ps.size(), std::vector<std::vector<std::size_t>>(b));

  parallel_for(b, cfg.threads, [&] {
    return [&, ws = TMapWorkspace(stack), labeler = ClusterLabeler(stack.dims(), cfg.connectivity),
            t = std::vector<double>(stack.dims().size())](std::size_t r) mutable {
      const auto signs = sign_vector(cfg.master_seed, r + 1, stack.n());
      ws.compute(signs, t);
      for (std::size_t c = 0; c < thresholds.size(); ++c) {
        labeler.extents(t, stack.mask(), thresholds[c], results[c][r]);
      }
    };
  });

  std::vector<ExtentNullDistribution> out;
  out.reserve(cdt_ps.size());
  for (std::size_t c = 0; c < cdt_ps.size(); ++c) {
    NullFingerprint fp{cdt_ps[c], thresholds[c], df, cfg.connectivity, cfg.master_seed, b};
    out.push_back(ExtentNullDistribution::pool(results[c], fp));
  }
  return out;
}

ExtentNullDistribution build_null(const SubjectStack& stack, const PermutationConfig& cfg) {
  const double cdt[] = {cfg.cdt_p};
  return std::move(build_nulls(stack, cfg, cdt).front());
}

std::vector<ContrastAnalysis> analyze_contrast(const SubjectStack& stack, const PermutationConfig& cfg,
                                               std::span<const double> cdt_ps) {
  auto nulls = build_nulls(stack, cfg, cdt_ps);
  const TMap observed = one_sample_tmap(stack);
  ClusterLabeler labeler(stack.dims(), cfg.connectivity);

  std::vector<ContrastAnalysis> out;
  out.reserve(nulls.size());
  for (auto& null : nulls) {
    const double threshold = null.fingerprint().t_threshold;
    auto clusters = labeler.extract(observed.volume.data(), stack.mask(), threshold);
    for (auto& c : clusters) c.p_uncorrected = null_pvalue(null, c.extent);
    out.push_back(ContrastAnalysis{std::move(clusters), std::move(null), threshold, observed.df,
                                   observed.zero_variance_count});
  }
  return out;
}

ContrastAnalysis analyze_contrast(const SubjectStack& stack, const PermutationConfig& cfg) {
  const double cdt[] = {cfg.cdt_p};
  return std::move(analyze_contrast(stack, cfg, cdt).front());
}

std::string null_to_json(const ExtentNullDistribution& dist) {
  const NullFingerprint& fp = dist.fingerprint();
  std::ostringstream out;
  out << "{\n"
      << "  \"format_version\": 1,\n"
      << "  \"B\": " << fp.realizations << ",\n"
      << "  \"master_seed\": " << fp.master_seed << ",\n"
      << "  \"cdt_p\": " << csv::format_double(fp.cdt_p) << ",\n"
      << "  \"t_threshold\": " << csv::format_double(fp.t_threshold) << ",\n"
      << "  \"df\": " << fp.df << ",\n"
      << "  \"connectivity\": " << neighbor_count(fp.connectivity) << ",\n"
      << "  \"zero_cluster_fraction\": " << csv::format_double(dist.zero_cluster_fraction()) << ",\n"
      << "  \"mass\": [";
  bool first = true;
  for (const auto& [extent, m] : dist.mass()) {
    out << (first ? "\n    [" : ",\n    [") << extent << ", " << csv::format_double(m) << "]";
    first = false;
  }
  out << (first ? "]\n" : "\n  ]\n") << "}\n";
  return out.str();
}

ExtentNullDistribution null_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format_version").get<int>() != 1) {
      throw Error(ErrorKind::Schema, "unsupported null-distribution format_version");
    }
    NullFingerprint fp;
    fp.realizations = j.at("B").get<std::size_t>();
    fp.master_seed = j.at("master_seed").get<std::uint64_t>();
    fp.cdt_p = j.at("cdt_p").get<double>();
    fp.t_threshold = j.at("t_threshold").get<double>();
    fp.df = j.at("df").get<int>();
    const auto conn = connectivity_from_count(j.at("connectivity").get<int>());
    if (!conn) throw Error(ErrorKind::Schema, "connectivity must be 6, 18 or 26");
    fp.connectivity = *conn;

    std::map<std::size_t, double> mass;
    for (const auto& entry : j.at("mass")) {
      if (!entry.is_array() || entry.size() != 2) {
        throw Error(ErrorKind::Schema, "mass entries must be [extent, mass] pairs");
      }
      const auto extent = entry[0].get<std::size_t>();
      if (!mass.emplace(extent, entry[1].get<double>()).second) {
        throw Error(ErrorKind::Schema, "duplicate extent " + std::to_string(extent) + " in mass");
      }
    }
    const double zero_fraction =
        j.contains("zero_cluster_fraction") ? j["zero_cluster_fraction"].get<double>()
                                            : (mass.count(0) ? mass.at(0) : 0.0);
    return ExtentNullDistribution(std::move(mass), zero_fraction, fp);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Schema, std::string("null distribution JSON: ") + e.what());
  }
}

void write_null(const ExtentNullDistribution& dist, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << null_to_json(dist);
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

ExtentNullDistribution read_null(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return null_from_json(buf.str());
}

}  // namespace clusterfdr
