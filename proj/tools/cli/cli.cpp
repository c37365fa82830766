#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "clusterfdr/clustering.hpp"
#include "clusterfdr/error.hpp"
#include "clusterfdr/fdr.hpp"
#include "clusterfdr/permnull.hpp"
#include "clusterfdr/report.hpp"
#include "clusterfdr/stats.hpp"
#include "clusterfdr/synth.hpp"
#include "clusterfdr/tdist.hpp"
#include "clusterfdr/volume.hpp"

namespace clusterfdr::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Usage problems detected after CLI11 has finished parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TmapArgs {
  std::vector<std::string> subjects;
  std::string mask;
  double mask_threshold = 0.0;
  std::string out;
};

struct AnalyzeArgs {
  std::vector<std::string> subjects;
  std::string mask;
  double mask_threshold = 0.0;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::size_t realizations = 5000;
  std::vector<double> cdts{0.001, 0.01};
  double alpha = 0.05;
  int connectivity = 26;
  std::string contrast_id = "contrast";
  unsigned threads = 0;
};

struct CompareArgs {
  std::string published;
  std::string analyzed;
  std::string out_dir;
  double alpha_rft = 0.05;
  double alpha_fdr = 0.05;
  std::string label;
};

struct SimulateArgs {
  std::uint64_t seed = 0;
  std::size_t trials = 200;
  std::vector<std::size_t> dims{20, 20, 20};
  std::size_t n_subjects = 20;
  double fwhm = 2.0;
  std::size_t realizations = 500;
  double cdt = 0.01;
  double alpha = 0.05;
  int connectivity = 26;
  std::vector<double> signal_center;
  double signal_radius = 0.0;
  double signal_amplitude = 0.0;
  double max_any_rejection = 0.10;
  std::string out = "simulation_summary.json";
  unsigned threads = 0;
};

struct QuantileArgs {
  double p = 0.0;
  double df = 0.0;
};

// Shortest decimal that round-trips, e.g. 0.001 -> "0.001".
std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::to_string(v);
}

// Fills options that were not given on the command line from a flat JSON
// object. Keys are long option names without dashes; unknown keys are
// ignored so a resolved-config file can be fed back in.
void apply_config(CLI::App& sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw UsageError("config " + path + " must hold a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "config") continue;
    CLI::Option* opt = sub.get_option_no_throw("--" + it.key());
    if (opt == nullptr || opt->count() > 0) continue;
    auto text = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    std::vector<std::string> values;
    if (it->is_array()) {
      for (const auto& e : *it) values.push_back(text(e));
    } else if (it->is_object()) {
      continue;
    } else {
      values.push_back(text(*it));
    }
    try {
      opt->add_result(values);
      opt->run_callback();
    } catch (const CLI::ParseError& e) {
      throw UsageError("config " + path + ": key '" + it.key() + "': " + e.what());
    }
  }
}

void require(const CLI::App& sub, const std::string& name) {
  const CLI::Option* opt = sub.get_option_no_throw(name);
  if (opt == nullptr || opt->count() == 0) throw UsageError(name + " is required");
}

Connectivity parse_connectivity(int n) {
  const auto c = connectivity_from_count(n);
  if (!c) throw UsageError("--connectivity must be 6, 18 or 26");
  return *c;
}

bool is_volume_file(const fs::path& p) {
  const auto ext = p.extension();
  return ext == ".nii" || ext == ".f32raw";
}

// A directory (volumes in lexicographic order), a list file with one path
// per line, or explicit volume paths.
std::vector<fs::path> resolve_subjects(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  if (inputs.size() == 1 && fs::is_directory(inputs.front())) {
    for (const auto& entry : fs::directory_iterator(inputs.front())) {
      if (entry.is_regular_file() && is_volume_file(entry.path())) out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
    return out;
  }
  if (inputs.size() == 1 && !is_volume_file(inputs.front()) && fs::path(inputs.front()).extension() != ".json") {
    const fs::path list(inputs.front());
    std::ifstream in(list);
    if (!in) throw Error(ErrorKind::Io, "cannot open subject list " + list.string());
    std::string line;
    while (std::getline(in, line)) {
      const auto b = line.find_first_not_of(" \t\r");
      if (b == std::string::npos || line[b] == '#') continue;
      const auto e = line.find_last_not_of(" \t\r");
      fs::path p(line.substr(b, e - b + 1));
      if (p.is_relative()) p = list.parent_path() / p;
      out.push_back(p.lexically_normal());
    }
    return out;
  }
  for (const auto& s : inputs) out.emplace_back(s);
  return out;
}

struct LoadedStack {
  std::vector<fs::path> files;
  SubjectStack stack;
};

LoadedStack load_stack(const std::vector<std::string>& subject_args, const std::string& mask_path,
                       double mask_threshold) {
  auto files = resolve_subjects(subject_args);
  if (files.size() < 2) {
    throw UsageError("one-sample test needs N >= 2 subjects, got N=" + std::to_string(files.size()));
  }
  std::vector<Volume> volumes;
  volumes.reserve(files.size());
  for (const auto& f : files) volumes.push_back(load_volume(f));
  Mask mask = fs::path(mask_path).extension() == ".csv"
                  ? load_mask_csv(mask_path, volumes.front().dims())
                  : load_mask(mask_path, mask_threshold);
  return {files, SubjectStack(std::move(volumes), std::move(mask))};
}

json path_list(const std::vector<fs::path>& files) {
  json a = json::array();
  for (const auto& f : files) a.push_back(f.string());
  return a;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create directory " + dir.string() + ": " + ec.message());
}

int cmd_tmap(const TmapArgs& a, std::ostream& out) {
  const auto loaded = load_stack(a.subjects, a.mask, a.mask_threshold);
  const TMap tmap = one_sample_tmap(loaded.stack);
  write_nifti(tmap.volume, a.out);

  json cfg;
  cfg["subcommand"] = "tmap";
  cfg["subjects"] = path_list(loaded.files);
  cfg["mask"] = a.mask;
  cfg["mask-threshold"] = a.mask_threshold;
  cfg["out"] = a.out;
  fs::path cfg_path(a.out);
  cfg_path.replace_extension(".config.json");
  write_json(cfg_path, cfg);

  out << "N=" << loaded.stack.n() << " df=" << tmap.df << " zero_variance=" << tmap.zero_variance_count
      << "\n";
  return kOk;
}

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  PermutationConfig cfg;
  cfg.realizations = a.realizations;
  cfg.master_seed = a.seed;
  cfg.connectivity = parse_connectivity(a.connectivity);
  cfg.alpha_fdr = a.alpha;
  cfg.threads = a.threads;
  if (a.cdts.empty()) throw UsageError("at least one --cdt is required");
  std::vector<double> cdts = a.cdts;
  for (double p : cdts) {
    cfg.cdt_p = p;
    cfg.validate();
  }
  cdts.erase(std::unique(cdts.begin(), cdts.end()), cdts.end());

  const auto loaded = load_stack(a.subjects, a.mask, a.mask_threshold);
  ensure_dir(a.out_dir);
  auto results = analyze_contrast(loaded.stack, cfg, cdts);
  if (!results.empty() && results.front().zero_variance_count > 0) {
    err << "warning: " << results.front().zero_variance_count
        << " in-mask voxels have zero variance and were assigned t=0\n";
  }

  for (std::size_t i = 0; i < results.size(); ++i) {
    auto& r = results[i];
    const std::string suffix = "cdt" + shortest(cdts[i]);
    const auto clusters = apply_fdr_to_clusters(std::move(r.clusters), cfg.alpha_fdr);
    std::vector<AnalyzedCluster> tagged;
    tagged.reserve(clusters.size());
    std::size_t significant = 0;
    for (const auto& c : clusters) {
      significant += c.significant_fdr.value_or(false) ? 1 : 0;
      tagged.push_back({a.contrast_id, c});
    }
    write_cluster_csv(tagged, fs::path(a.out_dir) / ("clusters_" + suffix + ".csv"));
    write_null(r.null, fs::path(a.out_dir) / ("null_" + suffix + ".json"));

    json resolved;
    resolved["subcommand"] = "analyze";
    resolved["subjects"] = path_list(loaded.files);
    resolved["mask"] = a.mask;
    resolved["mask-threshold"] = a.mask_threshold;
    resolved["seed"] = a.seed;
    resolved["out-dir"] = a.out_dir;
    resolved["realizations"] = a.realizations;
    resolved["cdt"] = json::array({cdts[i]});
    resolved["alpha"] = a.alpha;
    resolved["connectivity"] = a.connectivity;
    resolved["contrast-id"] = a.contrast_id;
    resolved["derived"] = {{"n_subjects", loaded.stack.n()},
                           {"df", r.df},
                           {"t_threshold", r.t_threshold},
                           {"threshold_sidedness", "one-sided upper tail"},
                           {"threshold_rule", "t > t_threshold"},
                           {"connectivity_name", std::string(to_string(cfg.connectivity))},
                           {"zero_variance_count", r.zero_variance_count},
                           {"all_cdts", cdts}};
    write_json(fs::path(a.out_dir) / ("config_" + suffix + ".json"), resolved);

    out << "cdt=" << shortest(cdts[i]) << " t_threshold=" << fixed6(r.t_threshold)
        << " clusters=" << clusters.size() << " fdr_significant=" << significant << "\n";
  }
  return kOk;
}

std::string default_label(const std::string& analyzed) {
  const std::string stem = fs::path(analyzed).stem().string();
  const auto pos = stem.rfind("cdt");
  return pos == std::string::npos ? stem : stem.substr(pos + 3);
}

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  if (!(a.alpha_rft > 0.0 && a.alpha_rft < 1.0) || !(a.alpha_fdr > 0.0 && a.alpha_fdr < 1.0)) {
    throw UsageError("--alpha-rft and --alpha-fdr must lie in (0, 1)");
  }
  const auto published = read_published_csv(a.published);
  const auto analyzed = read_cluster_csv(a.analyzed);
  const std::string label = a.label.empty() ? default_label(a.analyzed) : a.label;

  const JoinResult joined = join_tables(published, analyzed, a.alpha_rft, a.alpha_fdr);
  const ComparisonSummary summary = summarize(joined.rows, a.alpha_rft, a.alpha_fdr);

  ensure_dir(a.out_dir);
  write_comparison_csv(joined.rows, fs::path(a.out_dir) / "comparison.csv");
  write_scatter_svg(joined.rows, fs::path(a.out_dir) / "scatter.svg", label);

  json j;
  j["label"] = label;
  j["alpha_rft"] = a.alpha_rft;
  j["alpha_fdr"] = a.alpha_fdr;
  j["total_rows"] = joined.rows.size();
  j["quadrants"] = {{"rft_sig_fdr_sig", summary.quadrants.rft_sig_fdr_sig},
                    {"rft_sig_fdr_nonsig", summary.quadrants.rft_sig_fdr_nonsig},
                    {"rft_nonsig_fdr_sig", summary.quadrants.rft_nonsig_fdr_sig},
                    {"neither", summary.quadrants.neither}};
  j["min_p_rft_among_fdr_failures"] = optional_json(summary.min_p_rft_among_fdr_failures);
  j["max_p_rft_among_fdr_successes"] = optional_json(summary.max_p_rft_among_fdr_successes);
  json unmatched_pub = json::array();
  for (const auto& u : joined.unmatched_published) {
    unmatched_pub.push_back({{"contrast_id", u.row.contrast_id},
                             {"extent", u.row.extent},
                             {"p_rft_fwe", u.row.p_rft_fwe},
                             {"line", u.row.line},
                             {"reason", std::string(to_string(u.reason))}});
  }
  j["unmatched_published"] = unmatched_pub;
  json unmatched_ana = json::array();
  for (const auto& u : joined.unmatched_analyzed) {
    unmatched_ana.push_back({{"contrast_id", u.contrast_id},
                             {"cluster_id", u.cluster.id},
                             {"extent", u.cluster.extent}});
  }
  j["unmatched_analyzed"] = unmatched_ana;
  j["ambiguous_contrasts"] = joined.ambiguous_contrasts;
  j["config"] = {{"subcommand", "compare"},
                 {"published", a.published},
                 {"analyzed", a.analyzed},
                 {"out-dir", a.out_dir},
                 {"alpha-rft", a.alpha_rft},
                 {"alpha-fdr", a.alpha_fdr},
                 {"label", label}};
  write_json(fs::path(a.out_dir) / "summary.json", j);

  for (const auto& u : joined.unmatched_published) {
    out << "unmatched published row (line " << u.row.line << "): contrast '" << u.row.contrast_id
        << "' extent " << u.row.extent << " [" << to_string(u.reason) << "]\n";
  }
  out << "rows=" << joined.rows.size() << " rft_sig&fdr_sig=" << summary.quadrants.rft_sig_fdr_sig
      << " rft_sig&fdr_nonsig=" << summary.quadrants.rft_sig_fdr_nonsig
      << " rft_nonsig&fdr_sig=" << summary.quadrants.rft_nonsig_fdr_sig
      << " neither=" << summary.quadrants.neither
      << " unmatched_published=" << joined.unmatched_published.size() << "\n";
  return kOk;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  if (a.trials < 1) throw UsageError("--trials must be >= 1");
  if (a.dims.size() != 3) throw UsageError("--dims takes three values");
  if (!a.signal_center.empty() && a.signal_center.size() != 3) {
    throw UsageError("--signal-center takes three values");
  }
  if (!(a.max_any_rejection >= 0.0 && a.max_any_rejection <= 1.0)) {
    throw UsageError("--max-any-rejection must lie in [0, 1]");
  }

  SynthConfig synth;
  synth.dims = {a.dims[0], a.dims[1], a.dims[2]};
  synth.n_subjects = a.n_subjects;
  synth.fwhm_vox = a.fwhm;
  synth.master_seed = a.seed;
  std::array<double, 3> center{(static_cast<double>(a.dims[0]) - 1.0) / 2.0,
                               (static_cast<double>(a.dims[1]) - 1.0) / 2.0,
                               (static_cast<double>(a.dims[2]) - 1.0) / 2.0};
  if (!a.signal_center.empty()) center = {a.signal_center[0], a.signal_center[1], a.signal_center[2]};
  const bool has_signal = a.signal_amplitude != 0.0;
  if (has_signal) synth.signal = SignalSphere{center, a.signal_radius, a.signal_amplitude};
  synth.validate();

  PermutationConfig perm;
  perm.realizations = a.realizations;
  perm.master_seed = a.seed;
  perm.cdt_p = a.cdt;
  perm.connectivity = parse_connectivity(a.connectivity);
  perm.alpha_fdr = a.alpha;
  perm.threads = a.threads;
  perm.validate();

  const SimulationSummary s = run_trials(synth, a.trials, perm);
  const bool passed = s.any_rejection_fraction <= a.max_any_rejection;

  json j;
  j["trials"] = s.trials;
  j["alpha_fdr"] = s.alpha_fdr;
  j["mean_fdp"] = s.mean_fdp;
  j["mean_discoveries"] = s.mean_discoveries;
  j["any_rejection_fraction"] = s.any_rejection_fraction;
  j["ci95"] = {s.ci95.lo, s.ci95.hi};
  j["validation"] = {{"max-any-rejection", a.max_any_rejection}, {"passed", passed}};
  j["config"] = {{"subcommand", "simulate"},
                 {"seed", a.seed},
                 {"trials", a.trials},
                 {"dims", a.dims},
                 {"n-subjects", a.n_subjects},
                 {"fwhm", a.fwhm},
                 {"realizations", a.realizations},
                 {"cdt", a.cdt},
                 {"alpha", a.alpha},
                 {"connectivity", a.connectivity},
                 {"signal-center", center},
                 {"signal-radius", a.signal_radius},
                 {"signal-amplitude", a.signal_amplitude},
                 {"max-any-rejection", a.max_any_rejection},
                 {"out", a.out}};
  json outcomes = json::array();
  for (std::size_t t = 0; t < s.outcomes.size(); ++t) {
    const auto& o = s.outcomes[t];
    outcomes.push_back({{"trial", t},
                        {"clusters", o.clusters},
                        {"discoveries", o.discoveries},
                        {"false_discoveries", o.false_discoveries},
                        {"fdp", o.fdp}});
  }
  j["outcomes"] = outcomes;
  const fs::path out_path(a.out);
  if (out_path.has_parent_path()) ensure_dir(out_path.parent_path());
  write_json(out_path, j);

  out << "trials=" << s.trials << " any_rejection_fraction=" << shortest(s.any_rejection_fraction)
      << " ci95=[" << fixed6(s.ci95.lo) << ", " << fixed6(s.ci95.hi) << "] mean_fdp=" << fixed6(s.mean_fdp)
      << " mean_discoveries=" << fixed6(s.mean_discoveries) << "\n";
  if (!passed) {
    out << "validation failed: any_rejection_fraction " << shortest(s.any_rejection_fraction) << " > "
        << shortest(a.max_any_rejection) << "\n";
    return kValidationFailed;
  }
  return kOk;
}

int cmd_quantile(const QuantileArgs& a, std::ostream& out) {
  if (!(a.p > 0.0 && a.p <= 0.5)) throw UsageError("--p must lie in (0, 0.5]");
  if (!(a.df >= 1.0) || a.df != std::floor(a.df)) throw UsageError("--df must be a positive integer");
  out << fixed6(t_upper_quantile(a.p, a.df)) << "\n";
  return kOk;
}

int exit_code_for(ErrorKind kind) { return kind == ErrorKind::Io ? kIoError : kUsage; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Permutation cluster-extent inference with FDR control", "clusterfdr");
  app.require_subcommand(1);

  std::string config_path;

  TmapArgs tmap;
  auto* tmap_cmd = app.add_subcommand("tmap", "Write the observed one-sample t-map");
  tmap_cmd->add_option("--subjects", tmap.subjects, "Subject directory, list file, or volume paths");
  tmap_cmd->add_option("--mask", tmap.mask, "Mask volume (or x,y,z CSV)");
  tmap_cmd->add_option("--mask-threshold", tmap.mask_threshold, "Mask inclusion: value > threshold");
  tmap_cmd->add_option("--out", tmap.out, "Output NIfTI path");
  tmap_cmd->add_option("--config", config_path, "JSON config; flags override");

  AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Sign-flip null, cluster p-values and BH-FDR");
  analyze_cmd->add_option("--subjects", analyze.subjects, "Subject directory, list file, or volume paths");
  analyze_cmd->add_option("--mask", analyze.mask, "Mask volume (or x,y,z CSV)");
  analyze_cmd->add_option("--mask-threshold", analyze.mask_threshold, "Mask inclusion: value > threshold");
  analyze_cmd->add_option("--seed", analyze.seed, "Master seed (mandatory)");
  analyze_cmd->add_option("--out-dir", analyze.out_dir, "Output directory");
  analyze_cmd->add_option("--realizations", analyze.realizations, "Sign-flip realizations B")
      ->capture_default_str();
  analyze_cmd->add_option("--cdt", analyze.cdts, "Cluster-defining threshold p (repeatable)")
      ->capture_default_str();
  analyze_cmd->add_option("--alpha", analyze.alpha, "FDR level")->capture_default_str();
  analyze_cmd->add_option("--connectivity", analyze.connectivity, "6, 18 or 26")->capture_default_str();
  analyze_cmd->add_option("--contrast-id", analyze.contrast_id, "Contrast label written to CSV")
      ->capture_default_str();
  analyze_cmd->add_option("--threads", analyze.threads, "Worker cap (0 = all cores)");
  analyze_cmd->add_option("--config", config_path, "JSON config; flags override");

  CompareArgs compare;
  auto* compare_cmd = app.add_subcommand("compare", "Rescore published RFT-FWE tables against FDR");
  compare_cmd->add_option("--published", compare.published, "CSV: contrast_id,extent,p_rft_fwe");
  compare_cmd->add_option("--analyzed", compare.analyzed, "Cluster CSV written by analyze");
  compare_cmd->add_option("--out-dir", compare.out_dir, "Output directory");
  compare_cmd->add_option("--alpha-rft", compare.alpha_rft)->capture_default_str();
  compare_cmd->add_option("--alpha-fdr", compare.alpha_fdr)->capture_default_str();
  compare_cmd->add_option("--label", compare.label, "Plot label (default: CDT from file name)");
  compare_cmd->add_option("--config", config_path, "JSON config; flags override");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo FDR validation on synthetic fields");
  sim_cmd->add_option("--seed", sim.seed, "Master seed (mandatory)");
  sim_cmd->add_option("--trials", sim.trials)->capture_default_str();
  sim_cmd->add_option("--dims", sim.dims)->expected(3)->capture_default_str();
  sim_cmd->add_option("--n-subjects", sim.n_subjects)->capture_default_str();
  sim_cmd->add_option("--fwhm", sim.fwhm, "Smoothing FWHM in voxels")->capture_default_str();
  sim_cmd->add_option("--realizations", sim.realizations)->capture_default_str();
  sim_cmd->add_option("--cdt", sim.cdt)->capture_default_str();
  sim_cmd->add_option("--alpha", sim.alpha)->capture_default_str();
  sim_cmd->add_option("--connectivity", sim.connectivity)->capture_default_str();
  sim_cmd->add_option("--signal-center", sim.signal_center, "Voxel coordinates (default: grid centre)")
      ->expected(3);
  sim_cmd->add_option("--signal-radius", sim.signal_radius)->capture_default_str();
  sim_cmd->add_option("--signal-amplitude", sim.signal_amplitude, "0 = complete null")->capture_default_str();
  sim_cmd->add_option("--max-any-rejection", sim.max_any_rejection,
                      "Exit 3 when the fraction of trials with a discovery exceeds this")
      ->capture_default_str();
  sim_cmd->add_option("--out", sim.out, "Summary JSON path")->capture_default_str();
  sim_cmd->add_option("--threads", sim.threads, "Worker cap (0 = all cores)");
  sim_cmd->add_option("--config", config_path, "JSON config; flags override");

  QuantileArgs quant;
  auto* quant_cmd = app.add_subcommand("quantile", "Upper-tail Student t quantile");
  quant_cmd->add_option("--p", quant.p, "Upper-tail probability in (0, 0.5]")->required();
  quant_cmd->add_option("--df", quant.df, "Degrees of freedom")->required();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    if (!config_path.empty()) apply_config(*active, config_path);

    if (active == tmap_cmd) {
      for (const char* r : {"--subjects", "--mask", "--out"}) require(*tmap_cmd, r);
      return cmd_tmap(tmap, out);
    }
    if (active == analyze_cmd) {
      for (const char* r : {"--subjects", "--mask", "--seed", "--out-dir"}) require(*analyze_cmd, r);
      return cmd_analyze(analyze, out, err);
    }
    if (active == compare_cmd) {
      for (const char* r : {"--published", "--analyzed", "--out-dir"}) require(*compare_cmd, r);
      return cmd_compare(compare, out);
    }
    if (active == sim_cmd) {
      require(*sim_cmd, "--seed");
      return cmd_simulate(sim, out);
    }
    return cmd_quantile(quant, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  }
}

}  // namespace clusterfdr::cli
