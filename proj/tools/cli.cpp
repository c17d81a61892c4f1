#include "spectraclass/cli.hpp"

#include <glob.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "spectraclass/classify.hpp"
#include "spectraclass/error.hpp"
#include "spectraclass/format.hpp"
#include "spectraclass/rulebase.hpp"
#include "spectraclass/spatial.hpp"
#include "spectraclass/stats.hpp"

namespace spectraclass::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kBuiltinBasalt = "builtin:basalt";

struct RunConfig {
  std::string rules;
  std::optional<double> epsilon;
  std::optional<double> nu;
  int workers = 1;
  std::string out;
  std::vector<std::string> inputs;
  std::string format;  // "", "csv" or "msp"
  std::string topology;
  std::string palette;
  std::string group_by = "label";
  std::string mode = "present";
  std::optional<double> ambiguity;
  std::optional<double> floor;
  bool canonical = false;
};

/// Raised for fatal command failures; the message goes to the error stream.
struct Fatal : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Fatal("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RuleBase load_rules(const RunConfig& cfg) {
  std::string source = cfg.rules;
  if (source.empty()) {
    const char* env = std::getenv(kRulesEnv);
    source = env && *env ? env : std::string(kBuiltinBasalt);
  }
  RuleBase rb;
  if (source == kBuiltinBasalt) {
    rb = builtin_basalt();
  } else {
    try {
      rb = parse_rulebase(read_file(source));
    } catch (const Error& e) {
      throw Fatal(source + ": " + e.what());
    }
  }
  if (cfg.epsilon) rb.options.epsilon = *cfg.epsilon;
  if (cfg.nu) rb.options.nu = *cfg.nu;
  for (const auto& d : validate(rb)) {
    if (d.severity == Diagnostic::Severity::error) throw Fatal("invalid rules: " + d.message);
  }
  return rb;
}

bool is_spectrum_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".csv" || ext == ".msp" || ext == ".txt";
}

/// Expands directories and shell-style patterns; plain paths pass through
/// even if missing so the batch reports them as per-item errors.
std::vector<fs::path> expand_input(const std::string& arg) {
  std::vector<fs::path> out;
  if (arg.find_first_of("*?[") != std::string::npos) {
    glob_t g{};
    if (::glob(arg.c_str(), 0, nullptr, &g) == 0) {
      for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
    }
    ::globfree(&g);
  } else if (fs::is_directory(arg)) {
    for (const auto& entry : fs::directory_iterator(arg)) {
      if (entry.is_regular_file() && is_spectrum_file(entry.path())) out.push_back(entry.path());
    }
  } else {
    out.emplace_back(arg);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<SpectrumFormat> format_of(const RunConfig& cfg) {
  if (cfg.format == "csv") return SpectrumFormat::csv;
  if (cfg.format == "msp") return SpectrumFormat::msp;
  return std::nullopt;
}

std::ostream& open_output(const std::string& path, std::ofstream& file, std::ostream& fallback) {
  if (path.empty() || path == "-") return fallback;
  file.open(path, std::ios::binary);
  if (!file) throw Fatal("cannot write " + path);
  return file;
}

std::ofstream open_in_dir(const fs::path& dir, const std::string& name) {
  std::ofstream f(dir / name, std::ios::binary);
  if (!f) throw Fatal("cannot write " + (dir / name).string());
  return f;
}

std::string safe_name(std::string s) {
  for (auto& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  }
  return s.empty() ? "group" : s;
}

// ---------------------------------------------------------------------------

int cmd_classify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const RuleBase rb = load_rules(cfg);
  std::vector<SpectrumSource> sources;
  for (const auto& arg : cfg.inputs) {
    for (const auto& p : expand_input(arg)) {
      sources.push_back(SpectrumSource::from_file(p, format_of(cfg)));
    }
  }
  if (sources.empty()) throw Fatal("no input spectra");

  BatchOptions options;
  options.harden.ambiguity_threshold = cfg.ambiguity;
  const auto records = classify_batch(sources, rb, cfg.workers, options);

  std::ofstream file;
  write_batch_csv(open_output(cfg.out, file, out), records, rb.class_codes());

  std::map<std::string, std::size_t> counts;
  std::size_t failures = 0;
  for (const auto& r : records) {
    if (!r.ok()) {
      ++failures;
      err << "error: " << r.id << ": " << r.error << '\n';
      continue;
    }
    ++counts[r.classification.label];
  }
  err << "classified " << records.size() - failures << " of " << records.size() << " spectra:";
  for (const auto& code : rb.class_codes()) err << ' ' << code << '=' << counts[code];
  err << ' ' << kUnknownLabel << '=' << counts[std::string(kUnknownLabel)];
  err << " errors=" << failures << '\n';
  return failures ? kExitPartial : kExitOk;
}

int cmd_stats(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const RuleBase rb = load_rules(cfg);
  const bool by_directory = cfg.group_by == "directory";

  std::vector<std::string> group_order;
  std::map<std::string, std::vector<Spectrum>> groups;
  std::vector<Spectrum> ensemble;
  std::size_t failures = 0;

  if (by_directory) {
    for (const auto& arg : cfg.inputs) {
      const auto name = fs::path(arg).filename().string().empty()
                            ? fs::path(arg).parent_path().filename().string()
                            : fs::path(arg).filename().string();
      if (std::find(group_order.begin(), group_order.end(), name) == group_order.end()) {
        group_order.push_back(name);
        groups[name];
      }
    }
  } else {
    group_order = rb.class_codes();
  }

  for (const auto& arg : cfg.inputs) {
    const auto files = expand_input(arg);
    std::string group;
    if (by_directory) {
      group = fs::path(arg).filename().string();
      if (group.empty()) group = fs::path(arg).parent_path().filename().string();
      if (files.empty()) throw Fatal("empty group '" + group + "'");
    }
    for (const auto& p : files) {
      try {
        const auto source = SpectrumSource::from_file(p, format_of(cfg));
        Spectrum s = prepare(source.load(), rb);
        if (!by_directory) {
          group = harden(memberships(s, rb), rb.options.nu).label;
          if (group == kUnknownLabel) {
            ensemble.push_back(std::move(s));
            continue;
          }
        }
        groups[group].push_back(s);
        ensemble.push_back(std::move(s));
      } catch (const Error& e) {
        ++failures;
        err << "error: " << p.string() << ": " << e.what() << '\n';
      }
    }
  }
  if (ensemble.empty()) throw Fatal("no usable spectra");

  const double eps = rb.options.epsilon;
  const StatDB ensemble_db = build_statdb(ensemble, eps);
  ReportOptions options;
  options.mode = cfg.mode == "zero" ? MeanMode::zero_inclusive : MeanMode::present;

  std::optional<fs::path> dir;
  if (!cfg.out.empty()) {
    dir = cfg.out;
    fs::create_directories(*dir);
  }

  std::size_t reported = 0;
  for (const auto& name : group_order) {
    const auto& members = groups[name];
    if (members.empty()) {
      if (by_directory) throw Fatal("empty group '" + name + "'");
      continue;
    }
    ++reported;
    const StatDB db = build_statdb(members, eps);
    const auto rows = class_vs_ensemble_report(db, ensemble_db, options);
    out << "== " << name << ": " << members.size() << " of " << ensemble.size()
        << " spectra, ratio of class mean to ensemble mean ==\n";
    render_histogram(out, rows);
    if (dir) {
      auto f = open_in_dir(*dir, "report_" + safe_name(name) + ".csv");
      write_report_csv(f, rows);
    } else {
      write_report_csv(out, rows);
    }
  }
  if (reported == 0) throw Fatal("no non-empty groups to report");
  return failures ? kExitPartial : kExitOk;
}

int cmd_map(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.inputs.size() != 1) throw Fatal("map takes exactly one grid CSV");
  const RuleBase rb = load_rules(cfg);
  const double nu = rb.options.nu;

  std::optional<Topology> topology;
  if (!cfg.topology.empty()) topology = parse_topology(cfg.topology);

  SampleGrid grid;
  {
    std::ifstream in(cfg.inputs.front());
    if (!in) throw Fatal("cannot open " + cfg.inputs.front());
    try {
      grid = read_grid_csv(in, topology);
    } catch (const Error& e) {
      throw Fatal(cfg.inputs.front() + ": " + e.what());
    }
  }

  Palette palette = Palette::basalt();
  if (!cfg.palette.empty()) {
    std::ifstream in(cfg.palette);
    if (!in) throw Fatal("cannot open " + cfg.palette);
    palette = Palette::parse(in);
  }

  ReclassifyOptions options;
  options.smoothed_floor = cfg.floor;
  const auto before = hard_map(grid, nu);
  const auto after = reclassify_map(grid, nu, options, cfg.workers);

  const fs::path dir = cfg.out.empty() ? fs::path(".") : fs::path(cfg.out);
  fs::create_directories(dir);
  {
    auto f = open_in_dir(dir, "pre_map.csv");
    write_map_csv(f, grid, before);
  }
  {
    auto f = open_in_dir(dir, "post_map.csv");
    write_map_csv(f, grid, after);
  }
  {
    auto f = open_in_dir(dir, "pre_map.ppm");
    write_ppm(f, grid.rows, grid.cols, render_labels(before, palette));
  }
  {
    auto f = open_in_dir(dir, "post_map.ppm");
    write_ppm(f, grid.rows, grid.cols, render_labels(after, palette));
  }
  {
    auto f = open_in_dir(dir, "memberships.csv");
    write_membership_csv(f, grid);
  }
  for (const auto& code : grid.class_codes) {
    auto f = open_in_dir(dir, "membership_" + safe_name(code) + ".ppm");
    write_ppm(f, grid.rows, grid.cols, render_membership(grid, code));
  }

  auto unknowns = [](const ClassificationMap& m) {
    return std::count_if(m.spots.begin(), m.spots.end(),
                         [](const SpotLabel& s) { return s.label == kUnknownLabel; });
  };
  const auto assigned = std::count_if(after.spots.begin(), after.spots.end(),
                                      [](const SpotLabel& s) { return s.neighbor_assigned; });
  out << to_string(grid.topology) << ' ' << grid.rows << 'x' << grid.cols << ": "
      << unknowns(before) << " UNK before smoothing, " << unknowns(after) << " after, "
      << assigned << " neighbour-assigned\n";
  (void)err;
  return kExitOk;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::string source = cfg.rules;
  if (source.empty()) {
    const char* env = std::getenv(kRulesEnv);
    source = env && *env ? env : std::string(kBuiltinBasalt);
  }
  RuleBase rb;
  if (source == kBuiltinBasalt) {
    rb = builtin_basalt();
  } else {
    try {
      rb = parse_rulebase(read_file(source));
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kExitFatal;
    }
  }
  if (cfg.epsilon) rb.options.epsilon = *cfg.epsilon;
  if (cfg.nu) rb.options.nu = *cfg.nu;
  bool failed = false;
  for (const auto& d : validate(rb)) {
    const bool is_error = d.severity == Diagnostic::Severity::error;
    failed |= is_error;
    err << (is_error ? "error: " : "warning: ") << d.message << '\n';
  }
  if (cfg.canonical) out << serialize(rb);
  if (!failed) {
    out << rb.name << ": " << rb.classes.size() << " classes, " << rb.ions.size()
        << " ions, ok\n";
  }
  return failed ? kExitFatal : kExitOk;
}

void add_rule_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--rules", cfg.rules,
                  "Rule base file or builtin:basalt (default: $SPECTRACLASS_RULES or "
                  "builtin:basalt)");
  cmd->add_option("--epsilon", cfg.epsilon, "Override the m/z matching window")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--nu", cfg.nu, "Override the minimum membership for a hard label")
      ->check(CLI::Range(0.0, 1.0));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Fuzzy-logic classification of mass spectra", "spectraclass"};
  app.require_subcommand(1);

  auto* classify = app.add_subcommand("classify", "Classify spectra and write the batch CSV");
  add_rule_flags(classify, cfg);
  classify->add_option("--workers", cfg.workers, "Worker threads")->check(CLI::PositiveNumber);
  classify->add_option("--out", cfg.out, "Output CSV (default: stdout)");
  classify->add_option("--format", cfg.format, "Force input format")
      ->check(CLI::IsMember({"csv", "msp"}));
  classify->add_option("--ambiguity", cfg.ambiguity,
                       "Label UNK when two classes reach this membership (off by default)")
      ->check(CLI::Range(0.0, 1.0));
  classify->add_option("inputs", cfg.inputs, "Spectrum files, directories or patterns")
      ->required();

  auto* stats = app.add_subcommand("stats", "Class-vs-ensemble peak statistics");
  add_rule_flags(stats, cfg);
  stats->add_option("--out", cfg.out, "Directory for report_<group>.csv (default: stdout)");
  stats->add_option("--format", cfg.format, "Force input format")
      ->check(CLI::IsMember({"csv", "msp"}));
  stats->add_option("--group-by", cfg.group_by, "Group by classifier label or input directory")
      ->check(CLI::IsMember({"label", "directory"}));
  stats->add_option("--mode", cfg.mode, "present: mean over spectra with the peak; "
                                        "zero: mean over all spectra")
      ->check(CLI::IsMember({"present", "zero"}));
  stats->add_option("inputs", cfg.inputs, "Spectrum files, directories or patterns")
      ->required();

  auto* map = app.add_subcommand("map", "Neighbour-smoothed classification map of a grid");
  add_rule_flags(map, cfg);
  map->add_option("--workers", cfg.workers, "Worker threads")->check(CLI::PositiveNumber);
  map->add_option("--out", cfg.out, "Output directory (default: .)");
  map->add_option("--topology", cfg.topology, "Override the grid topology header")
      ->check(CLI::IsMember({"rect", "hex", "rectangular", "hexagonal"}));
  map->add_option("--palette", cfg.palette, "Palette file of 'CODE R G B' lines");
  map->add_option("--floor", cfg.floor,
                  "Keep UNK when the best smoothed membership is below this (off by default)")
      ->check(CLI::NonNegativeNumber);
  map->add_option("input", cfg.inputs, "Grid CSV (classify output with grid headers)")
      ->required()
      ->expected(1);

  auto* check = app.add_subcommand("validate-rules", "Check a rule base and report diagnostics");
  add_rule_flags(check, cfg);
  check->add_flag("--canonical", cfg.canonical, "Print the canonical form of the rules");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*classify) return cmd_classify(cfg, out, err);
    if (*stats) return cmd_stats(cfg, out, err);
    if (*map) return cmd_map(cfg, out, err);
    return cmd_validate(cfg, out, err);
  } catch (const Fatal& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitFatal;
}

}  // namespace spectraclass::cli
