#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>

#include "dlab/cohort.hpp"
#include "dlab/corpus_store.hpp"
#include "dlab/disruption.hpp"
#include "dlab/econometrics.hpp"
#include "dlab/error.hpp"
#include "dlab/format.hpp"
#include "dlab/synth.hpp"
#include "dlab/window_graph.hpp"
#include "manifest.hpp"
#include "svg.hpp"

namespace dlab::cli {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

fs::path output_directory(const fs::path& file) {
  auto dir = file.parent_path();
  return dir.empty() ? fs::path(".") : dir;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

// Writes via a temporary so a failed command leaves no partial file behind.
template <typename Fn>
void write_file(const fs::path& path, Fn&& fn) {
  auto tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    fn(out);
    if (!out) throw IoError("write failed: " + path.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

CohortCriteria parse_criteria(const std::string& name) {
  if (name == "model1") return CohortCriteria::model1();
  if (name == "model2") return CohortCriteria::model2();
  if (name == "none") {
    const auto max = std::numeric_limits<std::uint64_t>::max();
    return {{1, max}, {0, max}, {0, max}};
  }
  throw ValidationError("unknown criteria '" + name + "' (expected model1, model2 or none)");
}

ReferenceAnchor parse_anchor(const std::string& name) {
  if (name == "focal") return ReferenceAnchor::kFocalYear;
  if (name == "reference") return ReferenceAnchor::kReferenceYear;
  throw ValidationError("unknown anchor '" + name + "' (expected focal or reference)");
}

WindowSpec parse_window(const std::string& text, Year cohort_year, Year horizon, ReferenceAnchor anchor) {
  if (text == "auto") return WindowSpec::years(horizon_window(cohort_year, horizon).width.value(), anchor);
  if (text == "unbounded") return WindowSpec::unbounded(anchor);
  std::int32_t w = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), w);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ValidationError("window must be an integer, 'auto' or 'unbounded'");
  }
  return WindowSpec::years(w, anchor);
}

struct IngestArgs {
  std::string papers;
  std::string edges;
  std::string out;
  bool lenient = false;
  Year min_year = 1800;
  Year max_year = 2100;
};

int cmd_ingest(const IngestArgs& a, std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  IngestOptions options;
  options.strict = !a.lenient;
  options.min_year = a.min_year;
  options.max_year = a.max_year;

  RawCorpus corpus;
  auto papers = ingest_papers(fs::path(a.papers), corpus, options);
  auto edges = ingest_edges(fs::path(a.edges), corpus, options);
  for (const auto& issue : papers.malformed) err << a.papers << ":" << issue.line << ": " << issue.message << '\n';
  for (const auto& issue : edges.malformed) err << a.edges << ":" << issue.line << ": " << issue.message << '\n';

  const fs::path target(a.out);
  ensure_directory(output_directory(target));
  save_snapshot(corpus, target);

  out << "papers\t" << corpus.size() << '\n'
      << "edges_stored\t" << edges.stored << '\n'
      << "edges_duplicate\t" << edges.duplicates << '\n'
      << "edges_dangling\t" << edges.dangling.size() << '\n'
      << "malformed_lines\t" << papers.malformed.size() + edges.malformed.size() << '\n';

  RunManifest m;
  m.command = "ingest";
  m.config = {{"papers", a.papers}, {"edges", a.edges}, {"out", a.out}, {"lenient", a.lenient ? "true" : "false"},
              {"min_year", std::to_string(a.min_year)}, {"max_year", std::to_string(a.max_year)}};
  m.add_input(a.papers);
  m.add_input(a.edges);
  m.add_output(target);
  m.wall_clock_seconds = seconds_since(start);
  m.write(output_directory(target));
  return kExitOk;
}

struct DIndexArgs {
  std::string snapshot;
  Year cohort_year = 0;
  std::string window = "auto";
  Year horizon = kDefaultHorizonYear;
  std::string criteria = "none";
  std::string anchor = "focal";
  std::string out;
  unsigned threads = 1;
};

int cmd_dindex(const DIndexArgs& a, std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  const auto window = parse_window(a.window, a.cohort_year, a.horizon, parse_anchor(a.anchor));
  const auto criteria = parse_criteria(a.criteria);
  auto index = CorpusIndex::build(load_snapshot(a.snapshot));

  auto rows = build_cohort(index, a.cohort_year, window, criteria, a.threads);
  bool year_present = false;
  for (CorpusIndex::Node n = 0; n < index.size() && !year_present; ++n) year_present = index.year(n) == a.cohort_year;
  if (!year_present) err << "warning: no papers published in " << a.cohort_year << '\n';

  std::vector<PaperId> ids;
  ids.reserve(rows.size());
  for (const auto& r : rows) ids.push_back(r.paper_id);
  auto results = dindex_sweep(index, ids, window, a.threads);

  const fs::path target(a.out);
  ensure_directory(output_directory(target));
  write_file(target, [&](std::ostream& o) { write_dindex_tsv(o, results); });
  out << "cohort\t" << a.cohort_year << "\nwindow\t" << window.label() << "\npapers\t" << results.size() << '\n';

  RunManifest m;
  m.command = "dindex";
  m.config = {{"snapshot", a.snapshot}, {"cohort_year", std::to_string(a.cohort_year)},
              {"window", window.label()}, {"horizon", std::to_string(a.horizon)},
              {"criteria", a.criteria}, {"anchor", a.anchor},
              {"out", a.out}, {"threads", std::to_string(a.threads)}};
  m.add_input(a.snapshot);
  m.add_output(target);
  m.wall_clock_seconds = seconds_since(start);
  m.write(output_directory(target));
  return kExitOk;
}

struct RegressArgs {
  std::string snapshot;
  std::string model = "eq1";
  std::string criteria = "model1";
  std::vector<std::int32_t> windows;
  std::optional<Year> cohort_year;
  Year horizon = kDefaultHorizonYear;
  std::string covariance = "classical";
  std::string out_dir;
  std::string fit_out = "fit_w{w}.tsv";
  std::string curve_out = "curve_w{w}.tsv";
  bool svg = false;
  unsigned threads = 1;
};

std::string expand(std::string pattern, std::int32_t w) {
  const auto pos = pattern.find("{w}");
  if (pos == std::string::npos) throw ValidationError("output name '" + pattern + "' must contain {w}");
  return pattern.replace(pos, 3, std::to_string(w));
}

int cmd_regress(const RegressArgs& a, std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  ModelSpec spec;
  if (a.model == "eq1") {
    spec.variant = ModelVariant::kEq1;
  } else if (a.model == "eq2") {
    spec.variant = ModelVariant::kEq2;
  } else {
    throw ValidationError("unknown model '" + a.model + "' (expected eq1 or eq2)");
  }
  CovarianceType cov = CovarianceType::kClassical;
  if (a.covariance == "hc1") {
    cov = CovarianceType::kHC1;
  } else if (a.covariance != "classical") {
    throw ValidationError("unknown covariance '" + a.covariance + "' (expected classical or hc1)");
  }
  const auto criteria = parse_criteria(a.criteria);
  if (a.windows.empty()) throw ValidationError("--windows needs at least one window");
  auto index = CorpusIndex::build(load_snapshot(a.snapshot));

  const fs::path dir(a.out_dir);
  ensure_directory(dir);
  RunManifest m;
  m.command = "regress";
  std::string window_list;
  for (auto w : a.windows) window_list += (window_list.empty() ? "" : ",") + std::to_string(w);
  m.config = {{"snapshot", a.snapshot},
              {"model", a.model},
              {"criteria", a.criteria},
              {"windows", window_list},
              {"cohort_year", a.cohort_year ? std::to_string(*a.cohort_year) : "auto"},
              {"horizon", std::to_string(a.horizon)},
              {"covariance", a.covariance},
              {"svg", a.svg ? "true" : "false"},
              {"threads", std::to_string(a.threads)}};
  m.add_input(a.snapshot);

  std::ostringstream summary;
  for (auto w : a.windows) {
    const Year year = a.cohort_year.value_or(a.horizon - w);
    auto rows = build_cohort(index, year, WindowSpec::years(w), criteria, a.threads);
    auto design = build_design(rows, spec);
    for (const auto& d : design.dropped) err << "window " << w << ": dropped constant column " << d << '\n';
    auto fit = fit_ols(design, cov);

    std::vector<std::uint32_t> grid;
    if (spec.variant == ModelVariant::kEq1) {
      std::uint32_t k_hi = 1;
      for (const auto& r : rows) k_hi = std::max(k_hi, r.team_size);
      for (std::uint32_t k = 1; k <= k_hi; ++k) grid.push_back(k);
    } else {
      grid.push_back(spec.team_baseline);
      for (const auto& col : fit.columns) {
        if (col.kind == ColumnKind::kTeamDummy) grid.push_back(static_cast<std::uint32_t>(col.level));
      }
      std::sort(grid.begin(), grid.end());
    }
    auto curve = effect_curve(fit, spec, grid);

    const auto fit_path = dir / expand(a.fit_out, w);
    const auto curve_path = dir / expand(a.curve_out, w);
    write_file(fit_path, [&](std::ostream& o) { write_fit_tsv(o, fit); });
    write_file(curve_path, [&](std::ostream& o) { write_curve_tsv(o, curve); });
    m.add_output(fit_path);
    m.add_output(curve_path);
    if (a.svg) {
      auto svg_path = curve_path;
      svg_path.replace_extension(".svg");
      const std::string title = std::string(a.model == "eq1" ? "EQ1" : "EQ2") + ", cohort " + std::to_string(year) +
                                ", " + std::to_string(w) + "-year window";
      write_file(svg_path, [&](std::ostream& o) { write_curve_svg(o, curve, title); });
      m.add_output(svg_path);
    }
    summary << w << '\t' << year << '\t' << fit.n << '\t' << format_double(fit.r_squared);
    if (spec.variant == ModelVariant::kEq1) {
      auto slope = coefficient_test(fit, "ln_k");
      summary << '\t' << format_double(slope.estimate) << '\t' << format_double(slope.std_error) << '\t'
              << format_double(slope.t) << '\t' << format_double(slope.p);
      out << "window " << w << " (cohort " << year << ", n=" << fit.n << "): b_k=" << format_double(slope.estimate)
          << " p=" << format_double(slope.p) << '\n';
    } else {
      out << "window " << w << " (cohort " << year << ", n=" << fit.n << ")\n";
    }
    summary << '\n';
  }
  const auto summary_path = dir / "summary.tsv";
  write_file(summary_path, [&](std::ostream& o) { o << summary.str(); });
  m.add_output(summary_path);
  m.wall_clock_seconds = seconds_since(start);
  m.write(dir);
  return kExitOk;
}

struct SynthArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

GeneratorConfig resolve_config(const std::string& path, const std::optional<std::uint64_t>& seed) {
  GeneratorConfig config;
  if (path.empty() || path == "default") {
    config = GeneratorConfig::default_profile();
  } else if (path == "null") {
    config = GeneratorConfig::null_profile();
  } else {
    config = GeneratorConfig::load(path);
  }
  if (seed) config.seed = *seed;
  return config;
}

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream&) {
  const auto start = Clock::now();
  const auto config = resolve_config(a.config, a.seed);
  auto synthetic = generate_corpus(config);

  const fs::path dir(a.out_dir);
  ensure_directory(dir);
  const auto papers = dir / "papers.tsv";
  const auto edges = dir / "edges.tsv";
  const auto ledger = dir / "ledger.tsv";
  const auto resolved = dir / "config.conf";
  write_file(papers, [&](std::ostream& o) { write_papers_tsv(o, synthetic.corpus); });
  write_file(edges, [&](std::ostream& o) { write_edges_tsv(o, synthetic.corpus); });
  write_file(ledger, [&](std::ostream& o) { write_ledger_tsv(o, config, synthetic.planted); });
  write_file(resolved, [&](std::ostream& o) { config.write(o); });

  std::map<Year, std::size_t> per_year;
  for (const auto& p : synthetic.planted) ++per_year[p.year];
  out << "papers\t" << synthetic.corpus.size() << "\nedges\t" << synthetic.corpus.edge_count() << '\n';
  for (const auto& [year, n] : per_year) out << "cohort " << year << '\t' << n << '\n';

  RunManifest m;
  m.command = "synth";
  m.config = {{"config", a.config.empty() ? "default" : a.config}, {"seed", std::to_string(config.seed)}};
  if (!a.config.empty() && a.config != "default" && a.config != "null") m.add_input(a.config);
  for (const auto& p : {papers, edges, ledger, resolved}) m.add_output(p);
  m.wall_clock_seconds = seconds_since(start);
  m.write(dir);
  return kExitOk;
}

struct FlipArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::int32_t> windows{1, 3, 5, 10, 20, 25};
  std::size_t min_cohort = 1000;
  std::string out_dir;
  unsigned threads = 1;
};

int cmd_flip(const FlipArgs& a, std::ostream& out, std::ostream&) {
  const auto start = Clock::now();
  const auto config = resolve_config(a.config, a.seed);
  FlipOptions options;
  options.min_cohort = a.min_cohort;
  options.threads = a.threads;
  auto rows = run_flip_experiment(config, a.windows, options);

  const fs::path dir(a.out_dir);
  ensure_directory(dir);
  const auto table = dir / "flip.tsv";
  write_file(table, [&](std::ostream& o) { write_flip_tsv(o, rows); });
  for (const auto& r : rows) {
    out << "window " << r.window << " cohort " << r.cohort_year << " n=" << r.cohort_size
        << " b_k=" << format_double(r.team_slope.estimate) << " t=" << format_double(r.team_slope.t) << '\n';
  }

  RunManifest m;
  m.command = "flip";
  std::string window_list;
  for (auto w : a.windows) window_list += (window_list.empty() ? "" : ",") + std::to_string(w);
  m.config = {{"config", a.config.empty() ? "default" : a.config},
              {"seed", std::to_string(config.seed)},
              {"windows", window_list},
              {"min_cohort", std::to_string(a.min_cohort)},
              {"threads", std::to_string(a.threads)}};
  if (!a.config.empty() && a.config != "default" && a.config != "null") m.add_input(a.config);
  m.add_output(table);
  m.wall_clock_seconds = seconds_since(start);
  m.write(dir);
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Disruption index and team-size regression toolkit", "dlab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate papers/edges TSV files and write a binary snapshot");
  ingest_cmd->add_option("--papers", ingest.papers, "papers.tsv")->required();
  ingest_cmd->add_option("--edges", ingest.edges, "edges.tsv")->required();
  ingest_cmd->add_option("--out", ingest.out, "snapshot file to write")->required();
  ingest_cmd->add_flag("--lenient", ingest.lenient, "skip and report malformed lines instead of failing");
  ingest_cmd->add_option("--min-year", ingest.min_year, "earliest valid publication year");
  ingest_cmd->add_option("--max-year", ingest.max_year, "latest valid publication year");

  DIndexArgs dindex;
  auto* dindex_cmd = app.add_subcommand("dindex", "Disruption index for one publication-year cohort");
  dindex_cmd->add_option("--snapshot", dindex.snapshot)->required();
  dindex_cmd->add_option("--cohort-year", dindex.cohort_year)->required();
  dindex_cmd->add_option("--window", dindex.window, "years, 'auto' (horizon - cohort year) or 'unbounded'");
  dindex_cmd->add_option("--horizon", dindex.horizon, "last year of citation data");
  dindex_cmd->add_option("--criteria", dindex.criteria, "none, model1 or model2");
  dindex_cmd->add_option("--anchor", dindex.anchor, "reference-citer window start: focal or reference");
  dindex_cmd->add_option("--out", dindex.out)->required();
  dindex_cmd->add_option("--threads", dindex.threads)->check(CLI::PositiveNumber);

  RegressArgs regress;
  auto* regress_cmd = app.add_subcommand("regress", "Fit the team-size regressions per citation window");
  regress_cmd->add_option("--snapshot", regress.snapshot)->required();
  regress_cmd->add_option("--model", regress.model, "eq1 or eq2");
  regress_cmd->add_option("--criteria", regress.criteria, "model1, model2 or none");
  regress_cmd->add_option("--windows", regress.windows, "comma-separated window lengths")->delimiter(',')->required();
  regress_cmd->add_option("--cohort-year", regress.cohort_year, "fixed cohort (default: horizon - window)");
  regress_cmd->add_option("--horizon", regress.horizon);
  regress_cmd->add_option("--covariance", regress.covariance, "classical or hc1");
  regress_cmd->add_option("--out-dir", regress.out_dir)->required();
  regress_cmd->add_option("--fit-out", regress.fit_out, "fit summary file name, {w} = window");
  regress_cmd->add_option("--curve-out", regress.curve_out, "effect curve file name, {w} = window");
  regress_cmd->add_flag("--svg", regress.svg, "also write an SVG chart per curve");
  regress_cmd->add_option("--threads", regress.threads)->check(CLI::PositiveNumber);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus with planted citation dynamics");
  synth_cmd->add_option("--config", synth.config, "config file, or 'default' / 'null'");
  synth_cmd->add_option("--seed", synth.seed, "overrides the config seed");
  synth_cmd->add_option("--out-dir", synth.out_dir)->required();

  FlipArgs flip;
  auto* flip_cmd = app.add_subcommand("flip", "Generate a synthetic corpus and fit EQ1 per window in memory");
  flip_cmd->add_option("--config", flip.config, "config file, or 'default' / 'null'");
  flip_cmd->add_option("--seed", flip.seed, "overrides the config seed");
  flip_cmd->add_option("--windows", flip.windows, "comma-separated window lengths")->delimiter(',');
  flip_cmd->add_option("--min-cohort", flip.min_cohort, "refuse cohorts smaller than this");
  flip_cmd->add_option("--out-dir", flip.out_dir)->required();
  flip_cmd->add_option("--threads", flip.threads)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*ingest_cmd) return cmd_ingest(ingest, out, err);
    if (*dindex_cmd) return cmd_dindex(dindex, out, err);
    if (*regress_cmd) return cmd_regress(regress, out, err);
    if (*synth_cmd) return cmd_synth(synth, out, err);
    if (*flip_cmd) return cmd_flip(flip, out, err);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace dlab::cli
