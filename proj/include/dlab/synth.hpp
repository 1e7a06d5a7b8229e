#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dlab/cohort.hpp"
#include "dlab/corpus_store.hpp"
#include "dlab/econometrics.hpp"

namespace dlab {

/// Citation dynamics shared by every focal paper whose team size falls in
/// [team_min, team_max].
struct TeamClass {
  std::string name;
  std::uint32_t team_min = 1;
  std::uint32_t team_max = 1;
  std::vector<double> latency;        // expected citers at lag t = 0..T
  std::vector<double> consolidation;  // P(citer also cites a focal reference) at lag t; size 1 or T+1

  double consolidation_at(std::size_t lag) const {
    return consolidation.size() == 1 ? consolidation.front() : consolidation.at(lag);
  }
  /// Latency-weighted mean of the consolidation profile.
  double lifetime_consolidation() const;
  /// Earliest lag of maximum latency.
  std::size_t peak_lag() const;
  friend bool operator==(const TeamClass&, const TeamClass&) = default;
};

struct GeneratorConfig {
  std::uint64_t seed = 1;
  std::vector<Year> cohort_years;
  std::vector<std::uint32_t> papers_per_cohort;  // one value for all cohorts, or one per cohort year
  Year horizon_year = kDefaultHorizonYear;
  std::vector<double> team_weights;  // P(k) for k = 1..size()
  std::uint32_t reference_min = 5;
  std::uint32_t reference_max = 50;
  double fitness_sigma = 0.0;  // lognormal spread of per-paper citation intensity (mean 1)
  std::uint32_t pool_size = 1000;       // candidate references per cohort
  std::int32_t pool_span_years = 10;    // references published in [Y - span, Y - 1]
  std::uint32_t background_per_year = 0;  // reference-only citers per cohort per year
  std::uint32_t background_refs = 1;      // pool papers each background citer cites
  std::uint32_t citer_max_focal = 1;      // cohort papers a single citer may cite
  std::vector<TeamClass> classes;         // ascending, covering 1..team_weights.size()

  std::uint32_t team_max() const { return static_cast<std::uint32_t>(team_weights.size()); }
  std::size_t max_lag() const { return classes.empty() ? 0 : classes.front().latency.size() - 1; }
  std::size_t class_of(std::uint32_t team_size) const;
  /// Cohort papers generated for cohort_years[i].
  std::uint32_t cohort_size(std::size_t i) const {
    return papers_per_cohort.size() == 1 ? papers_per_cohort.front() : papers_per_cohort.at(i);
  }

  /// Throws ValidationError naming the offending field.
  void validate() const;

  /// Flat `key = value` text; '#' starts a comment. Unknown keys are errors.
  static GeneratorConfig parse(std::istream& in);
  static GeneratorConfig load(const std::filesystem::path& path);
  void write(std::ostream& out) const;

  /// Illustrative parameters in which small teams are cited late and
  /// consolidated early; committed as configs/default.conf.
  static GeneratorConfig default_profile();
  /// Identical latency and consolidation for every team class; committed as
  /// configs/null.conf.
  static GeneratorConfig null_profile();

  friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;
};

struct PlantedPaper {
  PaperId paper_id = 0;
  Year year = 0;
  std::uint32_t team_size = 0;
  std::size_t team_class = 0;
  double fitness = 1.0;
  std::vector<std::uint64_t> citer_counts;  // realized citers per lag, lags 0..min(T, horizon - year)
};

struct SyntheticCorpus {
  RawCorpus corpus;
  std::vector<PlantedPaper> planted;  // cohort papers, ascending id
};

/// Deterministic in (config, seed). Each cohort gets its own pool of
/// earlier reference papers; every citation of a cohort paper comes from a
/// generated citer node published at the planted lag.
SyntheticCorpus generate_corpus(const GeneratorConfig& config);

/// `paper_id team_class lag count`
void write_ledger_tsv(std::ostream& out, const GeneratorConfig& config, std::span<const PlantedPaper> planted);

struct FlipRow {
  std::int32_t window = 0;
  Year cohort_year = 0;
  std::size_t cohort_size = 0;
  CoefficientTest team_slope;  // ln k under EQ1
};

struct FlipOptions {
  std::optional<Year> cohort_year;  // default: horizon - window
  std::size_t min_cohort = 1000;
  CohortCriteria criteria = CohortCriteria::model1();
  unsigned threads = 1;
};

/// EQ1 fit of each window's cohort. Throws ValidationError if a cohort has
/// fewer than `min_cohort` rows.
std::vector<FlipRow> run_flip_experiment(const CorpusIndex& index, Year horizon_year,
                                         std::span<const std::int32_t> windows, const FlipOptions& options = {});
std::vector<FlipRow> run_flip_experiment(const GeneratorConfig& config, std::span<const std::int32_t> windows,
                                         const FlipOptions& options = {});

/// `window cohort_year n b_k se t p`
void write_flip_tsv(std::ostream& out, std::span<const FlipRow> rows);

}  // namespace dlab
