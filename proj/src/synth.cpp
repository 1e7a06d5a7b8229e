#include "dlab/synth.hpp"

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/discrete_distribution.hpp>
#include <boost/random/lognormal_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "dlab/disruption.hpp"
#include "dlab/error.hpp"
#include "dlab/format.hpp"
#include "dlab/window_graph.hpp"

namespace dlab {

namespace {

using Rng = boost::random::mt19937_64;

// Independent stream per (seed, purpose, item) so results do not depend on
// generation order.
Rng stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t item) {
  auto mix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  return Rng(mix(mix(mix(seed) ^ purpose) ^ item));
}

enum Purpose : std::uint64_t { kPool = 1, kFocal = 2, kCiterPack = 3, kCiterTeam = 4, kBackground = 5 };

// r distinct draws from [0, n) by Floyd's algorithm, ascending.
std::vector<std::uint32_t> sample_distinct(Rng& rng, std::uint32_t n, std::uint32_t r) {
  std::set<std::uint32_t> chosen;
  for (std::uint32_t j = n - r; j < n; ++j) {
    boost::random::uniform_int_distribution<std::uint32_t> pick(0, j);
    auto v = pick(rng);
    if (!chosen.insert(v).second) chosen.insert(j);
  }
  return {chosen.begin(), chosen.end()};
}

std::vector<double> parse_doubles(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ValidationError(key + ": empty list element");
    item = item.substr(b, e - b + 1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw ValidationError(key + ": '" + item + "' is not a number");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ValidationError(key + ": empty value");
  return out;
}

template <typename Int>
Int parse_integer(const std::string& key, const std::string& value) {
  auto values = parse_doubles(key, value);
  if (values.size() != 1) throw ValidationError(key + ": expected a single integer");
  double v = values.front();
  if (v != std::floor(v) || v < static_cast<double>(std::numeric_limits<Int>::min()) ||
      v > static_cast<double>(std::numeric_limits<Int>::max())) {
    throw ValidationError(key + ": expected an integer");
  }
  return static_cast<Int>(v);
}

std::string join(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  return out;
}

// Bell-shaped intensity profile on lags 0..max_lag, rounded to 3 decimals so
// the committed config text is exact.
std::vector<double> bump(double height, double peak, double width, double floor, std::size_t max_lag) {
  std::vector<double> out;
  for (std::size_t t = 0; t <= max_lag; ++t) {
    const double z = (static_cast<double>(t) - peak) / width;
    out.push_back(std::round((height * std::exp(-0.5 * z * z) + floor) * 1000.0) / 1000.0);
  }
  return out;
}

}  // namespace

double TeamClass::lifetime_consolidation() const {
  double mass = 0.0;
  double q = 0.0;
  for (std::size_t t = 0; t < latency.size(); ++t) {
    mass += latency[t];
    q += latency[t] * consolidation_at(t);
  }
  return mass > 0.0 ? q / mass : consolidation_at(0);
}

std::size_t TeamClass::peak_lag() const {
  return static_cast<std::size_t>(std::max_element(latency.begin(), latency.end()) - latency.begin());
}

std::size_t GeneratorConfig::class_of(std::uint32_t team_size) const {
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (team_size >= classes[i].team_min && team_size <= classes[i].team_max) return i;
  }
  throw ValidationError("no team class covers team size " + std::to_string(team_size));
}

void GeneratorConfig::validate() const {
  if (papers_per_cohort.size() != 1 && papers_per_cohort.size() != cohort_years.size()) {
    throw ValidationError("papers_per_cohort: give one value or one per cohort year");
  }
  for (Year y : cohort_years) {
    if (y > horizon_year) throw ValidationError("cohort_years: " + std::to_string(y) + " is after horizon_year");
  }
  if (std::set<Year>(cohort_years.begin(), cohort_years.end()).size() != cohort_years.size()) {
    throw ValidationError("cohort_years: duplicate year");
  }
  if (team_weights.empty()) throw ValidationError("team_weights: empty");
  for (double w : team_weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("team_weights: weights must be finite and >= 0");
  }
  if (std::accumulate(team_weights.begin(), team_weights.end(), 0.0) <= 0.0) {
    throw ValidationError("team_weights: all zero");
  }
  if (reference_min < 1 || reference_min > reference_max) {
    throw ValidationError("reference_count: need 1 <= min <= max");
  }
  if (reference_max > pool_size) {
    throw ValidationError("reference_count: max " + std::to_string(reference_max) + " exceeds pool_size " +
                          std::to_string(pool_size) + " available prior papers");
  }
  if (background_per_year > 0 && (background_refs < 1 || background_refs > pool_size)) {
    throw ValidationError("background_refs_per_paper: must be in [1, pool_size]");
  }
  if (pool_span_years < 1) throw ValidationError("pool_span_years: must be >= 1");
  if (!(fitness_sigma >= 0.0) || !std::isfinite(fitness_sigma)) throw ValidationError("fitness_sigma: must be >= 0");
  if (citer_max_focal < 1) throw ValidationError("citer_max_focal: must be >= 1");
  if (classes.empty()) throw ValidationError("class: no team classes defined");
  const auto lags = classes.front().latency.size();
  std::uint32_t next = 1;
  for (const auto& c : classes) {
    const std::string key = "class." + c.name;
    if (c.team_min != next || c.team_max < c.team_min) {
      throw ValidationError(key + ".team_sizes: classes must tile 1.." + std::to_string(team_max()) +
                            " in ascending order");
    }
    next = c.team_max + 1;
    if (c.latency.empty() || c.latency.size() != lags) {
      throw ValidationError(key + ".latency: every class needs the same number of lags");
    }
    for (double v : c.latency) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(key + ".latency: intensities must be >= 0");
    }
    if (c.consolidation.size() != 1 && c.consolidation.size() != lags) {
      throw ValidationError(key + ".consolidation: give one value or one per lag");
    }
    for (double q : c.consolidation) {
      if (!(q >= 0.0 && q <= 1.0)) throw ValidationError(key + ".consolidation: probabilities must be in [0, 1]");
    }
  }
  if (next != team_max() + 1) {
    throw ValidationError("class: team classes must cover 1.." + std::to_string(team_max()));
  }
}

GeneratorConfig GeneratorConfig::parse(std::istream& in) {
  GeneratorConfig c;
  c.cohort_years.clear();
  std::map<std::string, TeamClass> classes;
  std::vector<std::string> class_order;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError("line " + std::to_string(number) + ": expected key = value");
    auto trim = [](std::string s) {
      auto f = s.find_first_not_of(" \t\r");
      auto l = s.find_last_not_of(" \t\r");
      return f == std::string::npos ? std::string() : s.substr(f, l - f + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "seed") {
      c.seed = parse_integer<std::uint64_t>(key, value);
    } else if (key == "cohort_years") {
      for (double y : parse_doubles(key, value)) {
        if (y != std::floor(y)) throw ValidationError(key + ": years must be integers");
        c.cohort_years.push_back(static_cast<Year>(y));
      }
    } else if (key == "papers_per_cohort") {
      c.papers_per_cohort.clear();
      for (double v : parse_doubles(key, value)) {
        c.papers_per_cohort.push_back(parse_integer<std::uint32_t>(key, format_double(v)));
      }
    } else if (key == "horizon_year") {
      c.horizon_year = parse_integer<Year>(key, value);
    } else if (key == "team_weights") {
      c.team_weights = parse_doubles(key, value);
    } else if (key == "reference_count") {
      auto v = parse_doubles(key, value);
      if (v.size() != 2) throw ValidationError(key + ": expected min,max");
      c.reference_min = parse_integer<std::uint32_t>(key, format_double(v[0]));
      c.reference_max = parse_integer<std::uint32_t>(key, format_double(v[1]));
    } else if (key == "fitness_sigma") {
      c.fitness_sigma = parse_doubles(key, value).at(0);
    } else if (key == "pool_size") {
      c.pool_size = parse_integer<std::uint32_t>(key, value);
    } else if (key == "pool_span_years") {
      c.pool_span_years = parse_integer<std::int32_t>(key, value);
    } else if (key == "background_papers_per_year") {
      c.background_per_year = parse_integer<std::uint32_t>(key, value);
    } else if (key == "background_refs_per_paper") {
      c.background_refs = parse_integer<std::uint32_t>(key, value);
    } else if (key == "citer_max_focal") {
      c.citer_max_focal = parse_integer<std::uint32_t>(key, value);
    } else if (key.rfind("class.", 0) == 0) {
      auto dot = key.find('.', 6);
      if (dot == std::string::npos) throw ValidationError(key + ": expected class.<name>.<field>");
      const std::string name = key.substr(6, dot - 6);
      const std::string field = key.substr(dot + 1);
      if (!classes.count(name)) class_order.push_back(name);
      auto& tc = classes[name];
      tc.name = name;
      if (field == "team_sizes") {
        auto v = parse_doubles(key, value);
        if (v.size() != 2) throw ValidationError(key + ": expected min,max");
        tc.team_min = parse_integer<std::uint32_t>(key, format_double(v[0]));
        tc.team_max = parse_integer<std::uint32_t>(key, format_double(v[1]));
      } else if (field == "latency") {
        tc.latency = parse_doubles(key, value);
      } else if (field == "consolidation") {
        tc.consolidation = parse_doubles(key, value);
      } else {
        throw ValidationError(key + ": unknown class field");
      }
    } else {
      throw ValidationError(key + ": unknown key");
    }
  }
  for (const auto& name : class_order) c.classes.push_back(classes[name]);
  std::stable_sort(c.classes.begin(), c.classes.end(),
                   [](const TeamClass& a, const TeamClass& b) { return a.team_min < b.team_min; });
  c.validate();
  return c;
}

GeneratorConfig GeneratorConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse(in);
}

void GeneratorConfig::write(std::ostream& out) const {
  out << "seed = " << seed << '\n';
  out << "cohort_years = ";
  for (std::size_t i = 0; i < cohort_years.size(); ++i) out << (i ? "," : "") << cohort_years[i];
  out << '\n';
  out << "papers_per_cohort = ";
  for (std::size_t i = 0; i < papers_per_cohort.size(); ++i) out << (i ? "," : "") << papers_per_cohort[i];
  out << '\n';
  out << "horizon_year = " << horizon_year << '\n';
  out << "team_weights = " << join(team_weights) << '\n';
  out << "reference_count = " << reference_min << ',' << reference_max << '\n';
  out << "fitness_sigma = " << format_double(fitness_sigma) << '\n';
  out << "pool_size = " << pool_size << '\n';
  out << "pool_span_years = " << pool_span_years << '\n';
  out << "background_papers_per_year = " << background_per_year << '\n';
  out << "background_refs_per_paper = " << background_refs << '\n';
  out << "citer_max_focal = " << citer_max_focal << '\n';
  for (const auto& c : classes) {
    out << "class." << c.name << ".team_sizes = " << c.team_min << ',' << c.team_max << '\n';
    out << "class." << c.name << ".latency = " << join(c.latency) << '\n';
    out << "class." << c.name << ".consolidation = " << join(c.consolidation) << '\n';
  }
}

namespace {

GeneratorConfig common_profile() {
  GeneratorConfig c;
  c.seed = 20190213;
  c.cohort_years = {1995, 2000, 2010, 2015, 2017, 2019};
  c.papers_per_cohort = {1600, 1600, 1700, 2500, 3000, 3500};
  c.horizon_year = 2020;
  c.team_weights = {0.16, 0.15, 0.14, 0.12, 0.1, 0.09, 0.08, 0.06, 0.05, 0.05};
  c.reference_min = 5;
  c.reference_max = 60;
  c.fitness_sigma = 0.5;
  c.pool_size = 2000;
  c.pool_span_years = 10;
  c.background_per_year = 40;
  c.background_refs = 10;
  c.citer_max_focal = 8;
  return c;
}

constexpr std::size_t kMaxLag = 25;

}  // namespace

GeneratorConfig GeneratorConfig::default_profile() {
  GeneratorConfig c = common_profile();
  // Small teams: cited late, early citers consolidate, late citers do not.
  std::vector<double> small_q(kMaxLag + 1, 0.05);
  std::fill(small_q.begin(), small_q.begin() + 5, 0.6);
  std::vector<double> medium_q(kMaxLag + 1, 0.15);
  std::fill(medium_q.begin(), medium_q.begin() + 4, 0.45);
  c.classes = {
      {"small", 1, 3, bump(2.5, 9.0, 4.0, 0.15, kMaxLag), small_q},
      {"medium", 4, 6, bump(5.0, 4.0, 3.0, 0.15, kMaxLag), medium_q},
      {"large", 7, 10, bump(7.0, 1.0, 2.0, 0.15, kMaxLag), {0.3}},
  };
  return c;
}

GeneratorConfig GeneratorConfig::null_profile() {
  GeneratorConfig c = common_profile();
  const auto latency = bump(5.0, 4.0, 3.0, 0.15, kMaxLag);
  c.classes = {
      {"small", 1, 3, latency, {0.25}},
      {"medium", 4, 6, latency, {0.25}},
      {"large", 7, 10, latency, {0.25}},
  };
  return c;
}

SyntheticCorpus generate_corpus(const GeneratorConfig& config) {
  config.validate();
  SyntheticCorpus out;

  struct Citation {
    std::uint32_t focal;                   // index into planted
    std::optional<std::uint32_t> reference;  // pool index within the focal's cohort
  };
  std::map<Year, std::vector<Citation>> by_year;
  std::vector<PaperRecord> records;
  std::vector<std::vector<PaperId>> pools;  // per cohort, ids of pool papers
  PaperId next_id = 1;

  boost::random::discrete_distribution<std::uint32_t> team_dist(config.team_weights.begin(),
                                                                config.team_weights.end());
  auto draw_team = [&](Rng& rng) { return team_dist(rng) + 1; };

  std::vector<std::size_t> order(config.cohort_years.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return config.cohort_years[a] < config.cohort_years[b]; });
  std::vector<Year> cohorts;
  std::vector<std::uint32_t> cohort_sizes;
  for (auto i : order) {
    if (config.cohort_size(i) == 0) continue;
    cohorts.push_back(config.cohort_years[i]);
    cohort_sizes.push_back(config.cohort_size(i));
  }
  std::vector<std::vector<PaperId>> focal_refs;

  for (std::size_t ci = 0; ci < cohorts.size(); ++ci) {
    const Year year = cohorts[ci];
    Rng pool_rng = stream(config.seed, kPool, ci);
    boost::random::uniform_int_distribution<Year> pool_year(year - config.pool_span_years, year - 1);
    std::vector<PaperId> pool;
    for (std::uint32_t i = 0; i < config.pool_size; ++i) {
      PaperRecord p;
      p.paper_id = next_id++;
      p.year = pool_year(pool_rng);
      p.team_size = draw_team(pool_rng);
      pool.push_back(p.paper_id);
      records.push_back(std::move(p));
    }
    pools.push_back(pool);

    for (std::uint32_t i = 0; i < cohort_sizes[ci]; ++i) {
      const std::uint64_t item = (static_cast<std::uint64_t>(ci) << 32) | i;
      Rng rng = stream(config.seed, kFocal, item);
      PaperRecord p;
      p.paper_id = next_id++;
      p.year = year;
      p.team_size = draw_team(rng);
      boost::random::uniform_int_distribution<std::uint32_t> ref_count(config.reference_min, config.reference_max);
      auto picks = sample_distinct(rng, config.pool_size, ref_count(rng));
      for (auto idx : picks) p.reference_ids.push_back(pool[idx]);

      PlantedPaper planted;
      planted.paper_id = p.paper_id;
      planted.year = year;
      planted.team_size = p.team_size;
      planted.team_class = config.class_of(p.team_size);
      const auto& tc = config.classes[planted.team_class];
      if (config.fitness_sigma > 0.0) {
        const double s = config.fitness_sigma;
        boost::random::lognormal_distribution<double> fitness(-0.5 * s * s, s);
        planted.fitness = fitness(rng);
      }
      const auto last_lag = std::min<std::size_t>(config.max_lag(), static_cast<std::size_t>(config.horizon_year - year));
      const auto focal_index = static_cast<std::uint32_t>(out.planted.size());
      for (std::size_t t = 0; t <= last_lag; ++t) {
        const double mean = planted.fitness * tc.latency[t];
        std::uint64_t count = 0;
        if (mean > 0.0) {
          boost::random::poisson_distribution<std::uint64_t, double> poisson(mean);
          count = poisson(rng);
        }
        boost::random::bernoulli_distribution<double> consolidates(tc.consolidation_at(t));
        boost::random::uniform_int_distribution<std::size_t> which_ref(0, picks.size() - 1);
        for (std::uint64_t e = 0; e < count; ++e) {
          Citation cite{focal_index, std::nullopt};
          if (consolidates(rng)) cite.reference = picks[which_ref(rng)];
          by_year[year + static_cast<Year>(t)].push_back(cite);
        }
        planted.citer_counts.push_back(count);
      }
      out.planted.push_back(std::move(planted));
      records.push_back(std::move(p));
    }
  }

  // Citer nodes: shuffle each year's citations and pack up to
  // citer_max_focal distinct cohort papers into one citing paper.
  std::vector<std::size_t> cohort_of(out.planted.size());
  for (std::size_t i = 0; i < out.planted.size(); ++i) {
    cohort_of[i] = static_cast<std::size_t>(
        std::lower_bound(cohorts.begin(), cohorts.end(), out.planted[i].year) - cohorts.begin());
  }
  for (auto& [year, cites] : by_year) {
    Rng rng = stream(config.seed, kCiterPack, static_cast<std::uint64_t>(year));
    for (std::size_t i = cites.size(); i > 1; --i) {
      boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(cites[i - 1], cites[pick(rng)]);
    }
    Rng team_rng = stream(config.seed, kCiterTeam, static_cast<std::uint64_t>(year));
    std::unordered_set<std::uint32_t> cited_focal;
    std::set<PaperId> refs;
    auto close_paper = [&] {
      if (cited_focal.empty()) return;
      PaperRecord citer;
      citer.paper_id = next_id++;
      citer.year = year;
      citer.team_size = draw_team(team_rng);
      citer.reference_ids.assign(refs.begin(), refs.end());
      records.push_back(std::move(citer));
      cited_focal.clear();
      refs.clear();
    };
    for (const Citation& c : cites) {
      // A citing paper lists each cohort paper at most once.
      if (cited_focal.size() == config.citer_max_focal || cited_focal.count(c.focal)) close_paper();
      cited_focal.insert(c.focal);
      refs.insert(out.planted[c.focal].paper_id);
      if (c.reference) refs.insert(pools[cohort_of[c.focal]][*c.reference]);
    }
    close_paper();
  }

  // Reference-only citers: papers in the cohort's field that cite its pool
  // but none of its cohort papers.
  for (std::size_t ci = 0; ci < cohorts.size(); ++ci) {
    for (Year year = cohorts[ci]; year <= config.horizon_year; ++year) {
      Rng rng = stream(config.seed, kBackground, (static_cast<std::uint64_t>(ci) << 32) | static_cast<std::uint32_t>(year));
      for (std::uint32_t i = 0; i < config.background_per_year; ++i) {
        PaperRecord p;
        p.paper_id = next_id++;
        p.year = year;
        p.team_size = draw_team(rng);
        for (auto idx : sample_distinct(rng, config.pool_size, config.background_refs)) {
          p.reference_ids.push_back(pools[ci][idx]);
        }
        records.push_back(std::move(p));
      }
    }
  }

  IngestOptions options;
  options.min_year = std::numeric_limits<Year>::min();
  options.max_year = std::numeric_limits<Year>::max();
  out.corpus.add_papers(std::move(records), options);
  return out;
}

void write_ledger_tsv(std::ostream& out, const GeneratorConfig& config, std::span<const PlantedPaper> planted) {
  for (const auto& p : planted) {
    const auto& name = config.classes.at(p.team_class).name;
    for (std::size_t t = 0; t < p.citer_counts.size(); ++t) {
      out << p.paper_id << '\t' << name << '\t' << t << '\t' << p.citer_counts[t] << '\n';
    }
  }
}

std::vector<FlipRow> run_flip_experiment(const CorpusIndex& index, Year horizon_year,
                                         std::span<const std::int32_t> windows, const FlipOptions& options) {
  if (windows.empty()) throw ValidationError("flip experiment needs at least one window");
  std::vector<FlipRow> rows;
  for (auto w : windows) {
    FlipRow row;
    row.window = w;
    row.cohort_year = options.cohort_year.value_or(horizon_year - w);
    auto cohort = build_cohort(index, row.cohort_year, WindowSpec::years(w), options.criteria, options.threads);
    row.cohort_size = cohort.size();
    if (cohort.size() < options.min_cohort) {
      throw ValidationError("cohort " + std::to_string(row.cohort_year) + " at window " + std::to_string(w) +
                            " has " + std::to_string(cohort.size()) + " papers, below the minimum of " +
                            std::to_string(options.min_cohort));
    }
    auto fit = fit_ols(build_design(cohort, ModelSpec{ModelVariant::kEq1}));
    row.team_slope = coefficient_test(fit, "ln_k");
    rows.push_back(row);
  }
  return rows;
}

std::vector<FlipRow> run_flip_experiment(const GeneratorConfig& config, std::span<const std::int32_t> windows,
                                         const FlipOptions& options) {
  auto synthetic = generate_corpus(config);
  auto index = CorpusIndex::build(synthetic.corpus);
  return run_flip_experiment(index, config.horizon_year, windows, options);
}

void write_flip_tsv(std::ostream& out, std::span<const FlipRow> rows) {
  for (const auto& r : rows) {
    out << r.window << '\t' << r.cohort_year << '\t' << r.cohort_size << '\t' << format_double(r.team_slope.estimate)
        << '\t' << format_double(r.team_slope.std_error) << '\t' << format_double(r.team_slope.t) << '\t'
        << format_double(r.team_slope.p) << '\n';
  }
}

}  // namespace dlab
