#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "dlab/window_graph.hpp"

namespace dlab {

/// Inclusive integer interval.
struct Interval {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;

  bool contains(std::uint64_t v) const { return v >= lo && v <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct CohortCriteria {
  Interval team_size;         // k_p
  Interval reference_length;  // r_p
  Interval citations;         // c_p, counted inside the cohort window

  /// 1 <= k <= 10, 5 <= r <= 50, 10 <= c <= 1000.
  static CohortCriteria model1() { return {{1, 10}, {5, 50}, {10, 1000}}; }
  /// 1 <= k <= 25, 10 <= r <= 200, 1 <= c <= 1000.
  static CohortCriteria model2() { return {{1, 25}, {10, 200}, {1, 1000}}; }

  /// Throws ValidationError for an empty interval or k lower bound below 1.
  void validate() const;

  friend bool operator==(const CohortCriteria&, const CohortCriteria&) = default;
};

struct CohortRow {
  PaperId paper_id = 0;
  Year year = 0;
  double d_value = 0.0;
  std::uint32_t team_size = 0;         // k_p
  std::uint64_t reference_length = 0;  // r_p
  std::uint64_t citations = 0;         // c_p

  friend bool operator==(const CohortRow&, const CohortRow&) = default;
};

inline constexpr Year kDefaultHorizonYear = 2020;

/// Window width that reaches exactly to the horizon year.
WindowSpec horizon_window(Year cohort_year, Year horizon_year = kDefaultHorizonYear);

/// Papers published in `cohort_year` whose k, r and windowed c fall in the
/// criteria, with their windowed D-index. Papers whose D is undefined are
/// dropped. Rows ascend by paper id.
std::vector<CohortRow> build_cohort(const CorpusIndex& index, Year cohort_year, const WindowSpec& window,
                                    const CohortCriteria& criteria, unsigned threads = 1);

/// `paper_id year d k r c`
void write_cohort_tsv(std::ostream& out, std::span<const CohortRow> rows);

}  // namespace dlab
