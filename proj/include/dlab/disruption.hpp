#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "dlab/window_graph.hpp"

namespace dlab {

/// Disruption index components for one focal paper under one window.
///   n_i: citers of the focal paper that cite none of its references
///   n_j: citers of the focal paper that also cite at least one reference
///   n_k: citers of at least one reference that do not cite the focal paper
/// d_value = (n_i - n_j) / (n_i + n_j + n_k), absent when the denominator is 0.
struct DIndexResult {
  PaperId focal_id = 0;
  WindowSpec window;
  std::uint64_t n_i = 0;
  std::uint64_t n_j = 0;
  std::uint64_t n_k = 0;
  std::optional<double> d_value;

  friend bool operator==(const DIndexResult&, const DIndexResult&) = default;
};

DIndexResult compute_dindex(const CorpusIndex& index, PaperId focal, const WindowSpec& window);

/// compute_dindex over a cohort. Output order follows `cohort`; results do
/// not depend on `threads`.
std::vector<DIndexResult> dindex_sweep(const CorpusIndex& index, std::span<const PaperId> cohort,
                                       const WindowSpec& window, unsigned threads = 1);

/// `paper_id window n_i n_j n_k d_value`, NA for undefined d_value.
void write_dindex_tsv(std::ostream& out, std::span<const DIndexResult> results);

struct CitationSeries {
  PaperId focal_id = 0;
  std::vector<std::uint64_t> counts;  // counts[t] = citers published t years after the focal paper
};

/// Annual citer counts for lags 0..horizon.
CitationSeries citation_series(const CorpusIndex& index, PaperId focal, std::int32_t horizon);

/// Sleeping Beauty coefficient B. With t_m the earliest year of peak
/// citations, sums over t = 0..t_m the gap between the straight line from
/// (0, c_0) to (t_m, c_tm) and c_t, each divided by max(1, c_t). B = 0 when
/// the peak is in the publication year. Throws ValidationError on an empty
/// series.
double sleeping_beauty_index(std::span<const double> counts);
double sleeping_beauty_index(const CitationSeries& series);

}  // namespace dlab
