#include "dlab/cohort.hpp"

#include <ostream>

#include "dlab/disruption.hpp"
#include "dlab/error.hpp"
#include "dlab/format.hpp"

namespace dlab {

void CohortCriteria::validate() const {
  if (team_size.lo < 1) throw ValidationError("team size lower bound must be >= 1");
  for (const Interval* iv : {&team_size, &reference_length, &citations}) {
    if (iv->lo > iv->hi) throw ValidationError("empty criteria interval");
  }
}

WindowSpec horizon_window(Year cohort_year, Year horizon_year) {
  if (horizon_year < cohort_year) {
    throw ValidationError("cohort year " + std::to_string(cohort_year) + " is after horizon " +
                          std::to_string(horizon_year));
  }
  return WindowSpec::years(horizon_year - cohort_year);
}

std::vector<CohortRow> build_cohort(const CorpusIndex& index, Year cohort_year, const WindowSpec& window,
                                    const CohortCriteria& criteria, unsigned threads) {
  criteria.validate();
  std::vector<PaperId> candidates;
  for (CorpusIndex::Node n = 0; n < index.size(); ++n) {
    if (index.year(n) != cohort_year) continue;
    if (!criteria.team_size.contains(index.team_size(n))) continue;
    if (!criteria.reference_length.contains(index.reference_length(n))) continue;
    const auto c = index.citers_in_window(n, cohort_year, window).size();
    if (!criteria.citations.contains(c)) continue;
    candidates.push_back(index.id(n));
  }

  auto metrics = dindex_sweep(index, candidates, window, threads);
  std::vector<CohortRow> rows;
  rows.reserve(candidates.size());
  for (const auto& m : metrics) {
    if (!m.d_value) continue;
    auto n = index.node(m.focal_id);
    rows.push_back(CohortRow{m.focal_id, cohort_year, *m.d_value, index.team_size(n), index.reference_length(n),
                             m.n_i + m.n_j});
  }
  return rows;
}

void write_cohort_tsv(std::ostream& out, std::span<const CohortRow> rows) {
  for (const auto& r : rows) {
    out << r.paper_id << '\t' << r.year << '\t' << format_double(r.d_value) << '\t' << r.team_size << '\t'
        << r.reference_length << '\t' << r.citations << '\n';
  }
}

}  // namespace dlab
