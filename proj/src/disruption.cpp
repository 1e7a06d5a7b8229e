#include "dlab/disruption.hpp"

#include <algorithm>
#include <exception>
#include <ostream>
#include <thread>

#include "dlab/error.hpp"
#include "dlab/format.hpp"

namespace dlab {

namespace {

using Node = CorpusIndex::Node;

DIndexResult dindex_at(const CorpusIndex& index, Node focal, const WindowSpec& window, std::vector<Node>& focal_citers,
                       std::vector<Node>& reference_citers) {
  const Year focal_year = index.year(focal);

  auto f = index.citers_in_window(focal, focal_year, window);
  focal_citers.assign(f.begin(), f.end());
  std::sort(focal_citers.begin(), focal_citers.end());

  reference_citers.clear();
  for (Node ref : index.references(focal)) {
    const Year anchor = window.anchor == ReferenceAnchor::kFocalYear ? focal_year : index.year(ref);
    for (Node c : index.citers_in_window(ref, anchor, window)) {
      if (c != focal) reference_citers.push_back(c);
    }
  }
  std::sort(reference_citers.begin(), reference_citers.end());
  reference_citers.erase(std::unique(reference_citers.begin(), reference_citers.end()), reference_citers.end());

  std::uint64_t both = 0;
  auto a = focal_citers.begin();
  auto b = reference_citers.begin();
  while (a != focal_citers.end() && b != reference_citers.end()) {
    if (*a < *b) {
      ++a;
    } else if (*b < *a) {
      ++b;
    } else {
      ++both;
      ++a;
      ++b;
    }
  }

  DIndexResult r;
  r.focal_id = index.id(focal);
  r.window = window;
  r.n_j = both;
  r.n_i = focal_citers.size() - both;
  r.n_k = reference_citers.size() - both;
  const std::uint64_t total = r.n_i + r.n_j + r.n_k;
  if (total > 0) {
    r.d_value = (static_cast<double>(r.n_i) - static_cast<double>(r.n_j)) / static_cast<double>(total);
  }
  return r;
}

}  // namespace

DIndexResult compute_dindex(const CorpusIndex& index, PaperId focal, const WindowSpec& window) {
  std::vector<Node> f;
  std::vector<Node> b;
  return dindex_at(index, index.node(focal), window, f, b);
}

std::vector<DIndexResult> dindex_sweep(const CorpusIndex& index, std::span<const PaperId> cohort,
                                       const WindowSpec& window, unsigned threads) {
  std::vector<Node> nodes;
  nodes.reserve(cohort.size());
  for (PaperId id : cohort) nodes.push_back(index.node(id));

  std::vector<DIndexResult> results(nodes.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<Node> f;
    std::vector<Node> b;
    for (std::size_t i = begin; i < end; ++i) results[i] = dindex_at(index, nodes[i], window, f, b);
  };

  threads = std::max(1u, threads);
  if (threads == 1 || nodes.size() < 2 * threads) {
    work(0, nodes.size());
    return results;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  const std::size_t chunk = (nodes.size() + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = std::min(nodes.size(), t * chunk);
    const std::size_t end = std::min(nodes.size(), begin + chunk);
    pool.emplace_back([&, t, begin, end] {
      try {
        work(begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

void write_dindex_tsv(std::ostream& out, std::span<const DIndexResult> results) {
  for (const auto& r : results) {
    out << r.focal_id << '\t' << r.window.label() << '\t' << r.n_i << '\t' << r.n_j << '\t' << r.n_k << '\t'
        << format_optional(r.d_value) << '\n';
  }
}

CitationSeries citation_series(const CorpusIndex& index, PaperId focal, std::int32_t horizon) {
  if (horizon < 0) throw ValidationError("horizon must be >= 0");
  auto n = index.node(focal);
  const Year year = index.year(n);
  CitationSeries series;
  series.focal_id = focal;
  series.counts.assign(static_cast<std::size_t>(horizon) + 1, 0);
  for (Node c : index.citers_in_window(n, year, WindowSpec::years(horizon))) {
    ++series.counts[static_cast<std::size_t>(index.year(c) - year)];
  }
  return series;
}

double sleeping_beauty_index(std::span<const double> counts) {
  if (counts.empty()) throw ValidationError("sleeping beauty index of an empty series");
  const auto peak = std::max_element(counts.begin(), counts.end());  // first maximum
  const auto t_m = static_cast<std::size_t>(peak - counts.begin());
  if (t_m == 0) return 0.0;
  const double c0 = counts[0];
  const double slope = (*peak - c0) / static_cast<double>(t_m);
  double b = 0.0;
  for (std::size_t t = 0; t <= t_m; ++t) {
    b += (slope * static_cast<double>(t) + c0 - counts[t]) / std::max(1.0, counts[t]);
  }
  return b;
}

double sleeping_beauty_index(const CitationSeries& series) {
  std::vector<double> counts(series.counts.begin(), series.counts.end());
  return sleeping_beauty_index(counts);
}

}  // namespace dlab
