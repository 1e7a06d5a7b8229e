#include "dlab/window_graph.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "dlab/error.hpp"

namespace dlab {

CorpusIndex CorpusIndex::build(const RawCorpus& corpus) {
  CorpusIndex index;
  const auto& papers = corpus.papers();
  const std::size_t n = papers.size();
  if (n >= std::numeric_limits<Node>::max()) throw ValidationError("corpus too large for 32-bit node ids");

  index.ids_.reserve(n);
  index.years_.reserve(n);
  index.team_sizes_.reserve(n);
  index.reference_lengths_.reserve(n);
  for (const auto& p : papers) {
    index.ids_.push_back(p.paper_id);
    index.years_.push_back(p.year);
    index.team_sizes_.push_back(p.team_size);
    index.reference_lengths_.push_back(p.reference_length());
  }

  // Forward CSR. RawCorpus keeps references ascending by id, which is
  // ascending by node as well.
  index.ref_offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    index.ref_offsets_[i + 1] = index.ref_offsets_[i] + papers[i].reference_ids.size();
  }
  index.ref_targets_.resize(index.ref_offsets_[n]);
  std::vector<std::size_t> in_degree(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto* out = index.ref_targets_.data() + index.ref_offsets_[i];
    for (PaperId ref : papers[i].reference_ids) {
      Node target = index.node(ref);
      *out++ = target;
      ++in_degree[target];
    }
  }

  // Reverse CSR by counting sort, then order each citer list by (year, id).
  index.citer_offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) index.citer_offsets_[i + 1] = index.citer_offsets_[i] + in_degree[i];
  index.citer_sources_.resize(index.edge_count());
  std::vector<std::size_t> cursor(index.citer_offsets_.begin(), index.citer_offsets_.end() - 1);
  for (Node src = 0; src < n; ++src) {
    for (Node target : index.references(src)) index.citer_sources_[cursor[target]++] = src;
  }
  const auto& years = index.years_;
  for (std::size_t i = 0; i < n; ++i) {
    auto first = index.citer_sources_.begin() + static_cast<std::ptrdiff_t>(index.citer_offsets_[i]);
    auto last = index.citer_sources_.begin() + static_cast<std::ptrdiff_t>(index.citer_offsets_[i + 1]);
    // Sources were appended in node order, so a stable sort on year alone
    // yields (year, id) order.
    std::stable_sort(first, last, [&](Node a, Node b) { return years[a] < years[b]; });
  }
  index.citer_years_.resize(index.citer_sources_.size());
  std::transform(index.citer_sources_.begin(), index.citer_sources_.end(), index.citer_years_.begin(),
                 [&](Node s) { return years[s]; });
  return index;
}

std::optional<CorpusIndex::Node> CorpusIndex::find(PaperId id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) return std::nullopt;
  return static_cast<Node>(it - ids_.begin());
}

CorpusIndex::Node CorpusIndex::node(PaperId id) const {
  auto n = find(id);
  if (!n) throw UnknownPaperError("unknown paper_id " + std::to_string(id));
  return *n;
}

std::span<const CorpusIndex::Node> CorpusIndex::citers_in_window(Node n, Year anchor_year,
                                                                 const WindowSpec& window) const {
  const auto begin = citer_years_.begin() + static_cast<std::ptrdiff_t>(citer_offsets_[n]);
  const auto end = citer_years_.begin() + static_cast<std::ptrdiff_t>(citer_offsets_[n + 1]);
  auto lo = std::lower_bound(begin, end, anchor_year);
  auto hi = end;
  if (window.width) {
    const std::int64_t last = static_cast<std::int64_t>(anchor_year) + *window.width;
    if (last < std::numeric_limits<Year>::max()) {
      hi = std::upper_bound(lo, end, static_cast<Year>(last));
    }
  }
  const Node* base = citer_sources_.data();
  return {base + (lo - citer_years_.begin()), base + (hi - citer_years_.begin())};
}

std::vector<PaperId> citers_within(const CorpusIndex& index, PaperId paper, const WindowSpec& window) {
  auto n = index.node(paper);
  auto slice = index.citers_in_window(n, index.year(n), window);
  std::vector<PaperId> out;
  out.reserve(slice.size());
  for (auto c : slice) out.push_back(index.id(c));
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t citation_count(const CorpusIndex& index, PaperId paper, const WindowSpec& window) {
  auto n = index.node(paper);
  return index.citers_in_window(n, index.year(n), window).size();
}

}  // namespace dlab
