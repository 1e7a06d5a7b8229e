#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dlab/corpus_store.hpp"
#include "dlab/error.hpp"

namespace dlab {

/// Where the citation window for a focal paper's references starts.
enum class ReferenceAnchor {
  kFocalYear,      // same calendar span as the focal paper's own window
  kReferenceYear,  // each reference's own publication year
};

/// Citation window of `width` years after publication, inclusive of the
/// publication year. A citer published in year y counts for a paper
/// published in year p iff 0 <= y - p <= width; unbounded windows keep only
/// the lower bound.
struct WindowSpec {
  std::optional<std::int32_t> width;
  ReferenceAnchor anchor = ReferenceAnchor::kFocalYear;

  static WindowSpec years(std::int32_t w, ReferenceAnchor a = ReferenceAnchor::kFocalYear) {
    if (w < 0) throw ValidationError("citation window must be >= 0 years");
    return WindowSpec{w, a};
  }
  static WindowSpec unbounded(ReferenceAnchor a = ReferenceAnchor::kFocalYear) {
    return WindowSpec{std::nullopt, a};
  }

  bool is_unbounded() const { return !width.has_value(); }

  bool contains(Year anchor_year, Year citer_year) const {
    const std::int64_t lag = static_cast<std::int64_t>(citer_year) - anchor_year;
    return lag >= 0 && (!width || lag <= *width);
  }

  /// "unbounded" or the width in years.
  std::string label() const { return width ? std::to_string(*width) : "unbounded"; }

  friend bool operator==(const WindowSpec&, const WindowSpec&) = default;
};

/// Frozen bidirectional citation index. Papers are addressed internally by
/// a dense index (position in ascending id order). Both adjacencies live in
/// contiguous arrays with offset tables; each citer list is sorted by
/// (year, id) so a window is a contiguous slice.
class CorpusIndex {
 public:
  using Node = std::uint32_t;

  static CorpusIndex build(const RawCorpus& corpus);

  std::size_t size() const { return ids_.size(); }
  std::size_t edge_count() const { return ref_targets_.size(); }

  std::optional<Node> find(PaperId id) const;
  /// Throws UnknownPaperError.
  Node node(PaperId id) const;

  PaperId id(Node n) const { return ids_[n]; }
  Year year(Node n) const { return years_[n]; }
  std::uint32_t team_size(Node n) const { return team_sizes_[n]; }
  std::uint64_t reference_length(Node n) const { return reference_lengths_[n]; }

  std::span<const Node> references(Node n) const {
    return {ref_targets_.data() + ref_offsets_[n], ref_targets_.data() + ref_offsets_[n + 1]};
  }
  std::span<const Node> citers(Node n) const {
    return {citer_sources_.data() + citer_offsets_[n], citer_sources_.data() + citer_offsets_[n + 1]};
  }

  /// Citers of `n` published within `window` counted from `anchor_year`,
  /// as a slice of the (year, id)-sorted citer list.
  std::span<const Node> citers_in_window(Node n, Year anchor_year, const WindowSpec& window) const;

  std::span<const PaperId> ids() const { return ids_; }

 private:
  std::vector<PaperId> ids_;
  std::vector<Year> years_;
  std::vector<std::uint32_t> team_sizes_;
  std::vector<std::uint64_t> reference_lengths_;
  std::vector<std::size_t> ref_offsets_;
  std::vector<Node> ref_targets_;
  std::vector<std::size_t> citer_offsets_;
  std::vector<Node> citer_sources_;
  std::vector<Year> citer_years_;  // parallel to citer_sources_
};

/// Ids of the citers of `paper` inside `window` anchored at its own year,
/// ascending by id. Throws UnknownPaperError.
std::vector<PaperId> citers_within(const CorpusIndex& index, PaperId paper, const WindowSpec& window);

/// Number of citers of `paper` inside `window`. Throws UnknownPaperError.
std::size_t citation_count(const CorpusIndex& index, PaperId paper, const WindowSpec& window);

}  // namespace dlab
