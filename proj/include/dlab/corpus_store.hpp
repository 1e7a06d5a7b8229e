#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dlab {

using PaperId = std::uint64_t;
using Year = std::int32_t;

struct PaperRecord {
  PaperId paper_id = 0;
  Year year = 0;
  std::uint32_t team_size = 1;
  std::vector<PaperId> reference_ids;  // sorted ascending once canonical
  std::optional<std::uint64_t> reference_count_override;

  /// r_p used by regressions: the metadata override when present, else the
  /// number of in-slice references.
  std::uint64_t reference_length() const {
    return reference_count_override.value_or(reference_ids.size());
  }

  friend bool operator==(const PaperRecord&, const PaperRecord&) = default;
};

struct LineIssue {
  std::size_t line = 0;
  std::string message;
};

struct IngestReport {
  std::size_t lines_parsed = 0;  // non-blank, non-comment lines that parsed
  std::vector<LineIssue> malformed;
  // Edge ingestion only. accepted counts resolved lines including repeats;
  // stored counts distinct edges added.
  std::size_t accepted = 0;
  std::size_t stored = 0;
  std::size_t duplicates = 0;
  std::vector<std::pair<PaperId, PaperId>> dangling;
};

struct IngestOptions {
  Year min_year = 1800;
  Year max_year = 2100;
  // Strict mode turns malformed lines into ValidationError. Lenient mode
  // skips and reports them. Invariant violations (duplicate id, team size
  // below 1, year out of range) are errors in both modes.
  bool strict = true;
};

/// Papers keyed by id plus their in-slice reference lists. Kept in
/// canonical order: papers by id, references ascending.
class RawCorpus {
 public:
  RawCorpus() = default;

  const std::vector<PaperRecord>& papers() const { return papers_; }
  std::size_t size() const { return papers_.size(); }
  bool empty() const { return papers_.empty(); }
  std::size_t edge_count() const;

  const PaperRecord* find(PaperId id) const;
  PaperRecord* find(PaperId id);

  /// Inserts a paper; throws ValidationError on a duplicate id or an
  /// invariant violation.
  void add_paper(PaperRecord record, const IngestOptions& options = {});

  /// Bulk insertion used by ingestion; same checks as add_paper.
  void add_papers(std::vector<PaperRecord> records, const IngestOptions& options = {});

  /// Adds citing -> cited. Returns false if already present. Both endpoints
  /// must exist and differ.
  bool add_edge(PaperId citing, PaperId cited);

  friend bool operator==(const RawCorpus&, const RawCorpus&) = default;

 private:
  std::vector<PaperRecord> papers_;
};

IngestReport ingest_papers(std::istream& in, RawCorpus& corpus, const IngestOptions& options = {});
IngestReport ingest_papers(const std::filesystem::path& path, RawCorpus& corpus,
                           const IngestOptions& options = {});

IngestReport ingest_edges(std::istream& in, RawCorpus& corpus, const IngestOptions& options = {});
IngestReport ingest_edges(const std::filesystem::path& path, RawCorpus& corpus,
                          const IngestOptions& options = {});

/// papers.tsv / edges.tsv emission in canonical order.
void write_papers_tsv(std::ostream& out, const RawCorpus& corpus);
void write_edges_tsv(std::ostream& out, const RawCorpus& corpus);

inline constexpr char kSnapshotMagic[4] = {'D', 'L', 'A', 'B'};
inline constexpr std::uint16_t kSnapshotVersion = 1;

std::string encode_snapshot(const RawCorpus& corpus);
RawCorpus decode_snapshot(std::string_view bytes);

void save_snapshot(const RawCorpus& corpus, const std::filesystem::path& path);
RawCorpus load_snapshot(const std::filesystem::path& path);

}  // namespace dlab
