#include "dlab/corpus_store.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <utility>

#include "dlab/error.hpp"

namespace dlab {

namespace {

void validate_record(const PaperRecord& p, const IngestOptions& options) {
  if (p.team_size < 1) {
    throw ValidationError("paper " + std::to_string(p.paper_id) + ": team_size < 1");
  }
  if (p.year < options.min_year || p.year > options.max_year) {
    throw ValidationError("paper " + std::to_string(p.paper_id) + ": year " + std::to_string(p.year) +
                          " outside [" + std::to_string(options.min_year) + ", " +
                          std::to_string(options.max_year) + "]");
  }
  for (std::size_t i = 0; i < p.reference_ids.size(); ++i) {
    if (p.reference_ids[i] == p.paper_id) {
      throw ValidationError("paper " + std::to_string(p.paper_id) + " cites itself");
    }
    if (i > 0 && p.reference_ids[i] <= p.reference_ids[i - 1]) {
      throw ValidationError("paper " + std::to_string(p.paper_id) +
                            ": reference list not strictly ascending");
    }
  }
}

bool by_id(const PaperRecord& a, const PaperRecord& b) { return a.paper_id < b.paper_id; }

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

template <typename Int>
bool parse_int(std::string_view field, Int& out) {
  if (field.empty()) return false;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

// Iterates data lines, skipping blanks and '#' comments. Returns the number
// of the line passed to `fn` (1-based).
template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    fn(number, std::string_view(line));
  }
}

void record_malformed(IngestReport& report, const IngestOptions& options, std::size_t line,
                      std::string message) {
  if (options.strict) {
    throw ValidationError("line " + std::to_string(line) + ": " + message);
  }
  report.malformed.push_back({line, std::move(message)});
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

std::size_t RawCorpus::edge_count() const {
  std::size_t n = 0;
  for (const auto& p : papers_) n += p.reference_ids.size();
  return n;
}

const PaperRecord* RawCorpus::find(PaperId id) const {
  auto it = std::lower_bound(papers_.begin(), papers_.end(), id,
                             [](const PaperRecord& p, PaperId v) { return p.paper_id < v; });
  return it != papers_.end() && it->paper_id == id ? &*it : nullptr;
}

PaperRecord* RawCorpus::find(PaperId id) {
  return const_cast<PaperRecord*>(std::as_const(*this).find(id));
}

void RawCorpus::add_paper(PaperRecord record, const IngestOptions& options) {
  std::sort(record.reference_ids.begin(), record.reference_ids.end());
  validate_record(record, options);
  for (PaperId ref : record.reference_ids) {
    if (ref != record.paper_id && !find(ref)) {
      throw ValidationError("paper " + std::to_string(record.paper_id) + " references unknown paper " +
                            std::to_string(ref));
    }
  }
  auto it = std::lower_bound(papers_.begin(), papers_.end(), record, by_id);
  if (it != papers_.end() && it->paper_id == record.paper_id) {
    throw ValidationError("duplicate paper_id " + std::to_string(record.paper_id));
  }
  papers_.insert(it, std::move(record));
}

void RawCorpus::add_papers(std::vector<PaperRecord> records, const IngestOptions& options) {
  for (auto& r : records) {
    std::sort(r.reference_ids.begin(), r.reference_ids.end());
    validate_record(r, options);
  }
  std::sort(records.begin(), records.end(), by_id);
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].paper_id == records[i - 1].paper_id) {
      throw ValidationError("duplicate paper_id " + std::to_string(records[i].paper_id));
    }
  }
  for (const auto& r : records) {
    if (find(r.paper_id)) throw ValidationError("duplicate paper_id " + std::to_string(r.paper_id));
  }
  // Resolve every reference before touching the stored papers so a failed
  // batch leaves the corpus unchanged.
  std::vector<PaperId> known;
  known.reserve(papers_.size() + records.size());
  for (const auto& p : papers_) known.push_back(p.paper_id);
  for (const auto& r : records) known.push_back(r.paper_id);
  std::sort(known.begin(), known.end());
  for (const auto& r : records) {
    for (PaperId ref : r.reference_ids) {
      if (!std::binary_search(known.begin(), known.end(), ref)) {
        throw ValidationError("paper " + std::to_string(r.paper_id) + " references unknown paper " +
                              std::to_string(ref));
      }
    }
  }
  std::vector<PaperRecord> merged;
  merged.reserve(papers_.size() + records.size());
  std::merge(std::make_move_iterator(papers_.begin()), std::make_move_iterator(papers_.end()),
             std::make_move_iterator(records.begin()), std::make_move_iterator(records.end()),
             std::back_inserter(merged), by_id);
  papers_ = std::move(merged);
}

bool RawCorpus::add_edge(PaperId citing, PaperId cited) {
  if (citing == cited) throw ValidationError("self-citation " + std::to_string(citing));
  PaperRecord* src = find(citing);
  if (!src || !find(cited)) throw UnknownPaperError("edge endpoint not in corpus");
  auto& refs = src->reference_ids;
  auto it = std::lower_bound(refs.begin(), refs.end(), cited);
  if (it != refs.end() && *it == cited) return false;
  refs.insert(it, cited);
  return true;
}

IngestReport ingest_papers(std::istream& in, RawCorpus& corpus, const IngestOptions& options) {
  IngestReport report;
  std::vector<PaperRecord> records;
  for_each_line(in, [&](std::size_t number, std::string_view line) {
    auto fields = split_tabs(line);
    if (fields.size() != 3 && fields.size() != 4) {
      record_malformed(report, options, number, "expected 3 or 4 tab-separated fields");
      return;
    }
    PaperRecord p;
    std::int64_t team = 0;
    if (!parse_int(fields[0], p.paper_id) || !parse_int(fields[1], p.year) || !parse_int(fields[2], team)) {
      record_malformed(report, options, number, "non-integer field");
      return;
    }
    if (team < 1) {
      throw ValidationError("line " + std::to_string(number) + ": team_size < 1");
    }
    if (team > std::numeric_limits<std::uint32_t>::max()) {
      record_malformed(report, options, number, "team_size out of range");
      return;
    }
    p.team_size = static_cast<std::uint32_t>(team);
    if (fields.size() == 4) {
      std::uint64_t override_count = 0;
      if (!parse_int(fields[3], override_count)) {
        record_malformed(report, options, number, "non-integer reference_count_override");
        return;
      }
      p.reference_count_override = override_count;
    }
    if (p.year < options.min_year || p.year > options.max_year) {
      throw ValidationError("line " + std::to_string(number) + ": year " + std::to_string(p.year) +
                            " outside valid range");
    }
    ++report.lines_parsed;
    records.push_back(std::move(p));
  });
  corpus.add_papers(std::move(records), options);
  return report;
}

IngestReport ingest_papers(const std::filesystem::path& path, RawCorpus& corpus, const IngestOptions& options) {
  auto in = open_input(path);
  return ingest_papers(in, corpus, options);
}

IngestReport ingest_edges(std::istream& in, RawCorpus& corpus, const IngestOptions& options) {
  IngestReport report;
  for_each_line(in, [&](std::size_t number, std::string_view line) {
    auto fields = split_tabs(line);
    PaperId citing = 0;
    PaperId cited = 0;
    if (fields.size() != 2 || !parse_int(fields[0], citing) || !parse_int(fields[1], cited)) {
      record_malformed(report, options, number, "expected citing_id<TAB>cited_id");
      return;
    }
    if (citing == cited) {
      record_malformed(report, options, number, "self-citation");
      return;
    }
    ++report.lines_parsed;
    if (!corpus.find(citing) || !corpus.find(cited)) {
      report.dangling.emplace_back(citing, cited);
      return;
    }
    ++report.accepted;
    if (corpus.add_edge(citing, cited)) {
      ++report.stored;
    } else {
      ++report.duplicates;
    }
  });
  return report;
}

IngestReport ingest_edges(const std::filesystem::path& path, RawCorpus& corpus, const IngestOptions& options) {
  auto in = open_input(path);
  return ingest_edges(in, corpus, options);
}

void write_papers_tsv(std::ostream& out, const RawCorpus& corpus) {
  for (const auto& p : corpus.papers()) {
    out << p.paper_id << '\t' << p.year << '\t' << p.team_size;
    if (p.reference_count_override) out << '\t' << *p.reference_count_override;
    out << '\n';
  }
}

void write_edges_tsv(std::ostream& out, const RawCorpus& corpus) {
  for (const auto& p : corpus.papers()) {
    for (PaperId ref : p.reference_ids) out << p.paper_id << '\t' << ref << '\n';
  }
}

// Snapshot layout, all integers little-endian:
//   "DLAB" u16 version
//   u64 section_length, then the PAPR section:
//     u64 paper_count
//     per paper: u64 id, i32 year, u32 team_size, u8 has_override,
//                u64 override (0 when absent), u64 n_refs, n_refs * u64
//   u64 section_length, then the END section (empty)

namespace {

class ByteWriter {
 public:
  template <typename T>
  void put(T value) {
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bytes_.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
    }
  }
  void raw(std::string_view s) { bytes_.append(s); }
  std::string& bytes() { return bytes_; }

 private:
  std::string bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    if (bytes_.size() - pos_ < sizeof(T)) throw FormatError("snapshot truncated");
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      u |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }
  std::string_view raw(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw FormatError("snapshot truncated");
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_snapshot(const RawCorpus& corpus) {
  ByteWriter section;
  section.put<std::uint64_t>(corpus.size());
  for (const auto& p : corpus.papers()) {
    section.put<std::uint64_t>(p.paper_id);
    section.put<std::int32_t>(p.year);
    section.put<std::uint32_t>(p.team_size);
    section.put<std::uint8_t>(p.reference_count_override ? 1 : 0);
    section.put<std::uint64_t>(p.reference_count_override.value_or(0));
    section.put<std::uint64_t>(p.reference_ids.size());
    for (PaperId ref : p.reference_ids) section.put<std::uint64_t>(ref);
  }
  ByteWriter out;
  out.raw(std::string_view(kSnapshotMagic, 4));
  out.put<std::uint16_t>(kSnapshotVersion);
  out.raw("PAPR");
  out.put<std::uint64_t>(section.bytes().size());
  out.raw(section.bytes());
  out.raw("END ");
  out.put<std::uint64_t>(0);
  return std::move(out.bytes());
}

RawCorpus decode_snapshot(std::string_view bytes) {
  ByteReader in(bytes);
  if (bytes.size() < 6 || in.raw(4) != std::string_view(kSnapshotMagic, 4)) {
    throw FormatError("not a snapshot: bad magic bytes");
  }
  auto version = in.get<std::uint16_t>();
  if (version != kSnapshotVersion) {
    throw FormatError("snapshot version " + std::to_string(version) + " unsupported (expected " +
                      std::to_string(kSnapshotVersion) + ")");
  }
  if (in.raw(4) != "PAPR") throw FormatError("missing PAPR section");
  auto length = in.get<std::uint64_t>();
  if (length > in.remaining()) throw FormatError("snapshot truncated");
  ByteReader section(in.raw(length));
  auto count = section.get<std::uint64_t>();
  std::vector<PaperRecord> records;
  records.reserve(std::min<std::uint64_t>(count, length / 33));
  for (std::uint64_t i = 0; i < count; ++i) {
    PaperRecord p;
    p.paper_id = section.get<std::uint64_t>();
    p.year = section.get<std::int32_t>();
    p.team_size = section.get<std::uint32_t>();
    auto has_override = section.get<std::uint8_t>();
    auto override_count = section.get<std::uint64_t>();
    if (has_override) p.reference_count_override = override_count;
    auto n_refs = section.get<std::uint64_t>();
    if (n_refs > section.remaining() / 8) throw FormatError("snapshot truncated");
    p.reference_ids.resize(n_refs);
    for (auto& ref : p.reference_ids) ref = section.get<std::uint64_t>();
    records.push_back(std::move(p));
  }
  if (section.remaining() != 0) throw FormatError("trailing bytes in PAPR section");
  if (in.raw(4) != "END " || in.get<std::uint64_t>() != 0 || in.remaining() != 0) {
    throw FormatError("missing END section");
  }
  RawCorpus corpus;
  IngestOptions permissive;
  permissive.min_year = std::numeric_limits<Year>::min();
  permissive.max_year = std::numeric_limits<Year>::max();
  try {
    corpus.add_papers(std::move(records), permissive);
  } catch (const ValidationError& e) {
    throw FormatError(std::string("corrupt snapshot: ") + e.what());
  }
  return corpus;
}

void save_snapshot(const RawCorpus& corpus, const std::filesystem::path& path) {
  auto bytes = encode_snapshot(corpus);
  auto tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move snapshot into place: " + ec.message());
}

RawCorpus load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return decode_snapshot(buf.str());
}

}  // namespace dlab
