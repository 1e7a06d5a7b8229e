#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "dlab/window_graph.hpp"
#include "oracles.hpp"

using namespace dlab;

namespace {

PaperRecord paper(PaperId id, Year year, std::vector<PaperId> refs = {}) {
  PaperRecord p;
  p.paper_id = id;
  p.year = year;
  p.reference_ids = std::move(refs);
  return p;
}

// Focal 1 (2000) cited by six papers, four of them within five years.
RawCorpus six_citers() {
  RawCorpus c;
  c.add_papers({paper(1, 2000), paper(2, 2000, {1}), paper(3, 2002, {1}), paper(4, 2005, {1}), paper(5, 2004, {1}),
                paper(6, 2012, {1}), paper(7, 1998, {1})});
  return c;
}

}  // namespace

TEST_CASE("two papers and one edge") {
  RawCorpus c;
  c.add_papers({paper(10, 2000), paper(20, 2001, {10})});
  auto index = CorpusIndex::build(c);
  auto a = index.node(20);
  auto b = index.node(10);
  REQUIRE(index.citers(b).size() == 1);
  CHECK(index.citers(b)[0] == a);
  REQUIRE(index.references(a).size() == 1);
  CHECK(index.references(a)[0] == b);
  CHECK(index.citers(a).empty());
}

TEST_CASE("empty corpus gives an empty index") {
  auto index = CorpusIndex::build(RawCorpus{});
  CHECK(index.size() == 0);
  CHECK(index.edge_count() == 0);
  CHECK_FALSE(index.find(1).has_value());
  CHECK_THROWS_AS(index.node(1), UnknownPaperError);
}

TEST_CASE("reverse adjacency is the exact transpose of forward adjacency") {
  auto corpus = testing::random_corpus(99, 60, 0.14);
  auto index = CorpusIndex::build(corpus);
  REQUIRE(index.edge_count() >= 400);
  std::set<std::pair<CorpusIndex::Node, CorpusIndex::Node>> forward, reverse;
  for (CorpusIndex::Node u = 0; u < index.size(); ++u) {
    for (auto v : index.references(u)) forward.insert({u, v});
    for (auto v : index.citers(u)) reverse.insert({v, u});
  }
  CHECK(forward == reverse);
  CHECK(forward.size() == corpus.edge_count());
  // The forward lists also match the raw records.
  for (const auto& p : corpus.papers()) {
    std::vector<PaperId> refs;
    for (auto v : index.references(index.node(p.paper_id))) refs.push_back(index.id(v));
    std::sort(refs.begin(), refs.end());
    CHECK(refs == p.reference_ids);
  }
}

TEST_CASE("citer lists are ordered by year then id") {
  auto index = CorpusIndex::build(testing::random_corpus(5, 50, 0.2));
  for (CorpusIndex::Node n = 0; n < index.size(); ++n) {
    auto citers = index.citers(n);
    for (std::size_t i = 1; i < citers.size(); ++i) {
      auto a = std::pair(index.year(citers[i - 1]), index.id(citers[i - 1]));
      auto b = std::pair(index.year(citers[i]), index.id(citers[i]));
      CHECK(a < b);
    }
  }
}

TEST_CASE("window rule on calendar years") {
  RawCorpus c;
  c.add_papers({paper(1, 2000), paper(2, 2012, {1}), paper(3, 2000, {1}), paper(4, 1999, {1})});
  auto index = CorpusIndex::build(c);
  auto w5 = citers_within(index, 1, WindowSpec::years(5));
  auto w20 = citers_within(index, 1, WindowSpec::years(20));
  CHECK(std::count(w5.begin(), w5.end(), PaperId{2}) == 0);
  CHECK(std::count(w20.begin(), w20.end(), PaperId{2}) == 1);
  CHECK(citers_within(index, 1, WindowSpec::years(0)) == std::vector<PaperId>{3});
  // The 1999 citer is noise and never counts, not even without a bound.
  CHECK(citers_within(index, 1, WindowSpec::unbounded()) == std::vector<PaperId>{2, 3});
  CHECK_THROWS_AS(WindowSpec::years(-1), ValidationError);
}

TEST_CASE("citation counts") {
  auto index = CorpusIndex::build(six_citers());
  CHECK(citation_count(index, 1, WindowSpec::years(5)) == 4);
  CHECK(citation_count(index, 1, WindowSpec::unbounded()) == 5);
  CHECK(citation_count(index, 6, WindowSpec::unbounded()) == 0);
  CHECK(citation_count(index, 1, WindowSpec::years(0)) == 1);
}

TEST_CASE("window monotonicity and the unbounded union") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto index = CorpusIndex::build(testing::random_corpus(seed, 40, 0.15));
    for (PaperId id : index.ids()) {
      std::set<PaperId> all_finite;
      std::vector<PaperId> previous;
      for (int w = 0; w <= 15; ++w) {
        auto now = citers_within(index, id, WindowSpec::years(w));
        CHECK(std::includes(now.begin(), now.end(), previous.begin(), previous.end()));
        all_finite.insert(now.begin(), now.end());
        previous = now;
      }
      auto unbounded = citers_within(index, id, WindowSpec::unbounded());
      CHECK(std::vector<PaperId>(all_finite.begin(), all_finite.end()) == unbounded);
    }
  }
}

TEST_CASE("queries do not depend on edge insertion order") {
  auto corpus = testing::random_corpus(17, 40, 0.2);
  std::vector<std::pair<PaperId, PaperId>> edges;
  RawCorpus shuffled;
  std::vector<PaperRecord> bare;
  for (const auto& p : corpus.papers()) {
    for (auto r : p.reference_ids) edges.emplace_back(p.paper_id, r);
    bare.push_back(paper(p.paper_id, p.year));
    bare.back().team_size = p.team_size;
  }
  shuffled.add_papers(bare);
  std::mt19937_64 rng(3);
  std::shuffle(edges.begin(), edges.end(), rng);
  for (auto [a, b] : edges) shuffled.add_edge(a, b);

  auto x = CorpusIndex::build(corpus);
  auto y = CorpusIndex::build(shuffled);
  for (PaperId id : x.ids()) {
    for (auto w : {WindowSpec::years(0), WindowSpec::years(4), WindowSpec::unbounded()}) {
      CHECK(citers_within(x, id, w) == citers_within(y, id, w));
    }
  }
}
