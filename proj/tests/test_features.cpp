#include <doctest.h>

#include <vector>

#include "relsifter/errors.hpp"
#include "relsifter/features.hpp"
#include "relsifter/util.hpp"
#include "support.hpp"

using namespace relsifter;
namespace rt = relsifter::testing;
using rt::TempDir;

namespace {

struct Fixture {
  KnowledgeGraph g;
  PertinenceTable table;
  FeatureSpace space;

  Fixture() : g(rt::make_graph(rt::fixture_triples())) {
    const TlrSpec spec = rt::fixture_spec(g);
    const auto universe = tlr_universe(g, spec.tlr_predicate);
    table = collect_stats(g, spec, universe, Exec::serial);
    compute_pertinence(table, {}, Exec::serial);
    space = build_space(table, 3);
  }
};

}  // namespace

// Frozen values from an offline recount of the 8-person fixture.
TEST_CASE("feature space from the fixture") {
  Fixture fx;
  REQUIRE(fx.space.cols() == 4);
  CHECK(fx.space.column_names ==
        std::vector<std::string>{"cast", "starredIn", "researches", "affiliation"});
  CHECK(fx.space.norm_lo == doctest::Approx(0.42658254810584506).epsilon(1e-14));
  CHECK(fx.space.norm_hi == doctest::Approx(6.1025180273606026).epsilon(1e-14));
  CHECK_FALSE(fx.space.degenerate);
  CHECK(fx.space.column_of.at(fx.space.pooled.activities[2]) == 2);
}

TEST_CASE("feature rows follow the exhibit-and-member rule") {
  Fixture fx;
  const auto row = [&](const char* person, const char* object) {
    return featurize({person, object, kNoScore}, fx.g, fx.space, fx.table, {});
  };

  auto p1 = row("p1", "actor");
  REQUIRE(p1.entries.size() == 2);
  CHECK(p1.entries[0].first == 0);
  CHECK(p1.entries[0].second == doctest::Approx(0.77688490023918).epsilon(1e-14));
  CHECK(p1.entries[1].first == 1);
  CHECK(p1.entries[1].second == doctest::Approx(0.52352006489078962).epsilon(1e-14));

  // p2 researches t3, so researches is in R_actor; its C value sits at the
  // lower normalization bound and the zero entry is dropped
  auto p2a = row("p2", "actor");
  REQUIRE(p2a.entries.size() == 1);
  CHECK(p2a.entries[0].first == 1);

  auto p2s = row("p2", "scientist");
  REQUIRE(p2s.entries.size() == 1);
  CHECK(p2s.entries[0].first == 2);
  CHECK(p2s.entries[0].second == doctest::Approx(0.52352006489078962).epsilon(1e-14));

  auto p8 = row("p8", "scientist");
  REQUIRE(p8.entries.size() == 1);
  CHECK(p8.entries[0].first == 3);
  CHECK(p8.entries[0].second == 1.0);

  // p3 starredIn m2 only: on the scientist side that activity normalizes to
  // zero and everything else is unexhibited, so the row is empty but resolved
  auto p3 = row("p3", "scientist");
  CHECK(p3.entries.empty());
  CHECK(p3.resolved);

  for (const auto& r : {p1, p2a, p2s, p8})
    for (auto [c, v] : r.entries) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
}

TEST_CASE("unresolved entities flag the row") {
  Fixture fx;
  auto missing = featurize({"nobody", "actor", 3}, fx.g, fx.space, fx.table, {});
  CHECK_FALSE(missing.resolved);
  CHECK(missing.entries.empty());

  // aliases resolve, and an alias hit commits even to a dangling target
  AliasTable aliases{{"Person One", "p1"}, {"ghost", "no-such-node"}};
  CHECK(featurize({"Person One", "actor", 3}, fx.g, fx.space, fx.table, aliases).entries.size() ==
        2);
  CHECK_FALSE(featurize({"ghost", "actor", 3}, fx.g, fx.space, fx.table, aliases).resolved);

  // a resolvable object outside the relation's object set yields no features
  auto odd = featurize({"p1", "m1", 3}, fx.g, fx.space, fx.table, {});
  CHECK(odd.resolved);
  CHECK(odd.entries.empty());
}

TEST_CASE("degenerate normalization bounds map to one") {
  // every activity is exhibited by the whole universe, so every C is zero
  auto g = rt::make_graph(
      {{"a", "tlr", "o"}, {"b", "tlr", "o"}, {"a", "works", "x"}, {"b", "works", "y"}});
  TlrSpec spec{"r", *g.predicates().lookup("tlr"), {*g.entities().lookup("o")}};
  auto universe = tlr_universe(g, spec.tlr_predicate);
  PertinenceTable t = collect_stats(g, spec, universe, Exec::serial);
  compute_pertinence(t, {}, Exec::serial);
  FeatureSpace space = build_space(t, 1);
  CHECK(space.degenerate);
  CHECK(space.norm_lo == space.norm_hi);
  CHECK(space.normalize(space.norm_lo) == 1.0);
  auto row = featurize({"a", "o", 2}, g, space, t, {});
  REQUIRE(row.entries.size() == 1);
  CHECK(row.entries[0].second == 1.0);
}

TEST_CASE("labeled tsv io") {
  TempDir dir;
  write_file(dir.file("train.tsv"), "p1\tactor\t7\np2\tactor\t0\n");
  auto train = read_labeled_tsv(dir.file("train.tsv"));
  REQUIRE(train.size() == 2);
  CHECK(train[0].score == 7);
  CHECK(train[1].person == "p2");

  write_file(dir.file("test.tsv"), "p1\tactor\np2\tscientist\n");
  auto test = read_labeled_tsv(dir.file("test.tsv"));
  CHECK(test[0].score == kNoScore);

  write_file(dir.file("mixed.tsv"), "p1\tactor\t7\np2\tactor\n");
  CHECK_THROWS_AS(read_labeled_tsv(dir.file("mixed.tsv")), format_error);
  write_file(dir.file("range.tsv"), "p1\tactor\t8\n");
  CHECK_THROWS_AS(read_labeled_tsv(dir.file("range.tsv")), format_error);
  write_file(dir.file("junk.tsv"), "p1\tactor\tseven\n");
  CHECK_THROWS_AS(read_labeled_tsv(dir.file("junk.tsv")), format_error);

  write_labeled_tsv(train, dir.file("copy.tsv"), true);
  CHECK(read_file(dir.file("copy.tsv")) == read_file(dir.file("train.tsv")));
}

TEST_CASE("matrix shape bookkeeping and selection") {
  FeatureMatrix m(3);
  m.append_row({{{0, 0.5}, {2, 1.0}}, true}, {"a", "o", true}, 4);
  m.append_row({{}, false}, {"b", "o", false}, 1);
  m.append_row({{{1, 0.25}}, true}, {"c", "o", true}, 7);
  CHECK(m.rows() == 3);
  CHECK(m.entry_count() == 3);
  CHECK(m.unresolved_count() == 1);
  CHECK(m.all_labeled());
  CHECK(m.row(0).get(2) == 1.0);
  CHECK(m.row(0).get(1) == 0.0);
  const std::vector<double> w{1.0, 2.0, 3.0};
  CHECK(m.row(0).dot(w) == doctest::Approx(0.5 + 3.0));

  const std::vector<std::size_t> idx{2, 0};
  FeatureMatrix sub = m.select(idx);
  REQUIRE(sub.rows() == 2);
  CHECK(sub.label(0) == 7);
  CHECK(sub.meta(1).person == "a");
  CHECK(sub.row(1).get(0) == 0.5);

  SparseRow bad{{{5, 1.0}}, true};
  CHECK_THROWS_AS(m.append_row(bad, {"d", "o", true}, 0), contract_error);
}

TEST_CASE("build_matrix keeps input order and runs identically in parallel") {
  Fixture fx;
  std::vector<LabeledTriple> rows = {{"p1", "actor", 7},      {"p2", "scientist", 2},
                                     {"nobody", "actor", 0},  {"p8", "scientist", 6},
                                     {"p4", "actor", 5},      {"p3", "scientist", 1}};
  auto ms = build_matrix(rows, fx.g, fx.space, fx.table, {}, Exec::serial);
  auto mp = build_matrix(rows, fx.g, fx.space, fx.table, {}, Exec::parallel);
  REQUIRE(ms.rows() == rows.size());
  CHECK(ms.unresolved_count() == 1);
  CHECK(ms.meta(2).resolved == false);
  CHECK(ms.label(3) == 6);
  CHECK(ms.meta(4).person == "p4");
  REQUIRE(mp.rows() == ms.rows());
  for (std::size_t i = 0; i < ms.rows(); ++i) {
    auto a = ms.row(i), b = mp.row(i);
    REQUIRE(a.cols.size() == b.cols.size());
    for (std::size_t j = 0; j < a.cols.size(); ++j) {
      CHECK(a.cols[j] == b.cols[j]);
      CHECK(a.vals[j] == b.vals[j]);
    }
  }
}

TEST_CASE("matrix snapshots round-trip byte for byte") {
  Fixture fx;
  TempDir dir;
  std::vector<LabeledTriple> rows = {{"p1", "actor", 7}, {"ghost", "actor", 3}};
  auto m = build_matrix(rows, fx.g, fx.space, fx.table, {}, Exec::serial);
  FeatureMeta meta;
  meta.relation_name = "profession";
  meta.predicate_iri = "hasProfession";
  meta.k = 3;
  meta.columns = fx.space.column_names;
  meta.norm_lo = fx.space.norm_lo;
  meta.norm_hi = fx.space.norm_hi;

  const std::string p1 = dir.file("m1.matrix");
  save_matrix(m, meta, p1);
  LoadedMatrix back = load_matrix(p1);
  CHECK(back.meta.columns == meta.columns);
  CHECK(back.meta.norm_hi == meta.norm_hi);
  CHECK(back.matrix.rows() == m.rows());
  CHECK(back.matrix.label(1) == 3);
  CHECK(back.matrix.meta(1).resolved == false);
  CHECK(back.matrix.row(0).get(0) == m.row(0).get(0));

  const std::string p2 = dir.file("m2.matrix");
  save_matrix(back.matrix, back.meta, p2);
  CHECK(read_file(p1) == read_file(p2));
  CHECK(read_file(p1 + ".meta.json") == read_file(p2 + ".meta.json"));
}
