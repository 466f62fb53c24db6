#ifndef RELSIFTER_TESTS_SUPPORT_HPP
#define RELSIFTER_TESTS_SUPPORT_HPP

// Shared test scaffolding: a temp directory guard, tiny graph builders,
// brute-force recount oracles kept deliberately independent of the library
// kernels, and the planted-signal corpus generator.

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "relsifter/features.hpp"
#include "relsifter/kg.hpp"
#include "relsifter/pertinence.hpp"
#include "relsifter/rng.hpp"

namespace relsifter::testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<std::uint64_t> counter{0};
    const std::uint64_t tag =
        std::random_device{}() ^ (counter.fetch_add(1) << 32);
    path_ = std::filesystem::temp_directory_path() /
            ("relsifter_test_" + std::to_string(tag));
    if (!std::filesystem::create_directory(path_))
      throw std::runtime_error("cannot create " + path_.string());
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

using Spo = std::array<std::string, 3>;

inline KnowledgeGraph make_graph(const std::vector<Spo>& triples) {
  std::vector<RawTriple> raw;
  raw.reserve(triples.size());
  for (const Spo& t : triples) raw.push_back({t[0], t[1], t[2]});
  return KnowledgeGraph::from_raw(std::move(raw));
}

// The 8-person / 2-profession fixture behind the hand-computed feature
// expectations in the tests.
inline std::vector<Spo> fixture_triples() {
  std::vector<Spo> t;
  for (const char* p : {"p1", "p2", "p3", "p4"}) t.push_back({p, "hasProfession", "actor"});
  for (const char* p : {"p5", "p6", "p7", "p8"}) t.push_back({p, "hasProfession", "scientist"});
  t.push_back({"p1", "starredIn", "m1"});
  t.push_back({"p1", "starredIn", "m2"});
  t.push_back({"p2", "starredIn", "m1"});
  t.push_back({"p3", "starredIn", "m2"});
  t.push_back({"p5", "starredIn", "m3"});
  t.push_back({"p1", "cast", "c1"});
  t.push_back({"p4", "cast", "c2"});
  t.push_back({"p5", "researches", "t1"});
  t.push_back({"p5", "researches", "t2"});
  t.push_back({"p6", "researches", "t1"});
  t.push_back({"p7", "researches", "t2"});
  t.push_back({"p2", "researches", "t3"});
  t.push_back({"p6", "affiliation", "a1"});
  t.push_back({"p8", "affiliation", "a2"});
  t.push_back({"p8", "affiliation", "a3"});
  const char* persons[] = {"p1", "p2", "p3", "p4", "p5", "p6", "p7", "p8"};
  for (int i = 0; i < 8; ++i)
    t.push_back({persons[i], "bornIn", "city" + std::to_string(i % 3)});
  return t;
}

inline TlrSpec fixture_spec(const KnowledgeGraph& g) {
  TlrSpec spec;
  spec.relation_name = "profession";
  spec.tlr_predicate = *g.predicates().lookup("hasProfession");
  spec.objects = {*g.entities().lookup("actor"), *g.entities().lookup("scientist")};
  return spec;
}

// Brute-force pertinence recount straight off the triple list. No sharing
// with the library kernels beyond the graph accessors.
struct OracleEntry {
  std::uint32_t activity = 0;
  std::uint32_t g_s = 0, g_u = 0;
  std::uint64_t f_s = 0, f_u = 0;
  double p = 0, f = 0, c = 0;
};

inline std::vector<std::vector<OracleEntry>> oracle_pertinence(
    const KnowledgeGraph& g, const TlrSpec& spec, const std::vector<std::uint32_t>& universe,
    double log_base = std::numbers::e) {
  const auto& ts = g.triples();
  const auto lg = [log_base](double x) { return std::log(x) / std::log(log_base); };
  const auto in = [](const std::vector<std::uint32_t>& v, std::uint32_t x) {
    for (std::uint32_t e : v)
      if (e == x) return true;
    return false;
  };
  // objects sorted by entity name, matching the table order
  std::vector<std::uint32_t> objects = spec.objects;
  std::sort(objects.begin(), objects.end(), [&](std::uint32_t a, std::uint32_t b) {
    return g.entities().name(a) < g.entities().name(b);
  });

  std::vector<std::vector<OracleEntry>> out;
  for (std::uint32_t obj : objects) {
    std::vector<std::uint32_t> so;
    for (const Triple& t : ts)
      if (t.predicate == spec.tlr_predicate && t.object == obj && !in(so, t.subject))
        so.push_back(t.subject);
    if (so.empty()) continue;

    std::vector<OracleEntry> rows;
    for (const Triple& t : ts) {
      if (!in(so, t.subject)) continue;
      bool seen = false;
      for (const OracleEntry& r : rows) seen |= r.activity == t.predicate;
      if (!seen) rows.push_back({.activity = t.predicate});
    }
    for (OracleEntry& r : rows) {
      std::vector<std::uint32_t> gs, gu;
      for (const Triple& t : ts) {
        if (t.predicate != r.activity) continue;
        if (in(so, t.subject)) {
          r.f_s += 1;
          if (!in(gs, t.subject)) gs.push_back(t.subject);
        }
        if (in(universe, t.subject)) {
          r.f_u += 1;
          if (!in(gu, t.subject)) gu.push_back(t.subject);
        }
      }
      r.g_s = static_cast<std::uint32_t>(gs.size());
      r.g_u = static_cast<std::uint32_t>(gu.size());
    }
    double denom_sum = 0;
    for (const OracleEntry& r : rows)
      denom_sum += 1.0 + static_cast<double>(r.f_u) - static_cast<double>(r.f_s);
    for (OracleEntry& r : rows) {
      r.p = lg(1.0 + r.g_s) * lg(static_cast<double>(universe.size()) / r.g_u);
      r.f = lg(1.0 + static_cast<double>(r.f_s)) *
            lg(denom_sum / (1.0 + static_cast<double>(r.f_u) - static_cast<double>(r.f_s)));
      r.c = r.p * r.f;
    }
    std::sort(rows.begin(), rows.end(),
              [](const OracleEntry& a, const OracleEntry& b) { return a.activity < b.activity; });
    out.push_back(std::move(rows));
  }
  return out;
}

// Random mini-KG with a TLR predicate, 1..3 objects and a handful of
// activity predicates; every object is guaranteed a non-empty S_o.
struct MiniKg {
  KnowledgeGraph graph;
  TlrSpec spec;
  std::vector<std::uint32_t> universe;
};

inline MiniKg make_mini_kg(std::uint64_t seed) {
  Rng rng(seed);
  const std::uint32_t persons = 5 + rng.below(16);
  const std::uint32_t objects = 1 + rng.below(3);
  const std::uint32_t acts = 3 + rng.below(8);
  std::vector<Spo> t;
  for (std::uint32_t p = 0; p < persons; ++p) {
    const std::string who = "h" + std::to_string(p);
    t.push_back({who, "tlr", "obj" + std::to_string(p % objects)});
    const std::uint32_t n = rng.below(6);
    for (std::uint32_t i = 0; i < n && t.size() < 50; ++i)
      t.push_back({who, "act" + std::to_string(rng.below(acts)),
                   "thing" + std::to_string(rng.below(4))});
  }
  MiniKg kg{make_graph(t), {}, {}};
  kg.spec.relation_name = "mini";
  kg.spec.tlr_predicate = *kg.graph.predicates().lookup("tlr");
  for (std::uint32_t o = 0; o < objects; ++o)
    kg.spec.objects.push_back(*kg.graph.entities().lookup("obj" + std::to_string(o)));
  kg.universe = tlr_universe(kg.graph, kg.spec.tlr_predicate);
  return kg;
}

inline FeatureMatrix dense_matrix(const std::vector<std::vector<double>>& rows,
                                  const std::vector<int>& labels) {
  FeatureMatrix m(rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    SparseRow r;
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      if (rows[i][j] != 0.0) r.entries.emplace_back(static_cast<std::uint32_t>(j), rows[i][j]);
    m.append_row(r, {"r" + std::to_string(i), "o", true}, labels[i]);
  }
  return m;
}

// O(n^2) metric recounts.
inline double oracle_accuracy(const std::vector<int>& pred, const std::vector<int>& gold,
                              int tolerance) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (std::abs(pred[i] - gold[i]) <= tolerance) ++hit;
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

inline double oracle_avg_diff(const std::vector<int>& pred, const std::vector<int>& gold) {
  double sum = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - gold[i]);
  return sum / static_cast<double>(pred.size());
}

inline double oracle_tau_b(const std::vector<int>& x, const std::vector<int>& y) {
  const std::size_t n = x.size();
  long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const int dx = (x[i] > x[j]) - (x[i] < x[j]);
      const int dy = (y[i] > y[j]) - (y[i] < y[j]);
      if (dx == 0 && dy == 0) {
        ++ties_x, ++ties_y;
      } else if (dx == 0) {
        ++ties_x;
      } else if (dy == 0) {
        ++ties_y;
      } else if (dx == dy) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const long long n0 = static_cast<long long>(n) * (n - 1) / 2;
  const double denom = std::sqrt(static_cast<double>(n0 - ties_x)) *
                       std::sqrt(static_cast<double>(n0 - ties_y));
  return static_cast<double>(concordant - discordant) / denom;
}

// Planted-signal corpus: two professions with five characteristic activities
// each (80% within-class, 10% out-of-class incidence), ten noise predicates,
// labels derived from the overlap between a person's activities and the row
// object's characteristic set.
struct Planted {
  std::vector<std::string> dump_lines;
  std::vector<LabeledTriple> train;
  std::vector<LabeledTriple> test;
  std::string predicate = "hasProfession";
  std::vector<std::string> objects = {"chef", "pilot"};
};

inline Planted make_planted(std::uint32_t persons = 200, std::uint64_t seed = 99) {
  Rng rng(seed);
  Planted out;
  const auto char_act = [](std::uint32_t prof, std::uint32_t i) {
    return (prof == 0 ? "kitchen" : "cockpit") + std::to_string(i);
  };
  for (std::uint32_t p = 0; p < persons; ++p) {
    const std::string who = "person" + std::to_string(p);
    const std::uint32_t prof = p % 2;
    out.dump_lines.push_back(who + "\thasProfession\t" + out.objects[prof]);
    std::vector<bool> has(10, false);
    for (std::uint32_t side = 0; side < 2; ++side) {
      const std::uint32_t incidence = side == prof ? 8 : 1;
      for (std::uint32_t i = 0; i < 5; ++i)
        if (rng.below(10) < incidence) {
          has[side * 5 + i] = true;
          out.dump_lines.push_back(who + "\t" + char_act(side, i) + "\tx" +
                                   std::to_string(rng.below(6)));
        }
    }
    for (std::uint32_t i = 0; i < 10; ++i)
      if (rng.below(10) == 0)
        out.dump_lines.push_back(who + "\tnoise" + std::to_string(i) + "\tx" +
                                 std::to_string(rng.below(6)));

    const std::uint32_t row_obj = (p % 4 < 2) ? prof : 1 - prof;
    int matches = 0;
    for (std::uint32_t i = 0; i < 5; ++i) matches += has[row_obj * 5 + i];
    const int label = static_cast<int>((14 * matches + 5) / 10);  // round(7m/5)
    LabeledTriple row{who, out.objects[row_obj], label};
    if (p % 10 < 7)
      out.train.push_back(row);
    else
      out.test.push_back(row);
  }
  return out;
}

}  // namespace relsifter::testing

#endif
