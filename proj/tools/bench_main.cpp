// Serial vs parallel timings for the four parallel kernels, with an equality
// check: the parallel path must reproduce the serial result exactly.
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "relsifter/exec.hpp"
#include "relsifter/features.hpp"
#include "relsifter/forest.hpp"
#include "relsifter/kg.hpp"
#include "relsifter/pertinence.hpp"
#include "relsifter/rng.hpp"

namespace {

using namespace relsifter;

template <class F>
double best_ms(int reps, F&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

struct Synthetic {
  std::vector<std::string> lines;
  std::vector<LabeledTriple> task;
};

// Persons split over two professions, each with a skewed activity profile.
Synthetic make_synthetic(std::uint32_t persons, std::uint32_t activities,
                         std::uint32_t triples_per_person) {
  Rng rng(4242);
  Synthetic s;
  s.lines.reserve(static_cast<std::size_t>(persons) * (triples_per_person + 1));
  for (std::uint32_t p = 0; p < persons; ++p) {
    const std::string who = "person" + std::to_string(p);
    const std::uint32_t prof = p % 2;
    s.lines.push_back(who + "\thasProfession\tprofession" + std::to_string(prof));
    for (std::uint32_t t = 0; t < triples_per_person; ++t) {
      // bias half the predicate pool toward each profession
      std::uint32_t a = rng.below(activities);
      if (rng.below(4) != 0) a = (a / 2) * 2 + prof;
      s.lines.push_back(who + "\tactivity" + std::to_string(a) + "\tobject" +
                        std::to_string(rng.below(64)));
    }
    s.task.push_back({who, "profession" + std::to_string(prof), static_cast<int>(rng.below(8))});
  }
  return s;
}

bool same_matrix(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.entry_count() != b.entry_count())
    return false;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const RowView ra = a.row(i), rb = b.row(i);
    if (ra.cols.size() != rb.cols.size() || a.label(i) != b.label(i)) return false;
    for (std::size_t j = 0; j < ra.cols.size(); ++j)
      if (ra.cols[j] != rb.cols[j] || ra.vals[j] != rb.vals[j]) return false;
  }
  return true;
}

bool same_table(const PertinenceTable& a, const PertinenceTable& b) {
  if (a.objects.size() != b.objects.size()) return false;
  for (std::size_t i = 0; i < a.objects.size(); ++i) {
    const auto& ea = a.objects[i].entries;
    const auto& eb = b.objects[i].entries;
    if (ea.size() != eb.size()) return false;
    for (std::size_t j = 0; j < ea.size(); ++j) {
      if (ea[j].stats.g_s != eb[j].stats.g_s || ea[j].stats.f_u != eb[j].stats.f_u) return false;
      if (ea[j].popularity != eb[j].popularity || ea[j].focus != eb[j].focus ||
          ea[j].combined != eb[j].combined)
        return false;
    }
  }
  return true;
}

bool same_forest(const ForestModel& a, const ForestModel& b, const FeatureMatrix& m) {
  if (a.trees.size() != b.trees.size()) return false;
  for (std::size_t t = 0; t < a.trees.size(); ++t)
    if (a.trees[t].nodes.size() != b.trees[t].nodes.size()) return false;
  for (std::size_t i = 0; i < m.rows(); ++i)
    if (predict_forest(a, m.row(i)) != predict_forest(b, m.row(i))) return false;
  return true;
}

void report(const char* name, double serial_ms, double parallel_ms, bool match) {
  std::printf("%-16s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx   match %s\n", name,
              serial_ms, parallel_ms, serial_ms / parallel_ms, match ? "yes" : "NO");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs parallel kernel benchmark"};
  std::uint32_t scale = 1;
  int reps = 3;
  int threads = 0;
  app.add_option("--scale", scale, "problem size multiplier")->check(CLI::PositiveNumber);
  app.add_option("--reps", reps, "repetitions per timing (best-of)")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "worker thread count (0 = library default)");
  CLI11_PARSE(app, argc, argv);
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  const Synthetic syn = make_synthetic(2000 * scale, 40, 60);
  std::printf("synthetic dump: %zu lines, %zu task rows\n", syn.lines.size(), syn.task.size());
  bool all_match = true;

  // parse_lines
  ParseStats ps;
  std::vector<RawTriple> raw_s, raw_p;
  const double t_parse_s =
      best_ms(reps, [&] { raw_s = parse_lines(syn.lines, DumpFormat::tsv, ps, Exec::serial); });
  const double t_parse_p =
      best_ms(reps, [&] { raw_p = parse_lines(syn.lines, DumpFormat::tsv, ps, Exec::parallel); });
  const bool parse_ok = raw_s == raw_p;
  all_match &= parse_ok;
  report("parse_lines", t_parse_s, t_parse_p, parse_ok);

  const KnowledgeGraph g = KnowledgeGraph::from_raw(std::move(raw_s));
  TlrSpec spec;
  spec.relation_name = "profession";
  spec.tlr_predicate = *g.predicates().lookup("hasProfession");
  spec.objects = {*g.entities().lookup("profession0"), *g.entities().lookup("profession1")};
  const std::vector<std::uint32_t> universe = tlr_universe(g, spec.tlr_predicate);

  // collect_stats + compute_pertinence
  PertinenceTable tab_s, tab_p;
  const double t_stats_s = best_ms(reps, [&] {
    tab_s = collect_stats(g, spec, universe, Exec::serial);
    compute_pertinence(tab_s, {}, Exec::serial);
  });
  const double t_stats_p = best_ms(reps, [&] {
    tab_p = collect_stats(g, spec, universe, Exec::parallel);
    compute_pertinence(tab_p, {}, Exec::parallel);
  });
  const bool stats_ok = same_table(tab_s, tab_p);
  all_match &= stats_ok;
  report("pertinence", t_stats_s, t_stats_p, stats_ok);

  // build_matrix
  const FeatureSpace space = build_space(tab_s, 20);
  FeatureMatrix m_s(space.cols()), m_p(space.cols());
  const double t_feat_s =
      best_ms(reps, [&] { m_s = build_matrix(syn.task, g, space, tab_s, {}, Exec::serial); });
  const double t_feat_p =
      best_ms(reps, [&] { m_p = build_matrix(syn.task, g, space, tab_s, {}, Exec::parallel); });
  const bool feat_ok = same_matrix(m_s, m_p);
  all_match &= feat_ok;
  report("build_matrix", t_feat_s, t_feat_p, feat_ok);

  // fit_forest
  ForestModel f_s, f_p;
  ForestConfig fc;
  fc.seed = 7;
  const double t_forest_s = best_ms(reps, [&] {
    fc.exec = Exec::serial;
    f_s = fit_forest(m_s, m_s.labels(), 100, fc);
  });
  const double t_forest_p = best_ms(reps, [&] {
    fc.exec = Exec::parallel;
    f_p = fit_forest(m_s, m_s.labels(), 100, fc);
  });
  const bool forest_ok = same_forest(f_s, f_p, m_s);
  all_match &= forest_ok;
  report("fit_forest", t_forest_s, t_forest_p, forest_ok);

  if (!all_match) {
    std::fprintf(stderr, "parallel results diverge from the serial reference\n");
    return 2;
  }
  return 0;
}
