#include "relsifter/pertinence.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "relsifter/errors.hpp"
#include "relsifter/util.hpp"

namespace relsifter {

namespace {

struct UniverseCounts {
  // indexed by predicate id
  std::vector<std::uint32_t> g;
  std::vector<std::uint64_t> f;
};

// Scans one person's sorted outgoing list, calling per_presence(p) once per
// distinct predicate and per_occurrence(p) once per triple.
template <class FPresence, class FOccurrence>
void scan_person(const KnowledgeGraph& g, std::uint32_t person, FPresence per_presence,
                 FOccurrence per_occurrence) {
  auto po = g.outgoing(person);
  std::uint32_t prev = 0;
  bool first = true;
  for (auto [p, o] : po) {
    per_occurrence(p);
    if (first || p != prev) per_presence(p);
    prev = p;
    first = false;
  }
}

UniverseCounts count_universe(const KnowledgeGraph& g, std::span<const std::uint32_t> universe,
                              Exec exec) {
  const std::uint32_t n_pred = g.predicates().size();
  UniverseCounts out;
  out.g.assign(n_pred, 0);
  out.f.assign(n_pred, 0);
  const std::int64_t n = static_cast<std::int64_t>(universe.size());

  if (exec == Exec::parallel) {
#pragma omp parallel
    {
      std::vector<std::uint32_t> lg(n_pred, 0);
      std::vector<std::uint64_t> lf(n_pred, 0);
#pragma omp for schedule(static) nowait
      for (std::int64_t i = 0; i < n; ++i)
        scan_person(
            g, universe[static_cast<std::size_t>(i)], [&](std::uint32_t p) { ++lg[p]; },
            [&](std::uint32_t p) { ++lf[p]; });
#pragma omp critical
      {
        for (std::uint32_t p = 0; p < n_pred; ++p) {
          out.g[p] += lg[p];
          out.f[p] += lf[p];
        }
      }
    }
  } else {
    for (std::int64_t i = 0; i < n; ++i)
      scan_person(
          g, universe[static_cast<std::size_t>(i)], [&](std::uint32_t p) { ++out.g[p]; },
          [&](std::uint32_t p) { ++out.f[p]; });
  }
  return out;
}

ObjectPertinence object_stats(const KnowledgeGraph& g, const TlrSpec& spec, std::uint32_t object,
                              const UniverseCounts& uni) {
  ObjectPertinence out;
  out.object = object;
  out.object_name = g.entities().name(object);

  std::unordered_map<std::uint32_t, std::pair<std::uint32_t, std::uint64_t>> acc;  // p -> (g_s, f_s)
  for (std::uint32_t person : g.subjects_of(spec.tlr_predicate, object))
    scan_person(
        g, person, [&](std::uint32_t p) { ++acc[p].first; },
        [&](std::uint32_t p) { ++acc[p].second; });

  out.entries.reserve(acc.size());
  for (const auto& [p, gf] : acc) {
    ActivityPertinence e;
    e.stats = {object, p, gf.first, uni.g[p], gf.second, uni.f[p]};
    out.entries.push_back(e);
  }
  std::sort(out.entries.begin(), out.entries.end(),
            [](const ActivityPertinence& a, const ActivityPertinence& b) {
              return a.stats.activity < b.stats.activity;
            });
  return out;
}

// log_b(x) for the configured base.
double log_b(double x, const PertinenceOptions& opts) {
  return std::log(x) / std::log(opts.log_base);
}

struct CounterView {
  std::uint64_t s, u;
};
CounterView popularity_counters(const ActivityStats& st, const PertinenceOptions& opts) {
  return opts.swap_counters ? CounterView{st.f_s, st.f_u} : CounterView{st.g_s, st.g_u};
}
CounterView focus_counters(const ActivityStats& st, const PertinenceOptions& opts) {
  return opts.swap_counters ? CounterView{st.g_s, st.g_u} : CounterView{st.f_s, st.f_u};
}

double focus_denominator_sum(std::span<const ActivityPertinence> all,
                             const PertinenceOptions& opts) {
  double sum = 0;
  for (const ActivityPertinence& e : all) {
    auto c = focus_counters(e.stats, opts);
    sum += 1.0 + static_cast<double>(c.u) - static_cast<double>(c.s);
  }
  return sum;
}

double focus_with_sum(const ActivityStats& stats, double sum, const PertinenceOptions& opts) {
  auto c = focus_counters(stats, opts);
  double denom = 1.0 + static_cast<double>(c.u) - static_cast<double>(c.s);
  if (denom < 1.0) throw contract_error("focus denominator below 1: f_U < f_S");
  return log_b(1.0 + static_cast<double>(c.s), opts) * log_b(sum / denom, opts);
}

}  // namespace

const ObjectPertinence* PertinenceTable::find(std::uint32_t object) const {
  auto it = slot_of_.find(object);
  if (it == slot_of_.end()) return nullptr;
  return &objects[it->second];
}

const ActivityPertinence* PertinenceTable::find(std::uint32_t object,
                                                std::uint32_t activity) const {
  const ObjectPertinence* op = find(object);
  if (!op) return nullptr;
  auto it = std::lower_bound(op->entries.begin(), op->entries.end(), activity,
                             [](const ActivityPertinence& e, std::uint32_t a) {
                               return e.stats.activity < a;
                             });
  if (it == op->entries.end() || it->stats.activity != activity) return nullptr;
  return &*it;
}

PertinenceTable collect_stats(const KnowledgeGraph& g, const TlrSpec& spec,
                              std::span<const std::uint32_t> universe, Exec exec) {
  PertinenceTable table;
  table.relation_name = spec.relation_name;
  table.universe_size = universe.size();
  table.predicate_name = g.predicates().names();

  UniverseCounts uni = count_universe(g, universe, exec);

  std::vector<std::uint32_t> objects = spec.objects;
  std::sort(objects.begin(), objects.end(), [&](std::uint32_t a, std::uint32_t b) {
    return g.entities().name(a) < g.entities().name(b);
  });
  objects.erase(std::unique(objects.begin(), objects.end()), objects.end());

  const std::int64_t n = static_cast<std::int64_t>(objects.size());
  std::vector<ObjectPertinence> computed(objects.size());
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i)
      computed[static_cast<std::size_t>(i)] =
          object_stats(g, spec, objects[static_cast<std::size_t>(i)], uni);
  } else {
    for (std::int64_t i = 0; i < n; ++i)
      computed[static_cast<std::size_t>(i)] =
          object_stats(g, spec, objects[static_cast<std::size_t>(i)], uni);
  }

  for (auto& op : computed) {
    if (op.entries.empty()) {
      table.skipped_objects.emplace_back(op.object, "object has no subjects under the relation: " +
                                                        op.object_name);
      continue;
    }
    table.slot_of_[op.object] = table.objects.size();
    table.objects.push_back(std::move(op));
  }
  return table;
}

double popularity_pertinence(const ActivityStats& stats, std::uint64_t universe_size,
                             const PertinenceOptions& opts) {
  auto c = popularity_counters(stats, opts);
  if (c.u == 0)
    throw contract_error("popularity pertinence of an activity outside R_o (g_U = 0)");
  return log_b(1.0 + static_cast<double>(c.s), opts) *
         log_b(static_cast<double>(universe_size) / static_cast<double>(c.u), opts);
}

double focus_pertinence(const ActivityStats& stats,
                        std::span<const ActivityPertinence> all_for_object,
                        const PertinenceOptions& opts) {
  bool found = false;
  for (const ActivityPertinence& e : all_for_object) {
    if (e.stats.object != stats.object)
      throw contract_error("focus pertinence: stats list mixes objects");
    if (e.stats.activity == stats.activity) {
      if (e.stats.g_s != stats.g_s || e.stats.g_u != stats.g_u || e.stats.f_s != stats.f_s ||
          e.stats.f_u != stats.f_u)
        throw contract_error("focus pertinence: stats disagree with the R_o list");
      found = true;
    }
  }
  if (!found) throw contract_error("focus pertinence: activity not in the R_o list");
  return focus_with_sum(stats, focus_denominator_sum(all_for_object, opts), opts);
}

void compute_pertinence(PertinenceTable& table, const PertinenceOptions& opts, Exec exec) {
  const std::int64_t n = static_cast<std::int64_t>(table.objects.size());
  auto fill = [&](std::int64_t i) {
    ObjectPertinence& op = table.objects[static_cast<std::size_t>(i)];
    const double sum = focus_denominator_sum(op.entries, opts);
    for (ActivityPertinence& e : op.entries) {
      e.popularity = popularity_pertinence(e.stats, table.universe_size, opts);
      e.focus = focus_with_sum(e.stats, sum, opts);
      e.combined = combined_pertinence(e.popularity, e.focus);
    }
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) fill(i);
  } else {
    for (std::int64_t i = 0; i < n; ++i) fill(i);
  }
}

std::vector<std::uint32_t> top_k_activities(const PertinenceTable& table, std::uint32_t object,
                                            std::uint32_t k) {
  if (k == 0) throw contract_error("top_k_activities: k must be >= 1");
  const ObjectPertinence* op = table.find(object);
  if (!op) throw contract_error("top_k_activities: unknown object id " + std::to_string(object));

  std::vector<const ActivityPertinence*> order;
  order.reserve(op->entries.size());
  for (const ActivityPertinence& e : op->entries) order.push_back(&e);
  std::sort(order.begin(), order.end(), [&](const ActivityPertinence* a,
                                            const ActivityPertinence* b) {
    if (a->combined != b->combined) return a->combined > b->combined;
    if (a->stats.g_s != b->stats.g_s) return a->stats.g_s > b->stats.g_s;
    return table.predicate_name[a->stats.activity] < table.predicate_name[b->stats.activity];
  });
  if (order.size() > k) order.resize(k);

  std::vector<std::uint32_t> out;
  out.reserve(order.size());
  for (const ActivityPertinence* e : order) out.push_back(e->stats.activity);
  return out;
}

PooledFeatureSet pool_features(const PertinenceTable& table, std::uint32_t k) {
  PooledFeatureSet pooled;
  pooled.relation_name = table.relation_name;
  pooled.k = k;
  std::unordered_map<std::uint32_t, bool> seen;
  for (const ObjectPertinence& op : table.objects)
    for (std::uint32_t a : top_k_activities(table, op.object, k))
      if (!seen[a]) {
        seen[a] = true;
        pooled.activities.push_back(a);
      }
  return pooled;
}

void write_table_tsv(const PertinenceTable& table, std::uint32_t k, std::ostream& out) {
  out << "object\trank\tactivity\tg_S\tg_U\tf_S\tf_U\tP\tF\tC\n";
  for (const ObjectPertinence& op : table.objects) {
    std::uint32_t rank = 0;
    for (std::uint32_t a : top_k_activities(table, op.object, k)) {
      const ActivityPertinence* e = table.find(op.object, a);
      out << op.object_name << '\t' << ++rank << '\t' << table.predicate_name[a] << '\t'
          << e->stats.g_s << '\t' << e->stats.g_u << '\t' << e->stats.f_s << '\t' << e->stats.f_u
          << '\t' << fmt_g(e->popularity) << '\t' << fmt_g(e->focus) << '\t' << fmt_g(e->combined)
          << '\n';
    }
  }
}

}  // namespace relsifter
