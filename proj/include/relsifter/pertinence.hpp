#ifndef RELSIFTER_PERTINENCE_HPP
#define RELSIFTER_PERTINENCE_HPP

#include <cstdint>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "relsifter/exec.hpp"
#include "relsifter/kg.hpp"

namespace relsifter {

// A type-like relation: the predicate whose objects are being characterized
// (e.g. hasProfession) and the objects to characterize.
struct TlrSpec {
  std::string relation_name;
  std::uint32_t tlr_predicate = 0;
  std::vector<std::uint32_t> objects;
};

// Counting statistic of activity r for object o.
//   g_* counts persons exhibiting r at least once,
//   f_* counts triple occurrences of r (with multiplicity),
// over S_o (persons holding object o) and the universe U respectively.
struct ActivityStats {
  std::uint32_t object = 0;
  std::uint32_t activity = 0;
  std::uint32_t g_s = 0;
  std::uint32_t g_u = 0;
  std::uint64_t f_s = 0;
  std::uint64_t f_u = 0;
};

struct ActivityPertinence {
  ActivityStats stats;
  double popularity = 0;  // P
  double focus = 0;       // F
  double combined = 0;    // C = P * F
};

// One row block of the table: R_o with its stats, sorted by activity id.
struct ObjectPertinence {
  std::uint32_t object = 0;
  std::string object_name;
  std::vector<ActivityPertinence> entries;
};

struct PertinenceOptions {
  double log_base = std::numbers::e;
  // Exchanges the counter pair fed to each measure (popularity normally
  // reads g, focus reads f). Experimentation hook; the invariants below are
  // guaranteed only for the default orientation.
  bool swap_counters = false;
};

// Per-relation activity statistics plus the three pertinence measures.
// Immutable for readers once compute_pertinence has run.
struct PertinenceTable {
  std::string relation_name;
  std::uint64_t universe_size = 0;
  std::vector<ObjectPertinence> objects;  // sorted by object name
  std::vector<std::string> predicate_name;
  // Objects with empty S_o violate the TlrSpec invariant; they are recorded
  // here and excluded from the table.
  std::vector<std::pair<std::uint32_t, std::string>> skipped_objects;

  const ObjectPertinence* find(std::uint32_t object) const;
  const ActivityPertinence* find(std::uint32_t object, std::uint32_t activity) const;

 private:
  friend PertinenceTable collect_stats(const KnowledgeGraph&, const TlrSpec&,
                                       std::span<const std::uint32_t>, Exec);
  std::unordered_map<std::uint32_t, std::size_t> slot_of_;
};

// Exact g/f counts from the graph for every object of the spec and every
// activity in R_o. P/F/C are left at zero; run compute_pertinence next.
PertinenceTable collect_stats(const KnowledgeGraph& g, const TlrSpec& spec,
                              std::span<const std::uint32_t> universe,
                              Exec exec = Exec::parallel);

// P = log(1 + g_S) * log(|U| / g_U). Throws on g_U == 0 (r not in R_o).
double popularity_pertinence(const ActivityStats& stats, std::uint64_t universe_size,
                             const PertinenceOptions& opts = {});

// F = log(1 + f_S(r)) * log( sum_{r' in R_o}(1 + f_U(r') - f_S(r'))
//                            / (1 + f_U(r) - f_S(r)) ).
// all_for_object must cover exactly R_o and contain `stats` itself.
double focus_pertinence(const ActivityStats& stats,
                        std::span<const ActivityPertinence> all_for_object,
                        const PertinenceOptions& opts = {});

inline double combined_pertinence(double popularity, double focus) { return popularity * focus; }

// Fills P/F/C for every entry.
void compute_pertinence(PertinenceTable& table, const PertinenceOptions& opts = {},
                        Exec exec = Exec::parallel);

// Top k activities of R_o by combined pertinence, descending; ties broken by
// higher g_S, then by predicate string. Throws on unknown object.
std::vector<std::uint32_t> top_k_activities(const PertinenceTable& table, std::uint32_t object,
                                            std::uint32_t k);

struct PooledFeatureSet {
  std::string relation_name;
  std::uint32_t k = 0;
  std::vector<std::uint32_t> activities;  // deduplicated union of top-k lists
};

// Union of per-object top-k lists, deduplicated, ordered by first appearance
// over objects (objects in table order, i.e. sorted by entity string).
PooledFeatureSet pool_features(const PertinenceTable& table, std::uint32_t k);

// Human-readable ranking table:
// object  rank  activity  g_S  g_U  f_S  f_U  P  F  C
void write_table_tsv(const PertinenceTable& table, std::uint32_t k, std::ostream& out);

}  // namespace relsifter

#endif
