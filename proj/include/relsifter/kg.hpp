#ifndef RELSIFTER_KG_HPP
#define RELSIFTER_KG_HPP

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "relsifter/exec.hpp"

namespace relsifter {

// Bidirectional string <-> dense id mapping. Entities and predicates are
// interned in separate tables.
class SymbolTable {
 public:
  std::uint32_t intern(std::string_view s);
  std::optional<std::uint32_t> lookup(std::string_view s) const;
  const std::string& name(std::uint32_t id) const;
  std::uint32_t size() const { return static_cast<std::uint32_t>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t, Hash, std::equal_to<>> ids_;
};

struct Triple {
  std::uint32_t subject;
  std::uint32_t predicate;
  std::uint32_t object;
  auto operator<=>(const Triple&) const = default;
};

struct RawTriple {
  std::string subject, predicate, object;
  auto operator<=>(const RawTriple&) const = default;
};

enum class DumpFormat { tsv, ntriples };

struct ParseStats {
  std::uint64_t lines = 0;       // non-blank, non-comment lines considered
  std::uint64_t parsed = 0;      // well-formed triples (before dedup)
  std::uint64_t malformed = 0;   // counted and skipped
  std::uint64_t duplicates = 0;  // dropped by set semantics
};

// Immutable after construction. Triple ids are canonical: raw triples are
// sorted and deduplicated before interning, so the graph is identical for
// any permutation of the input lines.
class KnowledgeGraph {
 public:
  static KnowledgeGraph from_raw(std::vector<RawTriple> raw, ParseStats* stats = nullptr);

  const SymbolTable& entities() const { return entities_; }
  const SymbolTable& predicates() const { return predicates_; }
  const std::vector<Triple>& triples() const { return triples_; }

  // Sorted (predicate, object) pairs of the subject's outgoing edges.
  std::span<const std::pair<std::uint32_t, std::uint32_t>> outgoing(std::uint32_t subject) const;

  // Sorted subjects s with (s, predicate, object) in the graph; empty if none.
  std::span<const std::uint32_t> subjects_of(std::uint32_t predicate, std::uint32_t object) const;

 private:
  SymbolTable entities_;
  SymbolTable predicates_;
  std::vector<Triple> triples_;
  // subject index as CSR over entity ids
  std::vector<std::size_t> out_ptr_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out_po_;
  // (predicate, object) -> sorted subject list
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> po_index_;
};

// Per-line parsers; return false on malformed input.
bool parse_tsv_line(std::string_view line, RawTriple& out);
bool parse_nt_line(std::string_view line, RawTriple& out);

// Line batch -> raw triples. Blank lines are ignored; '#' comment lines are
// ignored in the ntriples format. Parallel parsing shards the lines; the
// result is identical to the serial pass.
std::vector<RawTriple> parse_lines(const std::vector<std::string>& lines, DumpFormat format,
                                   ParseStats& stats, Exec exec = Exec::parallel);

// Throws io_error on an unreadable source and format_error when more than
// half of the considered lines are malformed (wrong --format flag).
KnowledgeGraph parse_dump(std::istream& in, DumpFormat format, ParseStats* stats = nullptr,
                          Exec exec = Exec::parallel);
KnowledgeGraph parse_dump_files(const std::vector<std::string>& paths, DumpFormat format,
                                ParseStats* stats = nullptr, Exec exec = Exec::parallel);

// Snapshot: canonical TSV, one triple per line, sorted. save(load(f)) == f.
void save_graph(const KnowledgeGraph& g, const std::string& path);
KnowledgeGraph load_graph(const std::string& path);

// Set of subjects with (s, predicate, object); empty vector if none.
std::vector<std::uint32_t> subjects_with(const KnowledgeGraph& g, std::uint32_t predicate,
                                         std::uint32_t object);

// Outgoing predicate multiset of a subject, sorted by predicate id.
std::vector<std::uint32_t> activities_of(const KnowledgeGraph& g, std::uint32_t subject);

using AliasTable = std::unordered_map<std::string, std::string>;

struct ResolutionOutcome {
  std::string query;
  std::optional<std::uint32_t> id;  // nullopt = UNRESOLVED
  bool resolved() const { return id.has_value(); }
};

// Alias hit wins (and commits: a dangling alias target is UNRESOLVED);
// otherwise exact case-sensitive match; otherwise UNRESOLVED.
ResolutionOutcome resolve_entity(const KnowledgeGraph& g, const std::string& label,
                                 const AliasTable& aliases);

// TSV `task-string<TAB>kg-entity-string`, one mapping per line.
AliasTable load_alias_table(const std::string& path);

// Distinct objects of a predicate, sorted by id.
std::vector<std::uint32_t> objects_of(const KnowledgeGraph& g, std::uint32_t predicate);

// All subjects of the TLR predicate plus configured extras, sorted unique.
std::vector<std::uint32_t> tlr_universe(const KnowledgeGraph& g, std::uint32_t tlr_predicate,
                                        std::span<const std::uint32_t> extras = {});

}  // namespace relsifter

#endif
