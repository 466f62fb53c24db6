#include "relsifter/kg.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "relsifter/errors.hpp"
#include "relsifter/util.hpp"

namespace relsifter {

namespace {

constexpr std::uint64_t po_key(std::uint32_t p, std::uint32_t o) {
  return (static_cast<std::uint64_t>(p) << 32) | o;
}

bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t") == std::string_view::npos;
}

std::string_view skip_ws(std::string_view s) {
  std::size_t i = s.find_first_not_of(" \t");
  return i == std::string_view::npos ? std::string_view{} : s.substr(i);
}

// <iri> token; returns false if the token is absent or unterminated.
bool take_iri(std::string_view& s, std::string& out) {
  if (s.empty() || s.front() != '<') return false;
  std::size_t end = s.find('>');
  if (end == std::string_view::npos) return false;
  out.assign(s.substr(0, end + 1));
  s.remove_prefix(end + 1);
  return true;
}

// "literal" with backslash escapes, plus any @lang / ^^<type> suffix. The
// whole token is kept verbatim: literals are opaque entity strings here.
bool take_literal(std::string_view& s, std::string& out) {
  if (s.empty() || s.front() != '"') return false;
  std::size_t i = 1;
  bool escaped = false;
  for (; i < s.size(); ++i) {
    if (escaped) {
      escaped = false;
    } else if (s[i] == '\\') {
      escaped = true;
    } else if (s[i] == '"') {
      break;
    }
  }
  if (i >= s.size()) return false;  // unterminated
  ++i;                              // past closing quote
  while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '.') ++i;
  out.assign(s.substr(0, i));
  s.remove_prefix(i);
  return true;
}

}  // namespace

std::uint32_t SymbolTable::intern(std::string_view s) {
  auto it = ids_.find(s);
  if (it != ids_.end()) return it->second;
  std::uint32_t id = static_cast<std::uint32_t>(names_.size());
  names_.emplace_back(s);
  ids_.emplace(names_.back(), id);
  return id;
}

std::optional<std::uint32_t> SymbolTable::lookup(std::string_view s) const {
  auto it = ids_.find(s);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& SymbolTable::name(std::uint32_t id) const {
  if (id >= names_.size()) throw contract_error("symbol id out of range");
  return names_[id];
}

bool parse_tsv_line(std::string_view line, RawTriple& out) {
  auto fields = split_tabs(strip_cr(line));
  if (fields.size() != 3) return false;
  for (auto f : fields)
    if (f.empty()) return false;
  out.subject.assign(fields[0]);
  out.predicate.assign(fields[1]);
  out.object.assign(fields[2]);
  return true;
}

bool parse_nt_line(std::string_view line, RawTriple& out) {
  std::string_view s = skip_ws(strip_cr(line));
  if (!take_iri(s, out.subject)) return false;
  s = skip_ws(s);
  if (!take_iri(s, out.predicate)) return false;
  s = skip_ws(s);
  if (s.empty()) return false;
  if (s.front() == '<') {
    if (!take_iri(s, out.object)) return false;
  } else if (s.front() == '"') {
    if (!take_literal(s, out.object)) return false;
  } else {
    return false;  // blank nodes are outside the supported subset
  }
  s = skip_ws(s);
  if (s.empty() || s.front() != '.') return false;
  s.remove_prefix(1);
  return is_blank(s);
}

std::vector<RawTriple> parse_lines(const std::vector<std::string>& lines, DumpFormat format,
                                   ParseStats& stats, Exec exec) {
  const std::int64_t n = static_cast<std::int64_t>(lines.size());
  std::vector<signed char> status(lines.size(), 0);  // 0 skip, 1 ok, -1 malformed
  std::vector<RawTriple> slot(lines.size());

  auto parse_one = [&](std::int64_t i) {
    std::string_view line = strip_cr(lines[static_cast<std::size_t>(i)]);
    if (is_blank(line)) return;
    if (format == DumpFormat::ntriples && skip_ws(line).front() == '#') return;
    bool ok = format == DumpFormat::tsv ? parse_tsv_line(line, slot[static_cast<std::size_t>(i)])
                                        : parse_nt_line(line, slot[static_cast<std::size_t>(i)]);
    status[static_cast<std::size_t>(i)] = ok ? 1 : -1;
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) parse_one(i);
  } else {
    for (std::int64_t i = 0; i < n; ++i) parse_one(i);
  }

  std::vector<RawTriple> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (status[i] == 0) continue;
    ++stats.lines;
    if (status[i] < 0) {
      ++stats.malformed;
    } else {
      ++stats.parsed;
      out.push_back(std::move(slot[i]));
    }
  }
  return out;
}

KnowledgeGraph KnowledgeGraph::from_raw(std::vector<RawTriple> raw, ParseStats* stats) {
  std::sort(raw.begin(), raw.end());
  auto last = std::unique(raw.begin(), raw.end());
  if (stats) stats->duplicates += static_cast<std::uint64_t>(raw.end() - last);
  raw.erase(last, raw.end());

  KnowledgeGraph g;
  g.triples_.reserve(raw.size());
  for (const RawTriple& t : raw) {
    std::uint32_t s = g.entities_.intern(t.subject);
    std::uint32_t p = g.predicates_.intern(t.predicate);
    std::uint32_t o = g.entities_.intern(t.object);
    g.triples_.push_back({s, p, o});
  }

  // subject index (CSR), sorted (p, o) within each subject
  const std::uint32_t n_ent = g.entities_.size();
  std::vector<std::size_t> counts(n_ent + 1, 0);
  for (const Triple& t : g.triples_) ++counts[t.subject + 1];
  g.out_ptr_.assign(n_ent + 1, 0);
  for (std::uint32_t i = 0; i < n_ent; ++i) g.out_ptr_[i + 1] = g.out_ptr_[i] + counts[i + 1];
  g.out_po_.resize(g.triples_.size());
  {
    std::vector<std::size_t> cursor(g.out_ptr_.begin(), g.out_ptr_.end() - 1);
    for (const Triple& t : g.triples_)
      g.out_po_[cursor[t.subject]++] = {t.predicate, t.object};
  }
  for (std::uint32_t s = 0; s < n_ent; ++s)
    std::sort(g.out_po_.begin() + static_cast<std::ptrdiff_t>(g.out_ptr_[s]),
              g.out_po_.begin() + static_cast<std::ptrdiff_t>(g.out_ptr_[s + 1]));

  for (const Triple& t : g.triples_) g.po_index_[po_key(t.predicate, t.object)].push_back(t.subject);
  for (auto& [k, subjects] : g.po_index_) std::sort(subjects.begin(), subjects.end());

  return g;
}

std::span<const std::pair<std::uint32_t, std::uint32_t>> KnowledgeGraph::outgoing(
    std::uint32_t subject) const {
  if (subject >= entities_.size()) return {};
  return {out_po_.data() + out_ptr_[subject], out_ptr_[subject + 1] - out_ptr_[subject]};
}

std::span<const std::uint32_t> KnowledgeGraph::subjects_of(std::uint32_t predicate,
                                                           std::uint32_t object) const {
  auto it = po_index_.find(po_key(predicate, object));
  if (it == po_index_.end()) return {};
  return it->second;
}

KnowledgeGraph parse_dump(std::istream& in, DumpFormat format, ParseStats* stats, Exec exec) {
  if (!in) throw io_error("unreadable triple dump");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(std::move(line));
  if (in.bad()) throw io_error("read failure on triple dump");

  ParseStats local;
  std::vector<RawTriple> raw = parse_lines(lines, format, local, exec);
  if (local.malformed * 2 > local.lines)
    throw format_error("more than half of the input lines are malformed; wrong --format?");
  KnowledgeGraph g = KnowledgeGraph::from_raw(std::move(raw), &local);
  if (stats) *stats = local;
  return g;
}

KnowledgeGraph parse_dump_files(const std::vector<std::string>& paths, DumpFormat format,
                                ParseStats* stats, Exec exec) {
  ParseStats local;
  std::vector<RawTriple> raw;
  for (const std::string& path : paths) {
    std::vector<std::string> lines = read_lines(path);
    std::vector<RawTriple> part = parse_lines(lines, format, local, exec);
    raw.insert(raw.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  if (local.malformed * 2 > local.lines)
    throw format_error("more than half of the input lines are malformed; wrong --format?");
  KnowledgeGraph g = KnowledgeGraph::from_raw(std::move(raw), &local);
  if (stats) *stats = local;
  return g;
}

void save_graph(const KnowledgeGraph& g, const std::string& path) {
  std::ostringstream out;
  for (const Triple& t : g.triples())
    out << g.entities().name(t.subject) << '\t' << g.predicates().name(t.predicate) << '\t'
        << g.entities().name(t.object) << '\n';
  write_file(path, out.str());
}

KnowledgeGraph load_graph(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open graph snapshot " + path);
  ParseStats stats;
  KnowledgeGraph g = parse_dump(in, DumpFormat::tsv, &stats);
  if (stats.malformed > 0) throw format_error("corrupt graph snapshot " + path);
  return g;
}

std::vector<std::uint32_t> subjects_with(const KnowledgeGraph& g, std::uint32_t predicate,
                                         std::uint32_t object) {
  auto span = g.subjects_of(predicate, object);
  return {span.begin(), span.end()};
}

std::vector<std::uint32_t> activities_of(const KnowledgeGraph& g, std::uint32_t subject) {
  std::vector<std::uint32_t> out;
  auto po = g.outgoing(subject);
  out.reserve(po.size());
  for (auto [p, o] : po) out.push_back(p);
  std::sort(out.begin(), out.end());
  return out;
}

ResolutionOutcome resolve_entity(const KnowledgeGraph& g, const std::string& label,
                                 const AliasTable& aliases) {
  auto alias = aliases.find(label);
  if (alias != aliases.end()) return {label, g.entities().lookup(alias->second)};
  return {label, g.entities().lookup(label)};
}

AliasTable load_alias_table(const std::string& path) {
  AliasTable table;
  for (const std::string& raw : read_lines(path)) {
    std::string_view line = strip_cr(raw);
    if (is_blank(line)) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty())
      throw format_error("bad alias line in " + path + ": " + std::string(line));
    table[std::string(fields[0])] = std::string(fields[1]);
  }
  return table;
}

std::vector<std::uint32_t> objects_of(const KnowledgeGraph& g, std::uint32_t predicate) {
  std::vector<std::uint32_t> out;
  for (const Triple& t : g.triples())
    if (t.predicate == predicate) out.push_back(t.object);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::uint32_t> tlr_universe(const KnowledgeGraph& g, std::uint32_t tlr_predicate,
                                        std::span<const std::uint32_t> extras) {
  std::vector<std::uint32_t> u(extras.begin(), extras.end());
  for (const Triple& t : g.triples())
    if (t.predicate == tlr_predicate) u.push_back(t.subject);
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  return u;
}

}  // namespace relsifter
