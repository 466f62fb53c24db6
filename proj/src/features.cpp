#include "relsifter/features.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "meta_json.hpp"
#include "relsifter/errors.hpp"
#include "relsifter/util.hpp"

namespace relsifter {

std::vector<LabeledTriple> read_labeled_tsv(const std::string& path) {
  std::vector<LabeledTriple> out;
  int n_cols = 0;
  std::size_t line_no = 0;
  for (const std::string& raw : read_lines(path)) {
    ++line_no;
    std::string_view line = strip_cr(raw);
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 2 && fields.size() != 3)
      throw format_error(path + ":" + std::to_string(line_no) + ": expected 2 or 3 fields");
    if (n_cols == 0) n_cols = static_cast<int>(fields.size());
    if (static_cast<int>(fields.size()) != n_cols)
      throw format_error(path + ":" + std::to_string(line_no) + ": inconsistent column count");
    LabeledTriple t;
    t.person.assign(fields[0]);
    t.object.assign(fields[1]);
    if (fields.size() == 3) {
      int score = -1;
      try {
        score = std::stoi(std::string(fields[2]));
      } catch (const std::exception&) {
        throw format_error(path + ":" + std::to_string(line_no) + ": bad score field");
      }
      if (score < 0 || score >= kNumScores)
        throw format_error(path + ":" + std::to_string(line_no) + ": score out of range 0..7");
      t.score = score;
    }
    out.push_back(std::move(t));
  }
  return out;
}

void write_labeled_tsv(std::span<const LabeledTriple> triples, const std::string& path,
                       bool with_scores) {
  std::ostringstream out;
  for (const LabeledTriple& t : triples) {
    out << t.person << '\t' << t.object;
    if (with_scores) out << '\t' << t.score;
    out << '\n';
  }
  write_file(path, out.str());
}

FeatureSpace build_space(const PertinenceTable& table, std::uint32_t k) {
  FeatureSpace space;
  space.pooled = pool_features(table, k);
  space.column_names.reserve(space.pooled.activities.size());
  for (std::size_t j = 0; j < space.pooled.activities.size(); ++j) {
    space.column_of[space.pooled.activities[j]] = static_cast<std::uint32_t>(j);
    space.column_names.push_back(table.predicate_name[space.pooled.activities[j]]);
  }

  bool any = false;
  for (const ObjectPertinence& op : table.objects) {
    for (std::uint32_t a : space.pooled.activities) {
      const ActivityPertinence* e = table.find(op.object, a);
      if (!e) continue;  // a not in R_o for this object
      if (!any) {
        space.norm_lo = space.norm_hi = e->combined;
        any = true;
      } else {
        space.norm_lo = std::min(space.norm_lo, e->combined);
        space.norm_hi = std::max(space.norm_hi, e->combined);
      }
    }
  }
  space.degenerate = !any || space.norm_lo == space.norm_hi;
  return space;
}

SparseRow featurize(const LabeledTriple& triple, const KnowledgeGraph& g,
                    const FeatureSpace& space, const PertinenceTable& table,
                    const AliasTable& aliases) {
  SparseRow row;
  ResolutionOutcome person = resolve_entity(g, triple.person, aliases);
  ResolutionOutcome object = resolve_entity(g, triple.object, aliases);
  if (!person.resolved() || !object.resolved()) {
    row.resolved = false;
    return row;
  }

  auto po = g.outgoing(*person.id);
  for (std::size_t j = 0; j < space.pooled.activities.size(); ++j) {
    const std::uint32_t activity = space.pooled.activities[j];
    auto it = std::lower_bound(po.begin(), po.end(), std::pair<std::uint32_t, std::uint32_t>{activity, 0});
    if (it == po.end() || it->first != activity) continue;  // person never exhibits r
    const ActivityPertinence* e = table.find(*object.id, activity);
    if (!e) continue;  // r not in R_o: C undefined, feature stays 0
    double v = space.normalize(e->combined);
    if (v != 0.0) row.entries.emplace_back(static_cast<std::uint32_t>(j), v);
  }
  return row;
}

double RowView::get(std::uint32_t col) const {
  auto it = std::lower_bound(cols.begin(), cols.end(), col);
  if (it == cols.end() || *it != col) return 0.0;
  return vals[static_cast<std::size_t>(it - cols.begin())];
}

void FeatureMatrix::append_row(const SparseRow& row, RowMeta meta, int label) {
  for (auto [c, v] : row.entries) {
    if (c >= cols_) throw contract_error("feature column out of range");
    col_.push_back(c);
    val_.push_back(v);
  }
  row_ptr_.push_back(col_.size());
  labels_.push_back(label);
  meta_.push_back(std::move(meta));
}

RowView FeatureMatrix::row(std::size_t i) const {
  const std::size_t b = row_ptr_[i], e = row_ptr_[i + 1];
  return {{col_.data() + b, e - b}, {val_.data() + b, e - b}};
}

std::size_t FeatureMatrix::unresolved_count() const {
  std::size_t n = 0;
  for (const RowMeta& m : meta_)
    if (!m.resolved) ++n;
  return n;
}

bool FeatureMatrix::all_labeled() const {
  return std::all_of(labels_.begin(), labels_.end(), [](int l) { return l != kNoScore; });
}

FeatureMatrix FeatureMatrix::select(std::span<const std::size_t> row_indices) const {
  FeatureMatrix out(cols_);
  for (std::size_t i : row_indices) {
    RowView r = row(i);
    SparseRow sr;
    sr.resolved = meta_[i].resolved;
    for (std::size_t j = 0; j < r.cols.size(); ++j) sr.entries.emplace_back(r.cols[j], r.vals[j]);
    out.append_row(sr, meta_[i], labels_[i]);
  }
  return out;
}

FeatureMatrix build_matrix(std::span<const LabeledTriple> triples, const KnowledgeGraph& g,
                           const FeatureSpace& space, const PertinenceTable& table,
                           const AliasTable& aliases, Exec exec) {
  const std::int64_t n = static_cast<std::int64_t>(triples.size());
  std::vector<SparseRow> rows(triples.size());
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
      rows[static_cast<std::size_t>(i)] =
          featurize(triples[static_cast<std::size_t>(i)], g, space, table, aliases);
  } else {
    for (std::int64_t i = 0; i < n; ++i)
      rows[static_cast<std::size_t>(i)] =
          featurize(triples[static_cast<std::size_t>(i)], g, space, table, aliases);
  }

  FeatureMatrix m(space.cols());
  for (std::size_t i = 0; i < triples.size(); ++i)
    m.append_row(rows[i], {triples[i].person, triples[i].object, rows[i].resolved},
                 triples[i].score);
  return m;
}

void save_matrix(const FeatureMatrix& m, const FeatureMeta& meta, const std::string& path) {
  std::ostringstream out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    RowView r = m.row(i);
    for (std::size_t j = 0; j < r.cols.size(); ++j)
      out << i << '\t' << r.cols[j] << '\t' << fmt_exact(r.vals[j]) << '\n';
  }
  write_file(path, out.str());

  nlohmann::json j = detail::meta_to_json(meta);
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const RowMeta& rm = m.meta(i);
    nlohmann::json r;
    r["person"] = rm.person;
    r["object"] = rm.object;
    r["resolved"] = rm.resolved;
    r["label"] = m.label(i);
    rows.push_back(std::move(r));
  }
  j["row_meta"] = std::move(rows);
  write_file(path + ".meta.json", j.dump(2) + "\n");
}

LoadedMatrix load_matrix(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path + ".meta.json"));
  } catch (const nlohmann::json::exception& e) {
    throw format_error("bad matrix metadata: " + std::string(e.what()));
  }

  LoadedMatrix out{FeatureMatrix(j.at("cols").get<std::size_t>()), detail::meta_from_json(j)};
  const std::size_t rows = j.at("rows").get<std::size_t>();
  std::vector<SparseRow> sparse(rows);
  for (const std::string& raw : read_lines(path)) {
    std::string_view line = strip_cr(raw);
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 3) throw format_error("bad matrix line: " + std::string(line));
    std::size_t r = std::stoull(std::string(fields[0]));
    std::uint32_t c = static_cast<std::uint32_t>(std::stoul(std::string(fields[1])));
    double v = std::stod(std::string(fields[2]));
    if (r >= rows) throw format_error("matrix row index out of range");
    sparse[r].entries.emplace_back(c, v);
  }
  const auto& row_meta = j.at("row_meta");
  if (row_meta.size() != rows) throw format_error("matrix metadata row count mismatch");
  for (std::size_t i = 0; i < rows; ++i) {
    std::sort(sparse[i].entries.begin(), sparse[i].entries.end());
    RowMeta rm;
    rm.person = row_meta[i].at("person").get<std::string>();
    rm.object = row_meta[i].at("object").get<std::string>();
    rm.resolved = row_meta[i].at("resolved").get<bool>();
    sparse[i].resolved = rm.resolved;
    out.matrix.append_row(sparse[i], std::move(rm), row_meta[i].at("label").get<int>());
  }
  return out;
}

}  // namespace relsifter
