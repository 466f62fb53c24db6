#ifndef RELSIFTER_FEATURES_HPP
#define RELSIFTER_FEATURES_HPP

#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "relsifter/exec.hpp"
#include "relsifter/kg.hpp"
#include "relsifter/pertinence.hpp"

namespace relsifter {

constexpr int kNoScore = -1;
constexpr int kNumScores = 8;  // relevance scores 0..7

// One task triple: (person, <TLR>, object) with an optional gold score.
struct LabeledTriple {
  std::string person;
  std::string object;
  int score = kNoScore;  // 0..7, or kNoScore for test triples
};

// TSV `person<TAB>object[<TAB>score]`. All rows must agree on whether the
// score column is present.
std::vector<LabeledTriple> read_labeled_tsv(const std::string& path);
void write_labeled_tsv(std::span<const LabeledTriple> triples, const std::string& path,
                       bool with_scores);

// Feature columns (the pooled activity set) plus the range-normalization
// bounds over all defined C values of pooled activities across the
// relation's objects.
struct FeatureSpace {
  PooledFeatureSet pooled;
  std::vector<std::string> column_names;
  double norm_lo = 0;
  double norm_hi = 0;
  bool degenerate = false;  // norm_lo == norm_hi; normalized values are 1
  std::unordered_map<std::uint32_t, std::uint32_t> column_of;

  std::size_t cols() const { return pooled.activities.size(); }
  double normalize(double c) const {
    return degenerate ? 1.0 : (c - norm_lo) / (norm_hi - norm_lo);
  }
};

FeatureSpace build_space(const PertinenceTable& table, std::uint32_t k);

// Column-sorted sparse row. Unresolved rows have no entries and route to
// the random fallback at scoring time.
struct SparseRow {
  std::vector<std::pair<std::uint32_t, double>> entries;
  bool resolved = true;
};

// Entry j is the range-normalized C_o(r_j) when the resolved person has at
// least one outgoing triple with predicate r_j and r_j is in R_o for the
// triple's object; zero otherwise.
SparseRow featurize(const LabeledTriple& triple, const KnowledgeGraph& g,
                    const FeatureSpace& space, const PertinenceTable& table,
                    const AliasTable& aliases);

struct RowMeta {
  std::string person;
  std::string object;
  bool resolved = true;
};

struct RowView {
  std::span<const std::uint32_t> cols;
  std::span<const double> vals;

  double dot(std::span<const double> w) const {
    double acc = 0;
    for (std::size_t i = 0; i < cols.size(); ++i) acc += w[cols[i]] * vals[i];
    return acc;
  }
  // Value at a column (0 when absent); cols are sorted ascending.
  double get(std::uint32_t col) const;
};

// Sparse row-major matrix with per-row labels and provenance.
class FeatureMatrix {
 public:
  explicit FeatureMatrix(std::size_t cols = 0) : cols_(cols) { row_ptr_.push_back(0); }

  void append_row(const SparseRow& row, RowMeta meta, int label);
  std::size_t rows() const { return meta_.size(); }
  std::size_t cols() const { return cols_; }
  RowView row(std::size_t i) const;
  int label(std::size_t i) const { return labels_[i]; }
  std::span<const int> labels() const { return labels_; }
  const RowMeta& meta(std::size_t i) const { return meta_[i]; }
  std::size_t entry_count() const { return col_.size(); }
  std::size_t unresolved_count() const;
  bool all_labeled() const;

  // Row subset, in the given order.
  FeatureMatrix select(std::span<const std::size_t> row_indices) const;

 private:
  std::size_t cols_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> col_;
  std::vector<double> val_;
  std::vector<int> labels_;
  std::vector<RowMeta> meta_;
};

// One row per input triple, input order preserved, labels carried through.
FeatureMatrix build_matrix(std::span<const LabeledTriple> triples, const KnowledgeGraph& g,
                           const FeatureSpace& space, const PertinenceTable& table,
                           const AliasTable& aliases, Exec exec = Exec::parallel);

// Everything score-time featurization must reproduce, carried from the
// featurize stage through the model file.
struct FeatureMeta {
  int version = 1;
  std::string relation_name;
  std::string predicate_iri;
  std::string mode = "kg";  // kg | text
  std::uint32_t k = 5;
  double log_base = std::numbers::e;
  bool swap_counters = false;
  std::vector<std::string> columns;
  double norm_lo = 0;
  double norm_hi = 0;
  bool degenerate = false;
  std::vector<double> idf;  // text mode only, per column
};

// Matrix file: TSV `row<TAB>col<TAB>value` triplets; sidecar JSON metadata
// at <path>.meta.json with the FeatureMeta, labels and row provenance.
void save_matrix(const FeatureMatrix& m, const FeatureMeta& meta, const std::string& path);
struct LoadedMatrix {
  FeatureMatrix matrix;
  FeatureMeta meta;
};
LoadedMatrix load_matrix(const std::string& path);

}  // namespace relsifter

#endif
