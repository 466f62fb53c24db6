#ifndef RELSIFTER_EVALUATION_HPP
#define RELSIFTER_EVALUATION_HPP

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "relsifter/features.hpp"
#include "relsifter/forest.hpp"
#include "relsifter/olr.hpp"

namespace relsifter {

using AnyModel = std::variant<OrdinalModel, ForestModel>;

struct Prediction {
  std::string person;
  std::string object;
  int predicted = 0;
  int gold = kNoScore;        // kNoScore when the gold label is absent
  bool via_fallback = false;  // set iff the feature row was unresolved
};

struct EvaluationReport {
  double accuracy = 0;
  double avg_score_diff = 0;
  double kendall_tau = 0;  // NaN when either sequence has zero variance
  std::size_t n = 0;
  std::size_t n_fallback = 0;
  int accuracy_tolerance = 2;
};

// Model prediction for one feature row; throws on dimension mismatch.
int predict_any(const AnyModel& model, RowView x, std::size_t cols);

// Resolved rows get the model's score; unresolved rows get a uniform draw
// from 0..7 off a single generator seeded with fallback_seed, consumed in
// row order. Output order = row order.
std::vector<Prediction> score_rows(const FeatureMatrix& m, const AnyModel& model,
                                   std::uint64_t fallback_seed);

// Convenience: featurize then score.
std::vector<Prediction> score_triples(std::span<const LabeledTriple> triples,
                                      const KnowledgeGraph& g, const FeatureSpace& space,
                                      const PertinenceTable& table, const AliasTable& aliases,
                                      const AnyModel& model, std::uint64_t fallback_seed,
                                      Exec exec = Exec::parallel);

// Task metrics over parallel predicted/gold sequences.
double accuracy(std::span<const int> predicted, std::span<const int> gold, int tolerance = 2);
double avg_score_diff(std::span<const int> predicted, std::span<const int> gold);

// Kendall tau-b with tie correction, O(n log n) (merge-sort inversion
// counting). NaN when either sequence is constant or n < 2.
double kendall_tau(std::span<const int> predicted, std::span<const int> gold);

// Prediction-list wrappers; throw contract_error when any gold is absent.
double accuracy(std::span<const Prediction> preds, int tolerance = 2);
double avg_score_diff(std::span<const Prediction> preds);
double kendall_tau(std::span<const Prediction> preds);

EvaluationReport evaluate(std::span<const Prediction> preds, int tolerance = 2);

// Submission layout: TSV `person<TAB>object<TAB>score`. The sidecar
// <path>.meta.json keeps the via flags, gold labels and the fallback seed so
// a prediction file round-trips losslessly.
void write_predictions(std::span<const Prediction> preds, const std::string& path,
                       std::uint64_t fallback_seed);
std::vector<Prediction> read_predictions(const std::string& path);

// Joins a bare prediction TSV with a gold TSV row by row; rows must agree
// on (person, object).
std::vector<Prediction> join_predictions(const std::string& pred_path,
                                         const std::string& gold_path);

// report.txt (human) and report.kv (TSV key<TAB>value) bodies.
std::string format_report(const EvaluationReport& r);
std::string format_report_kv(const EvaluationReport& r);

}  // namespace relsifter

#endif
