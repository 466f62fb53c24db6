#include "relsifter/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "relsifter/errors.hpp"
#include "relsifter/rng.hpp"
#include "relsifter/util.hpp"

namespace relsifter {

int predict_any(const AnyModel& model, RowView x, std::size_t cols) {
  if (const auto* olr = std::get_if<OrdinalModel>(&model)) {
    if (olr->weights.size() != cols) throw contract_error("model/feature-space column mismatch");
    return predict_olr(*olr, x);
  }
  const auto& forest = std::get<ForestModel>(model);
  for (const Tree& tree : forest.trees)
    for (const TreeNode& node : tree.nodes)
      if (node.feature >= 0 && static_cast<std::size_t>(node.feature) >= cols)
        throw contract_error("model/feature-space column mismatch");
  return predict_forest(forest, x);
}

std::vector<Prediction> score_rows(const FeatureMatrix& m, const AnyModel& model,
                                   std::uint64_t fallback_seed) {
  std::vector<Prediction> preds(m.rows());
  Rng fallback(fallback_seed);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const RowMeta& meta = m.meta(i);
    Prediction& p = preds[i];
    p.person = meta.person;
    p.object = meta.object;
    p.gold = m.label(i);
    if (meta.resolved) {
      p.predicted = predict_any(model, m.row(i), m.cols());
    } else {
      p.predicted = fallback.score();
      p.via_fallback = true;
    }
  }
  return preds;
}

std::vector<Prediction> score_triples(std::span<const LabeledTriple> triples,
                                      const KnowledgeGraph& g, const FeatureSpace& space,
                                      const PertinenceTable& table, const AliasTable& aliases,
                                      const AnyModel& model, std::uint64_t fallback_seed,
                                      Exec exec) {
  return score_rows(build_matrix(triples, g, space, table, aliases, exec), model, fallback_seed);
}

namespace {

void check_pair(std::span<const int> predicted, std::span<const int> gold) {
  if (predicted.size() != gold.size()) throw contract_error("metric: sequence length mismatch");
  if (predicted.empty()) throw contract_error("metric: empty sequences");
}

// Pairs lost to ties: sum of t*(t-1)/2 over runs of equal values in a
// sorted sequence.
std::uint64_t tie_pairs(const std::vector<int>& sorted) {
  std::uint64_t total = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
      ++run;
    } else {
      total += static_cast<std::uint64_t>(run) * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

// Inversions in v, counted by bottom-up merge sort.
std::uint64_t count_inversions(std::vector<int>& v) {
  std::uint64_t swaps = 0;
  std::vector<int> buf(v.size());
  for (std::size_t width = 1; width < v.size(); width *= 2) {
    for (std::size_t lo = 0; lo + width < v.size(); lo += 2 * width) {
      const std::size_t mid = lo + width;
      const std::size_t hi = std::min(lo + 2 * width, v.size());
      std::size_t a = lo, b = mid, out = lo;
      while (a < mid && b < hi) {
        if (v[b] < v[a]) {
          swaps += mid - a;  // v[b] jumps every remaining left element
          buf[out++] = v[b++];
        } else {
          buf[out++] = v[a++];
        }
      }
      while (a < mid) buf[out++] = v[a++];
      while (b < hi) buf[out++] = v[b++];
      std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
    }
  }
  return swaps;
}

}  // namespace

double accuracy(std::span<const int> predicted, std::span<const int> gold, int tolerance) {
  check_pair(predicted, gold);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (std::abs(predicted[i] - gold[i]) <= tolerance) ++hits;
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double avg_score_diff(std::span<const int> predicted, std::span<const int> gold) {
  check_pair(predicted, gold);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    total += static_cast<std::uint64_t>(std::abs(predicted[i] - gold[i]));
  return static_cast<double>(total) / static_cast<double>(predicted.size());
}

double kendall_tau(std::span<const int> predicted, std::span<const int> gold) {
  check_pair(predicted, gold);
  // Fewer than two points carry no rank information, same as a constant
  // sequence.
  if (predicted.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t n = predicted.size();

  // Sort by (x, y); inversions of the y column then count exactly the
  // discordant pairs (x-ties are y-ascending, so they contribute none).
  std::vector<std::pair<int, int>> pairs(n);
  for (std::size_t i = 0; i < n; ++i) pairs[i] = {predicted[i], gold[i]};
  std::sort(pairs.begin(), pairs.end());

  std::vector<int> x_sorted(n), y_by_x(n), y_sorted(n);
  for (std::size_t i = 0; i < n; ++i) {
    x_sorted[i] = pairs[i].first;
    y_by_x[i] = pairs[i].second;
    y_sorted[i] = pairs[i].second;
  }
  std::sort(y_sorted.begin(), y_sorted.end());

  const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const std::uint64_t n1 = tie_pairs(x_sorted);
  const std::uint64_t n2 = tie_pairs(y_sorted);
  if (n1 == n0 || n2 == n0) return std::numeric_limits<double>::quiet_NaN();

  std::uint64_t n3 = 0;  // pairs tied in both x and y
  {
    std::size_t run = 1;
    for (std::size_t i = 1; i <= n; ++i) {
      if (i < n && pairs[i] == pairs[i - 1]) {
        ++run;
      } else {
        n3 += static_cast<std::uint64_t>(run) * (run - 1) / 2;
        run = 1;
      }
    }
  }

  const std::uint64_t discordant = count_inversions(y_by_x);
  // concordant - discordant = n0 - n1 - n2 + n3 - 2 * discordant
  const double numerator = static_cast<double>(n0 - n1) - static_cast<double>(n2) +
                           static_cast<double>(n3) - 2.0 * static_cast<double>(discordant);
  const double denominator =
      std::sqrt(static_cast<double>(n0 - n1)) * std::sqrt(static_cast<double>(n0 - n2));
  return numerator / denominator;
}

namespace {

std::pair<std::vector<int>, std::vector<int>> split_columns(std::span<const Prediction> preds) {
  std::vector<int> p(preds.size()), g(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].gold == kNoScore) throw contract_error("metric: gold label absent");
    p[i] = preds[i].predicted;
    g[i] = preds[i].gold;
  }
  return {std::move(p), std::move(g)};
}

}  // namespace

double accuracy(std::span<const Prediction> preds, int tolerance) {
  auto [p, g] = split_columns(preds);
  return accuracy(p, g, tolerance);
}

double avg_score_diff(std::span<const Prediction> preds) {
  auto [p, g] = split_columns(preds);
  return avg_score_diff(p, g);
}

double kendall_tau(std::span<const Prediction> preds) {
  auto [p, g] = split_columns(preds);
  return kendall_tau(p, g);
}

EvaluationReport evaluate(std::span<const Prediction> preds, int tolerance) {
  auto [p, g] = split_columns(preds);
  EvaluationReport r;
  r.accuracy = accuracy(p, g, tolerance);
  r.avg_score_diff = avg_score_diff(p, g);
  r.kendall_tau = p.size() >= 2 ? kendall_tau(p, g) : std::numeric_limits<double>::quiet_NaN();
  r.n = preds.size();
  r.n_fallback = static_cast<std::size_t>(
      std::count_if(preds.begin(), preds.end(), [](const Prediction& x) { return x.via_fallback; }));
  r.accuracy_tolerance = tolerance;
  return r;
}

void write_predictions(std::span<const Prediction> preds, const std::string& path,
                       std::uint64_t fallback_seed) {
  std::ostringstream out;
  for (const Prediction& p : preds)
    out << p.person << '\t' << p.object << '\t' << p.predicted << '\n';
  write_file(path, out.str());

  nlohmann::json j;
  j["version"] = 1;
  j["fallback_seed"] = fallback_seed;
  nlohmann::json rows = nlohmann::json::array();
  for (const Prediction& p : preds) {
    nlohmann::json r;
    r["via_fallback"] = p.via_fallback;
    r["gold"] = p.gold;
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  write_file(path + ".meta.json", j.dump(2) + "\n");
}

std::vector<Prediction> read_predictions(const std::string& path) {
  std::vector<Prediction> preds;
  std::size_t line_no = 0;
  for (const std::string& raw : read_lines(path)) {
    ++line_no;
    std::string_view line = strip_cr(raw);
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 3)
      throw format_error(path + ":" + std::to_string(line_no) + ": expected 3 fields");
    Prediction p;
    p.person.assign(fields[0]);
    p.object.assign(fields[1]);
    try {
      p.predicted = std::stoi(std::string(fields[2]));
    } catch (const std::exception&) {
      throw format_error(path + ":" + std::to_string(line_no) + ": bad score");
    }
    if (p.predicted < 0 || p.predicted >= kNumScores)
      throw format_error(path + ":" + std::to_string(line_no) + ": score out of range");
    preds.push_back(std::move(p));
  }

  const std::string meta_path = path + ".meta.json";
  if (std::ifstream probe(meta_path); probe) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(meta_path));
    } catch (const nlohmann::json::exception& e) {
      throw format_error("bad prediction metadata: " + std::string(e.what()));
    }
    const auto& rows = j.at("rows");
    if (rows.size() != preds.size()) throw format_error("prediction metadata row count mismatch");
    for (std::size_t i = 0; i < preds.size(); ++i) {
      preds[i].via_fallback = rows[i].at("via_fallback").get<bool>();
      preds[i].gold = rows[i].at("gold").get<int>();
    }
  }
  return preds;
}

std::vector<Prediction> join_predictions(const std::string& pred_path,
                                         const std::string& gold_path) {
  std::vector<Prediction> preds = read_predictions(pred_path);
  std::vector<LabeledTriple> gold = read_labeled_tsv(gold_path);
  if (preds.size() != gold.size())
    throw format_error("prediction/gold row count mismatch: " + std::to_string(preds.size()) +
                       " vs " + std::to_string(gold.size()));
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].person != gold[i].person || preds[i].object != gold[i].object)
      throw format_error("prediction/gold row " + std::to_string(i) +
                         " names disagree: " + preds[i].person + "/" + preds[i].object + " vs " +
                         gold[i].person + "/" + gold[i].object);
    if (gold[i].score == kNoScore)
      throw format_error("gold file row " + std::to_string(i) + " has no score");
    preds[i].gold = gold[i].score;
  }
  return preds;
}

std::string format_report(const EvaluationReport& r) {
  std::ostringstream out;
  out << "rows            " << r.n << '\n';
  out << "fallback rows   " << r.n_fallback << '\n';
  out << "accuracy        " << fmt_g(r.accuracy) << "  (|predicted - gold| <= "
      << r.accuracy_tolerance << ")\n";
  out << "avg score diff  " << fmt_g(r.avg_score_diff) << '\n';
  out << "kendall tau-b   " << fmt_g(r.kendall_tau) << '\n';
  return out.str();
}

std::string format_report_kv(const EvaluationReport& r) {
  std::ostringstream out;
  out << "n\t" << r.n << '\n';
  out << "n_fallback\t" << r.n_fallback << '\n';
  out << "accuracy_tolerance\t" << r.accuracy_tolerance << '\n';
  out << "accuracy\t" << fmt_g(r.accuracy) << '\n';
  out << "avg_score_diff\t" << fmt_g(r.avg_score_diff) << '\n';
  out << "kendall_tau\t" << fmt_g(r.kendall_tau) << '\n';
  return out.str();
}

}  // namespace relsifter
