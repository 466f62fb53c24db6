#include "relsifter/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include <json.hpp>

#include "relsifter/cv.hpp"
#include "relsifter/errors.hpp"
#include "relsifter/features.hpp"
#include "relsifter/model_io.hpp"
#include "relsifter/pertinence.hpp"
#include "relsifter/text.hpp"
#include "relsifter/util.hpp"

namespace fs = std::filesystem;

namespace relsifter {

namespace {

void require_keys(const nlohmann::json& obj, const std::set<std::string>& known,
                  const std::string& where) {
  for (const auto& [key, _] : obj.items())
    if (!known.contains(key)) throw config_error("config: unknown key \"" + key + "\" in " + where);
}

std::string resolve_path(const std::string& p, const fs::path& base) {
  if (p.empty()) return p;
  fs::path path(p);
  if (path.is_relative()) path = base / path;
  return path.lexically_normal().string();
}

}  // namespace

PipelineConfig load_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw config_error("config " + path + ": " + std::string(e.what()));
  }

  PipelineConfig cfg;
  try {
    require_keys(j, {"version", "relation", "predicate", "mode", "k", "log_base", "swap_counters",
                     "learner", "grid", "folds", "tolerance", "seeds", "universe_extras", "paths"},
                 "top level");
    cfg.version = j.at("version").get<int>();
    if (cfg.version != 1) throw config_error("config: unsupported version");
    cfg.relation = j.at("relation").get<std::string>();
    cfg.predicate = j.at("predicate").get<std::string>();
    if (cfg.relation.empty() || cfg.predicate.empty())
      throw config_error("config: relation and predicate must be set");

    if (j.contains("mode")) cfg.mode = j.at("mode").get<std::string>();
    if (cfg.mode != "kg" && cfg.mode != "text")
      throw config_error("config: mode must be kg or text");
    if (j.contains("k")) cfg.k = j.at("k").get<std::uint32_t>();
    if (cfg.k == 0) throw config_error("config: k must be positive");
    if (j.contains("log_base")) cfg.log_base = j.at("log_base").get<double>();
    if (!(cfg.log_base > 0) || cfg.log_base == 1)
      throw config_error("config: log_base must be positive and != 1");
    if (j.contains("swap_counters")) cfg.swap_counters = j.at("swap_counters").get<bool>();

    if (j.contains("learner")) cfg.learner = j.at("learner").get<std::string>();
    if (cfg.learner != "olr" && cfg.learner != "forest")
      throw config_error("config: learner must be olr or forest");
    if (j.contains("grid")) {
      cfg.grid = j.at("grid").get<std::vector<double>>();
      if (cfg.grid.empty()) throw config_error("config: grid must be nonempty when given");
      for (double v : cfg.grid)
        if (!(v > 0)) throw config_error("config: grid values must be positive");
    }
    if (j.contains("folds")) cfg.folds = j.at("folds").get<std::size_t>();
    if (cfg.folds < 2) throw config_error("config: folds must be >= 2");
    if (j.contains("tolerance")) cfg.tolerance = j.at("tolerance").get<int>();
    if (cfg.tolerance < 0) throw config_error("config: tolerance must be >= 0");

    if (j.contains("seeds")) {
      const auto& s = j.at("seeds");
      require_keys(s, {"data", "model", "fallback"}, "seeds");
      if (s.contains("data")) cfg.seeds.data = s.at("data").get<std::uint64_t>();
      if (s.contains("model")) cfg.seeds.model = s.at("model").get<std::uint64_t>();
      if (s.contains("fallback")) cfg.seeds.fallback = s.at("fallback").get<std::uint64_t>();
    }
    if (j.contains("universe_extras"))
      cfg.universe_extras = j.at("universe_extras").get<std::vector<std::string>>();

    const auto& p = j.at("paths");
    require_keys(p, {"inputs", "format", "train", "test", "aliases", "corpus", "stopwords",
                     "out_dir"},
                 "paths");
    cfg.inputs = p.at("inputs").get<std::vector<std::string>>();
    if (cfg.inputs.empty()) throw config_error("config: paths.inputs must be nonempty");
    if (p.contains("format")) {
      const std::string f = p.at("format").get<std::string>();
      if (f == "tsv")
        cfg.format = DumpFormat::tsv;
      else if (f == "ntriples")
        cfg.format = DumpFormat::ntriples;
      else
        throw config_error("config: format must be tsv or ntriples");
    }
    cfg.train_tsv = p.at("train").get<std::string>();
    if (cfg.train_tsv.empty()) throw config_error("config: paths.train must be set");
    if (p.contains("test")) cfg.test_tsv = p.at("test").get<std::string>();
    if (p.contains("aliases")) cfg.aliases = p.at("aliases").get<std::string>();
    if (p.contains("corpus")) cfg.corpus = p.at("corpus").get<std::string>();
    if (p.contains("stopwords")) cfg.stopwords = p.at("stopwords").get<std::string>();
    cfg.out_dir = p.at("out_dir").get<std::string>();
    if (cfg.out_dir.empty()) throw config_error("config: paths.out_dir must be set");

    if (cfg.mode == "text" && (cfg.corpus.empty() || cfg.stopwords.empty()))
      throw config_error("config: text mode requires paths.corpus and paths.stopwords");
  } catch (const nlohmann::json::exception& e) {
    throw config_error("config " + path + ": " + std::string(e.what()));
  }

  const fs::path base = fs::path(path).parent_path();
  for (std::string& in : cfg.inputs) in = resolve_path(in, base);
  cfg.train_tsv = resolve_path(cfg.train_tsv, base);
  cfg.test_tsv = resolve_path(cfg.test_tsv, base);
  cfg.aliases = resolve_path(cfg.aliases, base);
  cfg.corpus = resolve_path(cfg.corpus, base);
  cfg.stopwords = resolve_path(cfg.stopwords, base);
  cfg.out_dir = resolve_path(cfg.out_dir, base);
  return cfg;
}

std::string graph_path(const PipelineConfig& cfg) { return cfg.out_dir + "/graph.tsv"; }
std::string activities_path(const PipelineConfig& cfg) { return cfg.out_dir + "/activities.tsv"; }
std::string train_matrix_path(const PipelineConfig& cfg) { return cfg.out_dir + "/train.matrix"; }
std::string test_matrix_path(const PipelineConfig& cfg) { return cfg.out_dir + "/test.matrix"; }
std::string model_path(const PipelineConfig& cfg) { return cfg.out_dir + "/model.json"; }
std::string predictions_path(const PipelineConfig& cfg) {
  return cfg.out_dir + "/predictions.tsv";
}
std::string report_path(const PipelineConfig& cfg) { return cfg.out_dir + "/report.txt"; }
std::string report_kv_path(const PipelineConfig& cfg) { return cfg.out_dir + "/report.kv"; }
std::string failure_marker_path(const PipelineConfig& cfg) {
  return cfg.out_dir + "/stage.failed";
}

namespace {

void ensure_out_dir(const PipelineConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw io_error("cannot create " + cfg.out_dir + ": " + ec.message());
}

AliasTable load_aliases_if_set(const PipelineConfig& cfg) {
  if (cfg.aliases.empty()) return {};
  return load_alias_table(cfg.aliases);
}

struct TaskData {
  std::vector<LabeledTriple> train;
  std::vector<LabeledTriple> test;  // empty when no test file configured
};

TaskData load_task(const PipelineConfig& cfg) {
  TaskData t;
  t.train = read_labeled_tsv(cfg.train_tsv);
  if (t.train.empty()) throw config_error("training file " + cfg.train_tsv + " is empty");
  if (!cfg.test_tsv.empty()) t.test = read_labeled_tsv(cfg.test_tsv);
  return t;
}

struct Assembled {
  KnowledgeGraph graph;
  AliasTable aliases;
  TlrSpec spec;
  std::vector<std::uint32_t> universe;
  std::size_t unresolved_objects = 0;
};

Assembled assemble(const PipelineConfig& cfg, const TaskData& task) {
  Assembled a;
  a.graph = load_graph(graph_path(cfg));
  a.aliases = load_aliases_if_set(cfg);

  const auto tlr = a.graph.predicates().lookup(cfg.predicate);
  if (!tlr)
    throw config_error("predicate \"" + cfg.predicate + "\" does not occur in the graph");
  a.spec.relation_name = cfg.relation;
  a.spec.tlr_predicate = *tlr;

  std::set<std::string> object_names;
  for (const LabeledTriple& t : task.train) object_names.insert(t.object);
  for (const LabeledTriple& t : task.test) object_names.insert(t.object);
  std::set<std::uint32_t> objects;
  for (const std::string& name : object_names) {
    const ResolutionOutcome r = resolve_entity(a.graph, name, a.aliases);
    if (r.resolved())
      objects.insert(*r.id);
    else
      ++a.unresolved_objects;
  }
  a.spec.objects.assign(objects.begin(), objects.end());
  if (a.spec.objects.empty())
    throw config_error("no task object resolves against the graph");

  std::vector<std::uint32_t> extras;
  for (const std::string& name : cfg.universe_extras) {
    const ResolutionOutcome r = resolve_entity(a.graph, name, a.aliases);
    if (!r.resolved())
      throw config_error("universe extra \"" + name + "\" does not resolve against the graph");
    extras.push_back(*r.id);
  }
  a.universe = tlr_universe(a.graph, a.spec.tlr_predicate, extras);
  return a;
}

PertinenceTable make_table(const Assembled& a, const PipelineConfig& cfg, Exec exec) {
  PertinenceTable table = collect_stats(a.graph, a.spec, a.universe, exec);
  compute_pertinence(table, {cfg.log_base, cfg.swap_counters}, exec);
  return table;
}

FeatureMeta make_meta(const PipelineConfig& cfg, std::vector<std::string> columns, double lo,
                      double hi, bool degenerate, std::vector<double> idf = {}) {
  FeatureMeta meta;
  meta.relation_name = cfg.relation;
  meta.predicate_iri = cfg.predicate;
  meta.mode = cfg.mode;
  meta.k = cfg.k;
  meta.log_base = cfg.log_base;
  meta.swap_counters = cfg.swap_counters;
  meta.columns = std::move(columns);
  meta.norm_lo = lo;
  meta.norm_hi = hi;
  meta.degenerate = degenerate;
  meta.idf = std::move(idf);
  return meta;
}

std::vector<double> default_grid(const std::string& learner) {
  if (learner == "olr") return kOlrAlphaGrid;
  std::vector<double> grid;
  for (std::uint32_t v : kForestSizeGrid) grid.push_back(static_cast<double>(v));
  return grid;
}

}  // namespace

void stage_ingest(const PipelineConfig& cfg, Exec exec, std::ostream& log) {
  ensure_out_dir(cfg);
  ParseStats stats;
  const KnowledgeGraph g = parse_dump_files(cfg.inputs, cfg.format, &stats, exec);
  save_graph(g, graph_path(cfg));
  log << "[ingest] files=" << cfg.inputs.size() << " lines=" << stats.lines
      << " parsed=" << stats.parsed << " malformed=" << stats.malformed
      << " duplicates=" << stats.duplicates << " entities=" << g.entities().size()
      << " predicates=" << g.predicates().size() << " triples=" << g.triples().size() << '\n';
}

void stage_activities(const PipelineConfig& cfg, Exec exec, std::ostream& log) {
  ensure_out_dir(cfg);
  const TaskData task = load_task(cfg);
  const Assembled a = assemble(cfg, task);
  const PertinenceTable table = make_table(a, cfg, exec);

  std::ostringstream out;
  write_table_tsv(table, cfg.k, out);
  write_file(activities_path(cfg), out.str());

  std::size_t r_min = 0, r_max = 0;
  for (std::size_t i = 0; i < table.objects.size(); ++i) {
    const std::size_t n = table.objects[i].entries.size();
    if (i == 0) r_min = r_max = n;
    r_min = std::min(r_min, n);
    r_max = std::max(r_max, n);
  }
  log << "[activities] universe=" << table.universe_size << " objects=" << table.objects.size()
      << " skipped_objects=" << table.skipped_objects.size()
      << " unresolved_objects=" << a.unresolved_objects << " r_o_min=" << r_min
      << " r_o_max=" << r_max << '\n';
}

namespace {

void log_matrix(std::ostream& log, const char* name, const FeatureMatrix& m) {
  log << ' ' << name << "_rows=" << m.rows() << ' ' << name
      << "_unresolved=" << m.unresolved_count() << ' ' << name << "_entries=" << m.entry_count();
}

}  // namespace

void stage_featurize(const PipelineConfig& cfg, Exec exec, std::ostream& log) {
  ensure_out_dir(cfg);
  const TaskData task = load_task(cfg);
  const Assembled a = assemble(cfg, task);

  log << "[featurize] mode=" << cfg.mode;
  if (cfg.mode == "kg") {
    const PertinenceTable table = make_table(a, cfg, exec);
    const FeatureSpace space = build_space(table, cfg.k);
    const FeatureMeta meta = make_meta(cfg, space.column_names, space.norm_lo, space.norm_hi,
                                       space.degenerate);

    const FeatureMatrix train = build_matrix(task.train, a.graph, space, table, a.aliases, exec);
    save_matrix(train, meta, train_matrix_path(cfg));
    log << " columns=" << space.cols();
    log_matrix(log, "train", train);
    if (!task.test.empty()) {
      const FeatureMatrix test = build_matrix(task.test, a.graph, space, table, a.aliases, exec);
      save_matrix(test, meta, test_matrix_path(cfg));
      log_matrix(log, "test", test);
    }
  } else {
    const PreparedCorpus corpus =
        prepare_corpus(load_corpus(cfg.corpus), load_stopwords(cfg.stopwords), exec);
    const TextFeatureSpace space =
        build_text_space(corpus, a.graph, a.spec, cfg.k, cfg.log_base);
    const FeatureMeta meta = make_meta(cfg, space.vocabulary, space.norm_lo, space.norm_hi,
                                       space.degenerate, space.idf);

    const FeatureMatrix train = build_text_matrix(task.train, corpus, space, a.aliases, exec);
    save_matrix(train, meta, train_matrix_path(cfg));
    log << " documents=" << corpus.docs() << " columns=" << space.cols();
    log_matrix(log, "train", train);
    if (!task.test.empty()) {
      const FeatureMatrix test = build_text_matrix(task.test, corpus, space, a.aliases, exec);
      save_matrix(test, meta, test_matrix_path(cfg));
      log_matrix(log, "test", test);
    }
  }
  log << '\n';
}

void train_model(const std::string& matrix_path, const std::string& learner,
                 std::vector<double> grid, std::size_t folds, std::uint64_t fold_seed,
                 std::uint64_t model_seed, int tolerance, const std::string& model_out, Exec exec,
                 std::ostream& log) {
  if (learner != "olr" && learner != "forest")
    throw config_error("learner must be olr or forest");
  if (grid.empty()) grid = default_grid(learner);

  const LoadedMatrix loaded = load_matrix(matrix_path);
  if (!loaded.matrix.all_labeled())
    throw config_error("training matrix " + matrix_path + " has rows without scores");

  std::vector<std::size_t> resolved;
  for (std::size_t i = 0; i < loaded.matrix.rows(); ++i)
    if (loaded.matrix.meta(i).resolved) resolved.push_back(i);
  if (resolved.empty())
    throw config_error("training matrix " + matrix_path + " has no resolved rows");
  const std::size_t excluded = loaded.matrix.rows() - resolved.size();
  const FeatureMatrix X = loaded.matrix.select(resolved);
  const std::span<const int> y = X.labels();

  ModelFile file;
  file.features = loaded.meta;
  file.train.learner = learner;
  file.train.grid = grid;
  file.train.folds = folds;
  file.train.seed = fold_seed;
  file.train.tolerance = tolerance;

  if (learner == "olr") {
    const OlrLearner olr{};
    const auto result = grid_search(X, y, olr, std::span<const double>(grid), folds, fold_seed,
                                    tolerance, exec);
    file.train.best_hyper = result.best;
    file.train.cv_accuracy = result.best_score;
    file.train.cv_scores = result.scores;
    file.model = result.model;
  } else {
    std::vector<std::uint32_t> sizes;
    for (double v : grid) {
      if (v < 1 || v != std::floor(v))
        throw config_error("forest grid values must be positive integers");
      sizes.push_back(static_cast<std::uint32_t>(v));
    }
    const ForestLearner forest{ForestConfig{model_seed, 1, exec}};
    const auto result = grid_search(X, y, forest, std::span<const std::uint32_t>(sizes), folds,
                                    fold_seed, tolerance, exec);
    file.train.best_hyper = static_cast<double>(result.best);
    file.train.cv_accuracy = result.best_score;
    file.train.cv_scores = result.scores;
    file.model = result.model;
  }

  save_model(file, model_out);
  log << "[train] rows=" << X.rows() << " excluded_unresolved=" << excluded
      << " learner=" << learner << " grid=" << grid.size() << " folds=" << folds
      << " best=" << fmt_g(file.train.best_hyper)
      << " cv_accuracy=" << fmt_g(file.train.cv_accuracy) << '\n';
}

void stage_train(const PipelineConfig& cfg, Exec exec, std::ostream& log) {
  ensure_out_dir(cfg);
  train_model(train_matrix_path(cfg), cfg.learner, cfg.grid, cfg.folds, cfg.seeds.data,
              cfg.seeds.model, cfg.tolerance, model_path(cfg), exec, log);
}

void score_matrix(const std::string& model_path_in, const std::string& matrix_path,
                  std::uint64_t fallback_seed, const std::string& predictions_out,
                  std::ostream& log) {
  const ModelFile file = load_model(model_path_in);
  const LoadedMatrix loaded = load_matrix(matrix_path);
  if (loaded.meta.mode != file.features.mode || loaded.meta.columns != file.features.columns)
    throw config_error("matrix " + matrix_path + " was built against a different feature space "
                       "than model " + model_path_in);

  const std::vector<Prediction> preds = score_rows(loaded.matrix, file.model, fallback_seed);
  write_predictions(preds, predictions_out, fallback_seed);
  const std::size_t fallback = static_cast<std::size_t>(std::count_if(
      preds.begin(), preds.end(), [](const Prediction& p) { return p.via_fallback; }));
  log << "[score] rows=" << preds.size() << " fallback=" << fallback
      << " learner=" << file.train.learner << '\n';
}

void stage_score(const PipelineConfig& cfg, Exec exec, std::ostream& log) {
  (void)exec;
  ensure_out_dir(cfg);
  if (cfg.test_tsv.empty()) throw config_error("config has no paths.test to score");
  score_matrix(model_path(cfg), test_matrix_path(cfg), cfg.seeds.fallback,
               predictions_path(cfg), log);
}

EvaluationReport evaluate_predictions(const std::string& pred_path, const std::string& gold_path,
                                      int tolerance, const std::string& report_txt,
                                      const std::string& report_kv, std::ostream& log) {
  std::vector<Prediction> preds = gold_path.empty() ? read_predictions(pred_path)
                                                    : join_predictions(pred_path, gold_path);
  for (const Prediction& p : preds)
    if (p.gold == kNoScore)
      throw config_error("predictions in " + pred_path + " carry no gold scores to evaluate");
  if (preds.empty()) throw config_error("no predictions in " + pred_path);

  const EvaluationReport report = evaluate(preds, tolerance);
  if (!report_txt.empty()) write_file(report_txt, format_report(report));
  if (!report_kv.empty()) write_file(report_kv, format_report_kv(report));
  log << "[evaluate] n=" << report.n << " fallback=" << report.n_fallback
      << " accuracy=" << fmt_g(report.accuracy)
      << " avg_score_diff=" << fmt_g(report.avg_score_diff)
      << " kendall_tau=" << fmt_g(report.kendall_tau) << '\n';
  return report;
}

EvaluationReport stage_evaluate(const PipelineConfig& cfg, Exec exec, std::ostream& log) {
  (void)exec;
  ensure_out_dir(cfg);
  return evaluate_predictions(predictions_path(cfg), "", cfg.tolerance, report_path(cfg),
                              report_kv_path(cfg), log);
}

namespace {

void check_exists(const std::string& path, const std::string& what) {
  if (!path.empty() && !fs::exists(path))
    throw config_error("config: " + what + " \"" + path + "\" does not exist");
}

}  // namespace

EvaluationReport run_pipeline(const PipelineConfig& cfg, Exec exec, std::ostream& log) {
  for (const std::string& in : cfg.inputs) check_exists(in, "input dump");
  check_exists(cfg.train_tsv, "training file");
  check_exists(cfg.test_tsv, "test file");
  check_exists(cfg.aliases, "alias table");
  check_exists(cfg.corpus, "corpus");
  check_exists(cfg.stopwords, "stopword list");
  if (cfg.test_tsv.empty()) throw config_error("run needs paths.test for scoring/evaluation");

  ensure_out_dir(cfg);
  const std::string marker = failure_marker_path(cfg);
  std::error_code ec;
  fs::remove(marker, ec);

  const char* stage = "ingest";
  try {
    stage_ingest(cfg, exec, log);
    stage = "activities";
    stage_activities(cfg, exec, log);
    stage = "featurize";
    stage_featurize(cfg, exec, log);
    stage = "train";
    stage_train(cfg, exec, log);
    stage = "score";
    stage_score(cfg, exec, log);
    stage = "evaluate";
    return stage_evaluate(cfg, exec, log);
  } catch (const std::exception& e) {
    write_file(marker, std::string(stage) + "\n" + e.what() + "\n");
    throw;
  }
}

}  // namespace relsifter
