#include <cstdint>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "relsifter/errors.hpp"
#include "relsifter/exec.hpp"
#include "relsifter/kg.hpp"
#include "relsifter/pertinence.hpp"
#include "relsifter/pipeline.hpp"
#include "relsifter/util.hpp"

namespace {

using namespace relsifter;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;     // bad files, bad config, bad CLI usage
constexpr int kExitInternal = 2;  // broken invariants, unexpected failures

struct CommonOpts {
  std::string config;
  std::string out_dir;
  std::string mode;
  std::string learner;
  std::uint32_t k = 0;
  std::size_t folds = 0;
  bool has_seed = false;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required) {
  auto* c = cmd->add_option("-c,--config", opts.config, "pipeline config file");
  if (config_required) c->required();
  cmd->add_option("--out-dir", opts.out_dir, "override paths.out_dir");
  cmd->add_option("--mode", opts.mode, "override feature mode (kg|text)")
      ->check(CLI::IsMember({"kg", "text"}));
  cmd->add_option("--learner", opts.learner, "override learner (olr|forest)")
      ->check(CLI::IsMember({"olr", "forest"}));
  cmd->add_option("--k", opts.k, "override top-k activity count");
  cmd->add_option("--folds", opts.folds, "override fold count");
  cmd->add_option_function<std::uint64_t>(
         "--seed",
         [&opts](std::uint64_t v) {
           opts.has_seed = true;
           opts.seed = v;
         },
         "override all three seeds (data, model, fallback)");
}

PipelineConfig load_with_overrides(const CommonOpts& opts) {
  PipelineConfig cfg = load_config(opts.config);
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  if (!opts.mode.empty()) cfg.mode = opts.mode;
  if (!opts.learner.empty()) cfg.learner = opts.learner;
  if (opts.k != 0) cfg.k = opts.k;
  if (opts.folds != 0) cfg.folds = opts.folds;
  if (opts.has_seed) cfg.seeds = {opts.seed, opts.seed, opts.seed};
  if (cfg.mode == "text" && (cfg.corpus.empty() || cfg.stopwords.empty()))
    throw config_error("text mode requires paths.corpus and paths.stopwords");
  return cfg;
}

// Stage wrapper: record which stage failed next to its partial artifacts.
template <class F>
auto with_marker(const char* stage, const PipelineConfig& cfg, F&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    try {
      write_file(failure_marker_path(cfg), std::string(stage) + "\n" + e.what() + "\n");
    } catch (...) {
      // the marker is best-effort; the original error matters more
    }
    throw;
  }
}

DumpFormat parse_format(const std::string& name) {
  if (name == "tsv") return DumpFormat::tsv;
  if (name == "nt" || name == "ntriples") return DumpFormat::ntriples;
  throw config_error("format must be tsv or nt");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relevance scoring for type-like-relation triples"};
  app.require_subcommand(1);

  int threads = 0;
  bool serial = false;
  app.add_option("--threads", threads, "worker thread count (0 = library default)");
  app.add_flag("--serial", serial, "run the serial reference implementations");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "parse triple dumps into a graph snapshot");
  CommonOpts ingest_common;
  add_common(ingest, ingest_common, false);
  std::vector<std::string> ingest_inputs;
  std::string ingest_format = "tsv", ingest_out;
  ingest->add_option("dumps", ingest_inputs, "triple dump files");
  ingest->add_option("--input", ingest_inputs, "triple dump file (repeatable)");
  ingest->add_option("--format", ingest_format, "dump format (tsv|nt)")
      ->check(CLI::IsMember({"tsv", "nt", "ntriples"}));
  ingest->add_option("--out", ingest_out, "graph snapshot output path");

  // activities
  auto* activities = app.add_subcommand("activities", "rank activities by pertinence");
  CommonOpts activities_common;
  add_common(activities, activities_common, false);
  std::string act_graph, act_relation, act_predicate, act_out;
  activities->add_option("--graph", act_graph, "graph snapshot");
  activities->add_option("--relation", act_relation, "relation name for the table");
  activities->add_option("--predicate", act_predicate, "type-like-relation predicate");
  activities->add_option("--out", act_out, "ranking table output path");

  // featurize
  auto* featurize = app.add_subcommand("featurize", "build train/test feature matrices");
  CommonOpts featurize_common;
  add_common(featurize, featurize_common, true);

  // train
  auto* train = app.add_subcommand("train", "grid-searched cross-validated model fit");
  CommonOpts train_common;
  add_common(train, train_common, false);
  std::string train_matrix, train_learner, train_out;
  std::vector<double> train_grid;
  std::size_t train_folds = 10;
  std::uint64_t train_seed = 13;
  int train_tolerance = 2;
  train->add_option("--matrix", train_matrix, "training matrix path");
  train->add_option("--grid", train_grid, "hyperparameter grid (comma separated)")
      ->delimiter(',');
  train->add_option("--out", train_out, "model output path");
  train->add_option("--tolerance", train_tolerance, "task accuracy tolerance");

  // score
  auto* score = app.add_subcommand("score", "apply a model to a feature matrix");
  CommonOpts score_common;
  add_common(score, score_common, false);
  std::string score_model, score_matrix_path, score_out;
  score->add_option("--model", score_model, "model file");
  score->add_option("--matrix", score_matrix_path, "feature matrix to score");
  score->add_option("--out", score_out, "predictions output path");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "task metrics over predictions");
  CommonOpts evaluate_common;
  add_common(evaluate, evaluate_common, false);
  std::string eval_pred, eval_gold, eval_txt, eval_kv;
  int eval_tolerance = 2;
  evaluate->add_option("--pred", eval_pred, "predictions file");
  evaluate->add_option("--gold", eval_gold, "gold labels (person<TAB>object<TAB>score)");
  evaluate->add_option("--tolerance", eval_tolerance, "task accuracy tolerance");
  evaluate->add_option("--report-txt", eval_txt, "write the text report here");
  evaluate->add_option("--report-kv", eval_kv, "write the key-value report here");

  // run
  auto* run = app.add_subcommand("run", "full pipeline: ingest through evaluate");
  CommonOpts run_common;
  add_common(run, run_common, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints message or help text
    return code == 0 ? kExitOk : kExitInput;
  }

  const Exec exec = serial ? Exec::serial : Exec::parallel;
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif
  std::ostream& log = std::cerr;

  try {
    if (ingest->parsed()) {
      if (!ingest_common.config.empty()) {
        const PipelineConfig cfg = load_with_overrides(ingest_common);
        with_marker("ingest", cfg, [&] { stage_ingest(cfg, exec, log); });
      } else {
        if (ingest_inputs.empty() || ingest_out.empty())
          throw config_error("ingest needs --config, or --input and --out");
        ParseStats stats;
        const KnowledgeGraph g =
            parse_dump_files(ingest_inputs, parse_format(ingest_format), &stats, exec);
        save_graph(g, ingest_out);
        log << "[ingest] files=" << ingest_inputs.size() << " lines=" << stats.lines
            << " parsed=" << stats.parsed << " malformed=" << stats.malformed
            << " duplicates=" << stats.duplicates << " triples=" << g.triples().size() << '\n';
      }
    } else if (activities->parsed()) {
      if (!activities_common.config.empty()) {
        const PipelineConfig cfg = load_with_overrides(activities_common);
        with_marker("activities", cfg, [&] { stage_activities(cfg, exec, log); });
      } else {
        if (act_graph.empty() || act_predicate.empty() || act_out.empty())
          throw config_error("activities needs --config, or --graph, --predicate and --out");
        const KnowledgeGraph g = load_graph(act_graph);
        TlrSpec spec;
        spec.relation_name = act_relation.empty() ? act_predicate : act_relation;
        const auto pred = g.predicates().lookup(act_predicate);
        if (!pred) throw config_error("predicate not in graph: " + act_predicate);
        spec.tlr_predicate = *pred;
        spec.objects = objects_of(g, spec.tlr_predicate);
        const auto universe = tlr_universe(g, spec.tlr_predicate);
        PertinenceTable table = collect_stats(g, spec, universe, exec);
        compute_pertinence(table, {}, exec);
        const std::uint32_t k = activities_common.k != 0 ? activities_common.k : 5;
        std::ostringstream body;
        write_table_tsv(table, k, body);
        write_file(act_out, body.str());
        log << "[activities] objects=" << table.objects.size() << " k=" << k << '\n';
      }
    } else if (featurize->parsed()) {
      const PipelineConfig cfg = load_with_overrides(featurize_common);
      with_marker("featurize", cfg, [&] { stage_featurize(cfg, exec, log); });
    } else if (train->parsed()) {
      if (!train_common.config.empty()) {
        PipelineConfig cfg = load_with_overrides(train_common);
        if (!train_grid.empty()) cfg.grid = train_grid;
        with_marker("train", cfg, [&] { stage_train(cfg, exec, log); });
      } else {
        if (train_matrix.empty() || train_common.learner.empty() || train_out.empty())
          throw config_error("train needs --config, or --matrix, --learner and --out");
        if (train_common.folds != 0) train_folds = train_common.folds;
        if (train_common.has_seed) train_seed = train_common.seed;
        train_model(train_matrix, train_common.learner, train_grid, train_folds, train_seed,
                    train_seed, train_tolerance, train_out, exec, log);
      }
    } else if (score->parsed()) {
      if (!score_common.config.empty()) {
        const PipelineConfig cfg = load_with_overrides(score_common);
        with_marker("score", cfg, [&] { stage_score(cfg, exec, log); });
      } else {
        if (score_model.empty() || score_matrix_path.empty() || score_out.empty())
          throw config_error("score needs --config, or --model, --matrix and --out");
        const std::uint64_t seed = score_common.has_seed ? score_common.seed : 19;
        score_matrix(score_model, score_matrix_path, seed, score_out, log);
      }
    } else if (evaluate->parsed()) {
      if (!evaluate_common.config.empty()) {
        const PipelineConfig cfg = load_with_overrides(evaluate_common);
        const EvaluationReport r =
            with_marker("evaluate", cfg, [&] { return stage_evaluate(cfg, exec, log); });
        std::cout << format_report(r);
      } else {
        if (eval_pred.empty()) throw config_error("evaluate needs --config or --pred");
        const EvaluationReport r =
            evaluate_predictions(eval_pred, eval_gold, eval_tolerance, eval_txt, eval_kv, log);
        std::cout << format_report(r);
      }
    } else if (run->parsed()) {
      const PipelineConfig cfg = load_with_overrides(run_common);
      const EvaluationReport r = run_pipeline(cfg, exec, log);
      std::cout << format_report(r);
    }
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const format_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}
