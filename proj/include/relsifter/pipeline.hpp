#ifndef RELSIFTER_PIPELINE_HPP
#define RELSIFTER_PIPELINE_HPP

#include <cstdint>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "relsifter/evaluation.hpp"
#include "relsifter/exec.hpp"
#include "relsifter/kg.hpp"

namespace relsifter {

struct Seeds {
  std::uint64_t data = 13;      // fold shuffling
  std::uint64_t model = 17;     // forest bootstraps/splits
  std::uint64_t fallback = 19;  // random predictions for unresolved rows
};

struct PipelineConfig {
  int version = 1;
  std::string relation;   // e.g. "profession"
  std::string predicate;  // the type-like relation's predicate string
  std::string mode = "kg";  // kg | text
  std::uint32_t k = 5;
  double log_base = std::numbers::e;
  bool swap_counters = false;
  std::string learner = "olr";  // olr | forest
  std::vector<double> grid;     // empty -> per-learner default
  std::size_t folds = 10;
  int tolerance = 2;
  Seeds seeds;
  std::vector<std::string> universe_extras;

  // paths (relative entries are resolved against the config file's
  // directory at load time)
  std::vector<std::string> inputs;  // triple dumps
  DumpFormat format = DumpFormat::tsv;
  std::string train_tsv;
  std::string test_tsv;    // optional ("" = no test stage artifacts)
  std::string aliases;     // optional
  std::string corpus;      // text mode
  std::string stopwords;   // text mode
  std::string out_dir;
};

// JSON config, versioned schema; unknown keys are rejected so typos fail
// loudly. Throws config_error / format_error / io_error.
PipelineConfig load_config(const std::string& path);

// Artifact locations under cfg.out_dir.
std::string graph_path(const PipelineConfig& cfg);
std::string activities_path(const PipelineConfig& cfg);
std::string train_matrix_path(const PipelineConfig& cfg);
std::string test_matrix_path(const PipelineConfig& cfg);
std::string model_path(const PipelineConfig& cfg);
std::string predictions_path(const PipelineConfig& cfg);
std::string report_path(const PipelineConfig& cfg);
std::string report_kv_path(const PipelineConfig& cfg);
std::string failure_marker_path(const PipelineConfig& cfg);

// Flag-driven cores shared with the CLI subcommand forms. Empty grid means
// the learner's default; empty gold_path reads gold labels from the
// prediction sidecar; empty report paths skip the file.
void train_model(const std::string& matrix_path, const std::string& learner,
                 std::vector<double> grid, std::size_t folds, std::uint64_t fold_seed,
                 std::uint64_t model_seed, int tolerance, const std::string& model_out, Exec exec,
                 std::ostream& log);
void score_matrix(const std::string& model_path_in, const std::string& matrix_path,
                  std::uint64_t fallback_seed, const std::string& predictions_out,
                  std::ostream& log);
EvaluationReport evaluate_predictions(const std::string& pred_path, const std::string& gold_path,
                                      int tolerance, const std::string& report_txt,
                                      const std::string& report_kv, std::ostream& log);

// Stages. Each reads only persisted artifacts plus config inputs and writes
// its artifacts under out_dir, so any stage can rerun standalone. `log`
// receives one structured counts line per stage.
void stage_ingest(const PipelineConfig& cfg, Exec exec, std::ostream& log);
void stage_activities(const PipelineConfig& cfg, Exec exec, std::ostream& log);
void stage_featurize(const PipelineConfig& cfg, Exec exec, std::ostream& log);
void stage_train(const PipelineConfig& cfg, Exec exec, std::ostream& log);
void stage_score(const PipelineConfig& cfg, Exec exec, std::ostream& log);
EvaluationReport stage_evaluate(const PipelineConfig& cfg, Exec exec, std::ostream& log);

// All stages in order. A failing stage leaves its name and error in
// out_dir/stage.failed (earlier artifacts are kept) and rethrows; a
// successful run removes any stale marker.
EvaluationReport run_pipeline(const PipelineConfig& cfg, Exec exec, std::ostream& log);

}  // namespace relsifter

#endif
