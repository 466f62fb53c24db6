#ifndef RELSIFTER_MODEL_IO_HPP
#define RELSIFTER_MODEL_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "relsifter/evaluation.hpp"
#include "relsifter/features.hpp"

namespace relsifter {

// Grid-search provenance stored alongside the model.
struct TrainInfo {
  std::string learner;  // "olr" | "forest"
  double best_hyper = 0;
  double cv_accuracy = 0;
  std::vector<double> grid;
  std::vector<double> cv_scores;  // parallel to grid
  std::size_t folds = 0;
  std::uint64_t seed = 0;
  int tolerance = 2;
};

// Versioned model file: the fitted parameters plus everything needed to
// rebuild the exact feature space the model was trained against.
struct ModelFile {
  int version = 1;
  FeatureMeta features;
  AnyModel model;
  TrainInfo train;
};

// JSON, doubles serialized in shortest round-trip form; save(load(f))
// reproduces f byte for byte.
void save_model(const ModelFile& file, const std::string& path);
ModelFile load_model(const std::string& path);

}  // namespace relsifter

#endif
