#include "relsifter/model_io.hpp"

#include <json.hpp>

#include "meta_json.hpp"
#include "relsifter/errors.hpp"
#include "relsifter/util.hpp"

namespace relsifter {

namespace {

nlohmann::json olr_to_json(const OrdinalModel& m) {
  nlohmann::json j;
  j["weights"] = m.weights;
  j["thresholds"] = m.thresholds;
  j["alpha"] = m.alpha;
  j["converged"] = m.converged;
  j["iterations"] = m.iterations;
  return j;
}

OrdinalModel olr_from_json(const nlohmann::json& j) {
  OrdinalModel m;
  m.weights = j.at("weights").get<std::vector<double>>();
  m.thresholds = j.at("thresholds").get<std::vector<double>>();
  m.alpha = j.at("alpha").get<double>();
  m.converged = j.at("converged").get<bool>();
  m.iterations = j.at("iterations").get<int>();
  if (m.thresholds.size() != kNumThresholds) throw format_error("model: expected 7 thresholds");
  return m;
}

nlohmann::json forest_to_json(const ForestModel& m) {
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& tree : m.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& n : tree.nodes)
      // compact tuple layout: [feature, threshold, left, right, counts]
      nodes.push_back(nlohmann::json::array(
          {n.feature, n.threshold, n.left, n.right, nlohmann::json(n.counts)}));
    trees.push_back(std::move(nodes));
  }
  nlohmann::json j;
  j["seed"] = m.seed;
  j["n_estimators"] = m.n_estimators;
  j["trees"] = std::move(trees);
  return j;
}

ForestModel forest_from_json(const nlohmann::json& j) {
  ForestModel m;
  m.seed = j.at("seed").get<std::uint64_t>();
  m.n_estimators = j.at("n_estimators").get<std::uint32_t>();
  for (const auto& tj : j.at("trees")) {
    Tree tree;
    for (const auto& nj : tj) {
      if (!nj.is_array() || nj.size() != 5) throw format_error("model: bad tree node");
      TreeNode n;
      n.feature = nj[0].get<std::int32_t>();
      n.threshold = nj[1].get<double>();
      n.left = nj[2].get<std::int32_t>();
      n.right = nj[3].get<std::int32_t>();
      const auto counts = nj[4].get<std::vector<std::uint32_t>>();
      if (counts.size() != kNumScores) throw format_error("model: bad leaf counts");
      std::copy(counts.begin(), counts.end(), n.counts.begin());
      tree.nodes.push_back(n);
    }
    if (tree.nodes.empty()) throw format_error("model: empty tree");
    m.trees.push_back(std::move(tree));
  }
  if (m.trees.size() != m.n_estimators) throw format_error("model: tree count mismatch");
  return m;
}

}  // namespace

void save_model(const ModelFile& file, const std::string& path) {
  nlohmann::json j;
  j["version"] = file.version;
  j["features"] = detail::meta_to_json(file.features);

  if (const auto* olr = std::get_if<OrdinalModel>(&file.model)) {
    j["learner"] = "olr";
    j["olr"] = olr_to_json(*olr);
  } else {
    j["learner"] = "forest";
    j["forest"] = forest_to_json(std::get<ForestModel>(file.model));
  }

  nlohmann::json t;
  t["learner"] = file.train.learner;
  t["best_hyper"] = file.train.best_hyper;
  t["cv_accuracy"] = file.train.cv_accuracy;
  t["grid"] = file.train.grid;
  t["cv_scores"] = file.train.cv_scores;
  t["folds"] = file.train.folds;
  t["seed"] = file.train.seed;
  t["tolerance"] = file.train.tolerance;
  j["train"] = std::move(t);

  write_file(path, j.dump(2) + "\n");
}

ModelFile load_model(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw format_error("bad model file " + path + ": " + std::string(e.what()));
  }

  try {
    ModelFile file;
    file.version = j.at("version").get<int>();
    if (file.version != 1) throw format_error("unsupported model version");
    file.features = detail::meta_from_json(j.at("features"));

    const std::string learner = j.at("learner").get<std::string>();
    if (learner == "olr") {
      file.model = olr_from_json(j.at("olr"));
    } else if (learner == "forest") {
      file.model = forest_from_json(j.at("forest"));
    } else {
      throw format_error("unknown learner: " + learner);
    }

    const auto& t = j.at("train");
    file.train.learner = t.at("learner").get<std::string>();
    file.train.best_hyper = t.at("best_hyper").get<double>();
    file.train.cv_accuracy = t.at("cv_accuracy").get<double>();
    file.train.grid = t.at("grid").get<std::vector<double>>();
    file.train.cv_scores = t.at("cv_scores").get<std::vector<double>>();
    file.train.folds = t.at("folds").get<std::size_t>();
    file.train.seed = t.at("seed").get<std::uint64_t>();
    file.train.tolerance = t.at("tolerance").get<int>();
    return file;
  } catch (const nlohmann::json::exception& e) {
    throw format_error("bad model file " + path + ": " + std::string(e.what()));
  }
}

}  // namespace relsifter
