#include "laburst/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "json.hpp"

#include "laburst/rng.hpp"

namespace laburst {
namespace {

constexpr double kScoreEps = 1e-7;

double logit(double p) {
  const double q = std::clamp(p, kScoreEps, 1.0 - kScoreEps);
  return std::log(q / (1.0 - q));
}

double stage_vote(const EnsembleModel::Stage& stage,
                  std::span<const double> x) {
  if (const auto* forest = std::get_if<ForestModel>(&stage.base)) {
    return logit(forest->predict_score(x));
  }
  return std::get<SvmModel>(stage.base).decision(x);
}

bool stage_classify(const EnsembleModel::Stage& stage,
                    std::span<const double> x) {
  if (const auto* forest = std::get_if<ForestModel>(&stage.base)) {
    return forest->classify(x);
  }
  return std::get<SvmModel>(stage.base).classify(x);
}

}  // namespace

double EnsembleModel::predict_score(std::span<const double> x) const {
  double weight_sum = 0.0;
  double vote_sum = 0.0;
  for (const Stage& s : stages) {
    if (s.weight <= 0.0) continue;
    weight_sum += s.weight;
    vote_sum += s.weight * stage_vote(s, x);
  }
  if (weight_sum <= 0.0) return 0.5;
  return 1.0 / (1.0 + std::exp(-vote_sum / weight_sum));
}

EnsembleModel train_adaboost(const Dataset& data, const AdaBoostConfig& cfg,
                             std::span<const int> feature_mask, int threads) {
  if (!data.has_both_classes()) {
    throw std::invalid_argument("train_adaboost: both classes required");
  }
  EnsembleModel model;
  model.cfg = cfg;
  if (feature_mask.empty()) {
    for (std::size_t i = 0; i < data.dims; ++i) {
      model.feature_mask.push_back(static_cast<int>(i));
    }
  } else {
    model.feature_mask.assign(feature_mask.begin(), feature_mask.end());
  }

  const std::size_t n = data.rows();
  std::vector<double> weights(n, 1.0 / static_cast<double>(n));

  for (int s = 0; s < cfg.n_stages; ++s) {
    EnsembleModel::Stage stage;
    if (s % 2 == 0) {
      ForestConfig fc = cfg.forest;
      fc.rng_seed = Rng::mix(cfg.rng_seed, 1000 + s);
      // Stage 1 weights are uniform, so this is a plain bootstrap there.
      stage.base = train_forest(data, fc, model.feature_mask, weights,
                                threads);
    } else {
      stage.base = train_svm_rbf(data, cfg.svm, model.feature_mask, weights);
    }

    std::vector<char> miss(n);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool bursty = stage_classify(stage, data.row(i));
      miss[i] = bursty != (data.y[i] > 0);
      if (miss[i]) err += weights[i];
    }

    if (err >= 0.5) {
      std::cerr << "adaboost: stage " << s << " weighted error " << err
                << " >= 0.5; stage skipped\n";
      stage.weight = 0.0;
      model.stages.push_back(std::move(stage));
      continue;
    }
    const double clamped = std::clamp(err, 1e-10, 1.0 - 1e-10);
    stage.weight = std::log((1.0 - clamped) / clamped);

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (miss[i]) weights[i] *= std::exp(stage.weight);
      total += weights[i];
    }
    for (double& w : weights) w /= total;
    model.stages.push_back(std::move(stage));
  }
  return model;
}

namespace {

using nlohmann::json;

json forest_to_json(const ForestModel& m) {
  json trees = json::array();
  for (const Tree& t : m.trees) {
    json nodes = json::array();
    for (const TreeNode& n : t.nodes) {
      nodes.push_back(
          json::array({n.feature, n.threshold, n.left, n.right,
                       n.leaf_fraction}));
    }
    trees.push_back(std::move(nodes));
  }
  return json{{"n_trees", m.cfg.n_trees},
              {"max_features", m.cfg.max_features},
              {"rng_seed", m.cfg.rng_seed},
              {"dims", m.dims},
              {"feature_mask", m.feature_mask},
              {"trees", std::move(trees)}};
}

ForestModel forest_from_json(const json& j) {
  ForestModel m;
  m.cfg.n_trees = j.at("n_trees").get<int>();
  m.cfg.max_features = j.at("max_features").get<int>();
  m.cfg.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  m.dims = j.at("dims").get<std::size_t>();
  m.feature_mask = j.at("feature_mask").get<std::vector<int>>();
  for (const auto& jt : j.at("trees")) {
    Tree t;
    for (const auto& jn : jt) {
      TreeNode n;
      n.feature = jn.at(0).get<int>();
      n.threshold = jn.at(1).get<double>();
      n.left = jn.at(2).get<std::int32_t>();
      n.right = jn.at(3).get<std::int32_t>();
      n.leaf_fraction = jn.at(4).get<double>();
      t.nodes.push_back(n);
    }
    m.trees.push_back(std::move(t));
  }
  return m;
}

json svm_to_json(const SvmModel& m) {
  return json{{"c", m.cfg.c},
              {"gamma", m.cfg.gamma},
              {"tol", m.cfg.tol},
              {"max_passes", m.cfg.max_passes},
              {"dims", m.dims},
              {"feature_mask", m.feature_mask},
              {"support_vectors", m.support_vectors},
              {"coef", m.coef},
              {"bias", m.bias},
              {"converged", m.converged}};
}

SvmModel svm_from_json(const json& j) {
  SvmModel m;
  m.cfg.c = j.at("c").get<double>();
  m.cfg.gamma = j.at("gamma").get<double>();
  m.cfg.tol = j.at("tol").get<double>();
  m.cfg.max_passes = j.at("max_passes").get<int>();
  m.dims = j.at("dims").get<std::size_t>();
  m.feature_mask = j.at("feature_mask").get<std::vector<int>>();
  m.support_vectors =
      j.at("support_vectors").get<std::vector<std::vector<double>>>();
  m.coef = j.at("coef").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  m.converged = j.at("converged").get<bool>();
  return m;
}

}  // namespace

std::string model_to_json(const EnsembleModel& model) {
  json stages = json::array();
  for (const auto& s : model.stages) {
    json js{{"weight", s.weight}};
    if (const auto* forest = std::get_if<ForestModel>(&s.base)) {
      js["kind"] = "forest";
      js["forest"] = forest_to_json(*forest);
    } else {
      js["kind"] = "svm";
      js["svm"] = svm_to_json(std::get<SvmModel>(s.base));
    }
    stages.push_back(std::move(js));
  }
  const json doc{{"schema_version", kModelSchemaVersion},
                 {"feature_mask", model.feature_mask},
                 {"n_stages", model.cfg.n_stages},
                 {"rng_seed", model.cfg.rng_seed},
                 {"stages", std::move(stages)}};
  return doc.dump();
}

EnsembleModel model_from_json(const std::string& text) {
  const json doc = json::parse(text);
  const int version = doc.at("schema_version").get<int>();
  if (version != kModelSchemaVersion) {
    throw std::runtime_error("unsupported model schema version " +
                             std::to_string(version));
  }
  EnsembleModel model;
  model.feature_mask = doc.at("feature_mask").get<std::vector<int>>();
  model.cfg.n_stages = doc.at("n_stages").get<int>();
  model.cfg.rng_seed = doc.at("rng_seed").get<std::uint64_t>();
  for (const auto& js : doc.at("stages")) {
    EnsembleModel::Stage stage;
    stage.weight = js.at("weight").get<double>();
    if (js.at("kind").get<std::string>() == "forest") {
      ForestModel f = forest_from_json(js.at("forest"));
      model.cfg.forest = f.cfg;
      stage.base = std::move(f);
    } else {
      SvmModel m = svm_from_json(js.at("svm"));
      model.cfg.svm = m.cfg;
      stage.base = std::move(m);
    }
    model.stages.push_back(std::move(stage));
  }
  return model;
}

void save_model(const EnsembleModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model: " + path);
  out << model_to_json(model) << '\n';
}

EnsembleModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read model: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return model_from_json(text);
}

}  // namespace laburst
