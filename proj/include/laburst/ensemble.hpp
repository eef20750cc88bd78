#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "laburst/forest.hpp"
#include "laburst/svm.hpp"

namespace laburst {

inline constexpr int kModelSchemaVersion = 1;

struct AdaBoostConfig {
  int n_stages = 2;  // stage 1 forest, stage 2 SVM; further stages alternate
  ForestConfig forest;
  SvmConfig svm;
  std::uint64_t rng_seed = 0;
};

// Heterogeneous two-stage boosting: a forest trained on uniform weights,
// then an SVM on data reweighted toward the forest's mistakes. Stage votes
// are log-odds (the SVM's margin, the forest's logit of its vote fraction);
// the score is the logistic of their weight-normalized sum, so an ensemble
// of identical bases scores exactly like one base.
struct EnsembleModel {
  struct Stage {
    double weight = 0.0;
    std::variant<ForestModel, SvmModel> base;
  };

  std::vector<int> feature_mask;
  std::vector<Stage> stages;
  AdaBoostConfig cfg;

  double predict_score(std::span<const double> x) const;
  bool classify(std::span<const double> x) const {
    return predict_score(x) >= 0.5;
  }
};

// Stage weight ln((1-err)/err) with err clamped to [1e-10, 1-1e-10]; a stage
// with err >= 0.5 gets weight 0 and a stderr warning. Throws on single-class
// data.
EnsembleModel train_adaboost(const Dataset& data, const AdaBoostConfig& cfg,
                             std::span<const int> feature_mask = {},
                             int threads = 1);

// Versioned JSON serialization; identical models produce identical bytes.
std::string model_to_json(const EnsembleModel& model);
EnsembleModel model_from_json(const std::string& text);
void save_model(const EnsembleModel& model, const std::string& path);
EnsembleModel load_model(const std::string& path);

}  // namespace laburst
