#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "laburst/dataset.hpp"
#include "laburst/ensemble.hpp"
#include "laburst/message.hpp"
#include "laburst/windowing.hpp"

namespace laburst {

// One word per line, UTF-8; blank lines and lines starting with '#' skipped.
std::unordered_set<std::string> load_wordlist(const std::string& path);
// Same file format, file order preserved (for rank-sensitive consumers).
std::vector<std::string> load_wordlist_ordered(const std::string& path);
// stopwords_en.txt / stopwords_es.txt under the built-in data directory.
std::unordered_set<std::string> default_stopwords();
std::vector<std::string> default_stopwords_ordered();

struct TrainingSetOptions {
  StreamConfig stream;
  CandidateFilter filter;
  int tau = 2;  // a seed bursting in [t, t+tau] of a moment is a positive
  double negative_window_fraction = 1.0;  // uniform sample of windows
  std::uint64_t rng_seed = 0;
  bool quiet = false;
};

struct TrainingSet {
  std::vector<LabeledExample> examples;
  std::uint64_t positives = 0;
  std::uint64_t negatives = 0;
};

// Positives: feature vectors of seed tokens at candidate windows within
// [t, t+tau] of a ground-truth moment. Negatives: stop-word feature vectors
// at a uniform sample of windows. Throws std::runtime_error when no positive
// examples can be harvested.
TrainingSet build_training_set(const std::vector<Message>& stream,
                               const std::set<std::int64_t>& moments,
                               const std::vector<std::string>& seed_tokens,
                               const std::unordered_set<std::string>& stopwords,
                               const TrainingSetOptions& options);

// Exhaustive hyperparameter grids, powers of two.
struct GridSpec {
  std::vector<double> svm_c;
  std::vector<double> svm_gamma;
  std::vector<int> forest_trees;
  std::vector<int> forest_features;

  static GridSpec defaults();  // c, gamma = 2^-2..2^10; trees = 2^0..2^10,
                               // features = 2^1..2^12
};

struct CvResult {
  std::vector<double> fold_aucs;
  double mean_auc = 0.0;
  std::map<std::string, double> params;
};

struct GridCell {
  std::string family;
  std::map<std::string, double> params;
  double mean_auc = 0.0;
};

struct GridSearchResult {
  std::optional<CvResult> best_svm;
  std::optional<CvResult> best_forest;
  std::vector<GridCell> cells;
  int folds_used = 0;
};

// Stratified fold assignment, deterministic under seed.
std::vector<int> stratified_folds(std::span<const int> labels, int folds,
                                  std::uint64_t seed);

enum class GridFamily { Svm, Forest, Both };

// 10-fold cross-validated AUC over every grid cell. Fewer than `folds`
// examples in a class reduces the fold count with a stderr warning.
GridSearchResult grid_search(const Dataset& data, const GridSpec& grid,
                             GridFamily family = GridFamily::Both,
                             int folds = 10, std::uint64_t seed = 0,
                             int threads = 1);

struct SelfTrainResult {
  EnsembleModel model;
  std::vector<LabeledExample> added;  // provenance SelfTrain
};

// One round by default: unlabeled candidates scoring >= theta join the
// positives and the ensemble is retrained on the expanded set.
SelfTrainResult self_train(const EnsembleModel& model,
                           const std::vector<LabeledExample>& labeled,
                           const std::vector<CandidateSet>& unlabeled,
                           double theta, int rounds, const AdaBoostConfig& cfg,
                           int threads = 1);

// Feature dump: window_end_time, token, 12 raw columns, 12 normalized
// columns. The training-set format appends label and provenance.
void write_feature_csv_header(std::ostream& out, bool labeled);
void write_feature_csv_row(std::ostream& out, std::int64_t window_end,
                           const std::string& token,
                           const std::array<double, kFeatureCount>& raw,
                           const std::array<double, kFeatureCount>& normalized,
                           const std::optional<LabeledExample>& label);
std::vector<LabeledExample> read_training_csv(const std::string& path);
void write_training_csv(const std::string& path,
                        std::span<const LabeledExample> examples);

}  // namespace laburst
