#include "laburst/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "laburst/eval.hpp"
#include "laburst/rng.hpp"
#include "laburst/textio.hpp"

namespace laburst {

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::Seed: return "seed";
    case Provenance::Stopword: return "stopword";
    case Provenance::SelfTrain: return "self-train";
  }
  return "?";
}

bool Dataset::has_both_classes() const {
  bool pos = false, neg = false;
  for (int label : y) {
    (label > 0 ? pos : neg) = true;
  }
  return pos && neg;
}

Dataset to_dataset(std::span<const LabeledExample> examples) {
  Dataset d;
  d.dims = kFeatureCount;
  d.x.reserve(examples.size() * kFeatureCount);
  d.y.reserve(examples.size());
  for (const auto& e : examples) {
    d.add_row(e.normalized, e.bursty ? 1 : -1);
  }
  return d;
}

std::unordered_set<std::string> load_wordlist(const std::string& path) {
  std::unordered_set<std::string> words;
  for (const auto& line : read_lines(path)) {
    if (line.empty() || line[0] == '#') continue;
    words.insert(line);
  }
  return words;
}

std::vector<std::string> load_wordlist_ordered(const std::string& path) {
  std::vector<std::string> words;
  std::unordered_set<std::string> seen;
  for (const auto& line : read_lines(path)) {
    if (line.empty() || line[0] == '#') continue;
    if (seen.insert(line).second) words.push_back(line);
  }
  return words;
}

std::unordered_set<std::string> default_stopwords() {
  auto en = load_wordlist(std::string(LABURST_DATA_DIR) + "/stopwords_en.txt");
  auto es = load_wordlist(std::string(LABURST_DATA_DIR) + "/stopwords_es.txt");
  en.insert(es.begin(), es.end());
  return en;
}

std::vector<std::string> default_stopwords_ordered() {
  auto en = load_wordlist_ordered(std::string(LABURST_DATA_DIR) +
                                  "/stopwords_en.txt");
  const auto es = load_wordlist_ordered(std::string(LABURST_DATA_DIR) +
                                        "/stopwords_es.txt");
  std::unordered_set<std::string> seen(en.begin(), en.end());
  for (const auto& w : es) {
    if (seen.insert(w).second) en.push_back(w);
  }
  return en;
}

TrainingSet build_training_set(const std::vector<Message>& stream,
                               const std::set<std::int64_t>& moments,
                               const std::vector<std::string>& seed_tokens,
                               const std::unordered_set<std::string>& stopwords,
                               const TrainingSetOptions& options) {
  const std::unordered_set<std::string> seeds(seed_tokens.begin(),
                                              seed_tokens.end());
  TrainingSet out;
  Rng rng(Rng::mix(options.rng_seed, 0x9d5));

  Windower windower(options.stream, options.filter);
  auto on_window = [&](const History& history) {
    CandidateSet cands = extract(history, options.stream, options.filter);
    if (cands.items.empty()) return;
    normalize(cands);
    const std::int64_t t = cands.end_time;

    bool near_moment = false;
    for (const std::int64_t m : moments) {
      if (t >= m && t <= m + options.tau) {
        near_moment = true;
        break;
      }
    }
    const bool sample_negatives =
        options.negative_window_fraction >= 1.0 ||
        rng.next_unit() < options.negative_window_fraction;

    for (const Candidate& c : cands.items) {
      const bool is_seed = seeds.count(c.token) > 0;
      if (is_seed && near_moment) {
        LabeledExample e;
        e.raw = c.raw.as_array();
        e.normalized = c.normalized;
        e.bursty = true;
        e.provenance = Provenance::Seed;
        e.token = c.token;
        e.window_end = t;
        out.examples.push_back(std::move(e));
        ++out.positives;
      } else if (!is_seed && sample_negatives && stopwords.count(c.token) > 0) {
        LabeledExample e;
        e.raw = c.raw.as_array();
        e.normalized = c.normalized;
        e.bursty = false;
        e.provenance = Provenance::Stopword;
        e.token = c.token;
        e.window_end = t;
        out.examples.push_back(std::move(e));
        ++out.negatives;
      }
    }
  };

  for (const Message& m : stream) windower.push(m, on_window);
  windower.finish(on_window);

  if (!options.quiet) {
    std::cerr << "training set: " << out.positives << " positive, "
              << out.negatives << " negative ("
              << out.examples.size() << " examples)\n";
  }
  if (out.positives == 0) {
    throw std::runtime_error(
        "build_training_set: no positive examples (no seed token passed the "
        "candidate filter near a ground-truth moment)");
  }
  return out;
}

GridSpec GridSpec::defaults() {
  GridSpec g;
  for (int x = -2; x <= 10; ++x) {
    g.svm_c.push_back(std::ldexp(1.0, x));
    g.svm_gamma.push_back(std::ldexp(1.0, x));
  }
  for (int x = 0; x <= 10; ++x) g.forest_trees.push_back(1 << x);
  for (int y = 1; y <= 12; ++y) g.forest_features.push_back(1 << y);
  return g;
}

std::vector<int> stratified_folds(std::span<const int> labels, int folds,
                                  std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    (labels[i] > 0 ? pos : neg).push_back(i);
  }
  Rng rng(Rng::mix(seed, 0xf01d5));
  rng.shuffle(pos);
  rng.shuffle(neg);
  std::vector<int> fold(labels.size(), 0);
  for (std::size_t i = 0; i < pos.size(); ++i) {
    fold[pos[i]] = static_cast<int>(i % folds);
  }
  for (std::size_t i = 0; i < neg.size(); ++i) {
    fold[neg[i]] = static_cast<int>(i % folds);
  }
  return fold;
}

namespace {

// Mean AUC over held-out folds for one model family + parameter set.
template <typename TrainFn, typename ScoreFn>
CvResult cross_validate(const Dataset& data, std::span<const int> fold,
                        int folds, TrainFn train, ScoreFn score) {
  CvResult result;
  for (int f = 0; f < folds; ++f) {
    Dataset train_set;
    train_set.dims = data.dims;
    std::vector<std::size_t> held;
    for (std::size_t i = 0; i < data.rows(); ++i) {
      if (fold[i] == f) held.push_back(i);
      else train_set.add_row(data.row(i), data.y[i]);
    }
    if (held.empty() || !train_set.has_both_classes()) continue;
    bool held_pos = false, held_neg = false;
    for (auto i : held) (data.y[i] > 0 ? held_pos : held_neg) = true;
    if (!held_pos || !held_neg) continue;

    auto model = train(train_set, f);
    std::vector<ScorePoint> points;
    std::set<std::int64_t> truth;
    points.reserve(held.size());
    for (std::size_t j = 0; j < held.size(); ++j) {
      const auto i = held[j];
      points.push_back({static_cast<std::int64_t>(j), score(model, data.row(i))});
      if (data.y[i] > 0) truth.insert(static_cast<std::int64_t>(j));
    }
    result.fold_aucs.push_back(roc(points, truth).auc);
  }
  if (result.fold_aucs.empty()) {
    throw std::runtime_error("cross_validate: no usable folds");
  }
  double sum = 0.0;
  for (double a : result.fold_aucs) sum += a;
  result.mean_auc = sum / static_cast<double>(result.fold_aucs.size());
  return result;
}

void run_parallel(std::size_t jobs, int threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || jobs <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const int use = std::min<int>(threads, static_cast<int>(jobs));
  pool.reserve(use);
  for (int t = 0; t < use; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace

GridSearchResult grid_search(const Dataset& data, const GridSpec& grid,
                             GridFamily family, int folds, std::uint64_t seed,
                             int threads) {
  std::size_t n_pos = 0, n_neg = 0;
  for (int y : data.y) (y > 0 ? n_pos : n_neg) += 1;
  int usable = std::min<int>(folds, static_cast<int>(std::min(n_pos, n_neg)));
  if (usable < 2) {
    throw std::invalid_argument("grid_search: need >= 2 examples per class");
  }
  if (usable < folds) {
    std::cerr << "grid_search: reducing folds from " << folds << " to "
              << usable << " (minority class too small)\n";
  }

  GridSearchResult out;
  out.folds_used = usable;
  const auto fold = stratified_folds(data.y, usable, seed);

  if (family == GridFamily::Svm || family == GridFamily::Both) {
    std::vector<GridCell> cells(grid.svm_c.size() * grid.svm_gamma.size());
    std::vector<CvResult> cvs(cells.size());
    run_parallel(cells.size(), threads, [&](std::size_t idx) {
      const double c = grid.svm_c[idx / grid.svm_gamma.size()];
      const double gamma = grid.svm_gamma[idx % grid.svm_gamma.size()];
      SvmConfig cfg;
      cfg.c = c;
      cfg.gamma = gamma;
      cvs[idx] = cross_validate(
          data, fold, usable,
          [&](const Dataset& d, int) { return train_svm_rbf(d, cfg); },
          [](const SvmModel& m, std::span<const double> x) {
            return m.predict_score(x);
          });
      cvs[idx].params = {{"c", c}, {"gamma", gamma}};
      cells[idx] = {"svm", cvs[idx].params, cvs[idx].mean_auc};
    });
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!out.best_svm || cvs[i].mean_auc > out.best_svm->mean_auc) {
        out.best_svm = cvs[i];
      }
      out.cells.push_back(std::move(cells[i]));
    }
  }

  if (family == GridFamily::Forest || family == GridFamily::Both) {
    std::vector<GridCell> cells(grid.forest_trees.size() *
                                grid.forest_features.size());
    std::vector<CvResult> cvs(cells.size());
    run_parallel(cells.size(), threads, [&](std::size_t idx) {
      const int trees =
          grid.forest_trees[idx / grid.forest_features.size()];
      const int features =
          grid.forest_features[idx % grid.forest_features.size()];
      ForestConfig cfg;
      cfg.n_trees = trees;
      // Feature axis values beyond the dimensionality behave as "use all".
      cfg.max_features = features;
      cvs[idx] = cross_validate(
          data, fold, usable,
          [&](const Dataset& d, int f) {
            ForestConfig fc = cfg;
            fc.rng_seed = Rng::mix(seed, 0x42 + static_cast<std::uint64_t>(f));
            return train_forest(d, fc);
          },
          [](const ForestModel& m, std::span<const double> x) {
            return m.predict_score(x);
          });
      cvs[idx].params = {{"trees", static_cast<double>(trees)},
                         {"features", static_cast<double>(features)}};
      cells[idx] = {"forest", cvs[idx].params, cvs[idx].mean_auc};
    });
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!out.best_forest || cvs[i].mean_auc > out.best_forest->mean_auc) {
        out.best_forest = cvs[i];
      }
      out.cells.push_back(std::move(cells[i]));
    }
  }
  return out;
}

SelfTrainResult self_train(const EnsembleModel& model,
                           const std::vector<LabeledExample>& labeled,
                           const std::vector<CandidateSet>& unlabeled,
                           double theta, int rounds, const AdaBoostConfig& cfg,
                           int threads) {
  SelfTrainResult result;
  result.model = model;
  std::vector<LabeledExample> pool = labeled;

  for (int round = 0; round < rounds; ++round) {
    std::vector<LabeledExample> added;
    for (const CandidateSet& set : unlabeled) {
      for (const Candidate& c : set.items) {
        if (result.model.predict_score(c.normalized) >= theta) {
          LabeledExample e;
          e.raw = c.raw.as_array();
          e.normalized = c.normalized;
          e.bursty = true;
          e.provenance = Provenance::SelfTrain;
          e.token = c.token;
          e.window_end = set.end_time;
          added.push_back(std::move(e));
        }
      }
    }
    if (added.empty()) break;
    pool.insert(pool.end(), added.begin(), added.end());
    result.added.insert(result.added.end(), added.begin(), added.end());
    result.model = train_adaboost(to_dataset(pool), cfg, model.feature_mask,
                                  threads);
  }
  return result;
}

void write_feature_csv_header(std::ostream& out, bool labeled) {
  out << "window_end_time,token";
  for (const char* name : kFeatureNames) out << ",raw_" << name;
  for (const char* name : kFeatureNames) out << ",norm_" << name;
  if (labeled) out << ",label,provenance";
  out << '\n';
}

void write_feature_csv_row(std::ostream& out, std::int64_t window_end,
                           const std::string& token,
                           const std::array<double, kFeatureCount>& raw,
                           const std::array<double, kFeatureCount>& normalized,
                           const std::optional<LabeledExample>& label) {
  out << window_end << ',' << csv_escape(token);
  for (double v : raw) out << ',' << format_double(v);
  for (double v : normalized) out << ',' << format_double(v);
  if (label.has_value()) {
    out << ',' << (label->bursty ? "bursty" : "non-bursty") << ','
        << provenance_name(label->provenance);
  }
  out << '\n';
}

void write_training_csv(const std::string& path,
                        std::span<const LabeledExample> examples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write training csv: " + path);
  write_feature_csv_header(out, true);
  for (const auto& e : examples) {
    write_feature_csv_row(out, e.window_end, e.token, e.raw, e.normalized, e);
  }
}

std::vector<LabeledExample> read_training_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error("empty training csv: " + path);
  std::vector<LabeledExample> out;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    const auto fields = csv_split(lines[li]);
    if (fields.size() < 2 + 2 * kFeatureCount + 2) {
      throw std::runtime_error("bad training csv row " + std::to_string(li) +
                               " in " + path);
    }
    LabeledExample e;
    e.window_end = parse_int(fields[0]).value_or(0);
    e.token = fields[1];
    for (int f = 0; f < kFeatureCount; ++f) {
      e.raw[f] = std::stod(fields[2 + f]);
      e.normalized[f] = std::stod(fields[2 + kFeatureCount + f]);
    }
    e.bursty = fields[2 + 2 * kFeatureCount] == "bursty";
    const std::string& prov = fields[2 + 2 * kFeatureCount + 1];
    e.provenance = prov == "seed" ? Provenance::Seed
                   : prov == "self-train" ? Provenance::SelfTrain
                                          : Provenance::Stopword;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace laburst
