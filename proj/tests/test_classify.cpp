#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "laburst/ensemble.hpp"
#include "laburst/forest.hpp"
#include "laburst/rng.hpp"
#include "laburst/svm.hpp"
#include "laburst/synth.hpp"
#include "laburst/training.hpp"
#include "oracles.hpp"

using namespace laburst;

namespace {

Dataset blobs_2d(std::size_t per_class, std::uint64_t seed, double gap = 2.0) {
  Dataset d;
  d.dims = 2;
  Rng rng(seed);
  for (std::size_t i = 0; i < per_class; ++i) {
    const double x[2] = {rng.next_unit(), rng.next_unit()};
    d.add_row(x, +1);
    const double z[2] = {rng.next_unit() + gap, rng.next_unit() + gap};
    d.add_row(z, -1);
  }
  return d;
}

Dataset xor_points() {
  Dataset d;
  d.dims = 2;
  const double p00[2] = {0, 0}, p01[2] = {0, 1}, p10[2] = {1, 0},
               p11[2] = {1, 1};
  d.add_row(p00, -1);
  d.add_row(p01, +1);
  d.add_row(p10, +1);
  d.add_row(p11, -1);
  return d;
}

Dataset circles(std::size_t per_class, std::uint64_t seed) {
  Dataset d;
  d.dims = 2;
  Rng rng(seed);
  for (std::size_t i = 0; i < per_class; ++i) {
    const double a1 = rng.next_unit() * 2 * M_PI;
    const double r1 = 0.8 + 0.2 * rng.next_unit();
    const double inner[2] = {r1 * std::cos(a1), r1 * std::sin(a1)};
    d.add_row(inner, +1);
    const double a2 = rng.next_unit() * 2 * M_PI;
    const double r2 = 2.6 + 0.3 * rng.next_unit();
    const double outer[2] = {r2 * std::cos(a2), r2 * std::sin(a2)};
    d.add_row(outer, -1);
  }
  return d;
}

double training_accuracy(
    const Dataset& d,
    const std::function<bool(std::span<const double>)>& classify) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    if (classify(d.row(i)) == (d.y[i] > 0)) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(d.rows());
}

// Test-side tree walker, used to cross-check ForestModel's traversal.
double walk_tree(const Tree& tree, std::span<const double> x) {
  std::int32_t at = 0;
  while (tree.nodes[at].feature >= 0) {
    const TreeNode& n = tree.nodes[at];
    at = x[n.feature] < n.threshold ? n.left : n.right;
  }
  return tree.nodes[at].leaf_fraction;
}

bool same_forest(const ForestModel& a, const ForestModel& b) {
  if (a.trees.size() != b.trees.size()) return false;
  for (std::size_t t = 0; t < a.trees.size(); ++t) {
    const auto& ta = a.trees[t].nodes;
    const auto& tb = b.trees[t].nodes;
    if (ta.size() != tb.size()) return false;
    for (std::size_t n = 0; n < ta.size(); ++n) {
      if (ta[n].feature != tb[n].feature ||
          ta[n].threshold != tb[n].threshold || ta[n].left != tb[n].left ||
          ta[n].right != tb[n].right ||
          ta[n].leaf_fraction != tb[n].leaf_fraction) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("defaults match the tuned hyperparameters") {
  CHECK(ForestConfig{}.n_trees == 1024);
  CHECK(ForestConfig{}.max_features == 2);
  CHECK(SvmConfig{}.c == 64.0);
  CHECK(SvmConfig{}.gamma == 0.0625);
  CHECK(AdaBoostConfig{}.n_stages == 2);
}

TEST_CASE("forest separates a linearly separable toy set") {
  const Dataset d = blobs_2d(10, 42);  // 20 points
  ForestConfig cfg;
  cfg.n_trees = 64;
  cfg.rng_seed = 1;
  const ForestModel model = train_forest(d, cfg);
  CHECK(training_accuracy(d, [&](std::span<const double> x) {
          return model.classify(x);
        }) == 1.0);
  // Scores are fractions of agreeing trees.
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const double s = model.predict_score(d.row(i));
    const double scaled = s * cfg.n_trees;
    CHECK(std::abs(scaled - std::round(scaled)) < 1e-9);
  }
}

TEST_CASE("forest learns XOR and matches an exhaustive tree walk") {
  const Dataset d = xor_points();
  ForestConfig cfg;
  cfg.n_trees = 512;
  cfg.rng_seed = 9;
  const ForestModel model = train_forest(d, cfg);
  CHECK(training_accuracy(d, [&](std::span<const double> x) {
          return model.classify(x);
        }) == 1.0);

  for (std::size_t i = 0; i < d.rows(); ++i) {
    std::size_t votes = 0;
    for (const Tree& t : model.trees) {
      if (walk_tree(t, d.row(i)) >= 0.5) ++votes;
    }
    CHECK(model.predict_score(d.row(i)) ==
          doctest::Approx(static_cast<double>(votes) / cfg.n_trees));
  }
}

TEST_CASE("forest rejects single-class data and is deterministic") {
  Dataset d;
  d.dims = 1;
  const double x0[1] = {0.0}, x1[1] = {1.0};
  d.add_row(x0, +1);
  d.add_row(x1, +1);
  CHECK_THROWS_AS(train_forest(d, ForestConfig{}), std::invalid_argument);

  const Dataset blobs = blobs_2d(16, 3);
  ForestConfig cfg;
  cfg.n_trees = 32;
  cfg.rng_seed = 7;
  CHECK(same_forest(train_forest(blobs, cfg), train_forest(blobs, cfg)));
  ForestConfig other = cfg;
  other.rng_seed = 8;
  CHECK_FALSE(same_forest(train_forest(blobs, cfg),
                          train_forest(blobs, other)));
}

TEST_CASE("svm on the minimal two-point problem") {
  Dataset d;
  d.dims = 2;
  const double a[2] = {0.0, 0.0}, b[2] = {1.0, 1.0};
  d.add_row(a, +1);
  d.add_row(b, -1);
  SvmConfig cfg;
  cfg.c = 4.0;
  cfg.gamma = 0.5;
  const SvmModel model = train_svm_rbf(d, cfg);
  CHECK(model.converged);
  CHECK(model.support_vectors.size() == 2);
  CHECK(model.decision(d.row(0)) > 0.0);
  CHECK(model.decision(d.row(1)) < 0.0);
  CHECK(model.classify(d.row(0)));
  CHECK_FALSE(model.classify(d.row(1)));
}

TEST_CASE("svm separates concentric circles; dual matches the PG oracle") {
  const Dataset d = circles(20, 5);  // 40 points, distinct rows
  SvmConfig cfg;
  cfg.c = 8.0;
  cfg.gamma = 1.0;
  const SvmModel model = train_svm_rbf(d, cfg);
  CHECK(model.converged);
  CHECK(training_accuracy(d, [&](std::span<const double> x) {
          return model.classify(x);
        }) > 0.95);

  // Dual feasibility from the stored coefficients.
  double sum_ay = 0.0;
  for (double c : model.coef) {
    CHECK(std::abs(c) <= cfg.c + 1e-9);
    sum_ay += c;
  }
  CHECK(std::abs(sum_ay) <= 1e-6);

  // Reconstruct per-point alphas (rows are distinct) for the KKT check and
  // the objective comparison.
  std::map<std::vector<double>, double> sv_alpha;
  for (std::size_t s = 0; s < model.support_vectors.size(); ++s) {
    sv_alpha[model.support_vectors[s]] = std::abs(model.coef[s]);
  }
  std::vector<double> alpha(d.rows(), 0.0);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const auto r = d.row(i);
    auto it = sv_alpha.find(std::vector<double>(r.begin(), r.end()));
    if (it != sv_alpha.end()) alpha[i] = it->second;
  }

  const double kkt_slack = 10 * cfg.tol;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const double margin = d.y[i] * model.decision(d.row(i));
    if (alpha[i] < 1e-9) {
      CHECK(margin >= 1.0 - kkt_slack);
    } else if (alpha[i] > cfg.c - 1e-9) {
      CHECK(margin <= 1.0 + kkt_slack);
    } else {
      CHECK(margin == doctest::Approx(1.0).epsilon(kkt_slack));
    }
  }

  const double smo_obj =
      laburst::testing::svm_dual_objective(d, alpha, cfg.gamma);
  const auto pg =
      laburst::testing::pg_dual_solve(d, cfg.c, cfg.gamma, 20000, 0.05);
  CHECK(smo_obj >= pg.objective - 1e-2 * (1.0 + std::abs(pg.objective)));
}

TEST_CASE("svm score is 0.5 on the decision boundary") {
  SvmModel model;  // no support vectors: f(x) = bias = 0
  model.dims = 2;
  model.feature_mask = {0, 1};
  const double x[2] = {0.3, 0.4};
  CHECK(model.decision(x) == 0.0);
  CHECK(model.predict_score(x) == 0.5);
}

TEST_CASE("adaboost: ensemble of two identical bases scores like the base") {
  const Dataset d = blobs_2d(16, 21);
  ForestConfig fc;
  fc.n_trees = 32;
  fc.rng_seed = 2;
  ForestModel forest = train_forest(d, fc);

  EnsembleModel twin;
  twin.feature_mask = {0, 1};
  twin.stages.push_back({0.7, forest});
  twin.stages.push_back({0.7, forest});
  for (std::size_t i = 0; i < d.rows(); ++i) {
    CHECK(twin.predict_score(d.row(i)) ==
          doctest::Approx(forest.predict_score(d.row(i))).epsilon(1e-6));
  }
}

TEST_CASE("adaboost stage weights, error clamp, and determinism") {
  const Dataset d = blobs_2d(40, 31);  // separable: stage 1 is perfect
  AdaBoostConfig cfg;
  cfg.forest.n_trees = 64;
  cfg.svm.c = 4.0;
  cfg.svm.gamma = 1.0;
  cfg.rng_seed = 11;
  const EnsembleModel model = train_adaboost(d, cfg);
  REQUIRE(model.stages.size() == 2);
  // err clamps at 1e-10 -> stage-1 weight ~ ln(1e10).
  CHECK(model.stages[0].weight > 20.0);
  CHECK(model.stages[0].weight >= model.stages[1].weight);
  // The perfect stage dominates: ensemble classification equals stage 1.
  const auto* forest = std::get_if<ForestModel>(&model.stages[0].base);
  REQUIRE(forest != nullptr);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    CHECK(model.classify(d.row(i)) == forest->classify(d.row(i)));
  }

  const EnsembleModel again = train_adaboost(d, cfg);
  CHECK(model_to_json(model) == model_to_json(again));
}

TEST_CASE("adaboost training error is non-increasing across stages") {
  // Overlapping blobs so neither stage is perfect.
  const Dataset d = blobs_2d(60, 77, /*gap=*/0.7);
  AdaBoostConfig cfg;
  cfg.forest.n_trees = 48;
  cfg.svm.c = 16.0;
  cfg.svm.gamma = 2.0;
  cfg.rng_seed = 5;
  const EnsembleModel model = train_adaboost(d, cfg);
  REQUIRE(model.stages.size() == 2);

  auto prefix_error = [&](std::size_t upto) {
    EnsembleModel prefix;
    prefix.feature_mask = model.feature_mask;
    for (std::size_t s = 0; s < upto; ++s) {
      prefix.stages.push_back(model.stages[s]);
    }
    std::size_t miss = 0;
    for (std::size_t i = 0; i < d.rows(); ++i) {
      if ((prefix.predict_score(d.row(i)) >= 0.5) != (d.y[i] > 0)) ++miss;
    }
    return static_cast<double>(miss) / static_cast<double>(d.rows());
  };
  CHECK(prefix_error(2) <= prefix_error(1) + 1e-12);
}

TEST_CASE("model serialization round-trips bit-exactly") {
  const Dataset d = circles(15, 13);
  AdaBoostConfig cfg;
  cfg.forest.n_trees = 16;
  cfg.rng_seed = 3;
  const EnsembleModel model = train_adaboost(d, cfg);
  const std::string json = model_to_json(model);
  const EnsembleModel back = model_from_json(json);
  CHECK(model_to_json(back) == json);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    CHECK(back.predict_score(d.row(i)) == model.predict_score(d.row(i)));
  }
}

TEST_CASE("grid spec enumerates the documented grids") {
  const GridSpec grid = GridSpec::defaults();
  CHECK(grid.svm_c.size() == 13);
  CHECK(grid.svm_gamma.size() == 13);
  CHECK(grid.svm_c.front() == 0.25);
  CHECK(grid.svm_c.back() == 1024.0);
  CHECK(grid.svm_c.size() * grid.svm_gamma.size() == 169);
  CHECK(grid.forest_trees.size() == 11);
  CHECK(grid.forest_features.size() == 12);
  CHECK(grid.forest_trees.front() == 1);
  CHECK(grid.forest_trees.back() == 1024);
  CHECK(grid.forest_features.front() == 2);
  CHECK(grid.forest_features.back() == 4096);
  CHECK(grid.forest_trees.size() * grid.forest_features.size() == 132);
}

TEST_CASE("grid search picks a dominant cell and reports honest means") {
  const Dataset d = blobs_2d(25, 8);
  GridSpec grid;
  grid.svm_c = {0.25, 16.0};
  grid.svm_gamma = {0.5};
  grid.forest_trees = {1, 32};
  grid.forest_features = {2};
  const auto result = grid_search(d, grid, GridFamily::Both, 5, 4);
  CHECK(result.folds_used == 5);
  REQUIRE(result.best_svm.has_value());
  REQUIRE(result.best_forest.has_value());
  CHECK(result.cells.size() == 4);

  for (const auto& cv : {*result.best_svm, *result.best_forest}) {
    double sum = 0.0;
    for (double a : cv.fold_aucs) sum += a;
    CHECK(cv.mean_auc ==
          doctest::Approx(sum / cv.fold_aucs.size()).epsilon(1e-12));
    // Best really is the argmax over its family's cells.
    const std::string family = cv.params.count("c") ? "svm" : "forest";
    for (const auto& cell : result.cells) {
      if (cell.family == family) CHECK(cv.mean_auc >= cell.mean_auc - 1e-12);
    }
  }
}

TEST_CASE("grid search reduces folds when positives are scarce") {
  const Dataset d = blobs_2d(40, 14);
  Dataset small;
  small.dims = 2;
  int pos_kept = 0;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    if (d.y[i] > 0 && pos_kept >= 4) continue;
    if (d.y[i] > 0) ++pos_kept;
    small.add_row(d.row(i), d.y[i]);
  }
  GridSpec grid;
  grid.svm_c = {4.0};
  grid.svm_gamma = {0.5};
  const auto result = grid_search(small, grid, GridFamily::Svm, 10, 4);
  CHECK(result.folds_used == 4);
}

TEST_CASE("build_training_set labels seeds near moments, stop words negative") {
  SynthConfig synth;
  synth.duration = 1500;
  synth.rate = 10;
  synth.vocab_size = 400;
  synth.user_pool = 80;
  synth.rng_seed = 77;
  synth.vocab_head = {"the", "to", "and", "de", "que", "la"};
  synth.bursts.push_back({720, 60, {"goal", "gooal"}, 30.0, 1.0});
  std::vector<Message> messages;
  const SynthResult info = generate_in_memory(synth, messages);

  TrainingSetOptions options;
  options.filter.min_count = 3;
  options.quiet = true;
  options.tau = 2;
  const std::set<std::int64_t>& moments = info.truth_slices;
  const std::unordered_set<std::string> stopwords{"the", "to", "and",
                                                  "de",  "que", "la"};
  const TrainingSet set = build_training_set(messages, moments,
                                             {"goal", "gooal"}, stopwords,
                                             options);
  CHECK(set.positives > 0);
  CHECK(set.negatives > 0);
  CHECK(set.examples.size() == set.positives + set.negatives);
  for (const auto& e : set.examples) {
    if (e.provenance == Provenance::Seed) {
      CHECK(e.bursty);
      CHECK((e.token == "goal" || e.token == "gooal"));
      const std::int64_t m = *moments.begin();
      CHECK(e.window_end >= m);
      CHECK(e.window_end <= m + options.tau);
    } else {
      CHECK_FALSE(e.bursty);
      CHECK(stopwords.count(e.token) == 1);
    }
  }

  SUBCASE("zero positives is fatal") {
    CHECK_THROWS_AS(build_training_set(messages, moments, {"nonexistent"},
                                       stopwords, options),
                    std::runtime_error);
  }

  SUBCASE("training csv round-trips") {
    write_training_csv("./tmp_training.csv", set.examples);
    const auto back = read_training_csv("./tmp_training.csv");
    REQUIRE(back.size() == set.examples.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      CHECK(back[i].token == set.examples[i].token);
      CHECK(back[i].bursty == set.examples[i].bursty);
      CHECK(back[i].provenance == set.examples[i].provenance);
      for (int f = 0; f < kFeatureCount; ++f) {
        CHECK(back[i].normalized[f] == set.examples[i].normalized[f]);
        CHECK(back[i].raw[f] == set.examples[i].raw[f]);
      }
    }
    std::remove("./tmp_training.csv");
  }
}

TEST_CASE("self_train expands only above the confidence threshold") {
  // Labeled blobs in normalized-feature space (12 dims, first two carry the
  // signal).
  std::vector<LabeledExample> labeled;
  Rng rng(1);
  for (int i = 0; i < 30; ++i) {
    LabeledExample pos;
    pos.normalized[0] = 0.8 + 0.2 * rng.next_unit();
    pos.normalized[1] = 0.8 + 0.2 * rng.next_unit();
    pos.bursty = true;
    pos.token = "p" + std::to_string(i);
    labeled.push_back(pos);
    LabeledExample neg;
    neg.normalized[0] = 0.2 * rng.next_unit();
    neg.normalized[1] = 0.2 * rng.next_unit();
    neg.bursty = false;
    neg.provenance = Provenance::Stopword;
    neg.token = "n" + std::to_string(i);
    labeled.push_back(neg);
  }
  AdaBoostConfig cfg;
  cfg.forest.n_trees = 32;
  cfg.svm.c = 8.0;
  cfg.svm.gamma = 2.0;
  cfg.rng_seed = 6;
  const EnsembleModel model = train_adaboost(to_dataset(labeled), cfg);

  CandidateSet unlabeled;
  unlabeled.end_time = 99;
  Candidate clearly_bursty;
  clearly_bursty.token = "fresh";
  clearly_bursty.normalized[0] = 0.95;
  clearly_bursty.normalized[1] = 0.9;
  Candidate clearly_not;
  clearly_not.token = "dull";
  clearly_not.normalized[0] = 0.05;
  clearly_not.normalized[1] = 0.02;
  unlabeled.items = {clearly_bursty, clearly_not};

  const auto result = self_train(model, labeled, {unlabeled}, 0.9, 1, cfg);
  // Independent pass over the same pool confirms exactly the added set.
  std::vector<std::string> expected;
  for (const auto& c : unlabeled.items) {
    if (model.predict_score(c.normalized) >= 0.9) expected.push_back(c.token);
  }
  REQUIRE(result.added.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(result.added[i].token == expected[i]);
    CHECK(result.added[i].provenance == Provenance::SelfTrain);
    CHECK(result.added[i].bursty);
  }
  CHECK(result.added.size() == 1);  // only "fresh"

  SUBCASE("theta = 1.0 expands nothing (scores stay below 1)") {
    const auto none = self_train(model, labeled, {unlabeled}, 1.0, 1, cfg);
    CHECK(none.added.empty());
    CHECK(model_to_json(none.model) == model_to_json(model));
  }

  SUBCASE("a fixed point leaves the model unchanged") {
    CandidateSet dull_only;
    dull_only.end_time = 100;
    dull_only.items = {clearly_not};
    const auto none = self_train(model, labeled, {dull_only}, 0.9, 1, cfg);
    CHECK(none.added.empty());
    CHECK(model_to_json(none.model) == model_to_json(model));
  }
}
