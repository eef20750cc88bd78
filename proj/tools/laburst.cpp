#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "laburst/baselines.hpp"
#include "laburst/detect.hpp"
#include "laburst/ensemble.hpp"
#include "laburst/eval.hpp"
#include "laburst/ingest.hpp"
#include "laburst/synth.hpp"
#include "laburst/textio.hpp"
#include "laburst/training.hpp"

namespace {

using namespace laburst;

struct StreamFlags {
  std::int64_t delta = 60;
  std::int64_t omega = 180;
  int k = 10;
  std::int64_t t0 = -1;  // -1: derive from the first message
  std::uint64_t min_count = 5;
  std::size_t max_token_len = 64;
  bool keep_urls = false;

  StreamConfig stream() const {
    StreamConfig cfg;
    cfg.delta = delta;
    cfg.omega = omega;
    cfg.k = k;
    if (t0 >= 0) cfg.t0 = t0;
    return cfg;
  }
  CandidateFilter filter() const {
    CandidateFilter f;
    f.min_count = min_count;
    f.max_token_len = max_token_len;
    f.drop_urls = !keep_urls;
    return f;
  }
};

void add_stream_flags(CLI::App* cmd, StreamFlags& flags) {
  cmd->add_option("--delta", flags.delta, "Slice length, seconds")
      ->capture_default_str();
  cmd->add_option("--omega", flags.omega,
                  "Window length, seconds (multiple of delta)")
      ->capture_default_str();
  cmd->add_option("-k,--history", flags.k, "History depth in windows")
      ->capture_default_str();
  cmd->add_option("--t0", flags.t0,
                  "Stream epoch in seconds (default: first message rounded "
                  "down to a delta boundary)");
  cmd->add_option("--min-count", flags.min_count,
                  "Candidate floor: window token count")
      ->capture_default_str();
  cmd->add_option("--max-token-len", flags.max_token_len,
                  "Candidate cap: token length in bytes")
      ->capture_default_str();
  cmd->add_flag("--keep-urls", flags.keep_urls,
                "Keep http-prefixed tokens as candidates");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + path);
  return out;
}

std::string trim_ws(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

// Flat key=value config support: file entries become trailing long options
// for keys not already on the command line, so flags always win.
std::vector<std::string> merge_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    }
  }
  if (config_path.empty()) return args;
  for (const auto& raw : read_lines(config_path)) {
    const std::string line = trim_ws(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line without '=': " + line);
    }
    const std::string key = trim_ws(line.substr(0, eq));
    const std::string value = trim_ws(line.substr(eq + 1));
    const std::string flag = "--" + key;
    bool present = false;
    for (const auto& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) {
        present = true;
        break;
      }
    }
    if (!present) {
      args.push_back(flag);
      args.push_back(value);
    }
  }
  return args;
}

std::set<std::int64_t> all_moments(const std::string& truth_path) {
  std::set<std::int64_t> moments;
  for (const auto& ev : load_truth_csv(truth_path)) {
    moments.insert(ev.moments.begin(), ev.moments.end());
  }
  return moments;
}

BurstSpec parse_burst_spec(const std::string& text) {
  // start:length:intensity:volume_boost:tok1,tok2,...
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  if (parts.size() != 5) {
    throw CLI::ValidationError(
        "--burst", "expected start:length:intensity:volume_boost:tokens");
  }
  BurstSpec b;
  b.start = std::stoll(parts[0]);
  b.length = std::stoll(parts[1]);
  b.intensity = std::stod(parts[2]);
  b.volume_boost = std::stod(parts[3]);
  std::string tok;
  for (char c : parts[4]) {
    if (c == ',') {
      if (!tok.empty()) b.tokens.push_back(tok);
      tok.clear();
    } else {
      tok += c;
    }
  }
  if (!tok.empty()) b.tokens.push_back(tok);
  return b;
}

std::vector<ScorePoint> load_series_any(const std::string& path) {
  std::ifstream probe(path);
  if (!probe) throw std::runtime_error("cannot read series: " + path);
  std::string first;
  std::getline(probe, first);
  probe.close();
  if (!first.empty() && first[0] == '{') return load_detection_log(path);
  return load_delta_csv(path);
}

int run_synth(const std::string& out_path, const std::string& truth_path,
              SynthConfig cfg, const std::vector<std::string>& burst_specs,
              int stopword_head) {
  for (const auto& spec : burst_specs) cfg.bursts.push_back(parse_burst_spec(spec));
  if (stopword_head > 0) {
    auto words = default_stopwords_ordered();
    if (static_cast<int>(words.size()) > stopword_head) {
      words.resize(stopword_head);
    }
    cfg.vocab_head = std::move(words);
  }
  const SynthResult result = generate(cfg, out_path, truth_path);
  std::cerr << "synth: " << result.records << " records, "
            << result.truth_slices.size() << " ground-truth moments\n";
  return 0;
}

int run_features(const std::string& input, const std::string& out_path,
                 const std::string& window_stats_path,
                 const StreamFlags& flags) {
  const auto messages = replay_file(input);
  auto out = open_out(out_path);
  write_feature_csv_header(out, false);

  std::optional<std::ofstream> wstats;
  if (!window_stats_path.empty()) {
    wstats = open_out(window_stats_path);
    *wstats << "window_end_time,token,count,message_count,user_count\n";
  }

  const StreamConfig cfg = flags.stream();
  const CandidateFilter filter = flags.filter();
  Windower windower(cfg, filter);
  auto on_window = [&](const History& history) {
    if (wstats.has_value()) write_window_stats_csv(*wstats, history.newest());
    CandidateSet cands = extract(history, cfg, filter);
    normalize(cands);
    for (const Candidate& c : cands.items) {
      write_feature_csv_row(out, cands.end_time, c.token, c.raw.as_array(),
                            c.normalized, std::nullopt);
    }
  };
  for (const Message& m : messages) windower.push(m, on_window);
  windower.finish(on_window);
  return 0;
}

struct TrainFlags {
  std::string input, truth, seeds, model_out, dump_training;
  std::string stopwords_en, stopwords_es;
  int tau = 2;
  double negative_fraction = 1.0;
  int trees = 1024;
  int max_features = 2;
  double svm_c = 64.0;
  double svm_gamma = 0.0625;
  int stages = 2;
  std::uint64_t seed = 0;
};

int run_train(const TrainFlags& tf, const StreamFlags& flags, int threads) {
  const auto messages = replay_file(tf.input);
  const auto moments = all_moments(tf.truth);
  const auto seeds = load_wordlist_ordered(tf.seeds);

  std::unordered_set<std::string> stopwords;
  if (!tf.stopwords_en.empty() || !tf.stopwords_es.empty()) {
    if (!tf.stopwords_en.empty()) stopwords = load_wordlist(tf.stopwords_en);
    if (!tf.stopwords_es.empty()) {
      const auto es = load_wordlist(tf.stopwords_es);
      stopwords.insert(es.begin(), es.end());
    }
  } else {
    stopwords = default_stopwords();
  }

  TrainingSetOptions options;
  options.stream = flags.stream();
  options.filter = flags.filter();
  options.tau = tf.tau;
  options.negative_window_fraction = tf.negative_fraction;
  options.rng_seed = tf.seed;
  const TrainingSet set =
      build_training_set(messages, moments, seeds, stopwords, options);

  if (!tf.dump_training.empty()) {
    write_training_csv(tf.dump_training, set.examples);
  }

  AdaBoostConfig cfg;
  cfg.n_stages = tf.stages;
  cfg.forest.n_trees = tf.trees;
  cfg.forest.max_features = tf.max_features;
  cfg.svm.c = tf.svm_c;
  cfg.svm.gamma = tf.svm_gamma;
  cfg.rng_seed = tf.seed;
  const EnsembleModel model =
      train_adaboost(to_dataset(set.examples), cfg, {}, threads);
  save_model(model, tf.model_out);
  std::cerr << "train: model written to " << tf.model_out << '\n';
  return 0;
}

int run_gridsearch(const std::string& training_csv, const std::string& out_path,
                   const std::string& family, int folds, std::uint64_t seed,
                   int threads) {
  const auto examples = read_training_csv(training_csv);
  const Dataset data = to_dataset(examples);
  const GridFamily fam = family == "svm" ? GridFamily::Svm
                         : family == "forest" ? GridFamily::Forest
                                              : GridFamily::Both;
  const auto result =
      grid_search(data, GridSpec::defaults(), fam, folds, seed, threads);

  auto out = open_out(out_path);
  out << "family,c,gamma,trees,features,mean_auc\n";
  for (const auto& cell : result.cells) {
    auto get = [&](const char* key) {
      auto it = cell.params.find(key);
      return it == cell.params.end() ? std::string()
                                     : format_double(it->second);
    };
    out << cell.family << ',' << get("c") << ',' << get("gamma") << ','
        << get("trees") << ',' << get("features") << ','
        << format_double(cell.mean_auc) << '\n';
  }
  if (result.best_svm.has_value()) {
    std::cerr << "gridsearch svm: best mean AUC "
              << result.best_svm->mean_auc << " at c="
              << result.best_svm->params.at("c")
              << " gamma=" << result.best_svm->params.at("gamma") << '\n';
  }
  if (result.best_forest.has_value()) {
    std::cerr << "gridsearch forest: best mean AUC "
              << result.best_forest->mean_auc << " at trees="
              << result.best_forest->params.at("trees")
              << " features=" << result.best_forest->params.at("features")
              << '\n';
  }
  return 0;
}

int run_selftrain(const std::string& model_in, const std::string& training_csv,
                  const std::string& input, const std::string& model_out,
                  double theta, int rounds, const StreamFlags& flags,
                  int threads) {
  const EnsembleModel model = load_model(model_in);
  const auto labeled = read_training_csv(training_csv);
  const auto messages = replay_file(input);

  std::unordered_set<std::string> known_positive;
  for (const auto& e : labeled) {
    if (e.bursty) known_positive.insert(e.token);
  }

  const StreamConfig cfg = flags.stream();
  const CandidateFilter filter = flags.filter();
  std::vector<CandidateSet> unlabeled;
  Windower windower(cfg, filter);
  auto on_window = [&](const History& history) {
    CandidateSet cands = extract(history, cfg, filter);
    if (cands.items.empty()) return;
    normalize(cands);
    CandidateSet kept;
    kept.end_time = cands.end_time;
    for (auto& c : cands.items) {
      if (known_positive.count(c.token) == 0) kept.items.push_back(std::move(c));
    }
    if (!kept.items.empty()) unlabeled.push_back(std::move(kept));
  };
  for (const Message& m : messages) windower.push(m, on_window);
  windower.finish(on_window);

  AdaBoostConfig cfg_boost = model.cfg;
  const SelfTrainResult result =
      self_train(model, labeled, unlabeled, theta, rounds, cfg_boost, threads);
  save_model(result.model, model_out);
  std::cerr << "selftrain: " << result.added.size()
            << " expanded positives; model written to " << model_out << '\n';
  return 0;
}

int run_detect(const std::string& model_path, const std::string& input,
               const std::string& out_path, int rho,
               const StreamFlags& flags) {
  const EnsembleModel model = load_model(model_path);
  const auto messages = replay_file(input);
  const auto series =
      score_series(model, messages, flags.stream(), flags.filter());
  auto out = open_out(out_path);
  write_detection_log(out, series, rho);
  std::size_t detected = 0;
  for (const auto& p : series) {
    if (p.count >= static_cast<std::size_t>(rho)) ++detected;
  }
  std::cerr << "detect: " << series.size() << " windows, " << detected
            << " detections at rho=" << rho << '\n';
  return 0;
}

int run_baseline(const std::string& method, const std::string& input,
                 const std::string& out_path, const std::string& lexicon_path,
                 const std::string& lexicon_group, bool literal_avg,
                 const StreamFlags& flags) {
  const auto messages = replay_file(input);
  BaselineOptions options;
  options.stream = flags.stream();
  options.literal_avg = literal_avg;

  std::vector<DeltaPoint> series;
  if (method == "rawburst") {
    series = rawburst_series(messages, options);
  } else if (method == "tokenburst") {
    const SeedLexicon lexicon = lexicon_path.empty()
                                    ? SeedLexicon::builtin(lexicon_group)
                                    : SeedLexicon::from_file(lexicon_path);
    series = tokenburst_series(messages, lexicon, options);
  } else {
    throw CLI::ValidationError("--method", "must be rawburst or tokenburst");
  }
  auto out = open_out(out_path);
  write_delta_csv(out, series);
  return 0;
}

int run_eval(const std::vector<std::string>& series_paths,
             const std::vector<std::string>& truth_paths,
             std::vector<std::string> names, int tau,
             const std::string& out_roc_prefix,
             const std::string& out_summary) {
  if (series_paths.size() != truth_paths.size()) {
    throw CLI::ValidationError(
        "--series/--truth", "need one truth file per series file");
  }
  std::vector<EventSeries> events;
  for (std::size_t i = 0; i < series_paths.size(); ++i) {
    EventSeries ev;
    ev.name = i < names.size() ? names[i] : "event" + std::to_string(i);
    ev.points = load_series_any(series_paths[i]);
    ev.moments = all_moments(truth_paths[i]);
    events.push_back(std::move(ev));
  }
  const EvalReport report = evaluate_series(events, tau);

  if (!out_roc_prefix.empty()) {
    for (const auto& e : report.per_event) {
      auto out = open_out(out_roc_prefix + e.name + ".csv");
      write_roc_csv(out, e.curve);
    }
    auto out = open_out(out_roc_prefix + "composite.csv");
    write_roc_csv(out, report.composite.curve);
  }
  const std::string summary = report_to_json(report);
  if (!out_summary.empty()) {
    auto out = open_out(out_summary);
    out << summary << '\n';
  }
  std::cout << summary << '\n';
  return 0;
}

int run_ablate(const std::string& training_csv, const std::string& out_path,
               const std::string& star_model_path, int folds,
               std::uint64_t seed, int trees, int max_features, double svm_c,
               double svm_gamma, int threads) {
  const auto examples = read_training_csv(training_csv);
  AdaBoostConfig cfg;
  cfg.forest.n_trees = trees;
  cfg.forest.max_features = max_features;
  cfg.svm.c = svm_c;
  cfg.svm.gamma = svm_gamma;
  cfg.rng_seed = seed;
  const AblationReport report = ablate(examples, cfg, folds, seed, threads);

  auto out = open_out(out_path);
  out << "excluded_family,mean_auc,diff_vs_full\n";
  out << "none," << format_double(report.full_auc) << ",0\n";
  for (const auto& row : report.rows) {
    out << row.family << ',' << format_double(row.mean_auc) << ','
        << format_double(row.diff_vs_full) << '\n';
  }
  if (!star_model_path.empty()) {
    const EnsembleModel star = train_adaboost(to_dataset(examples), cfg,
                                              report.star_mask, threads);
    save_model(star, star_model_path);
    std::cerr << "ablate: star model (no average-difference family) written "
                 "to " << star_model_path << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"laburst: learned burst detection over message streams, with "
               "baselines and a ROC/AUC evaluation harness"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version",
                       std::string("laburst 1.0 (model schema ") +
                           std::to_string(laburst::kModelSchemaVersion) + ")");
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  app.add_option("--threads", threads, "Worker threads for training/search")
      ->capture_default_str();

  // synth
  auto* synth_cmd =
      app.add_subcommand("synth", "Generate a deterministic synthetic stream");
  std::string synth_out, synth_truth;
  laburst::SynthConfig synth_cfg;
  std::vector<std::string> burst_specs;
  int stopword_head = 100;
  synth_cmd->add_option("--out", synth_out, "Stream JSONL path")->required();
  synth_cmd->add_option("--truth", synth_truth, "Ground-truth CSV path")
      ->required();
  synth_cmd->add_option("--duration", synth_cfg.duration, "Seconds")
      ->capture_default_str();
  synth_cmd->add_option("--rate", synth_cfg.rate, "Messages per second")
      ->capture_default_str();
  synth_cmd->add_option("--vocab", synth_cfg.vocab_size, "Vocabulary size")
      ->capture_default_str();
  synth_cmd->add_option("--zipf", synth_cfg.zipf_exponent, "Zipf exponent")
      ->capture_default_str();
  synth_cmd->add_option("--users", synth_cfg.user_pool, "Author pool size")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth_cfg.rng_seed, "RNG seed")
      ->capture_default_str();
  synth_cmd->add_option("--epoch", synth_cfg.epoch, "Timestamp of second 0")
      ->capture_default_str();
  synth_cmd
      ->add_option("--truth-delta", synth_cfg.truth_delta,
                   "Slice length for ground-truth slice ids")
      ->capture_default_str();
  synth_cmd
      ->add_option("--tokens-per-message", synth_cfg.tokens_per_message, "")
      ->capture_default_str();
  synth_cmd->add_option("--mention-prob", synth_cfg.mention_prob, "")
      ->capture_default_str();
  synth_cmd->add_option("--retweet-prob", synth_cfg.retweet_prob, "")
      ->capture_default_str();
  synth_cmd
      ->add_option("--planted-bg-prob", synth_cfg.planted_background_prob,
                   "Off-burst emission probability of planted tokens")
      ->capture_default_str();
  synth_cmd
      ->add_option("--stopword-head", stopword_head,
                   "Pin this many stop words to the top vocabulary ranks")
      ->capture_default_str();
  synth_cmd
      ->add_option("--burst", burst_specs,
                   "start:length:intensity:volume_boost:tok1,tok2,... "
                   "(repeatable)")
      ->take_all();

  // features
  auto* features_cmd =
      app.add_subcommand("features", "Dump per-window candidate features");
  std::string feat_input, feat_out, feat_wstats;
  StreamFlags feat_flags;
  features_cmd->add_option("--input", feat_input, "Stream JSONL")->required();
  features_cmd->add_option("--out", feat_out, "Feature CSV path")->required();
  features_cmd->add_option("--window-stats", feat_wstats,
                           "Optional window-stats CSV dump");
  add_stream_flags(features_cmd, feat_flags);

  // train
  auto* train_cmd =
      app.add_subcommand("train", "Build a training set and fit the ensemble");
  TrainFlags train_flags;
  StreamFlags train_stream_flags;
  train_cmd->add_option("--input", train_flags.input, "Training stream JSONL")
      ->required();
  train_cmd->add_option("--truth", train_flags.truth, "Ground-truth CSV")
      ->required();
  train_cmd
      ->add_option("--seeds", train_flags.seeds,
                   "Seed-token list (one per line)")
      ->required();
  train_cmd->add_option("--model", train_flags.model_out, "Model output path")
      ->required();
  train_cmd->add_option("--dump-training", train_flags.dump_training,
                        "Write the labeled training CSV");
  train_cmd->add_option("--stopwords-en", train_flags.stopwords_en,
                        "Override the shipped English stop-word list");
  train_cmd->add_option("--stopwords-es", train_flags.stopwords_es,
                        "Override the shipped Spanish stop-word list");
  train_cmd->add_option("--tau", train_flags.tau, "Positive-label delay")
      ->capture_default_str();
  train_cmd
      ->add_option("--negative-fraction", train_flags.negative_fraction,
                   "Fraction of windows sampled for stop-word negatives")
      ->capture_default_str();
  train_cmd->add_option("--trees", train_flags.trees, "Forest size")
      ->capture_default_str();
  train_cmd
      ->add_option("--max-features", train_flags.max_features,
                   "Features per split")
      ->capture_default_str();
  train_cmd->add_option("--svm-c", train_flags.svm_c, "SVM cost")
      ->capture_default_str();
  train_cmd->add_option("--svm-gamma", train_flags.svm_gamma, "RBF gamma")
      ->capture_default_str();
  train_cmd->add_option("--stages", train_flags.stages, "Boosting stages")
      ->capture_default_str();
  train_cmd->add_option("--seed", train_flags.seed, "RNG seed")
      ->capture_default_str();
  add_stream_flags(train_cmd, train_stream_flags);

  // gridsearch
  auto* grid_cmd = app.add_subcommand(
      "gridsearch", "Exhaustive hyperparameter search with 10-fold CV AUC");
  std::string grid_training, grid_out, grid_family = "both";
  int grid_folds = 10;
  std::uint64_t grid_seed = 0;
  grid_cmd->add_option("--training", grid_training, "Labeled training CSV")
      ->required();
  grid_cmd->add_option("--out", grid_out, "Per-cell results CSV")->required();
  grid_cmd->add_option("--family", grid_family, "svm | forest | both")
      ->capture_default_str();
  grid_cmd->add_option("--folds", grid_folds, "")->capture_default_str();
  grid_cmd->add_option("--seed", grid_seed, "")->capture_default_str();

  // selftrain
  auto* self_cmd = app.add_subcommand(
      "selftrain", "Expand positives from high-confidence predictions");
  std::string self_model_in, self_training, self_input, self_model_out;
  double self_theta = 0.9;
  int self_rounds = 1;
  StreamFlags self_flags;
  self_cmd->add_option("--model", self_model_in, "Trained model")->required();
  self_cmd->add_option("--training", self_training, "Labeled training CSV")
      ->required();
  self_cmd->add_option("--input", self_input, "Unlabeled stream JSONL")
      ->required();
  self_cmd->add_option("--out", self_model_out, "Retrained model path")
      ->required();
  self_cmd->add_option("--theta", self_theta, "Confidence threshold")
      ->capture_default_str();
  self_cmd->add_option("--rounds", self_rounds, "")->capture_default_str();
  add_stream_flags(self_cmd, self_flags);

  // detect
  auto* detect_cmd =
      app.add_subcommand("detect", "Score a stream and log detections");
  std::string det_model, det_input, det_out;
  int det_rho = 2;
  StreamFlags det_flags;
  detect_cmd->add_option("--model", det_model, "Trained model")->required();
  detect_cmd->add_option("--input", det_input, "Stream JSONL")->required();
  detect_cmd->add_option("--out", det_out, "Detection JSONL path")->required();
  detect_cmd->add_option("--rho", det_rho, "Moment threshold on |B_t|")
      ->capture_default_str();
  add_stream_flags(detect_cmd, det_flags);

  // baseline
  auto* base_cmd =
      app.add_subcommand("baseline", "RawBurst / TokenBurst delta series");
  std::string base_method, base_input, base_out, base_lexicon;
  std::string base_group = "all";
  bool base_literal = false;
  StreamFlags base_flags;
  base_cmd->add_option("--method", base_method, "rawburst | tokenburst")
      ->required();
  base_cmd->add_option("--input", base_input, "Stream JSONL")->required();
  base_cmd->add_option("--out", base_out, "Delta CSV path")->required();
  base_cmd->add_option("--lexicon", base_lexicon,
                       "Seed lexicon file (one token per line)");
  base_cmd
      ->add_option("--lexicon-group", base_group,
                   "Built-in lexicon: worldseries | superbowl | worldcup | all")
      ->capture_default_str();
  base_cmd->add_flag("--literal-avg", base_literal,
                     "Average includes the current slice (k+1 terms over k)");
  add_stream_flags(base_cmd, base_flags);

  // eval
  auto* eval_cmd = app.add_subcommand(
      "eval", "ROC/AUC against tau-expanded ground truth; pools a composite");
  std::vector<std::string> eval_series, eval_truths, eval_names;
  int eval_tau = 2;
  std::string eval_roc_prefix, eval_summary;
  eval_cmd
      ->add_option("--series", eval_series,
                   "Detection JSONL or delta CSV (repeatable)")
      ->required()
      ->take_all();
  eval_cmd
      ->add_option("--truth", eval_truths, "Ground-truth CSV (repeatable)")
      ->required()
      ->take_all();
  eval_cmd->add_option("--names", eval_names, "Event names")->take_all();
  eval_cmd->add_option("--tau", eval_tau, "Ground-truth relaxation delay")
      ->capture_default_str();
  eval_cmd->add_option("--out-roc", eval_roc_prefix,
                       "Prefix for per-event and composite ROC CSVs");
  eval_cmd->add_option("--out-summary", eval_summary, "Summary JSON path");

  // ablate
  auto* ablate_cmd = app.add_subcommand(
      "ablate", "Per-family feature ablation with paired folds");
  std::string abl_training, abl_out, abl_star;
  int abl_folds = 10, abl_trees = 1024, abl_max_features = 2;
  double abl_c = 64.0, abl_gamma = 0.0625;
  std::uint64_t abl_seed = 0;
  ablate_cmd->add_option("--training", abl_training, "Labeled training CSV")
      ->required();
  ablate_cmd->add_option("--out", abl_out, "Ablation table CSV")->required();
  ablate_cmd->add_option("--star-model", abl_star,
                         "Also train/save the no-average-difference model");
  ablate_cmd->add_option("--folds", abl_folds, "")->capture_default_str();
  ablate_cmd->add_option("--seed", abl_seed, "")->capture_default_str();
  ablate_cmd->add_option("--trees", abl_trees, "")->capture_default_str();
  ablate_cmd->add_option("--max-features", abl_max_features, "")
      ->capture_default_str();
  ablate_cmd->add_option("--svm-c", abl_c, "")->capture_default_str();
  ablate_cmd->add_option("--svm-gamma", abl_gamma, "")->capture_default_str();

  // Flat key=value config file; values are merged as trailing options so
  // explicit command-line flags take precedence.
  std::string config_path;
  for (CLI::App* sub : {synth_cmd, features_cmd, train_cmd, grid_cmd,
                        self_cmd, detect_cmd, base_cmd, eval_cmd,
                        ablate_cmd}) {
    sub->add_option("--config", config_path,
                    "Flat key=value config file (long option names as keys)");
  }

  std::vector<std::string> args;
  try {
    args = merge_config_args(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::reverse(args.begin(), args.end());

  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth_cmd->parsed()) {
      return run_synth(synth_out, synth_truth, synth_cfg, burst_specs,
                       stopword_head);
    }
    if (features_cmd->parsed()) {
      return run_features(feat_input, feat_out, feat_wstats, feat_flags);
    }
    if (train_cmd->parsed()) {
      return run_train(train_flags, train_stream_flags, threads);
    }
    if (grid_cmd->parsed()) {
      return run_gridsearch(grid_training, grid_out, grid_family, grid_folds,
                            grid_seed, threads);
    }
    if (self_cmd->parsed()) {
      return run_selftrain(self_model_in, self_training, self_input,
                           self_model_out, self_theta, self_rounds, self_flags,
                           threads);
    }
    if (detect_cmd->parsed()) {
      return run_detect(det_model, det_input, det_out, det_rho, det_flags);
    }
    if (base_cmd->parsed()) {
      return run_baseline(base_method, base_input, base_out, base_lexicon,
                          base_group, base_literal, base_flags);
    }
    if (eval_cmd->parsed()) {
      return run_eval(eval_series, eval_truths, eval_names, eval_tau,
                      eval_roc_prefix, eval_summary);
    }
    if (ablate_cmd->parsed()) {
      return run_ablate(abl_training, abl_out, abl_star, abl_folds, abl_seed,
                        abl_trees, abl_max_features, abl_c, abl_gamma,
                        threads);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
