#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "laburst/dataset.hpp"
#include "laburst/ensemble.hpp"

namespace laburst {

struct GroundTruth {
  std::string name;
  std::set<std::int64_t> moments;  // slice times
};

// CSV rows: event_name, slice_time-or-ISO-timestamp, label. ISO timestamps
// need t0/delta for the slice conversion.
std::vector<GroundTruth> load_truth_csv(const std::string& path,
                                        std::int64_t t0 = 0,
                                        std::int64_t delta = 60);

// E' = union over t in E of {t..t+tau}, clipped to [span_begin, span_end].
std::set<std::int64_t> expand_truth(const std::set<std::int64_t>& moments,
                                    int tau, std::int64_t span_begin,
                                    std::int64_t span_end);

struct ScorePoint {
  std::int64_t t = 0;
  double score = 0.0;
};

struct ConfusionCounts {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::uint64_t total() const { return tp + fp + tn + fn; }
};

// predicted = score >= threshold, tallied against membership in E'.
ConfusionCounts confusion(std::span<const ScorePoint> series,
                          const std::set<std::int64_t>& expanded,
                          double threshold);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // threshold descending, (0,0) .. (1,1)
  double auc = 0.0;
};

// Thresholds sweep the distinct scores plus +/-inf sentinels; equal scores
// move as one step; AUC by trapezoidal integration. Throws
// std::invalid_argument when the ground truth covers a single class.
RocCurve roc(std::span<const ScorePoint> series,
             const std::set<std::int64_t>& expanded);

struct OperatingPoint {
  double threshold = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  double youden = 0.0;  // tpr - fpr
};
OperatingPoint youden_point(const RocCurve& curve);

struct EventSeries {
  std::string name;
  std::vector<ScorePoint> points;
  std::set<std::int64_t> moments;  // unexpanded E
};

struct EventReport {
  std::string name;
  RocCurve curve;
  OperatingPoint best;
  std::uint64_t positives = 0;
  std::uint64_t negatives = 0;
};

struct EvalReport {
  int tau = 2;
  std::vector<EventReport> per_event;
  EventReport composite;  // all (window, score, label) triples pooled
};

EvalReport evaluate_series(std::span<const EventSeries> events, int tau);

void write_roc_csv(std::ostream& out, const RocCurve& curve);
std::string report_to_json(const EvalReport& report);

// Ablation: retrain with one feature family removed at a time, identical
// folds and seed, and report the mean CV AUC difference against the full
// model. star_mask is the configuration without the average-difference
// family.
struct AblationRow {
  std::string family;
  double mean_auc = 0.0;
  double diff_vs_full = 0.0;
};

struct AblationReport {
  double full_auc = 0.0;
  std::vector<AblationRow> rows;  // one per family
  std::vector<int> star_mask;
};

AblationReport ablate(const std::vector<LabeledExample>& examples,
                      const AdaBoostConfig& cfg, int folds,
                      std::uint64_t seed, int threads = 1);

}  // namespace laburst
