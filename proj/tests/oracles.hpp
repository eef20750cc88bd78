#pragma once

// Independent reference implementations used only by tests. Everything here
// recomputes results from first principles (raw messages, exhaustive pair
// counting, projected-gradient optimization) without touching the library's
// streaming or solver code paths.

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "laburst/dataset.hpp"
#include "laburst/eval.hpp"
#include "laburst/message.hpp"
#include "laburst/windowing.hpp"

namespace laburst::testing {

// Per-window tables rebuilt by scanning the raw message list.
struct OracleWindow {
  std::int64_t start_ts = 0;
  std::int64_t end_ts = 0;
  std::uint64_t total_messages = 0;
  std::uint64_t total_occurrences = 0;
  double l2 = 0.0;
  std::map<std::string, std::uint64_t> count;
  std::map<std::string, std::uint64_t> msgs;
  std::map<std::string, std::set<std::string>> users;
  std::map<std::string, std::map<std::string, int>> texts;
  std::set<std::pair<std::string, std::string>> edges;
};

OracleWindow oracle_window(const std::vector<Message>& messages,
                           std::int64_t start_ts, std::int64_t end_ts);

// Caches per-window tables so checking every candidate of every window stays
// linear in the stream length.
class OracleContext {
 public:
  OracleContext(const std::vector<Message>& messages, const StreamConfig& cfg,
                std::int64_t t0);

  // The 12 raw features of `token` at the window ending at slice
  // `end_slice`, recomputed from the raw messages.
  std::array<double, kFeatureCount> features(std::int64_t end_slice,
                                             const std::string& token);

  const OracleWindow& window(std::int64_t end_slice);

 private:
  std::int64_t history_length(std::int64_t end_slice) const;
  // Occurrence timestamps over the history span, one stream scan per slice.
  const std::map<std::string, std::vector<std::int64_t>>& span_stamps(
      std::int64_t end_slice);

  const std::vector<Message>& messages_;
  StreamConfig cfg_;
  std::int64_t t0_;
  std::map<std::int64_t, OracleWindow> windows_;
  std::map<std::int64_t, std::map<std::string, std::vector<std::int64_t>>>
      stamps_;
};

// One-shot convenience wrapper.
std::array<double, kFeatureCount> oracle_features(
    const std::vector<Message>& messages, const StreamConfig& cfg,
    std::int64_t t0, std::int64_t end_slice, const std::string& token);

// AUC as the exhaustive pairwise statistic P(s+ > s-) + P(s+ = s-)/2.
double auc_pairwise(const std::vector<ScorePoint>& points,
                    const std::set<std::int64_t>& positives);

// Reference solver for the SVM dual: projected gradient ascent with exact
// projection onto {0 <= a <= C, y.a = 0}.
struct PgResult {
  std::vector<double> alpha;
  double objective = 0.0;
};
double svm_dual_objective(const Dataset& data,
                          const std::vector<double>& alpha, double gamma);
PgResult pg_dual_solve(const Dataset& data, double c, double gamma,
                       int iterations, double step);

}  // namespace laburst::testing
