#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "laburst/ensemble.hpp"
#include "laburst/eval.hpp"
#include "laburst/features.hpp"
#include "laburst/message.hpp"
#include "laburst/windowing.hpp"

namespace laburst {

struct ScoredToken {
  std::string token;
  double score = 0.0;
};

// Tokens of one window the ensemble scored >= 0.5.
struct BurstySet {
  std::int64_t end_time = 0;
  std::vector<ScoredToken> tokens;
  bool warm_up = false;  // history had fewer than 2 windows

  std::size_t count() const { return tokens.size(); }
};

// Extract + normalize + score every candidate of the newest window.
BurstySet classify_window(const EnsembleModel& model, const History& history,
                          const StreamConfig& cfg,
                          const CandidateFilter& filter);

struct MomentDetection {
  std::int64_t t = 0;
  bool detected = false;
  int rho = 1;
  std::vector<std::string> tokens;  // empty unless detected
};

// detected = (|B_t| >= rho); descriptive tokens only when detected.
MomentDetection indicate(const BurstySet& bursty, int rho);

struct SeriesPoint {
  std::int64_t t = 0;
  std::size_t count = 0;
  std::vector<ScoredToken> tokens;
  bool warm_up = false;
};

// Single pass over the stream; one entry per window, warm-up windows emit
// count 0 so the series stays aligned with ground-truth time. Sweeping rho
// over the counts reproduces indicate() for every threshold.
std::vector<SeriesPoint> score_series(const EnsembleModel& model,
                                      const std::vector<Message>& stream,
                                      const StreamConfig& cfg,
                                      const CandidateFilter& filter);

std::vector<ScorePoint> to_score_points(std::span<const SeriesPoint> series);

// JSON-lines, one record per window: {t, count, detected, rho, tokens}.
void write_detection_log(std::ostream& out,
                         std::span<const SeriesPoint> series, int rho);
std::vector<ScorePoint> load_detection_log(const std::string& path);

}  // namespace laburst
