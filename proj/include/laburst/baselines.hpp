#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "laburst/eval.hpp"
#include "laburst/message.hpp"
#include "laburst/windowing.hpp"

namespace laburst {

// Canonical form for seed matching: ASCII lowercase, non-alphanumeric edges
// stripped, every run of the same letter compressed to one. Idempotent.
// "gooaallll" -> "goal", "GOAL!!" -> "goal", "golazo" -> "golazo".
std::string collapse_runs(std::string_view token);

// Predefined seed tokens with per-sport groupings; canonical forms are
// letter-run-collapsed.
class SeedLexicon {
 public:
  // Groups: "worldseries", "superbowl", "worldcup", "all".
  static SeedLexicon builtin(std::string_view group);
  // One token per line, UTF-8.
  static SeedLexicon from_file(const std::string& path);

  bool matches(std::string_view raw_token) const {
    return canonical_.count(collapse_runs(raw_token)) > 0;
  }
  const std::set<std::string>& canonical() const { return canonical_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;     // as specified
  std::set<std::string> canonical_;     // collapsed
};

struct DeltaPoint {
  std::int64_t t = 0;
  double freq = 0.0;
  double avg = 0.0;
  double delta = 0.0;
  bool warm_up = false;  // t < k
};

struct BaselineOptions {
  StreamConfig stream;  // delta and k are used; omega is irrelevant here
  // The literal average sums slices t-k..t (k+1 terms) over k; the default
  // takes the mean of the k slices strictly before t.
  bool literal_avg = false;
};

// Messages per slice (retweets are already dropped by replay).
std::vector<std::uint64_t> slice_message_counts(
    const std::vector<Message>& stream, const StreamConfig& cfg,
    std::int64_t t0);

// Summed occurrences of tokens whose collapsed form is in the lexicon.
std::vector<std::uint64_t> slice_seed_counts(const std::vector<Message>& stream,
                                             const SeedLexicon& lexicon,
                                             const StreamConfig& cfg,
                                             std::int64_t t0);

// Mean over the k slices before t; nullopt while t < k.
std::optional<double> window_avg(std::span<const double> series, int k,
                                 std::int64_t t, bool literal = false);

// Delta series over the frequency series (one entry per slice; warm-up
// entries carry delta 0 and the flag).
std::vector<DeltaPoint> delta_series(std::span<const double> freq, int k,
                                     bool literal);

std::vector<DeltaPoint> rawburst_series(const std::vector<Message>& stream,
                                        const BaselineOptions& options);
std::vector<DeltaPoint> tokenburst_series(const std::vector<Message>& stream,
                                          const SeedLexicon& lexicon,
                                          const BaselineOptions& options);

std::vector<ScorePoint> to_score_points(std::span<const DeltaPoint> series);

void write_delta_csv(std::ostream& out, std::span<const DeltaPoint> series);
std::vector<ScorePoint> load_delta_csv(const std::string& path);

}  // namespace laburst
