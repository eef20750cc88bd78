#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "laburst/windowing.hpp"

namespace laburst {

inline constexpr int kFeatureCount = 12;

// Canonical feature order; CSV columns, masks and models all use it.
extern const std::array<const char*, kFeatureCount> kFeatureNames;

struct RawFeatureVector {
  double slope_token = 0.0;
  double slope_message = 0.0;
  double slope_user = 0.0;
  double avgdiff_token = 0.0;
  double avgdiff_message = 0.0;
  double avgdiff_user = 0.0;
  double inter_arrival = 0.0;  // seconds
  double entropy = 0.0;        // nats
  double mention_density = 0.0;
  double tf_idf = 0.0;
  double tf_pdf = 0.0;
  double burst_weight = 0.0;

  std::array<double, kFeatureCount> as_array() const;
  static RawFeatureVector from_array(const std::array<double, kFeatureCount>&);
};

// The eight feature families. Regression and average-difference each cover
// their token/message/user variants.
enum class FeatureFamily {
  Regression,
  AverageDifference,
  InterArrival,
  Entropy,
  Density,
  TfIdf,
  TfPdf,
  Burst,
};
inline constexpr int kFeatureFamilyCount = 8;
extern const std::array<const char*, kFeatureFamilyCount> kFeatureFamilyNames;
std::vector<int> family_dims(FeatureFamily family);
// All feature indices except the given family's.
std::vector<int> mask_excluding(FeatureFamily family);
std::vector<int> full_feature_mask();

enum class FreqKind { Token, Message, User };

// Per-window counts for the token, oldest -> newest; absent windows read 0.
std::vector<double> freq_series(const std::string& token,
                                const History& history, FreqKind kind);

// OLS slope of ln(1 + series[i]) against i. Throws for fewer than 2 points;
// exact 0 for a constant series.
double slope_log(std::span<const double> series);

// series.back() minus the mean of the preceding entries. Throws for fewer
// than 2 points.
double avg_diff(std::span<const double> series);

// Mean gap between consecutive occurrence timestamps; fewer than 2
// occurrences yields the ceiling. Throws on unsorted input.
double inter_arrival_mean(std::span<const std::int64_t> timestamps,
                          double ceiling);

// Occurrence timestamps of the token across the history span. Overlapping
// windows share slices, so each window past the oldest contributes only the
// portion after the previous window's end.
std::vector<std::int64_t> gather_timestamps(const std::string& token,
                                            const History& history);

// Shannon entropy (nats) of the empirical distribution over exact message
// texts. Throws on an empty multiset.
double message_entropy(
    const std::unordered_map<std::string, std::uint32_t>& texts);

// Endpoint adjacency over a window's mention edges; built once per window so
// per-token density queries touch only the token's own users.
class MentionIndex {
 public:
  explicit MentionIndex(const std::set<MentionEdge>& edges);
  struct Arc {
    const std::string* self;
    const std::string* other;
    bool canonical;  // true when *self is the edge's first endpoint
  };
  const std::vector<Arc>* incident(const std::string& lowered_user) const;

 private:
  std::unordered_map<std::string, std::vector<Arc>> by_endpoint_;
};

// Density of the token's mention subgraph: edges with at least one endpoint
// among the token's users, nodes = those users plus the other endpoints.
// Returns 0 when the subgraph has fewer than 2 nodes. User ids are matched
// against edge endpoints case-insensitively (edges store lowercased handles).
double mention_density(const std::unordered_set<std::string>& users,
                       const std::set<MentionEdge>& window_edges);
double mention_density(const std::unordered_set<std::string>& users,
                       const MentionIndex& index);

// tf from the newest window, idf = ln(h / (1 + dfw)); product floored at 0.
double tf_idf(const std::string& token, const History& history);

// Sum over history windows c of F_c * exp(n_c / N_c) with F_c the token count
// normalized by the window's token-count Euclidean norm.
double tf_pdf(const std::string& token, const History& history);

// Burstiness times actual relative frequency in the newest window, with the
// expected frequency taken as the mean over the preceding windows.
double burst_weight(const std::string& token, const History& history);

// Tokens of the newest window passing the candidate floor, sorted.
std::vector<std::string> candidate_tokens(const WindowStats& window,
                                          const CandidateFilter& filter);

struct Candidate {
  std::string token;
  RawFeatureVector raw;
  std::array<double, kFeatureCount> normalized{};
};

struct CandidateSet {
  std::int64_t end_time = 0;
  std::vector<Candidate> items;  // sorted by token
};

// Computes raw features for every candidate of the newest window. Requires a
// history of at least 2 windows (differences and slopes are undefined
// earlier); shorter-than-k histories use the available length.
CandidateSet extract(const History& history, const StreamConfig& cfg,
                     const CandidateFilter& filter);

// Per-feature min-max scaling across this window's candidates; features that
// are constant across the set map to 0.
void normalize(CandidateSet& candidates);

}  // namespace laburst
