#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "laburst/message.hpp"

namespace laburst {

struct StreamConfig {
  std::int64_t delta = 60;   // slice length, seconds
  std::int64_t omega = 180;  // window length, seconds; positive multiple of delta
  int k = 10;                // history depth in windows
  std::optional<std::int64_t> t0;  // stream epoch; defaults to the first
                                   // message rounded down to a delta boundary

  int slices_per_window() const {
    return static_cast<int>(omega / delta);
  }
  // Throws std::invalid_argument when delta < 1, omega is not a positive
  // multiple of delta, or k < 2.
  void validate() const;
};

// Candidate floor shared by feature extraction and window-level text
// retention.
struct CandidateFilter {
  std::uint64_t min_count = 5;
  std::size_t max_token_len = 64;  // bytes
  bool drop_urls = true;           // excludes tokens with prefix "http"
  bool retain_all_texts = false;   // keep text multisets for every token

  bool passes(std::string_view token, std::uint64_t count) const {
    if (count < min_count) return false;
    if (token.size() > max_token_len) return false;
    if (drop_urls && token.rfind("http", 0) == 0) return false;
    return true;
  }
};

using MentionEdge = std::pair<std::string, std::string>;  // canonical a <= b

// Per-slice aggregates. Message texts are stored once per slice; tokens
// reference them by index so a 20-token message is not copied 20 times.
struct SliceTable {
  std::int64_t slice_index = 0;
  std::uint64_t total_messages = 0;
  std::unordered_map<std::string, std::uint64_t> token_count;
  std::unordered_map<std::string, std::uint64_t> token_messages;
  std::unordered_map<std::string, std::unordered_set<std::string>> token_users;
  std::unordered_map<std::string, std::vector<std::int64_t>> token_timestamps;
  std::set<MentionEdge> mention_edges;  // endpoints lowercased
  std::vector<std::string> texts;       // one entry per message
  std::unordered_map<std::string, std::vector<std::uint32_t>> token_text_refs;
};

// Adds one message to the slice. The caller guarantees the message belongs
// to this slice.
void accumulate(SliceTable& slice, const Message& msg);

std::int64_t slice_index_of(std::int64_t timestamp, std::int64_t t0,
                            std::int64_t delta);

struct WindowStats {
  std::int64_t end_time = 0;    // slice index of the newest constituent slice
  std::int64_t start_time = 0;  // slice index of the oldest
  std::int64_t start_ts = 0;    // [start_ts, end_ts) in seconds
  std::int64_t end_ts = 0;
  std::uint64_t total_messages = 0;
  std::uint64_t total_token_occurrences = 0;
  double token_count_l2 = 0.0;  // Euclidean norm of all token counts

  std::unordered_map<std::string, std::uint64_t> token_count;
  std::unordered_map<std::string, std::uint64_t> token_messages;
  std::unordered_map<std::string, std::unordered_set<std::string>> token_users;
  std::unordered_map<std::string, std::vector<std::int64_t>> token_timestamps;
  std::set<MentionEdge> mention_edges;
  // Exact-text multiset per retained token: text -> multiplicity.
  std::unordered_map<std::string,
                     std::unordered_map<std::string, std::uint32_t>>
      token_texts;

  std::uint64_t count_of(const std::string& token) const {
    auto it = token_count.find(token);
    return it == token_count.end() ? 0 : it->second;
  }
  std::uint64_t messages_of(const std::string& token) const {
    auto it = token_messages.find(token);
    return it == token_messages.end() ? 0 : it->second;
  }
  std::uint64_t users_of(const std::string& token) const {
    auto it = token_users.find(token);
    return it == token_users.end() ? 0 : it->second.size();
  }
};

// Element-wise sum / union over exactly omega/delta consecutive slices.
// Throws std::invalid_argument on a wrong slice count or non-consecutive
// indices. Text multisets are materialized for tokens passing the filter
// (all tokens when filter.retain_all_texts is set).
WindowStats build_window(std::span<const SliceTable* const> slices,
                         const StreamConfig& cfg, std::int64_t t0,
                         const CandidateFilter& filter);

// Ring of the most recent k windows, oldest -> newest.
class History {
 public:
  explicit History(int k) : k_(k) {}

  // Appends w; evicts the oldest beyond k. Throws std::invalid_argument when
  // end_time does not increase.
  void advance(std::shared_ptr<const WindowStats> w);

  std::size_t size() const { return ring_.size(); }
  bool empty() const { return ring_.empty(); }
  const WindowStats& at(std::size_t i) const { return *ring_[i]; }
  const WindowStats& newest() const { return *ring_.back(); }
  int capacity() const { return k_; }

 private:
  int k_;
  std::deque<std::shared_ptr<const WindowStats>> ring_;
};

// Single-pass stream segmentation: groups messages into delta slices, emits
// one window per completed slice once omega/delta slices exist, and maintains
// the k-window history. Quiet periods produce empty slices so windows stay
// consecutive.
class Windower {
 public:
  using WindowSink = std::function<void(const History&)>;

  Windower(const StreamConfig& cfg, CandidateFilter filter);

  // Messages must arrive in non-decreasing timestamp order (replay's
  // contract). Messages before t0 are counted and skipped.
  void push(const Message& msg, const WindowSink& sink);
  // Closes the final slice and emits its window.
  void finish(const WindowSink& sink);

  std::int64_t t0() const { return t0_.value_or(0); }
  std::uint64_t skipped_before_t0() const { return skipped_before_t0_; }
  const History& history() const { return history_; }

 private:
  void close_slice(const WindowSink& sink);
  void open_slice(std::int64_t index);

  StreamConfig cfg_;
  CandidateFilter filter_;
  std::optional<std::int64_t> t0_;
  std::optional<SliceTable> current_;
  std::deque<SliceTable> ring_;  // completed slices, at most omega/delta
  History history_;
  std::uint64_t skipped_before_t0_ = 0;
};

// Debug dump: one row per (window, token) with count, message and user
// frequencies.
void write_window_stats_csv(std::ostream& out, const WindowStats& w);

}  // namespace laburst
