#include "laburst/windowing.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "laburst/ingest.hpp"
#include "laburst/textio.hpp"

namespace laburst {

void StreamConfig::validate() const {
  if (delta < 1) throw std::invalid_argument("delta must be >= 1");
  if (omega < delta || omega % delta != 0) {
    throw std::invalid_argument("omega must be a positive multiple of delta");
  }
  if (k < 2) throw std::invalid_argument("k must be >= 2");
}

std::int64_t slice_index_of(std::int64_t timestamp, std::int64_t t0,
                            std::int64_t delta) {
  return (timestamp - t0) / delta;
}

void accumulate(SliceTable& slice, const Message& msg) {
  ++slice.total_messages;
  const auto tokens = tokenize(msg.text);
  if (tokens.empty()) return;

  const std::uint32_t text_ref =
      static_cast<std::uint32_t>(slice.texts.size());
  slice.texts.push_back(msg.text);

  std::unordered_set<std::string_view> seen;
  seen.reserve(tokens.size());
  const std::string author_lower = ascii_lower(msg.author_id);
  for (const auto& tok : tokens) {
    ++slice.token_count[tok];
    slice.token_timestamps[tok].push_back(msg.timestamp);
    if (seen.insert(tok).second) {
      ++slice.token_messages[tok];
      slice.token_users[tok].insert(msg.author_id);
      slice.token_text_refs[tok].push_back(text_ref);
    }
    if (tok.size() > 1 && tok[0] == '@') {
      const std::string handle = ascii_lower(tok.substr(1));
      if (!handle.empty() && handle != author_lower) {
        MentionEdge e = author_lower < handle
                            ? MentionEdge{author_lower, handle}
                            : MentionEdge{handle, author_lower};
        slice.mention_edges.insert(std::move(e));
      }
    }
  }
}

WindowStats build_window(std::span<const SliceTable* const> slices,
                         const StreamConfig& cfg, std::int64_t t0,
                         const CandidateFilter& filter) {
  const int spw = cfg.slices_per_window();
  if (static_cast<int>(slices.size()) != spw) {
    throw std::invalid_argument("build_window: expected omega/delta slices");
  }
  for (std::size_t i = 1; i < slices.size(); ++i) {
    if (slices[i]->slice_index != slices[i - 1]->slice_index + 1) {
      throw std::invalid_argument("build_window: slices not consecutive");
    }
  }

  WindowStats w;
  w.start_time = slices.front()->slice_index;
  w.end_time = slices.back()->slice_index;
  w.start_ts = t0 + w.start_time * cfg.delta;
  w.end_ts = t0 + (w.end_time + 1) * cfg.delta;

  for (const SliceTable* s : slices) {
    w.total_messages += s->total_messages;
    for (const auto& [tok, c] : s->token_count) w.token_count[tok] += c;
    for (const auto& [tok, c] : s->token_messages) w.token_messages[tok] += c;
    for (const auto& [tok, users] : s->token_users) {
      w.token_users[tok].insert(users.begin(), users.end());
    }
    for (const auto& [tok, ts] : s->token_timestamps) {
      auto& dst = w.token_timestamps[tok];
      dst.insert(dst.end(), ts.begin(), ts.end());
    }
    w.mention_edges.insert(s->mention_edges.begin(), s->mention_edges.end());
  }

  double sq = 0.0;
  for (const auto& [tok, c] : w.token_count) {
    w.total_token_occurrences += c;
    sq += static_cast<double>(c) * static_cast<double>(c);
  }
  w.token_count_l2 = std::sqrt(sq);

  // Slices arrive in time order, so per-slice timestamp lists are already
  // sorted and concatenation preserves order.
  for (const auto& [tok, c] : w.token_count) {
    if (!filter.retain_all_texts && !filter.passes(tok, c)) continue;
    auto& multiset = w.token_texts[tok];
    for (const SliceTable* s : slices) {
      auto it = s->token_text_refs.find(tok);
      if (it == s->token_text_refs.end()) continue;
      for (const std::uint32_t ref : it->second) {
        ++multiset[s->texts[ref]];
      }
    }
  }
  return w;
}

void History::advance(std::shared_ptr<const WindowStats> w) {
  if (!ring_.empty() && w->end_time <= ring_.back()->end_time) {
    throw std::invalid_argument("history: window end_time must increase");
  }
  ring_.push_back(std::move(w));
  while (static_cast<int>(ring_.size()) > k_) ring_.pop_front();
}

Windower::Windower(const StreamConfig& cfg, CandidateFilter filter)
    : cfg_(cfg), filter_(filter), t0_(cfg.t0), history_(cfg.k) {
  cfg_.validate();
}

void Windower::open_slice(std::int64_t index) {
  current_.emplace();
  current_->slice_index = index;
}

void Windower::close_slice(const WindowSink& sink) {
  ring_.push_back(std::move(*current_));
  current_.reset();
  const int spw = cfg_.slices_per_window();
  while (static_cast<int>(ring_.size()) > spw) ring_.pop_front();
  if (static_cast<int>(ring_.size()) == spw) {
    std::vector<const SliceTable*> view;
    view.reserve(ring_.size());
    for (const auto& s : ring_) view.push_back(&s);
    auto w = std::make_shared<const WindowStats>(
        build_window(view, cfg_, t0(), filter_));
    history_.advance(w);
    if (sink) sink(history_);
  }
}

void Windower::push(const Message& msg, const WindowSink& sink) {
  if (!t0_.has_value()) {
    t0_ = (msg.timestamp / cfg_.delta) * cfg_.delta;
  }
  if (msg.timestamp < *t0_) {
    ++skipped_before_t0_;
    return;
  }
  const std::int64_t idx = slice_index_of(msg.timestamp, *t0_, cfg_.delta);
  if (!current_.has_value()) {
    // First slice of the stream starts at index 0 so windows line up with
    // the epoch even when early slices are empty.
    open_slice(0);
  }
  while (current_->slice_index < idx) {
    const std::int64_t next = current_->slice_index + 1;
    close_slice(sink);
    open_slice(next);
  }
  accumulate(*current_, msg);
}

void Windower::finish(const WindowSink& sink) {
  if (current_.has_value()) close_slice(sink);
}

void write_window_stats_csv(std::ostream& out, const WindowStats& w) {
  std::vector<const std::string*> tokens;
  tokens.reserve(w.token_count.size());
  for (const auto& [tok, c] : w.token_count) tokens.push_back(&tok);
  std::sort(tokens.begin(), tokens.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });
  for (const std::string* tok : tokens) {
    out << w.end_time << ',' << csv_escape(*tok) << ',' << w.count_of(*tok)
        << ',' << w.messages_of(*tok) << ',' << w.users_of(*tok) << '\n';
  }
}

}  // namespace laburst
