#include "laburst/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "laburst/textio.hpp"

namespace laburst {

const std::array<const char*, kFeatureCount> kFeatureNames = {
    "slope_token",    "slope_message", "slope_user",
    "avgdiff_token",  "avgdiff_message", "avgdiff_user",
    "inter_arrival",  "entropy",       "mention_density",
    "tf_idf",         "tf_pdf",        "burst_weight",
};

const std::array<const char*, kFeatureFamilyCount> kFeatureFamilyNames = {
    "regression", "average_difference", "inter_arrival", "entropy",
    "density",    "tf_idf",             "tf_pdf",        "burst",
};

std::array<double, kFeatureCount> RawFeatureVector::as_array() const {
  return {slope_token,   slope_message, slope_user,      avgdiff_token,
          avgdiff_message, avgdiff_user, inter_arrival,   entropy,
          mention_density, tf_idf,       tf_pdf,          burst_weight};
}

RawFeatureVector RawFeatureVector::from_array(
    const std::array<double, kFeatureCount>& a) {
  RawFeatureVector v;
  v.slope_token = a[0];
  v.slope_message = a[1];
  v.slope_user = a[2];
  v.avgdiff_token = a[3];
  v.avgdiff_message = a[4];
  v.avgdiff_user = a[5];
  v.inter_arrival = a[6];
  v.entropy = a[7];
  v.mention_density = a[8];
  v.tf_idf = a[9];
  v.tf_pdf = a[10];
  v.burst_weight = a[11];
  return v;
}

std::vector<int> family_dims(FeatureFamily family) {
  switch (family) {
    case FeatureFamily::Regression: return {0, 1, 2};
    case FeatureFamily::AverageDifference: return {3, 4, 5};
    case FeatureFamily::InterArrival: return {6};
    case FeatureFamily::Entropy: return {7};
    case FeatureFamily::Density: return {8};
    case FeatureFamily::TfIdf: return {9};
    case FeatureFamily::TfPdf: return {10};
    case FeatureFamily::Burst: return {11};
  }
  return {};
}

std::vector<int> mask_excluding(FeatureFamily family) {
  const auto drop = family_dims(family);
  std::vector<int> mask;
  for (int i = 0; i < kFeatureCount; ++i) {
    if (std::find(drop.begin(), drop.end(), i) == drop.end()) {
      mask.push_back(i);
    }
  }
  return mask;
}

std::vector<int> full_feature_mask() {
  std::vector<int> mask(kFeatureCount);
  for (int i = 0; i < kFeatureCount; ++i) mask[i] = i;
  return mask;
}

std::vector<double> freq_series(const std::string& token,
                                const History& history, FreqKind kind) {
  std::vector<double> out;
  out.reserve(history.size());
  for (std::size_t i = 0; i < history.size(); ++i) {
    const WindowStats& w = history.at(i);
    switch (kind) {
      case FreqKind::Token:
        out.push_back(static_cast<double>(w.count_of(token)));
        break;
      case FreqKind::Message:
        out.push_back(static_cast<double>(w.messages_of(token)));
        break;
      case FreqKind::User:
        out.push_back(static_cast<double>(w.users_of(token)));
        break;
    }
  }
  return out;
}

double slope_log(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 2) throw std::invalid_argument("slope_log needs >= 2 points");
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = std::log1p(series[i]);
  const bool constant =
      std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
  if (constant) return 0.0;
  const double xbar = static_cast<double>(n - 1) / 2.0;
  double ybar = 0.0;
  for (double v : y) ybar += v;
  ybar /= static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i) - xbar;
    num += dx * (y[i] - ybar);
    den += dx * dx;
  }
  return num / den;
}

double avg_diff(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 2) throw std::invalid_argument("avg_diff needs >= 2 points");
  double mean = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) mean += series[i];
  mean /= static_cast<double>(n - 1);
  return series[n - 1] - mean;
}

double inter_arrival_mean(std::span<const std::int64_t> timestamps,
                          double ceiling) {
  if (!std::is_sorted(timestamps.begin(), timestamps.end())) {
    throw std::invalid_argument("inter_arrival_mean: unsorted timestamps");
  }
  if (timestamps.size() < 2) return ceiling;
  double sum = 0.0;
  for (std::size_t i = 1; i < timestamps.size(); ++i) {
    sum += static_cast<double>(timestamps[i] - timestamps[i - 1]);
  }
  return sum / static_cast<double>(timestamps.size() - 1);
}

std::vector<std::int64_t> gather_timestamps(const std::string& token,
                                            const History& history) {
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < history.size(); ++i) {
    const WindowStats& w = history.at(i);
    auto it = w.token_timestamps.find(token);
    if (it == w.token_timestamps.end()) continue;
    if (i == 0) {
      out.insert(out.end(), it->second.begin(), it->second.end());
    } else {
      // Only the part not covered by the previous window.
      const std::int64_t prev_end = history.at(i - 1).end_ts;
      auto from = std::lower_bound(it->second.begin(), it->second.end(),
                                   prev_end);
      out.insert(out.end(), from, it->second.end());
    }
  }
  return out;
}

double message_entropy(
    const std::unordered_map<std::string, std::uint32_t>& texts) {
  if (texts.empty()) throw std::invalid_argument("message_entropy: empty set");
  double total = 0.0;
  for (const auto& [text, count] : texts) total += count;
  double h = 0.0;
  for (const auto& [text, count] : texts) {
    const double p = static_cast<double>(count) / total;
    h -= p * std::log(p);
  }
  return std::max(h, 0.0);
}

MentionIndex::MentionIndex(const std::set<MentionEdge>& edges) {
  for (const auto& edge : edges) {
    by_endpoint_[edge.first].push_back({&edge.first, &edge.second, true});
    by_endpoint_[edge.second].push_back({&edge.second, &edge.first, false});
  }
}

const std::vector<MentionIndex::Arc>* MentionIndex::incident(
    const std::string& lowered_user) const {
  auto it = by_endpoint_.find(lowered_user);
  return it == by_endpoint_.end() ? nullptr : &it->second;
}

double mention_density(const std::unordered_set<std::string>& users,
                       const MentionIndex& index) {
  std::unordered_set<std::string> nodes;
  nodes.reserve(users.size());
  for (const auto& u : users) nodes.insert(ascii_lower(u));
  const std::size_t user_count = nodes.size();

  std::size_t edge_count = 0;
  std::unordered_set<std::string_view> outside;
  for (const auto& u : nodes) {
    const auto* arcs = index.incident(u);
    if (arcs == nullptr) continue;
    for (const auto& arc : arcs[0]) {
      const bool other_in = nodes.count(*arc.other) > 0;
      // An edge with both endpoints inside shows up from both sides; count
      // it only from its canonical endpoint.
      if (other_in && !arc.canonical) continue;
      ++edge_count;
      if (!other_in) outside.insert(*arc.other);
    }
  }
  const double n = static_cast<double>(user_count + outside.size());
  if (n < 2.0) return 0.0;
  return 2.0 * static_cast<double>(edge_count) / (n * (n - 1.0));
}

double mention_density(const std::unordered_set<std::string>& users,
                       const std::set<MentionEdge>& window_edges) {
  return mention_density(users, MentionIndex(window_edges));
}

double tf_idf(const std::string& token, const History& history) {
  const std::size_t h = history.size();
  if (h < 1) return 0.0;
  const double tf =
      static_cast<double>(history.newest().count_of(token));
  std::size_t dfw = 0;
  for (std::size_t i = 0; i < h; ++i) {
    if (history.at(i).count_of(token) > 0) ++dfw;
  }
  const double idf =
      std::log(static_cast<double>(h) / (1.0 + static_cast<double>(dfw)));
  return std::max(0.0, tf * idf);
}

double tf_pdf(const std::string& token, const History& history) {
  double sum = 0.0;
  for (std::size_t i = 0; i < history.size(); ++i) {
    const WindowStats& w = history.at(i);
    if (w.total_messages == 0 || w.token_count_l2 == 0.0) continue;
    const std::uint64_t count = w.count_of(token);
    if (count == 0) continue;
    const double f = static_cast<double>(count) / w.token_count_l2;
    const double ratio = static_cast<double>(w.messages_of(token)) /
                         static_cast<double>(w.total_messages);
    sum += f * std::exp(ratio);
  }
  return sum;
}

double burst_weight(const std::string& token, const History& history) {
  const std::size_t h = history.size();
  if (h < 2) return 0.0;
  const WindowStats& newest = history.newest();
  if (newest.total_token_occurrences == 0) return 0.0;
  const double f_actual =
      static_cast<double>(newest.count_of(token)) /
      static_cast<double>(newest.total_token_occurrences);
  if (f_actual <= 0.0) return 0.0;
  double f_expected = 0.0;
  for (std::size_t i = 0; i + 1 < h; ++i) {
    const WindowStats& w = history.at(i);
    if (w.total_token_occurrences == 0) continue;
    f_expected += static_cast<double>(w.count_of(token)) /
                  static_cast<double>(w.total_token_occurrences);
  }
  f_expected /= static_cast<double>(h - 1);
  const double burstiness = std::max(f_actual - f_expected, 0.0) / f_actual;
  return burstiness * f_actual;
}

std::vector<std::string> candidate_tokens(const WindowStats& window,
                                          const CandidateFilter& filter) {
  std::vector<std::string> out;
  for (const auto& [tok, count] : window.token_count) {
    if (filter.passes(tok, count)) out.push_back(tok);
  }
  std::sort(out.begin(), out.end());
  return out;
}

CandidateSet extract(const History& history, const StreamConfig& cfg,
                     const CandidateFilter& filter) {
  CandidateSet set;
  if (history.empty()) return set;
  const WindowStats& newest = history.newest();
  set.end_time = newest.end_time;
  if (history.size() < 2) return set;  // warm-up

  const double ceiling =
      static_cast<double>(cfg.k) * static_cast<double>(cfg.omega);
  const MentionIndex mention_index(newest.mention_edges);
  const auto tokens = candidate_tokens(newest, filter);
  set.items.reserve(tokens.size());
  for (const auto& tok : tokens) {
    Candidate c;
    c.token = tok;
    const auto tok_series = freq_series(tok, history, FreqKind::Token);
    const auto msg_series = freq_series(tok, history, FreqKind::Message);
    const auto usr_series = freq_series(tok, history, FreqKind::User);
    c.raw.slope_token = slope_log(tok_series);
    c.raw.slope_message = slope_log(msg_series);
    c.raw.slope_user = slope_log(usr_series);
    c.raw.avgdiff_token = avg_diff(tok_series);
    c.raw.avgdiff_message = avg_diff(msg_series);
    c.raw.avgdiff_user = avg_diff(usr_series);
    c.raw.inter_arrival =
        inter_arrival_mean(gather_timestamps(tok, history), ceiling);
    auto texts = newest.token_texts.find(tok);
    c.raw.entropy = texts == newest.token_texts.end() || texts->second.empty()
                        ? 0.0
                        : message_entropy(texts->second);
    auto users = newest.token_users.find(tok);
    c.raw.mention_density =
        users == newest.token_users.end()
            ? 0.0
            : mention_density(users->second, mention_index);
    c.raw.tf_idf = tf_idf(tok, history);
    c.raw.tf_pdf = tf_pdf(tok, history);
    c.raw.burst_weight = burst_weight(tok, history);
    set.items.push_back(std::move(c));
  }
  return set;
}

void normalize(CandidateSet& candidates) {
  if (candidates.items.empty()) return;
  std::array<double, kFeatureCount> lo{}, hi{};
  bool first = true;
  for (const Candidate& c : candidates.items) {
    const auto vals = c.raw.as_array();
    for (int f = 0; f < kFeatureCount; ++f) {
      if (first || vals[f] < lo[f]) lo[f] = vals[f];
      if (first || vals[f] > hi[f]) hi[f] = vals[f];
    }
    first = false;
  }
  for (Candidate& c : candidates.items) {
    const auto vals = c.raw.as_array();
    for (int f = 0; f < kFeatureCount; ++f) {
      const double range = hi[f] - lo[f];
      c.normalized[f] = range == 0.0 ? 0.0 : (vals[f] - lo[f]) / range;
    }
  }
}

}  // namespace laburst
