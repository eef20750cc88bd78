#include "laburst/baselines.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include "laburst/ingest.hpp"
#include "laburst/textio.hpp"

namespace laburst {
namespace {

bool is_ascii_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9');
}

const std::vector<std::string>& builtin_group(std::string_view group) {
  static const std::vector<std::string> worldseries = {"run", "home",
                                                       "homerun"};
  static const std::vector<std::string> superbowl = {
      "score", "touchdown", "td", "fieldgoal", "points"};
  static const std::vector<std::string> worldcup = {
      "goal", "gol",     "golazo", "score", "foul",
      "penalty", "card", "red",    "yellow", "points"};
  static const std::vector<std::string> all = [] {
    std::vector<std::string> merged;
    for (const auto* group_list : {&worldseries, &superbowl, &worldcup}) {
      for (const auto& tok : *group_list) {
        if (std::find(merged.begin(), merged.end(), tok) == merged.end()) {
          merged.push_back(tok);
        }
      }
    }
    return merged;
  }();
  if (group == "worldseries") return worldseries;
  if (group == "superbowl") return superbowl;
  if (group == "worldcup") return worldcup;
  if (group == "all") return all;
  throw std::invalid_argument("unknown lexicon group: " + std::string(group));
}

}  // namespace

std::string collapse_runs(std::string_view token) {
  std::string lowered = ascii_lower(token);
  // Strip non-alphanumeric ASCII from both edges; bytes >= 0x80 (UTF-8
  // continuations and leads) are kept.
  std::size_t begin = 0, end = lowered.size();
  auto strippable = [&](char c) {
    return static_cast<unsigned char>(c) < 0x80 && !is_ascii_alnum(c);
  };
  while (begin < end && strippable(lowered[begin])) ++begin;
  while (end > begin && strippable(lowered[end - 1])) --end;

  std::string out;
  out.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    const char c = lowered[i];
    const bool is_letter = c >= 'a' && c <= 'z';
    if (is_letter && !out.empty() && out.back() == c) continue;
    out += c;
  }
  return out;
}

SeedLexicon SeedLexicon::builtin(std::string_view group) {
  SeedLexicon lex;
  lex.tokens_ = builtin_group(group);
  for (const auto& tok : lex.tokens_) lex.canonical_.insert(collapse_runs(tok));
  return lex;
}

SeedLexicon SeedLexicon::from_file(const std::string& path) {
  SeedLexicon lex;
  for (const auto& line : read_lines(path)) {
    if (line.empty() || line[0] == '#') continue;
    lex.tokens_.push_back(line);
    lex.canonical_.insert(collapse_runs(line));
  }
  if (lex.tokens_.empty()) {
    throw std::runtime_error("empty lexicon file: " + path);
  }
  return lex;
}

namespace {

std::int64_t resolve_t0(const std::vector<Message>& stream,
                        const StreamConfig& cfg) {
  if (cfg.t0.has_value()) return *cfg.t0;
  if (stream.empty()) return 0;
  return (stream.front().timestamp / cfg.delta) * cfg.delta;
}

template <typename PerMessage>
std::vector<std::uint64_t> per_slice(const std::vector<Message>& stream,
                                     const StreamConfig& cfg, std::int64_t t0,
                                     PerMessage fn) {
  std::vector<std::uint64_t> counts;
  for (const Message& m : stream) {
    if (m.timestamp < t0) continue;
    const auto idx =
        static_cast<std::size_t>(slice_index_of(m.timestamp, t0, cfg.delta));
    if (idx >= counts.size()) counts.resize(idx + 1, 0);
    counts[idx] += fn(m);
  }
  return counts;
}

}  // namespace

std::vector<std::uint64_t> slice_message_counts(
    const std::vector<Message>& stream, const StreamConfig& cfg,
    std::int64_t t0) {
  return per_slice(stream, cfg, t0, [](const Message&) { return 1; });
}

std::vector<std::uint64_t> slice_seed_counts(const std::vector<Message>& stream,
                                             const SeedLexicon& lexicon,
                                             const StreamConfig& cfg,
                                             std::int64_t t0) {
  return per_slice(stream, cfg, t0, [&](const Message& m) {
    std::uint64_t hits = 0;
    for (const auto& tok : tokenize(m.text)) {
      if (lexicon.matches(tok)) ++hits;
    }
    return hits;
  });
}

std::optional<double> window_avg(std::span<const double> series, int k,
                                 std::int64_t t, bool literal) {
  if (t < k || static_cast<std::size_t>(t) >= series.size()) {
    return std::nullopt;
  }
  double sum = 0.0;
  for (std::int64_t j = t - k; j < t; ++j) sum += series[j];
  if (literal) sum += series[t];
  return sum / static_cast<double>(k);
}

std::vector<DeltaPoint> delta_series(std::span<const double> freq, int k,
                                     bool literal) {
  std::vector<DeltaPoint> out;
  out.reserve(freq.size());
  for (std::size_t t = 0; t < freq.size(); ++t) {
    DeltaPoint p;
    p.t = static_cast<std::int64_t>(t);
    p.freq = freq[t];
    const auto avg = window_avg(freq, k, p.t, literal);
    if (avg.has_value()) {
      p.avg = *avg;
      p.delta = p.freq - p.avg;
    } else {
      p.warm_up = true;
    }
    out.push_back(p);
  }
  return out;
}

namespace {

std::vector<DeltaPoint> series_from_counts(
    const std::vector<std::uint64_t>& counts, const BaselineOptions& options) {
  std::vector<double> freq(counts.begin(), counts.end());
  return delta_series(freq, options.stream.k, options.literal_avg);
}

}  // namespace

std::vector<DeltaPoint> rawburst_series(const std::vector<Message>& stream,
                                        const BaselineOptions& options) {
  const std::int64_t t0 = resolve_t0(stream, options.stream);
  return series_from_counts(
      slice_message_counts(stream, options.stream, t0), options);
}

std::vector<DeltaPoint> tokenburst_series(const std::vector<Message>& stream,
                                          const SeedLexicon& lexicon,
                                          const BaselineOptions& options) {
  const std::int64_t t0 = resolve_t0(stream, options.stream);
  return series_from_counts(
      slice_seed_counts(stream, lexicon, options.stream, t0), options);
}

std::vector<ScorePoint> to_score_points(std::span<const DeltaPoint> series) {
  std::vector<ScorePoint> out;
  out.reserve(series.size());
  for (const auto& p : series) out.push_back({p.t, p.delta});
  return out;
}

void write_delta_csv(std::ostream& out, std::span<const DeltaPoint> series) {
  out << "t,freq,avg,delta,warm_up\n";
  for (const auto& p : series) {
    out << p.t << ',' << format_double(p.freq) << ',' << format_double(p.avg)
        << ',' << format_double(p.delta) << ',' << (p.warm_up ? 1 : 0) << '\n';
  }
}

std::vector<ScorePoint> load_delta_csv(const std::string& path) {
  const auto lines = read_lines(path);
  std::vector<ScorePoint> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = csv_split(lines[i]);
    if (fields.size() < 5) {
      throw std::runtime_error("bad delta csv row in " + path);
    }
    out.push_back({parse_int(fields[0]).value_or(0), std::stod(fields[3])});
  }
  return out;
}

}  // namespace laburst
