#include "laburst/detect.hpp"

#include <ostream>
#include <stdexcept>

#include "json.hpp"

#include "laburst/textio.hpp"

namespace laburst {

BurstySet classify_window(const EnsembleModel& model, const History& history,
                          const StreamConfig& cfg,
                          const CandidateFilter& filter) {
  BurstySet out;
  if (history.empty()) {
    out.warm_up = true;
    return out;
  }
  out.end_time = history.newest().end_time;
  if (history.size() < 2) {
    out.warm_up = true;
    return out;
  }
  CandidateSet cands = extract(history, cfg, filter);
  normalize(cands);
  for (const Candidate& c : cands.items) {
    const double score = model.predict_score(c.normalized);
    if (score >= 0.5) out.tokens.push_back({c.token, score});
  }
  return out;
}

MomentDetection indicate(const BurstySet& bursty, int rho) {
  if (rho < 1) throw std::invalid_argument("indicate: rho must be >= 1");
  MomentDetection d;
  d.t = bursty.end_time;
  d.rho = rho;
  d.detected = bursty.count() >= static_cast<std::size_t>(rho);
  if (d.detected) {
    d.tokens.reserve(bursty.tokens.size());
    for (const auto& tok : bursty.tokens) d.tokens.push_back(tok.token);
  }
  return d;
}

std::vector<SeriesPoint> score_series(const EnsembleModel& model,
                                      const std::vector<Message>& stream,
                                      const StreamConfig& cfg,
                                      const CandidateFilter& filter) {
  std::vector<SeriesPoint> series;
  Windower windower(cfg, filter);
  auto on_window = [&](const History& history) {
    BurstySet bursty = classify_window(model, history, cfg, filter);
    SeriesPoint p;
    p.t = bursty.end_time;
    p.count = bursty.count();
    p.tokens = std::move(bursty.tokens);
    p.warm_up = bursty.warm_up;
    series.push_back(std::move(p));
  };
  for (const Message& m : stream) windower.push(m, on_window);
  windower.finish(on_window);
  return series;
}

std::vector<ScorePoint> to_score_points(std::span<const SeriesPoint> series) {
  std::vector<ScorePoint> out;
  out.reserve(series.size());
  for (const auto& p : series) {
    out.push_back({p.t, static_cast<double>(p.count)});
  }
  return out;
}

void write_detection_log(std::ostream& out,
                         std::span<const SeriesPoint> series, int rho) {
  using nlohmann::json;
  for (const auto& p : series) {
    json tokens = json::array();
    for (const auto& tok : p.tokens) tokens.push_back(tok.token);
    const bool detected = p.count >= static_cast<std::size_t>(rho);
    const json rec{{"t", p.t},
                   {"count", p.count},
                   {"detected", detected},
                   {"rho", rho},
                   {"tokens", detected ? tokens : json::array()}};
    out << rec.dump() << '\n';
  }
}

std::vector<ScorePoint> load_detection_log(const std::string& path) {
  std::vector<ScorePoint> out;
  for (const auto& line : read_lines(path)) {
    if (line.empty()) continue;
    const auto rec = nlohmann::json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) {
      throw std::runtime_error("bad detection log line in " + path);
    }
    out.push_back({rec.at("t").get<std::int64_t>(),
                   rec.at("count").get<double>()});
  }
  return out;
}

}  // namespace laburst
