#include "laburst/harness.hpp"

#include <stdexcept>

namespace laburst {

const char* method_name(Method m) {
  switch (m) {
    case Method::LABurst: return "laburst";
    case Method::RawBurst: return "rawburst";
    case Method::TokenBurst: return "tokenburst";
  }
  return "?";
}

EvalReport evaluate_method(Method method,
                           std::span<const MethodEvent> events,
                           const MethodConfig& cfg) {
  if (method == Method::LABurst && cfg.model == nullptr) {
    throw std::invalid_argument("evaluate_method: laburst needs a model");
  }
  if (method == Method::TokenBurst && cfg.lexicon == nullptr) {
    throw std::invalid_argument("evaluate_method: tokenburst needs a lexicon");
  }

  BaselineOptions baseline_options;
  baseline_options.stream = cfg.stream;
  baseline_options.literal_avg = cfg.literal_avg;

  std::vector<EventSeries> series;
  series.reserve(events.size());
  for (const MethodEvent& event : events) {
    EventSeries ev;
    ev.name = event.name;
    ev.moments = event.moments;
    switch (method) {
      case Method::LABurst:
        ev.points = to_score_points(score_series(
            *cfg.model, event.messages, cfg.stream, cfg.filter));
        break;
      case Method::RawBurst:
        ev.points =
            to_score_points(rawburst_series(event.messages, baseline_options));
        break;
      case Method::TokenBurst:
        ev.points = to_score_points(
            tokenburst_series(event.messages, *cfg.lexicon, baseline_options));
        break;
    }
    series.push_back(std::move(ev));
  }
  return evaluate_series(series, cfg.tau);
}

}  // namespace laburst
