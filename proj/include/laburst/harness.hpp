#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "laburst/baselines.hpp"
#include "laburst/detect.hpp"
#include "laburst/eval.hpp"

namespace laburst {

enum class Method { LABurst, RawBurst, TokenBurst };
const char* method_name(Method m);

struct MethodEvent {
  std::string name;
  std::vector<Message> messages;       // replayed stream
  std::set<std::int64_t> moments;      // ground truth E
};

struct MethodConfig {
  StreamConfig stream;
  CandidateFilter filter;
  int tau = 2;
  const EnsembleModel* model = nullptr;    // required for LABurst
  const SeedLexicon* lexicon = nullptr;    // required for TokenBurst
  bool literal_avg = false;
};

// Runs the method's pipeline over every event stream and scores the series
// against tau-expanded truth: per-event curves plus a pooled composite.
// LABurst scores are |B_t|; the baselines score with their delta values.
EvalReport evaluate_method(Method method,
                           std::span<const MethodEvent> events,
                           const MethodConfig& cfg);

}  // namespace laburst
