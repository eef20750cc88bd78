#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "laburst/message.hpp"

namespace laburst {

struct BurstSpec {
  std::int64_t start = 0;   // seconds from stream start
  std::int64_t length = 60;
  std::vector<std::string> tokens;  // surface variants, at least one
  double intensity = 20.0;          // multiplier on planted emission prob
  double volume_boost = 1.0;        // multiplier on message rate
};

struct SynthConfig {
  std::int64_t duration = 1800;  // seconds
  int rate = 66;                 // messages per second, emitted exactly
  int vocab_size = 5000;
  double zipf_exponent = 1.1;
  int user_pool = 2000;
  std::vector<BurstSpec> bursts;
  std::uint64_t rng_seed = 1;

  std::int64_t epoch = 0;        // timestamp of second 0
  std::int64_t truth_delta = 60; // slice length for ground-truth slice ids
  int tokens_per_message = 8;
  double mention_prob = 0.05;    // per token slot
  double retweet_prob = 0.0;     // fraction of records marked as retweets
  double planted_background_prob = 0.002;  // off-burst planted emission
  // Words pinned to the top Zipf ranks (steady high-frequency vocabulary);
  // filler words follow up to vocab_size.
  std::vector<std::string> vocab_head;

  void validate() const;  // throws std::invalid_argument
};

struct SynthResult {
  std::uint64_t records = 0;           // lines written, retweets included
  std::set<std::int64_t> truth_slices; // first slice of each burst
};

// Deterministic under rng_seed: identical config yields byte-identical
// files. Ground truth lists each burst's first slice.
SynthResult generate(const SynthConfig& cfg, const std::string& stream_path,
                     const std::string& truth_path);

// Same sampling path without the files; returns the non-retweet messages in
// timestamp order (what replay would hand back).
SynthResult generate_in_memory(const SynthConfig& cfg,
                               std::vector<Message>& messages);

}  // namespace laburst
