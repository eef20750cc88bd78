#include "laburst/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <stdexcept>

#include "json.hpp"

#include "laburst/rng.hpp"

namespace laburst {

void SynthConfig::validate() const {
  if (duration < 1) throw std::invalid_argument("synth: duration must be >= 1");
  if (rate < 1) throw std::invalid_argument("synth: rate must be >= 1");
  if (vocab_size < 1) throw std::invalid_argument("synth: vocab_size >= 1");
  if (user_pool < 1) throw std::invalid_argument("synth: user_pool >= 1");
  if (tokens_per_message < 1) {
    throw std::invalid_argument("synth: tokens_per_message >= 1");
  }
  for (const BurstSpec& b : bursts) {
    if (b.tokens.empty()) {
      throw std::invalid_argument("synth: burst needs at least one token");
    }
    if (b.intensity <= 1.0) {
      throw std::invalid_argument("synth: burst intensity must be > 1");
    }
    if (b.start < 0 || b.start + b.length > duration) {
      throw std::invalid_argument("synth: burst outside stream duration");
    }
  }
}

namespace {

struct Generator {
  const SynthConfig& cfg;
  Rng rng;
  std::vector<std::string> vocab;
  std::vector<double> zipf_cdf;
  std::vector<std::string> all_planted;

  explicit Generator(const SynthConfig& c)
      : cfg(c), rng(Rng::mix(c.rng_seed, 0x5e9)) {
    // Head words are pinned to geometrically spaced Zipf ranks so they span
    // the whole frequency scale, the way real stop words do: a few dominate
    // the stream, the rest thin out toward the tail.
    vocab.assign(cfg.vocab_size, std::string());
    const int head =
        std::min<int>(cfg.vocab_size, static_cast<int>(cfg.vocab_head.size()));
    for (int j = 0; j < head; ++j) {
      const double frac =
          head == 1 ? 0.0 : static_cast<double>(j) / (head - 1);
      auto rank = static_cast<std::size_t>(
          std::llround(std::pow(static_cast<double>(cfg.vocab_size), frac)) -
          1);
      rank = std::min<std::size_t>(rank, cfg.vocab_size - 1);
      while (!vocab[rank].empty()) rank = (rank + 1) % cfg.vocab_size;
      vocab[rank] = cfg.vocab_head[j];
    }
    for (int i = 0; i < cfg.vocab_size; ++i) {
      if (vocab[i].empty()) vocab[i] = "w" + std::to_string(i);
    }
    zipf_cdf.resize(vocab.size());
    double acc = 0.0;
    for (std::size_t r = 0; r < vocab.size(); ++r) {
      acc += std::pow(static_cast<double>(r + 1), -cfg.zipf_exponent);
      zipf_cdf[r] = acc;
    }
    for (double& v : zipf_cdf) v /= acc;
    for (const BurstSpec& b : cfg.bursts) {
      for (const auto& tok : b.tokens) all_planted.push_back(tok);
    }
  }

  const std::string& zipf_word() {
    const double u = rng.next_unit();
    const auto it = std::lower_bound(zipf_cdf.begin(), zipf_cdf.end(), u);
    const std::size_t r = std::min<std::size_t>(it - zipf_cdf.begin(),
                                                vocab.size() - 1);
    return vocab[r];
  }

  const BurstSpec* burst_at(std::int64_t second) const {
    for (const BurstSpec& b : cfg.bursts) {
      if (second >= b.start && second < b.start + b.length) return &b;
    }
    return nullptr;
  }

  void run(const std::function<void(const Message&)>& sink,
           std::uint64_t& records) {
    std::uint64_t next_id = 0;
    for (std::int64_t second = 0; second < cfg.duration; ++second) {
      const BurstSpec* burst = burst_at(second);
      int count = cfg.rate;
      if (burst != nullptr && burst->volume_boost > 1.0) {
        count = static_cast<int>(
            std::llround(cfg.rate * burst->volume_boost));
      }
      for (int m = 0; m < count; ++m) {
        Message msg;
        msg.id = "m" + std::to_string(next_id++);
        msg.timestamp = cfg.epoch + second;
        msg.author_id =
            "u" + std::to_string(rng.below(cfg.user_pool));
        msg.is_retweet =
            cfg.retweet_prob > 0.0 && rng.bernoulli(cfg.retweet_prob);

        std::string text;
        if (msg.is_retweet) {
          text = "RT @u" + std::to_string(rng.below(cfg.user_pool));
        }
        for (int t = 0; t < cfg.tokens_per_message; ++t) {
          if (!text.empty()) text += ' ';
          if (rng.bernoulli(cfg.mention_prob)) {
            text += "@u" + std::to_string(rng.below(cfg.user_pool));
            continue;
          }
          if (burst != nullptr &&
              rng.bernoulli(std::min(
                  1.0, cfg.planted_background_prob * burst->intensity))) {
            text += burst->tokens[rng.below(burst->tokens.size())];
            continue;
          }
          if (!all_planted.empty() &&
              rng.bernoulli(cfg.planted_background_prob)) {
            text += all_planted[rng.below(all_planted.size())];
            continue;
          }
          text += zipf_word();
        }
        msg.text = std::move(text);
        ++records;
        sink(msg);
      }
    }
  }
};

std::set<std::int64_t> truth_slices(const SynthConfig& cfg) {
  std::set<std::int64_t> slices;
  for (const BurstSpec& b : cfg.bursts) {
    slices.insert(b.start / cfg.truth_delta);
  }
  return slices;
}

}  // namespace

SynthResult generate(const SynthConfig& cfg, const std::string& stream_path,
                     const std::string& truth_path) {
  cfg.validate();
  std::ofstream out(stream_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write stream: " + stream_path);

  SynthResult result;
  Generator gen(cfg);
  gen.run(
      [&](const Message& m) {
        const nlohmann::json rec{{"id", m.id},
                                 {"timestamp", m.timestamp},
                                 {"user", m.author_id},
                                 {"text", m.text},
                                 {"retweet", m.is_retweet}};
        out << rec.dump() << '\n';
      },
      result.records);
  result.truth_slices = truth_slices(cfg);

  std::ofstream truth(truth_path, std::ios::binary);
  if (!truth) throw std::runtime_error("cannot write truth: " + truth_path);
  truth << "event,slice,label\n";
  std::size_t i = 0;
  for (const std::int64_t s : result.truth_slices) {
    truth << "synthetic," << s << ",burst" << i++ << '\n';
  }
  return result;
}

SynthResult generate_in_memory(const SynthConfig& cfg,
                               std::vector<Message>& messages) {
  cfg.validate();
  SynthResult result;
  Generator gen(cfg);
  messages.clear();
  gen.run(
      [&](const Message& m) {
        if (!m.is_retweet) messages.push_back(m);
      },
      result.records);
  result.truth_slices = truth_slices(cfg);
  return result;
}

}  // namespace laburst
