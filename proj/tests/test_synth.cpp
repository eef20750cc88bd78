#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "laburst/ingest.hpp"
#include "laburst/synth.hpp"

using namespace laburst;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

SynthConfig small_config() {
  SynthConfig cfg;
  cfg.duration = 1200;
  cfg.rate = 10;
  cfg.vocab_size = 300;
  cfg.user_pool = 50;
  cfg.rng_seed = 42;
  cfg.vocab_head = {"the", "to", "de", "la"};
  return cfg;
}

}  // namespace

TEST_CASE("no bursts means empty ground truth") {
  SynthConfig cfg = small_config();
  const auto result = generate(cfg, "./tmp_s0.jsonl", "./tmp_t0.csv");
  CHECK(result.truth_slices.empty());
  const std::string truth = slurp("./tmp_t0.csv");
  CHECK(truth == "event,slice,label\n");
  std::remove("./tmp_s0.jsonl");
  std::remove("./tmp_t0.csv");
}

TEST_CASE("identical seeds produce byte-identical files") {
  SynthConfig cfg = small_config();
  cfg.bursts.push_back({600, 60, {"boom", "booom"}, 15.0, 1.0});
  generate(cfg, "./tmp_s1.jsonl", "./tmp_t1.csv");
  generate(cfg, "./tmp_s2.jsonl", "./tmp_t2.csv");
  CHECK(slurp("./tmp_s1.jsonl") == slurp("./tmp_s2.jsonl"));
  CHECK(slurp("./tmp_t1.csv") == slurp("./tmp_t2.csv"));

  SynthConfig other = cfg;
  other.rng_seed = 43;
  generate(other, "./tmp_s3.jsonl", "./tmp_t3.csv");
  CHECK(slurp("./tmp_s1.jsonl") != slurp("./tmp_s3.jsonl"));
  for (const char* p : {"./tmp_s1.jsonl", "./tmp_s2.jsonl", "./tmp_s3.jsonl",
                        "./tmp_t1.csv", "./tmp_t2.csv", "./tmp_t3.csv"}) {
    std::remove(p);
  }
}

TEST_CASE("record count is exactly rate times duration") {
  SynthConfig cfg = small_config();
  const auto result = generate(cfg, "./tmp_s4.jsonl", "./tmp_t4.csv");
  CHECK(result.records ==
        static_cast<std::uint64_t>(cfg.rate) * cfg.duration);
  ReplayStats stats;
  replay_file("./tmp_s4.jsonl", &stats, true);
  CHECK(stats.total == result.records);
  CHECK(stats.skipped == 0);
  std::remove("./tmp_s4.jsonl");
  std::remove("./tmp_t4.csv");
}

TEST_CASE("retweet fraction shows up and is dropped by replay") {
  SynthConfig cfg = small_config();
  cfg.retweet_prob = 0.25;
  const auto result = generate(cfg, "./tmp_s5.jsonl", "./tmp_t5.csv");
  ReplayStats stats;
  const auto messages = replay_file("./tmp_s5.jsonl", &stats, true);
  CHECK(stats.retweets > result.records / 6);
  CHECK(stats.retweets < result.records / 3);
  CHECK(stats.emitted == messages.size());
  for (const auto& m : messages) CHECK(m.text.rfind("RT @", 0) != 0);
  std::remove("./tmp_s5.jsonl");
  std::remove("./tmp_t5.csv");
}

TEST_CASE("planted burst lifts the token count at least tenfold") {
  SynthConfig cfg = small_config();
  cfg.duration = 1800;
  cfg.bursts.push_back({900, 60, {"boom"}, 20.0, 1.0});
  const auto result = generate(cfg, "./tmp_s6.jsonl", "./tmp_t6.csv");
  REQUIRE(result.truth_slices == std::set<std::int64_t>{15});

  // Recount from the generated file.
  const auto messages = replay_file("./tmp_s6.jsonl", nullptr, true);
  std::map<std::int64_t, std::uint64_t> boom_per_slice;
  for (const auto& m : messages) {
    for (const auto& tok : tokenize(m.text)) {
      if (tok == "boom") ++boom_per_slice[m.timestamp / 60];
    }
  }
  const std::uint64_t burst_count = boom_per_slice[15];
  double background = 0.0;
  int slices = 0;
  for (const auto& [slice, count] : boom_per_slice) {
    if (slice != 15) {
      background += static_cast<double>(count);
      ++slices;
    }
  }
  background /= 29.0;  // all non-burst slices, including zero-count ones
  CHECK(burst_count >= 10.0 * background);
  CHECK(burst_count > 0);
  std::remove("./tmp_s6.jsonl");
  std::remove("./tmp_t6.csv");
}

TEST_CASE("volume boost raises per-second message counts during the burst") {
  SynthConfig cfg = small_config();
  cfg.bursts.push_back({600, 60, {"boom"}, 5.0, 3.0});
  const auto result = generate(cfg, "./tmp_s7.jsonl", "./tmp_t7.csv");
  // 60 boosted seconds add 2x rate each.
  CHECK(result.records == static_cast<std::uint64_t>(cfg.rate) *
                              (cfg.duration + 2 * 60));
  std::remove("./tmp_s7.jsonl");
  std::remove("./tmp_t7.csv");
}

TEST_CASE("config validation") {
  SynthConfig cfg = small_config();
  cfg.bursts.push_back({1100, 200, {"x"}, 5.0, 1.0});  // runs past the end
  CHECK_THROWS(generate(cfg, "./x.jsonl", "./x.csv"));
  cfg = small_config();
  cfg.bursts.push_back({0, 60, {}, 5.0, 1.0});  // no tokens
  CHECK_THROWS(generate(cfg, "./x.jsonl", "./x.csv"));
  cfg = small_config();
  cfg.bursts.push_back({0, 60, {"x"}, 1.0, 1.0});  // intensity must be > 1
  CHECK_THROWS(generate(cfg, "./x.jsonl", "./x.csv"));
}

TEST_CASE("in-memory generation equals replay of the written file") {
  SynthConfig cfg = small_config();
  cfg.retweet_prob = 0.1;
  cfg.bursts.push_back({300, 60, {"zap"}, 10.0, 1.0});
  generate(cfg, "./tmp_s8.jsonl", "./tmp_t8.csv");
  const auto from_file = replay_file("./tmp_s8.jsonl", nullptr, true);
  std::vector<Message> in_memory;
  generate_in_memory(cfg, in_memory);
  REQUIRE(from_file.size() == in_memory.size());
  for (std::size_t i = 0; i < from_file.size(); ++i) {
    CHECK(from_file[i].id == in_memory[i].id);
    CHECK(from_file[i].timestamp == in_memory[i].timestamp);
    CHECK(from_file[i].author_id == in_memory[i].author_id);
    CHECK(from_file[i].text == in_memory[i].text);
  }
  std::remove("./tmp_s8.jsonl");
  std::remove("./tmp_t8.csv");
}
