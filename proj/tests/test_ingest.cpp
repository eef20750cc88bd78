#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <string>

#include <zlib.h>

#include "laburst/ingest.hpp"
#include "laburst/rng.hpp"

using namespace laburst;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = "./" + name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("parse_message maps the neutral record schema") {
  const auto m =
      parse_message(R"({"id":"1","timestamp":100,"user":"a","text":"goal"})");
  REQUIRE(m.has_value());
  CHECK(m->id == "1");
  CHECK(m->timestamp == 100);
  CHECK(m->author_id == "a");
  CHECK(m->text == "goal");
  CHECK_FALSE(m->is_retweet);
}

TEST_CASE("parse_message field variants") {
  CHECK(parse_message(R"({"id":7,"timestamp":1.9,"author":"x","text":"t"})")
            ->timestamp == 1);  // sub-second precision dropped
  CHECK(parse_message(R"({"id":"1","timestamp":"42","user":"a","text":"t"})")
            ->timestamp == 42);
  CHECK(parse_message(
            R"({"id":"1","timestamp":5,"user":{"id_str":"u9"},"text":"t"})")
            ->author_id == "u9");
}

TEST_CASE("retweet detection") {
  CHECK(parse_message(R"({"id":"1","timestamp":1,"user":"x","text":"RT @x goal"})")
            ->is_retweet);
  CHECK(parse_message(
            R"({"id":"1","timestamp":1,"user":"x","text":"t","retweet":true})")
            ->is_retweet);
  CHECK(parse_message(
            R"({"id":"1","timestamp":1,"user":"x","text":"t","retweeted_status":{}})")
            ->is_retweet);
  // "RT@x" without the space is not the 4-character prefix.
  CHECK_FALSE(parse_message(
                  R"({"id":"1","timestamp":1,"user":"x","text":"RT@x goal"})")
                  ->is_retweet);
}

TEST_CASE("parse_message skip markers") {
  CHECK_FALSE(parse_message("not-json").has_value());
  CHECK_FALSE(parse_message(R"({"timestamp":1,"text":"t"})").has_value());
  CHECK_FALSE(parse_message(R"({"id":"1","text":"t"})").has_value());
  CHECK_FALSE(parse_message(R"({"id":"1","timestamp":1})").has_value());
  CHECK_FALSE(
      parse_message(R"({"id":"1","timestamp":-5,"text":"t"})").has_value());
  // Empty text is valid, missing text is not.
  CHECK(parse_message(R"({"id":"1","timestamp":1,"user":"a","text":""})")
            .has_value());
}

TEST_CASE("tokenize splits on whitespace runs, no normalization") {
  CHECK(tokenize("goal gol") == std::vector<std::string>{"goal", "gol"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("   \t\n ").empty());
  CHECK(tokenize("Gooooaaal!! ドイツ") ==
        std::vector<std::string>{"Gooooaaal!!", "ドイツ"});
  // Ideographic space U+3000 and NBSP U+00A0 are separators.
  CHECK(tokenize("a\xe3\x80\x80" "b") == std::vector<std::string>{"a", "b"});
  CHECK(tokenize("a\xc2\xa0" "b") == std::vector<std::string>{"a", "b"});
}

TEST_CASE("tokenize concatenation property") {
  Rng rng(11);
  const std::string alphabet = "abcXYZ09@#!;ドイ";
  for (int trial = 0; trial < 200; ++trial) {
    auto word = [&] {
      std::string w;
      const int len = 1 + static_cast<int>(rng.below(6));
      for (int i = 0; i < len; ++i) {
        // Keep multi-byte pieces intact by sampling from a token list.
        static const char* pieces[] = {"a", "b", "Z", "9", "@", "!!", "ド"};
        w += pieces[rng.below(7)];
      }
      return w;
    };
    const std::string a = word(), b = word();
    auto joined = tokenize(a + " " + b);
    auto left = tokenize(a);
    auto right = tokenize(b);
    left.insert(left.end(), right.begin(), right.end());
    CHECK(joined == left);
  }
}

TEST_CASE("replay filters retweets and sorts by timestamp") {
  const std::string path = write_temp(
      "replay_basic.jsonl",
      R"({"id":"a","timestamp":5,"user":"u","text":"x"})" "\n"
      R"({"id":"b","timestamp":3,"user":"u","text":"RT @z y"})" "\n"
      R"({"id":"c","timestamp":4,"user":"u","text":"z"})" "\n"
      R"({"id":"d","timestamp":3,"user":"u","text":"w"})" "\n");
  ReplayStats stats;
  const auto messages = replay_file(path, &stats, true);
  REQUIRE(messages.size() == 3);
  CHECK(messages[0].timestamp == 3);
  CHECK(messages[1].timestamp == 4);
  CHECK(messages[2].timestamp == 5);
  CHECK(stats.total == 4);
  CHECK(stats.emitted == 3);
  CHECK(stats.retweets == 1);
  CHECK(stats.skipped == 0);
  for (const auto& m : messages) CHECK_FALSE(m.is_retweet);
  std::remove(path.c_str());
}

TEST_CASE("replay empty file") {
  const std::string path = write_temp("replay_empty.jsonl", "");
  ReplayStats stats;
  CHECK(replay_file(path, &stats, true).empty());
  CHECK(stats.total == 0);
  std::remove(path.c_str());
}

TEST_CASE("replay counting identity on a messy stream") {
  Rng rng(23);
  std::string content;
  std::uint64_t lines = 0;
  for (int i = 0; i < 500; ++i) {
    const int kind = static_cast<int>(rng.below(4));
    if (kind == 0) {
      content += "garbage line\n";
    } else if (kind == 1) {
      content += R"({"id":"r)" + std::to_string(i) +
                 R"(","timestamp":)" + std::to_string(rng.below(100)) +
                 R"(,"user":"u","text":"RT @x hi"})" "\n";
    } else {
      content += R"({"id":"m)" + std::to_string(i) +
                 R"(","timestamp":)" + std::to_string(rng.below(100)) +
                 R"(,"user":"u","text":"hello there"})" "\n";
    }
    ++lines;
  }
  const std::string path = write_temp("replay_messy.jsonl", content);
  ReplayStats stats;
  const auto messages = replay_file(path, &stats, true);
  CHECK(stats.total == lines);
  CHECK(stats.emitted + stats.skipped + stats.retweets == stats.total);
  CHECK(messages.size() == stats.emitted);
  CHECK(std::is_sorted(messages.begin(), messages.end(),
                       [](const Message& a, const Message& b) {
                         return a.timestamp < b.timestamp;
                       }));
  std::remove(path.c_str());
}

TEST_CASE("gzip input is detected and decompressed") {
  const std::string plain =
      R"({"id":"a","timestamp":1,"user":"u","text":"x y"})" "\n"
      R"({"id":"b","timestamp":2,"user":"u","text":"z"})" "\n";
  const std::string path = write_temp("replay_plain.jsonl", plain);

  const std::string gz_path = "./replay_gz.jsonl.gz";
  gzFile gz = gzopen(gz_path.c_str(), "wb");
  REQUIRE(gz != nullptr);
  gzwrite(gz, plain.data(), static_cast<unsigned>(plain.size()));
  gzclose(gz);

  const auto a = replay_file(path, nullptr, true);
  const auto b = replay_file(gz_path, nullptr, true);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].text == b[i].text);
  }
  std::remove(path.c_str());
  std::remove(gz_path.c_str());
}

TEST_CASE("replay throws on unreadable source") {
  CHECK_THROWS_AS(replay_file("./does_not_exist.jsonl", nullptr, true),
                  std::runtime_error);
}
