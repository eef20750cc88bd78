#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "laburst/message.hpp"

namespace laburst {

// Splits on runs of Unicode whitespace. Tokens come back exactly as they
// appear in the text: no case folding, no stemming, no punctuation stripping.
std::vector<std::string> tokenize(std::string_view text);

// One newline-delimited JSON record -> Message. Returns nullopt (skip marker)
// on malformed JSON or a missing id/timestamp/text. A record counts as a
// retweet if it carries a true-valued retweet field, embeds a
// "retweeted_status" object, or its text starts with the 4 characters "RT @".
std::optional<Message> parse_message(std::string_view line);

struct ReplayStats {
  std::uint64_t total = 0;     // input lines
  std::uint64_t emitted = 0;
  std::uint64_t skipped = 0;   // malformed / missing fields
  std::uint64_t retweets = 0;  // dropped retweets
};

// Line reader over a newline-delimited record file, plain or gzip
// (auto-detected from the magic bytes). Throws std::runtime_error when the
// file cannot be opened.
class StreamSource {
 public:
  explicit StreamSource(std::string path);
  ~StreamSource();

  StreamSource(const StreamSource&) = delete;
  StreamSource& operator=(const StreamSource&) = delete;
  StreamSource(StreamSource&& other) noexcept;

  // False at end of stream. The returned line has no trailing newline.
  bool next_line(std::string& out);

  const std::string& path() const { return path_; }
  std::uint64_t cursor() const { return cursor_; }

 private:
  std::string path_;
  void* gz_ = nullptr;
  std::uint64_t cursor_ = 0;
};

// Parses every record, drops retweets and bad records, and returns the
// surviving messages in non-decreasing timestamp order (stable sort). Writes
// a one-line summary (total/emitted/skipped/retweets) to stderr unless quiet.
std::vector<Message> replay(StreamSource& source, ReplayStats* stats = nullptr,
                            bool quiet = false);
std::vector<Message> replay_file(const std::string& path,
                                 ReplayStats* stats = nullptr,
                                 bool quiet = false);

}  // namespace laburst
