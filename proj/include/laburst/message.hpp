#pragma once

#include <cstdint>
#include <string>

namespace laburst {

// One stream item. Immutable once parsed; safe to hand to any number of
// concurrent consumers.
struct Message {
  std::string id;
  std::int64_t timestamp = 0;  // seconds since epoch, sub-second dropped
  std::string author_id;
  std::string text;
  bool is_retweet = false;
};

}  // namespace laburst
