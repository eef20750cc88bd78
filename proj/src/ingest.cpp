#include "laburst/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iostream>
#include <stdexcept>

#include <zlib.h>

#include "json.hpp"

namespace laburst {
namespace {

// Unicode whitespace beyond ASCII: NEL, NBSP, ogham space, the U+2000 block,
// line/paragraph separators, narrow NBSP, math space, ideographic space.
bool is_space_codepoint(std::uint32_t cp) {
  if (cp == 0x09 || cp == 0x0a || cp == 0x0b || cp == 0x0c || cp == 0x0d ||
      cp == 0x20) {
    return true;
  }
  if (cp == 0x85 || cp == 0xa0 || cp == 0x1680) return true;
  if (cp >= 0x2000 && cp <= 0x200a) return true;
  if (cp == 0x2028 || cp == 0x2029 || cp == 0x202f || cp == 0x205f ||
      cp == 0x3000) {
    return true;
  }
  return false;
}

// Decodes the codepoint at s[i]; advances i past it. Invalid bytes are
// consumed one at a time and reported as a non-space sentinel.
std::uint32_t decode_utf8(std::string_view s, std::size_t& i) {
  const unsigned char b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 0;
  std::uint32_t cp = 0;
  if ((b0 & 0xe0) == 0xc0) {
    len = 2;
    cp = b0 & 0x1f;
  } else if ((b0 & 0xf0) == 0xe0) {
    len = 3;
    cp = b0 & 0x0f;
  } else if ((b0 & 0xf8) == 0xf0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return 0xfffd;
  }
  if (i + static_cast<std::size_t>(len) > s.size()) {
    ++i;
    return 0xfffd;
  }
  for (int j = 1; j < len; ++j) {
    const unsigned char bj = static_cast<unsigned char>(s[i + j]);
    if ((bj & 0xc0) != 0x80) {
      ++i;
      return 0xfffd;
    }
    cp = (cp << 6) | (bj & 0x3f);
  }
  i += len;
  return cp;
}

std::optional<std::string> json_string_like(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  return std::nullopt;
}

std::optional<std::int64_t> json_seconds(const nlohmann::json& v) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_unsigned()) {
    return static_cast<std::int64_t>(v.get<std::uint64_t>());
  }
  if (v.is_number_float()) {
    return static_cast<std::int64_t>(std::floor(v.get<double>()));
  }
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    try {
      std::size_t pos = 0;
      const double d = std::stod(s, &pos);
      if (pos == s.size()) return static_cast<std::int64_t>(std::floor(d));
    } catch (...) {
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  std::size_t start = 0;
  bool in_token = false;
  while (i < text.size()) {
    const std::size_t at = i;
    const std::uint32_t cp = decode_utf8(text, i);
    if (is_space_codepoint(cp)) {
      if (in_token) {
        tokens.emplace_back(text.substr(start, at - start));
        in_token = false;
      }
    } else if (!in_token) {
      start = at;
      in_token = true;
    }
  }
  if (in_token) tokens.emplace_back(text.substr(start));
  return tokens;
}

std::optional<Message> parse_message(std::string_view line) {
  const nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
  if (rec.is_discarded() || !rec.is_object()) return std::nullopt;

  Message m;
  if (auto it = rec.find("id"); it != rec.end()) {
    if (auto id = json_string_like(*it)) m.id = *id;
  }
  if (m.id.empty()) return std::nullopt;

  if (auto it = rec.find("timestamp"); it != rec.end()) {
    if (auto ts = json_seconds(*it)) m.timestamp = *ts;
    else return std::nullopt;
  } else {
    return std::nullopt;
  }
  if (m.timestamp < 0) return std::nullopt;

  if (auto it = rec.find("text"); it != rec.end() && it->is_string()) {
    m.text = it->get<std::string>();
  } else {
    return std::nullopt;
  }

  for (const char* key : {"user", "author", "author_id"}) {
    if (auto it = rec.find(key); it != rec.end()) {
      if (auto a = json_string_like(*it)) {
        m.author_id = *a;
        break;
      }
      if (it->is_object()) {
        for (const char* sub : {"id_str", "id", "screen_name"}) {
          if (auto jt = it->find(sub); jt != it->end()) {
            if (auto a = json_string_like(*jt)) {
              m.author_id = *a;
              break;
            }
          }
        }
        if (!m.author_id.empty()) break;
      }
    }
  }

  for (const char* key : {"retweet", "is_retweet", "retweeted"}) {
    if (auto it = rec.find(key); it != rec.end() && it->is_boolean() &&
        it->get<bool>()) {
      m.is_retweet = true;
    }
  }
  if (rec.contains("retweeted_status")) m.is_retweet = true;
  if (m.text.rfind("RT @", 0) == 0) m.is_retweet = true;

  return m;
}

StreamSource::StreamSource(std::string path) : path_(std::move(path)) {
  gzFile f = gzopen(path_.c_str(), "rb");
  if (f == nullptr) throw std::runtime_error("cannot open stream: " + path_);
  gzbuffer(f, 1 << 16);
  gz_ = f;
}

StreamSource::~StreamSource() {
  if (gz_ != nullptr) gzclose(static_cast<gzFile>(gz_));
}

StreamSource::StreamSource(StreamSource&& other) noexcept
    : path_(std::move(other.path_)), gz_(other.gz_), cursor_(other.cursor_) {
  other.gz_ = nullptr;
}

bool StreamSource::next_line(std::string& out) {
  out.clear();
  gzFile f = static_cast<gzFile>(gz_);
  char buf[1 << 14];
  bool got_any = false;
  for (;;) {
    if (gzgets(f, buf, sizeof(buf)) == nullptr) break;
    got_any = true;
    const std::size_t len = std::strlen(buf);
    if (len > 0 && buf[len - 1] == '\n') {
      out.append(buf, len - 1);
      break;
    }
    out.append(buf, len);
  }
  if (!got_any) return false;
  if (!out.empty() && out.back() == '\r') out.pop_back();
  ++cursor_;
  return true;
}

std::vector<Message> replay(StreamSource& source, ReplayStats* stats,
                            bool quiet) {
  ReplayStats local;
  std::vector<Message> out;
  std::string line;
  while (source.next_line(line)) {
    ++local.total;
    auto msg = parse_message(line);
    if (!msg) {
      ++local.skipped;
      continue;
    }
    if (msg->is_retweet) {
      ++local.retweets;
      continue;
    }
    ++local.emitted;
    out.push_back(std::move(*msg));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Message& a, const Message& b) {
                     return a.timestamp < b.timestamp;
                   });
  if (!quiet) {
    std::cerr << "replay " << source.path() << ": " << local.total
              << " lines, " << local.emitted << " emitted, " << local.skipped
              << " skipped, " << local.retweets << " retweets\n";
  }
  if (stats != nullptr) *stats = local;
  return out;
}

std::vector<Message> replay_file(const std::string& path, ReplayStats* stats,
                                 bool quiet) {
  StreamSource source(path);
  return replay(source, stats, quiet);
}

}  // namespace laburst
