#pragma once

// File, hashing and JSONL helpers shared by the on-disk formats.

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "uie2i/geometry.hpp"

namespace uie2i {

namespace fs = std::filesystem;

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

inline std::string base64_encode(std::string_view data) {
  std::string out(4 * ((data.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(data.data()),
                                static_cast<int>(data.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

/// Hash of the canonical (compact, insertion-ordered) dump of a JSON value.
inline std::string json_hash(const Json& j) { return sha256_hex(j.dump()); }

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, std::string_view data) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

inline Json read_json_file(const fs::path& path) {
  try {
    return Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

enum class ReadMode { Strict, Lenient };

template <class T>
struct ReadResult {
  std::vector<T> records;
  std::size_t skipped = 0;
};

/// One JSON object per line, UTF-8, field order fixed by each type's to_json.
template <class T>
std::string to_jsonl(const std::vector<T>& records) {
  std::string out;
  for (const auto& r : records) {
    out += Json(r).dump();
    out += '\n';
  }
  return out;
}

/// Parses JSONL text. `accept` may reject a line (e.g. header lines) before
/// conversion; rejected lines are not counted as skipped.
template <class T>
ReadResult<T> parse_jsonl(std::string_view text, ReadMode mode, const std::string& source = "<memory>",
                          const std::function<bool(const Json&)>& accept = nullptr) {
  ReadResult<T> result;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    try {
      Json j = Json::parse(line);
      if (accept && !accept(j)) continue;
      result.records.push_back(j.get<T>());
    } catch (const std::exception& e) {
      if (mode == ReadMode::Strict)
        throw DataError(source + ":" + std::to_string(line_no) + ": " + e.what());
      ++result.skipped;
    }
  }
  return result;
}

template <class T>
void write_records(const fs::path& path, const std::vector<T>& records) {
  write_file(path, to_jsonl(records));
}

template <class T>
ReadResult<T> read_records(const fs::path& path, ReadMode mode = ReadMode::Strict) {
  return parse_jsonl<T>(read_file(path), mode, path.string());
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Structured logging: one JSON object per line on stderr.
inline void log_event(std::string_view level, std::string_view event, Json fields = Json::object()) {
  static std::mutex mu;
  Json line = {{"ts", utc_timestamp()}, {"level", level}, {"event", event}};
  for (auto& [k, v] : fields.items()) line[k] = v;
  std::lock_guard lock(mu);
  std::cerr << line.dump() << '\n';
}

}  // namespace uie2i
