#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "l2hh/config.hpp"
#include "l2hh/errors.hpp"
#include "l2hh/stream_core.hpp"

namespace l2hh {

enum class StreamFormat { text, binary };

/// `.bin` files hold little-endian u64 ids; anything else is text with one id
/// per line, blank lines and `#` comments ignored.
inline StreamFormat stream_format_for(const std::filesystem::path& path) {
  return path.extension() == ".bin" ? StreamFormat::binary : StreamFormat::text;
}

inline std::vector<ItemId> parse_text_stream(std::istream& in) {
  std::vector<ItemId> out;
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string token = line.substr(first, last - first + 1);
    std::size_t used = 0;
    ItemId id = 0;
    try {
      if (token[0] == '-') throw std::invalid_argument("negative");
      id = std::stoull(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) throw UsageError("stream line " + std::to_string(lineno) + ": not an item id");
    out.push_back(id);
  }
  return out;
}

inline std::vector<ItemId> read_stream(const std::filesystem::path& path) {
  const StreamFormat fmt = stream_format_for(path);
  std::ifstream in(path, fmt == StreamFormat::binary ? std::ios::binary : std::ios::in);
  if (!in) throw UsageError("cannot open stream file: " + path.string());
  if (fmt == StreamFormat::text) return parse_text_stream(in);
  std::vector<ItemId> out;
  unsigned char buf[8];
  while (in.read(reinterpret_cast<char*>(buf), 8)) {
    ItemId v = 0;
    for (int b = 7; b >= 0; --b) v = (v << 8) | buf[b];
    out.push_back(v);
  }
  if (in.gcount() != 0) throw UsageError("binary stream length is not a multiple of 8 bytes");
  return out;
}

inline void write_stream(const std::filesystem::path& path, const std::vector<ItemId>& stream) {
  const StreamFormat fmt = stream_format_for(path);
  std::ofstream out(path, fmt == StreamFormat::binary ? std::ios::binary : std::ios::out);
  if (!out) throw UsageError("cannot write stream file: " + path.string());
  if (fmt == StreamFormat::text) {
    for (ItemId id : stream) out << id << '\n';
    return;
  }
  for (ItemId id : stream) {
    unsigned char buf[8];
    for (int b = 0; b < 8; ++b) buf[b] = static_cast<unsigned char>(id >> (8 * b));
    out.write(reinterpret_cast<const char*>(buf), 8);
  }
}

inline Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config: " + path.string());
  try {
    return nlohmann::json::parse(in).get<Config>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("bad config: ") + e.what());
  }
}

}  // namespace l2hh
