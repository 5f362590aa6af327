#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace mtsmt {

// FNV-1a, used for content digests in the experiment cache and for gram keys.
inline std::uint64_t fnv1a(std::string_view data,
                           std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t file_digest(const std::string& path);  // throws on open failure

std::string to_hex(std::uint64_t v);

// Reads a whole file as lines. Strips a trailing '\r' (CRLF input).
std::vector<std::string> read_lines(const std::string& path);
void write_lines(const std::string& path, const std::vector<std::string>& lines);

std::vector<std::string> split_ws(std::string_view line);
std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ");

// Runs fn(begin, end) over fixed-size blocks of [0, n). Blocks execute in
// parallel under OpenMP; callers that need deterministic aggregation merge
// per-block results in block order afterwards. Block boundaries depend only
// on n and block_size, never on the thread count.
void parallel_blocks(std::size_t n, std::size_t block_size,
                     const std::function<void(std::size_t, std::size_t)>& fn);

// Same contract, straight serial loop. Kept as the reference path for tests
// and the benchmark tool.
void serial_blocks(std::size_t n, std::size_t block_size,
                   const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace mtsmt
