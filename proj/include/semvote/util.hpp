#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace semvote {

using json = nlohmann::ordered_json;

std::string sha256_hex(std::string_view data);

std::string read_file(const std::filesystem::path& path);
// Write to a sibling temp file then rename over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Throws Error(kParse) naming path:line for malformed lines; blank lines are skipped.
std::vector<json> read_jsonl(const std::filesystem::path& path);
void write_jsonl_atomic(const std::filesystem::path& path, const std::vector<json>& rows);

// Runs fn(i) for i in [0, count) on up to `workers` threads; rethrows the first exception.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn);

std::vector<std::string> split_lines(std::string_view text);
std::string_view trim(std::string_view s);
// Current UTC time as 2026-01-31T12:00:00Z.
std::string utc_timestamp();

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace semvote
