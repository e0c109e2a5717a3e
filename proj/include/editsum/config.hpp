#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace editsum::config {

// Flat `key = value` settings; order is canonical (sorted by key).
using KeyValues = std::map<std::string, std::string>;

/// Parses `key = value` lines. Blank lines and lines starting with '#' are
/// skipped. Throws UsageError on malformed lines or repeated keys; `source`
/// names the input in messages.
KeyValues parse(std::string_view text, std::string_view source);
std::string format(const KeyValues& kv);

std::size_t to_size(std::string_view key, std::string_view value);
std::uint64_t to_u64(std::string_view key, std::string_view value);
double to_double(std::string_view key, std::string_view value);
bool to_bool(std::string_view key, std::string_view value);

std::string from_double(double v);

} // namespace editsum::config
