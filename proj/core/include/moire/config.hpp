#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

namespace moire {

using KeyValues = std::map<std::string, std::string>;

/// Parses `key = value` lines. Blank lines and lines starting with '#' are skipped; whitespace
/// around keys and values is trimmed. Throws ConfigError naming `source` and the line number
/// for a line without '=' or a repeated key.
KeyValues parse_key_values(std::istream& in, std::string_view source = "<stream>");
KeyValues read_key_values(const std::filesystem::path& path);
void write_key_values(std::ostream& out, const KeyValues& kv);
void write_key_values(const std::filesystem::path& path, const KeyValues& kv);

/// Entries whose key starts with `prefix`, with the prefix removed.
KeyValues with_prefix(const KeyValues& kv, std::string_view prefix);

/// Typed lookups returning `fallback` when the key is absent; ConfigError on a malformed value.
double kv_double(const KeyValues& kv, const std::string& key, double fallback);
std::size_t kv_size(const KeyValues& kv, const std::string& key, std::size_t fallback);
std::uint64_t kv_u64(const KeyValues& kv, const std::string& key, std::uint64_t fallback);
bool kv_bool(const KeyValues& kv, const std::string& key, bool fallback);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

}  // namespace moire
