#include "moire/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "moire/errors.hpp"

namespace moire {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

const std::string* find(const KeyValues& kv, const std::string& key) {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& v, const char* expected) {
    throw ConfigError("config: '" + key + "' expects " + expected + ", got '" + v + "'");
}

}  // namespace

KeyValues parse_key_values(std::istream& in, std::string_view source) {
    KeyValues kv;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        const std::string_view t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        const std::string where = std::string(source) + ":" + std::to_string(lineno);
        if (eq == std::string_view::npos) throw ConfigError(where + ": expected key=value");
        const std::string key(trim(t.substr(0, eq)));
        if (key.empty()) throw ConfigError(where + ": empty key");
        if (!kv.emplace(key, std::string(trim(t.substr(eq + 1)))).second)
            throw ConfigError(where + ": duplicate key '" + key + "'");
    }
    return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config '" + path.string() + "'");
    return parse_key_values(in, path.string());
}

void write_key_values(std::ostream& out, const KeyValues& kv) {
    for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
}

void write_key_values(const std::filesystem::path& path, const KeyValues& kv) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    write_key_values(out, kv);
}

KeyValues with_prefix(const KeyValues& kv, std::string_view prefix) {
    KeyValues out;
    for (const auto& [k, v] : kv)
        if (k.starts_with(prefix)) out.emplace(k.substr(prefix.size()), v);
    return out;
}

double kv_double(const KeyValues& kv, const std::string& key, double fallback) {
    const std::string* v = find(kv, key);
    if (!v) return fallback;
    try {
        std::size_t pos = 0;
        const double r = std::stod(*v, &pos);
        if (pos == v->size()) return r;
    } catch (const std::exception&) {
    }
    bad_value(key, *v, "a number");
}

std::uint64_t kv_u64(const KeyValues& kv, const std::string& key, std::uint64_t fallback) {
    const std::string* v = find(kv, key);
    if (!v) return fallback;
    std::uint64_t r = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), r);
    if (ec != std::errc{} || ptr != v->data() + v->size()) bad_value(key, *v, "a non-negative integer");
    return r;
}

std::size_t kv_size(const KeyValues& kv, const std::string& key, std::size_t fallback) {
    return static_cast<std::size_t>(kv_u64(kv, key, fallback));
}

bool kv_bool(const KeyValues& kv, const std::string& key, bool fallback) {
    const std::string* v = find(kv, key);
    if (!v) return fallback;
    if (*v == "1" || *v == "true" || *v == "yes" || *v == "on") return true;
    if (*v == "0" || *v == "false" || *v == "no" || *v == "off") return false;
    bad_value(key, *v, "a boolean");
}

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace moire
