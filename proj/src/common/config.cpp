#include "editsum/config.hpp"
#include "editsum/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>

namespace editsum::config {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view what) {
    throw UsageError("config key '" + std::string(key) + "': '" + std::string(value) + "' is not " +
                     std::string(what));
}

} // namespace

KeyValues parse(std::string_view text, std::string_view source) {
    KeyValues kv;
    std::size_t lineno = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        auto line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++lineno;
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        const auto where = std::string(source) + ":" + std::to_string(lineno);
        if (eq == std::string_view::npos) throw UsageError(where + ": expected key = value");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw UsageError(where + ": empty key");
        if (!kv.emplace(std::string(key), std::string(value)).second)
            throw UsageError(where + ": repeated key '" + std::string(key) + "'");
    }
    return kv;
}

std::string format(const KeyValues& kv) {
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view value) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || p != value.data() + value.size() || value.empty())
        bad(key, value, "a non-negative integer");
    return v;
}

std::size_t to_size(std::string_view key, std::string_view value) {
    return static_cast<std::size_t>(to_u64(key, value));
}

double to_double(std::string_view key, std::string_view value) {
    const std::string s(value);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) bad(key, value, "a finite number");
    return v;
}

bool to_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    bad(key, value, "a boolean");
}

std::string from_double(double v) {
    char buf[32];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

} // namespace editsum::config
