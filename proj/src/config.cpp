#include "tamed/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "tamed/errors.hpp"

namespace tamed {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    const auto first = static_cast<unsigned char>(k[0]);
    if (!(std::isalpha(first) || k[0] == '_')) return false;
    for (char ch : k) {
        const auto c = static_cast<unsigned char>(ch);
        if (!(std::isalnum(c) || ch == '_' || ch == '.')) return false;
    }
    return true;
}

bool parse_double(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    if (b != e && *b == '+') ++b;
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e;
}

}  // namespace

FlatConfig FlatConfig::parse(const std::string& text, const std::string& source) {
    FlatConfig cfg;
    cfg.source_ = source;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(line) + ": expected `key = value`");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (!valid_key(key))
            throw ConfigError(source + ":" + std::to_string(line) + ": invalid key '" + key + "'");
        if (cfg.entries_.count(key))
            throw ConfigError(source + ":" + std::to_string(line) + ": duplicate key '" + key + "' (first on line " +
                              std::to_string(cfg.entries_[key].line) + ")");
        cfg.entries_[key] = Entry{value, line};
        cfg.order_.push_back(key);
    }
    return cfg;
}

FlatConfig FlatConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

bool FlatConfig::has(const std::string& key) const { return entries_.count(key) != 0; }

void FlatConfig::set(const std::string& key, const std::string& value) {
    if (!valid_key(key)) throw ConfigError("invalid key '" + key + "'");
    if (!entries_.count(key)) order_.push_back(key);
    entries_[key] = Entry{value, 0};
}

const FlatConfig::Entry& FlatConfig::entry(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError(source_ + ": missing required key '" + key + "'");
    used_.insert(key);
    return it->second;
}

void FlatConfig::fail(const std::string& key, const std::string& what) const {
    throw ConfigError(source_ + ":" + std::to_string(line_of(key)) + ": key '" + key + "': " + what);
}

int FlatConfig::line_of(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
}

std::string FlatConfig::get_string(const std::string& key) const { return entry(key).value; }

std::string FlatConfig::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}

double FlatConfig::get_double(const std::string& key) const {
    const std::string& v = entry(key).value;
    double x = 0.0;
    if (!parse_double(v, x)) fail(key, "expected a number, got '" + v + "'");
    return x;
}

double FlatConfig::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long long FlatConfig::get_int(const std::string& key) const {
    const std::string& v = entry(key).value;
    long long x = 0;
    const char* b = v.data();
    const char* e = b + v.size();
    auto [p, ec] = std::from_chars(b, e, x);
    if (ec != std::errc() || p != e) fail(key, "expected an integer, got '" + v + "'");
    return x;
}

long long FlatConfig::get_int(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::uint64_t FlatConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = entry(key).value;
    std::uint64_t x = 0;
    const char* b = v.data();
    const char* e = b + v.size();
    int base = 10;
    if (v.size() > 2 && v[0] == '0' && (v[1] == 'x' || v[1] == 'X')) {
        b += 2;
        base = 16;
    }
    auto [p, ec] = std::from_chars(b, e, x, base);
    if (ec != std::errc() || p != e) fail(key, "expected an unsigned 64-bit integer, got '" + v + "'");
    return x;
}

bool FlatConfig::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = entry(key).value;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail(key, "expected a boolean, got '" + v + "'");
}

std::vector<double> FlatConfig::get_doubles(const std::string& key) const {
    std::vector<double> out;
    if (!has(key)) return out;
    const std::string& v = entry(key).value;
    if (trim(v).empty()) return out;
    std::size_t pos = 0;
    while (pos <= v.size()) {
        const auto comma = v.find(',', pos);
        const std::string item = trim(v.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
        double x = 0.0;
        if (!parse_double(item, x)) fail(key, "list item '" + item + "' is not a number");
        out.push_back(x);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::vector<std::string> FlatConfig::unused_keys() const {
    std::vector<std::string> out;
    for (const auto& k : order_)
        if (!used_.count(k)) out.push_back(k);
    return out;
}

void FlatConfig::reject_unused() const {
    const auto unused = unused_keys();
    if (!unused.empty())
        throw ConfigError(source_ + ":" + std::to_string(line_of(unused.front())) + ": unknown key '" + unused.front() +
                          "'");
}

std::string FlatConfig::to_string() const {
    std::string out;
    for (const auto& k : order_) out += k + " = " + entries_.at(k).value + "\n";
    return out;
}

std::string format_double(double x) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    (void)ec;
    return std::string(buf, p);
}

std::string format_doubles(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ", ";
        out += format_double(xs[i]);
    }
    return out;
}

}  // namespace tamed
