#include "config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <pnshape/errors.hpp>

namespace pnshape::cli {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Shortest representation that round-trips.
std::string fmt(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

template <class T, class F>
std::string join(const std::vector<T>& v, F&& f) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            out += ",";
        out += f(v[i]);
    }
    return out;
}

double to_double(const std::string& s, const std::string& key) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(key, "not a number: '" + s + "'");
    }
}

std::uint64_t to_u64(const std::string& s, const std::string& key) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw ParseError(key, "not a nonnegative integer: '" + s + "'");
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        throw ParseError(key, "integer out of range: '" + s + "'");
    }
}

} // namespace

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& s, const std::string& key) {
    std::vector<double> out;
    for (const auto& item : split_list(s)) {
        const auto c1 = item.find(':');
        if (c1 == std::string::npos) {
            out.push_back(to_double(item, key));
            continue;
        }
        const auto c2 = item.find(':', c1 + 1);
        if (c2 == std::string::npos)
            throw ParseError(key, "range must be start:step:stop, got '" + item + "'");
        const double a = to_double(trim(item.substr(0, c1)), key);
        const double st = to_double(trim(item.substr(c1 + 1, c2 - c1 - 1)), key);
        const double b = to_double(trim(item.substr(c2 + 1)), key);
        if (!(st > 0.0) || b < a)
            throw ParseError(key, "range needs a positive step and stop >= start");
        const auto n = static_cast<std::size_t>(std::floor((b - a) / st + 1e-9));
        if (n > 100000)
            throw ParseError(key, "range has too many points");
        for (std::size_t i = 0; i <= n; ++i)
            out.push_back(a + static_cast<double>(i) * st);
    }
    return out;
}

RunConfig RunConfig::parse(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    cfg.origin_ = origin;
    std::stringstream ss(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.resize(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        const std::string where = origin + ":" + std::to_string(lineno);
        if (eq == std::string::npos)
            throw ParseError(where, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw ParseError(where, "empty key");
        if (cfg.values_.count(key))
            throw ParseError(where, "duplicate key '" + key + "'");
        cfg.values_[key] = trim(line.substr(eq + 1));
    }
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError(path, "cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

void RunConfig::set(const std::string& key, const std::string& value) { values_[key] = value; }

const std::string* RunConfig::lookup(const std::string& key) {
    used_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
}

std::string RunConfig::get_string(const std::string& key, const std::string& def) {
    const auto* v = lookup(key);
    return resolved_[key] = v ? *v : def;
}

double RunConfig::get_double(const std::string& key, double def) {
    const auto* v = lookup(key);
    const double x = v ? to_double(*v, key) : def;
    resolved_[key] = fmt(x);
    return x;
}

std::size_t RunConfig::get_size(const std::string& key, std::size_t def) {
    return static_cast<std::size_t>(get_u64(key, def));
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t def) {
    const auto* v = lookup(key);
    const std::uint64_t x = v ? to_u64(*v, key) : def;
    resolved_[key] = std::to_string(x);
    return x;
}

bool RunConfig::get_bool(const std::string& key, bool def) {
    const auto* v = lookup(key);
    bool x = def;
    if (v) {
        if (*v == "true" || *v == "1" || *v == "yes")
            x = true;
        else if (*v == "false" || *v == "0" || *v == "no")
            x = false;
        else
            throw ParseError(key, "not a boolean: '" + *v + "'");
    }
    resolved_[key] = x ? "true" : "false";
    return x;
}

std::vector<double> RunConfig::get_doubles(const std::string& key, const std::vector<double>& def) {
    const auto* v = lookup(key);
    auto x = v ? parse_doubles(*v, key) : def;
    if (x.empty())
        throw ParseError(key, "empty list");
    resolved_[key] = join(x, fmt);
    return x;
}

std::vector<std::size_t> RunConfig::get_sizes(const std::string& key, const std::vector<std::size_t>& def) {
    const auto* v = lookup(key);
    std::vector<std::size_t> x;
    if (v) {
        for (const auto& item : split_list(*v))
            x.push_back(static_cast<std::size_t>(to_u64(item, key)));
    } else {
        x = def;
    }
    if (x.empty())
        throw ParseError(key, "empty list");
    resolved_[key] = join(x, [](std::size_t s) { return std::to_string(s); });
    return x;
}

std::vector<std::string> RunConfig::get_strings(const std::string& key, const std::vector<std::string>& def) {
    const auto* v = lookup(key);
    auto x = v ? split_list(*v) : def;
    if (x.empty())
        throw ParseError(key, "empty list");
    resolved_[key] = join(x, [](const std::string& s) { return s; });
    return x;
}

void RunConfig::require_all_used() const {
    for (const auto& [k, v] : values_)
        if (!used_.count(k))
            throw ParseError(k, "unknown key for this subcommand");
}

} // namespace pnshape::cli
