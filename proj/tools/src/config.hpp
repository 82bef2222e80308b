#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace pnshape::cli {

/// Flat `key = value` configuration. Lists are comma separated; numeric
/// lists also accept `start:step:stop` ranges (inclusive). `#` starts a
/// comment. Every lookup records the effective value (default included) so
/// that the resolved configuration can be echoed into the run manifest.
class RunConfig {
  public:
    RunConfig() = default;

    static RunConfig parse(const std::string& text, const std::string& origin = "<config>");
    static RunConfig load(const std::string& path);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& def);
    double get_double(const std::string& key, double def);
    std::size_t get_size(const std::string& key, std::size_t def);
    std::uint64_t get_u64(const std::string& key, std::uint64_t def);
    bool get_bool(const std::string& key, bool def);
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& def);
    std::vector<std::size_t> get_sizes(const std::string& key, const std::vector<std::size_t>& def);
    std::vector<std::string> get_strings(const std::string& key, const std::vector<std::string>& def);

    /// Throws ParseError naming any key that was set but never read.
    void require_all_used() const;

    /// Effective values of every key read so far, sorted by key.
    const std::map<std::string, std::string>& resolved() const { return resolved_; }

  private:
    const std::string* lookup(const std::string& key);

    std::map<std::string, std::string> values_;
    std::map<std::string, std::string> resolved_;
    std::set<std::string> used_;
    std::string origin_;
};

std::vector<std::string> split_list(const std::string& s);
std::vector<double> parse_doubles(const std::string& s, const std::string& key);

} // namespace pnshape::cli
