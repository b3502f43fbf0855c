// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace pirem {

/// Raised on malformed config input; the CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Key-value run configuration. File format: one `key = value` per line,
/// '#' starts a comment, repeated keys accumulate in order (used for
/// operator terms). Values keep their raw text; typed getters parse lazily.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Comma- or space-separated list of numbers.
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<std::int64_t> get_int_list(const std::string& key) const;

  /// All values recorded for a repeated key, in file order.
  std::vector<std::string> get_all(const std::string& key) const;

  void set(const std::string& key, const std::string& value);

  /// Echo in file format (sorted by key), for run manifests.
  std::string echo() const;

 private:
  const std::string& raw(const std::string& key) const;
  std::map<std::string, std::vector<std::string>> values_;
  std::vector<std::string> order_;
};

}  // namespace pirem
