#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace kfp::cli {

/// Usage or configuration problem; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key = value file with dotted sections. '#' starts a comment.
/// Keys are checked against the schema; values are kept as text until read.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "<string>");
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string str(const std::string& key, const std::string& fallback) const;
  double num(const std::string& key, double fallback) const;
  long integer(const std::string& key, long fallback) const;
  std::vector<double> list(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::string> words(const std::string& key, const std::vector<std::string>& fallback) const;

  void set(const std::string& key, const std::string& value);
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
  std::string origin_;
  std::string where(const std::string& key) const;
};

/// All keys accepted in a scenario file.
const std::vector<std::string>& known_keys();

/// Parses a number, accepting "inf".
double parse_number(const std::string& text);

}  // namespace kfp::cli
