#include "kfp_cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace kfp::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ';' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "experiment",     "seed",           "samples",        "domain.kind",     "domain.extent",
      "domain.iota",    "grid.nx",        "grid.nv",        "grid.vmax",       "grid.angles",
      "stepper.scheme", "stepper.dt",     "time.final",     "fit.window",      "initial.kind",
      "initial.x0",     "initial.v0",     "initial.sx",     "initial.sv",      "initial.width",
      "weights",        "exponents",      "penalization.q", "penalization.beta", "refinements",
      "duality.pairs",  "output.csv",     "output.json",    "output.operators"};
  return keys;
}

double parse_number(const std::string& text) {
  const std::string t = trim(text);
  if (t == "inf" || t == "infinity" || t == "+inf") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + t + "'");
  }
  if (used != t.size()) throw ConfigError("not a number: '" + t + "'");
  return v;
}

Config Config::parse(const std::string& text, const std::string& origin) {
  Config c;
  c.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  const auto& keys = known_keys();
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (c.values_.count(key))
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    c.values_[key] = value;
    c.lines_[key] = lineno;
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

std::string Config::where(const std::string& key) const {
  const auto it = lines_.find(key);
  if (it == lines_.end()) return "key '" + key + "'";
  return origin_ + ":" + std::to_string(it->second) + ": key '" + key + "'";
}

void Config::set(const std::string& key, const std::string& value) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError("unknown key '" + key + "'");
  values_[key] = value;
}

std::string Config::str(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::num(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return parse_number(it->second);
  } catch (const ConfigError& e) {
    throw ConfigError(where(key) + ": " + e.what());
  }
}

long Config::integer(const std::string& key, long fallback) const {
  const double v = num(key, static_cast<double>(fallback));
  if (v != std::floor(v) || std::isinf(v)) throw ConfigError(where(key) + ": expected an integer");
  return static_cast<long>(v);
}

std::vector<double> Config::list(const std::string& key, const std::vector<double>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  try {
    for (const auto& w : split_words(it->second)) out.push_back(parse_number(w));
  } catch (const ConfigError& e) {
    throw ConfigError(where(key) + ": " + e.what());
  }
  if (out.empty()) throw ConfigError(where(key) + ": empty list");
  return out;
}

std::vector<std::string> Config::words(const std::string& key, const std::vector<std::string>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  auto out = split_words(it->second);
  if (out.empty()) throw ConfigError(where(key) + ": empty list");
  return out;
}

}  // namespace kfp::cli
