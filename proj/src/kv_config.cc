#include "kv_config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include "error.h"

namespace nwsil {

namespace {

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

KvConfig KvConfig::parse(std::istream& in) {
  KvConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kConfig,
                  "config line " + std::to_string(line_no) +
                      ": expected 'key = value'",
                  line_no);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw Error(ErrorCode::kConfig,
                  "config line " + std::to_string(line_no) + ": empty key",
                  line_no);
    }
    if (cfg.values_.count(key)) {
      throw Error(ErrorCode::kConfig,
                  "config line " + std::to_string(line_no) + ": key '" + key +
                      "' given twice",
                  line_no);
    }
    cfg.values_[key] = value;
    cfg.lines_[key] = line_no;
  }
  return cfg;
}

KvConfig KvConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open config '" + path.string() + "'");
  }
  return parse(in);
}

bool KvConfig::has(const std::string& key) const {
  return values_.count(key) != 0;
}

void KvConfig::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

void KvConfig::fail(const std::string& key, const std::string& what) const {
  auto it = lines_.find(key);
  std::string where = "config key '" + key + "'";
  if (it != lines_.end()) {
    where += " (line " + std::to_string(it->second) + ")";
    throw Error(ErrorCode::kConfig, where + ": " + what, it->second);
  }
  throw Error(ErrorCode::kConfig, where + ": " + what);
}

std::string KvConfig::get_string(const std::string& key,
                                 const std::string& fallback) const {
  used_.insert(key);
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KvConfig::get_double(const std::string& key, double fallback) const {
  if (!has(key)) {
    used_.insert(key);
    return fallback;
  }
  double v = 0.0;
  if (!parse_number(get_string(key, ""), v) || !std::isfinite(v)) {
    fail(key, "expected a finite number, got '" + values_.at(key) + "'");
  }
  return v;
}

std::int64_t KvConfig::get_int(const std::string& key,
                               std::int64_t fallback) const {
  if (!has(key)) {
    used_.insert(key);
    return fallback;
  }
  std::int64_t v = 0;
  if (!parse_number(get_string(key, ""), v)) {
    fail(key, "expected an integer, got '" + values_.at(key) + "'");
  }
  return v;
}

std::uint64_t KvConfig::get_uint(const std::string& key,
                                 std::uint64_t fallback) const {
  if (!has(key)) {
    used_.insert(key);
    return fallback;
  }
  std::uint64_t v = 0;
  if (!parse_number(get_string(key, ""), v)) {
    fail(key, "expected a nonnegative integer, got '" + values_.at(key) + "'");
  }
  return v;
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) {
    used_.insert(key);
    return fallback;
  }
  const std::string v = get_string(key, "");
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(key, "expected true/false, got '" + v + "'");
}

void KvConfig::reject_unknown() const {
  for (const auto& [key, value] : values_) {
    if (!used_.count(key)) fail(key, "unknown key");
  }
}

}  // namespace nwsil
