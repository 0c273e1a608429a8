#ifndef NWSIL_KV_CONFIG_H_
#define NWSIL_KV_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <utility>

namespace nwsil {

// "key = value" lines; '#' starts a comment; blank lines ignored. Getters
// mark keys as consumed so leftovers can be reported as unknown.
class KvConfig {
 public:
  static KvConfig parse(std::istream& in);
  static KvConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Maps the value through `choices`; throws kConfig listing them otherwise.
  template <typename E>
  E get_enum(const std::string& key, E fallback,
             std::initializer_list<std::pair<const char*, E>> choices) const {
    if (!has(key)) {
      used_.insert(key);
      return fallback;
    }
    const std::string v = get_string(key, "");
    std::string names;
    for (const auto& [name, value] : choices) {
      if (v == name) return value;
      if (!names.empty()) names += ", ";
      names += name;
    }
    fail(key, "must be one of {" + names + "}, got '" + v + "'");
  }

  // Throws kConfig naming the first key no getter asked for.
  void reject_unknown() const;

  const std::map<std::string, std::string>& values() const { return values_; }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, std::size_t> lines_;
  mutable std::set<std::string> used_;
};

}  // namespace nwsil

#endif  // NWSIL_KV_CONFIG_H_
