#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace uncseg {

// Flat `key = value` configuration. Lines starting with '#' and blank lines
// are skipped; values keep everything after '=' with surrounding whitespace
// trimmed. Duplicate keys are rejected. Typed getters throw SchemaError on
// malformed values; consumed keys are tracked so callers can reject strays.
class RunConfig {
 public:
  RunConfig() = default;

  static RunConfig parse_file(const std::string& path);
  static RunConfig parse_string(const std::string& text);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  uint64_t get_u64(const std::string& key, uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Keys present in the file but never read by a getter.
  std::vector<std::string> unconsumed() const;
  void require_all_consumed() const;  // throws SchemaError listing strays

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
};

}  // namespace uncseg
