#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qmet/matrix.hpp"

namespace qmet {

/// Keys accepted in config files and as CLI flags.
const std::vector<std::string>& known_config_keys();

/// Flat key=value configuration. '#' starts a comment; blank lines are
/// ignored. Values are kept verbatim and parsed on access, so the effective
/// configuration can be echoed and replayed exactly.
class RunConfig {
 public:
  /// Throws ConfigParse (with line number) on malformed or duplicate lines
  /// and UnknownKey on keys outside known_config_keys().
  static RunConfig parse(std::string_view text);
  static RunConfig load(const std::string& path);

  /// Later values win; throws UnknownKey.
  void set(const std::string& key, std::string value);
  void merge(const RunConfig& overrides);

  bool has(const std::string& key) const { return values_.contains(key); }
  std::optional<std::string> raw(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const noexcept { return values_; }

  // Typed access; Validation errors name the key.
  std::string text(const std::string& key) const;
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  std::uint64_t unsigned_or(const std::string& key, std::uint64_t fallback) const;
  bool flag_or(const std::string& key, bool fallback) const;
  Vector numbers(const std::string& key) const;
  std::vector<int> integers(const std::string& key) const;
  Matrix matrix(const std::string& key) const;

  /// "key=value" lines in key order, replayable through parse().
  std::string serialize() const;

 private:
  std::map<std::string, std::string> values_;
};

/// "a,b;c,d" -> 2x2; `field` names the source in error messages.
Matrix parse_matrix(std::string_view text, std::string_view field);
Vector parse_numbers(std::string_view text, std::string_view field);

}  // namespace qmet
