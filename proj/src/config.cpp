#include "qmet/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qmet/errors.hpp"

namespace qmet {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) return parts;
    start = pos + 1;
  }
}

Error invalid(std::string_view field, std::string_view what) {
  return Error(ErrorKind::Validation, std::string(field) + ": " + std::string(what));
}

double to_double(std::string_view s, std::string_view field) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw invalid(field, "expected a finite number, got '" + std::string(s) + "'");
  return v;
}

template <typename T>
T to_integer(std::string_view s, std::string_view field) {
  T v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw invalid(field, "expected an integer, got '" + std::string(s) + "'");
  return v;
}

}  // namespace

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = {
      "command", "model",    "B",      "theta", "phi", "t",            "probe",    "bloch",     "weight", "ordering",
      "seed",    "n_states", "output", "q",     "u",   "multi_params", "restarts", "n_samples", "method"};
  return keys;
}

RunConfig RunConfig::parse(std::string_view text) {
  RunConfig cfg;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw Error(ErrorKind::ConfigParse, where + "expected key=value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw Error(ErrorKind::ConfigParse, where + "empty key");
    if (cfg.has(key)) throw Error(ErrorKind::ConfigParse, where + "duplicate key '" + key + "'");
    try {
      cfg.set(key, value);
    } catch (const Error& e) {
      throw Error(e.kind(), where + "unknown key '" + key + "'");
    }
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigParse, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void RunConfig::set(const std::string& key, std::string value) {
  const auto& keys = known_config_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end())
    throw Error(ErrorKind::UnknownKey, "unknown key '" + key + "'");
  values_[key] = std::move(value);
}

void RunConfig::merge(const RunConfig& overrides) {
  for (const auto& [k, v] : overrides.values_) values_[k] = v;
}

std::optional<std::string> RunConfig::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string RunConfig::text(const std::string& key) const {
  const auto v = raw(key);
  if (!v || v->empty()) throw invalid(key, "required");
  return *v;
}

double RunConfig::number(const std::string& key) const { return to_double(text(key), key); }

double RunConfig::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::uint64_t RunConfig::unsigned_or(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? to_integer<std::uint64_t>(text(key), key) : fallback;
}

bool RunConfig::flag_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = text(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw invalid(key, "expected true or false");
}

Vector RunConfig::numbers(const std::string& key) const { return parse_numbers(text(key), key); }

std::vector<int> RunConfig::integers(const std::string& key) const {
  std::vector<int> out;
  for (auto part : split(text(key), ',')) out.push_back(to_integer<int>(part, key));
  return out;
}

Matrix RunConfig::matrix(const std::string& key) const { return parse_matrix(text(key), key); }

std::string RunConfig::serialize() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + '=' + v + '\n';
  return out;
}

Vector parse_numbers(std::string_view text, std::string_view field) {
  Vector out;
  for (auto part : split(text, ',')) out.push_back(to_double(part, field));
  return out;
}

Matrix parse_matrix(std::string_view text, std::string_view field) {
  const auto rows = split(text, ';');
  std::vector<Vector> parsed;
  for (auto r : rows) parsed.push_back(parse_numbers(r, field));
  const std::size_t n = parsed.size();
  Matrix m(n, parsed.front().size());
  for (std::size_t i = 0; i < n; ++i) {
    if (parsed[i].size() != m.cols()) throw invalid(field, "rows have different lengths");
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = parsed[i][j];
  }
  return m;
}

}  // namespace qmet
