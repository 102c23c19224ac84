#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "skewprod/map_family.hpp"

namespace skewprod {

/// Error raised while reading or validating a run configuration.
/// `kind` is "parse_error", "validation_error" or "precondition".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string kind, const std::string& message, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + message : message),
        kind_(std::move(kind)),
        line_(line) {}
  const std::string& kind() const { return kind_; }
  std::size_t line() const { return line_; }

 private:
  std::string kind_;
  std::size_t line_;
};

/// Parses map expressions such as "logistic(0.5,down)", "moebius(-1)",
/// "damped_moebius(1,0.3)", "inverse(...)", "mirror(...)" and
/// "compose(a,b,...)". This is the grammar printed by IntervalMap::expression.
IntervalMap parse_map_expression(std::string_view text);

struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
  friend bool operator==(const ConfigEntry& a, const ConfigEntry& b) { return a.key == b.key && a.value == b.value; }
};

struct RunConfig {
  IntervalMap f1 = IntervalMap::moebius(-1.0);
  IntervalMap f2 = IntervalMap::moebius(1.0);
  double p1 = 0.5;
  std::uint64_t seed = 0;
  std::string experiment;                 // empty: taken from the subcommand
  std::vector<ConfigEntry> parameters;    // [experiment] entries other than name
  std::string outdir = "out";
  std::size_t bins = 4096;
  unsigned workers = 0;                   // 0: no hint

  MapFamily family() const { return MapFamily::with_p1(f1, f2, p1); }

  const ConfigEntry* find(std::string_view key) const;
  double get_real(std::string_view key, double fallback) const;
  std::uint64_t get_count(std::string_view key, std::uint64_t fallback) const;
  std::string get_text(std::string_view key, std::string fallback) const;
  std::vector<double> get_reals(std::string_view key, std::vector<double> fallback) const;
  std::vector<std::uint64_t> get_counts(std::string_view key, std::vector<std::uint64_t> fallback) const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Experiments known to the CLI, in subcommand spelling.
const std::vector<std::string>& experiment_names();

/// Line-oriented key = value format with [section] headers
/// (family.f1, family.f2, base, experiment, output); '#' starts a comment.
/// Unknown sections and keys are errors. The result is validated.
RunConfig parse_config(std::string_view text);

/// Canonical text; parse_config(serialize(c)) == c.
std::string serialize(const RunConfig& config);

/// Class conditions of the family, experiment parameter names and the regime
/// the experiment needs. Throws ConfigError.
void validate(const RunConfig& config);

}  // namespace skewprod
