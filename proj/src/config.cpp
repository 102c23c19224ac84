#include "skewprod/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "skewprod/csv.hpp"
#include "skewprod/lyapunov.hpp"

namespace skewprod {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> to_real(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<std::uint64_t> to_count(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc() && ptr == s.data() + s.size() && !s.empty()) return v;
  // allow 1e6 style for counts when the value is an exact integer
  if (auto r = to_real(s); r && *r >= 0.0 && *r <= 9.007199254740992e15 && std::floor(*r) == *r) {
    return static_cast<std::uint64_t>(*r);
  }
  return std::nullopt;
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto c = s.find(',');
    out.push_back(trim(s.substr(0, c)));
    if (c == std::string_view::npos) break;
    s.remove_prefix(c + 1);
  }
  return out;
}

// ---- map expressions ------------------------------------------------------

class ExprParser {
 public:
  explicit ExprParser(std::string_view t) : text_(t) {}

  IntervalMap parse_all() {
    IntervalMap m = parse();
    skip();
    if (pos_ != text_.size()) fail("trailing characters");
    return m;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("parse_error", "map expression '" + std::string(text_) + "': " + what);
  }
  void skip() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }
  void expect(char c) {
    skip();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  bool peek(char c) {
    skip();
    return pos_ < text_.size() && text_[pos_] == c;
  }
  std::string_view word() {
    skip();
    const std::size_t b = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    if (b == pos_) fail("expected a name");
    return text_.substr(b, pos_ - b);
  }
  double number() {
    skip();
    const std::size_t b = pos_;
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ')') ++pos_;
    auto v = to_real(text_.substr(b, pos_ - b));
    if (!v) fail("bad number '" + std::string(trim(text_.substr(b, pos_ - b))) + "'");
    return *v;
  }

  IntervalMap parse() {
    const std::string name(word());
    expect('(');
    try {
      if (name == "moebius") {
        const double a = number();
        expect(')');
        return IntervalMap::moebius(a);
      }
      if (name == "logistic") {
        const double r = number();
        expect(',');
        const auto d = word();
        expect(')');
        if (d != "down" && d != "up") fail("direction must be down or up");
        return IntervalMap::logistic_perturb(r, d == "down" ? Direction::down : Direction::up);
      }
      if (name == "damped_moebius") {
        const double a = number();
        expect(',');
        const double c = number();
        expect(')');
        return IntervalMap::damped_moebius(a, c);
      }
      if (name == "inverse" || name == "mirror") {
        IntervalMap inner = parse();
        expect(')');
        return name == "inverse" ? inner.inverted() : inner.mirrored();
      }
      if (name == "compose") {
        std::vector<IntervalMap> parts{parse()};
        while (peek(',')) {
          ++pos_;
          parts.push_back(parse());
        }
        expect(')');
        return IntervalMap::composite(std::move(parts));
      }
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
    fail("unknown map kind '" + name + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

// ---- experiment catalogue -------------------------------------------------

struct ExperimentSpec {
  std::vector<std::string> keys;
  std::vector<Regime> regimes;  // empty: any regime
};

const std::map<std::string, ExperimentSpec>& catalogue() {
  static const std::map<std::string, ExperimentSpec> c = {
      {"classify", {{"zero_tolerance"}, {}}},
      {"minimality", {{"Q", "tau"}, {}}},
      {"stationary", {{"iterations", "metric"}, {}}},
      {"basin-scan",
       {{"cylinder_length", "subdivisions", "samples_per_cell", "horizon", "delta"}, {Regime::intermingled_basins}}},
      {"graph", {{"words", "horizon", "tolerance"}, {Regime::intermingled_basins}}},
      {"sync", {{"pairs", "x0", "y0", "horizon", "stride"}, {Regime::synchronization}}},
      {"onoff",
       {{"orbits", "x0", "beta", "checkpoints", "window"}, {Regime::onoff_at_zero, Regime::double_neutral}}},
      {"excursions", {{"orbits", "x0", "beta", "checkpoints", "window"}, {Regime::onoff_at_zero}}},
      {"clt", {{"x0", "steps", "samples", "a_grid"}, {Regime::onoff_at_zero}}},
      {"pullback", {{"x0", "n_grid", "words", "beta", "window"}, {Regime::onoff_at_zero}}},
      {"drift", {{"x0", "samples", "horizon", "delta"}, {Regime::drift_to_one, Regime::drift_to_zero}}},
      {"orbit", {{"x0", "steps", "stride", "coordinate"}, {}}},
  };
  return c;
}

struct Section {
  std::string name;
  std::vector<ConfigEntry> entries;
  std::size_t line = 0;

  const ConfigEntry* find(std::string_view key) const {
    for (const auto& e : entries) {
      if (e.key == key) return &e;
    }
    return nullptr;
  }
};

double need_real(const ConfigEntry& e) {
  auto v = to_real(e.value);
  if (!v) throw ConfigError("parse_error", "'" + e.key + "' expects a number, got '" + e.value + "'", e.line);
  return *v;
}

std::uint64_t need_count(const ConfigEntry& e) {
  auto v = to_count(e.value);
  if (!v) {
    throw ConfigError("parse_error", "'" + e.key + "' expects a non-negative integer, got '" + e.value + "'", e.line);
  }
  return *v;
}

bool need_bool(const ConfigEntry& e) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  throw ConfigError("parse_error", "'" + e.key + "' expects true or false", e.line);
}

void only_keys(const Section& s, std::initializer_list<std::string_view> allowed) {
  for (const auto& e : s.entries) {
    if (std::find(allowed.begin(), allowed.end(), e.key) == allowed.end()) {
      throw ConfigError("parse_error", "unknown key '" + e.key + "' in [" + s.name + "]", e.line);
    }
  }
}

IntervalMap build_map(const Section& s, Direction default_dir) {
  only_keys(s, {"kind", "log_multiplier", "r", "direction", "damping", "expr", "invert", "mirror"});
  auto need = [&](std::string_view key) -> const ConfigEntry& {
    if (const auto* e = s.find(key)) return *e;
    throw ConfigError("parse_error", "[" + s.name + "] needs '" + std::string(key) + "'", s.line);
  };
  IntervalMap m = IntervalMap::moebius(0.0);
  if (const auto* e = s.find("expr")) {
    for (const char* k : {"kind", "log_multiplier", "r", "direction", "damping"}) {
      if (const auto* other = s.find(k)) {
        throw ConfigError("parse_error", "'expr' cannot be combined with '" + other->key + "'", other->line);
      }
    }
    try {
      m = parse_map_expression(e->value);
    } catch (const ConfigError& err) {
      throw ConfigError("parse_error", err.what(), e->line);
    }
  } else {
    const auto& kind = need("kind");
    try {
      if (kind.value == "moebius") {
        m = IntervalMap::moebius(need_real(need("log_multiplier")));
      } else if (kind.value == "logistic") {
        Direction d = default_dir;
        if (const auto* de = s.find("direction")) {
          if (de->value != "down" && de->value != "up") {
            throw ConfigError("parse_error", "direction must be down or up", de->line);
          }
          d = de->value == "down" ? Direction::down : Direction::up;
        }
        m = IntervalMap::logistic_perturb(need_real(need("r")), d);
      } else if (kind.value == "damped_moebius") {
        m = IntervalMap::damped_moebius(need_real(need("log_multiplier")), need_real(need("damping")));
      } else {
        throw ConfigError("parse_error", "unknown map kind '" + kind.value + "' (use expr for compositions)",
                          kind.line);
      }
    } catch (const std::invalid_argument& err) {
      throw ConfigError("validation_error", "[" + s.name + "] " + err.what(), s.line);
    }
  }
  if (const auto* e = s.find("invert"); e && need_bool(*e)) m = m.inverted();
  if (const auto* e = s.find("mirror"); e && need_bool(*e)) m = m.mirrored();
  return m;
}

}  // namespace

IntervalMap parse_map_expression(std::string_view text) { return ExprParser(trim(text)).parse_all(); }

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : catalogue()) v.push_back(k);
    return v;
  }();
  return names;
}

// ---- typed access ---------------------------------------------------------

const ConfigEntry* RunConfig::find(std::string_view key) const {
  for (const auto& e : parameters) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

double RunConfig::get_real(std::string_view key, double fallback) const {
  const auto* e = find(key);
  return e ? need_real(*e) : fallback;
}

std::uint64_t RunConfig::get_count(std::string_view key, std::uint64_t fallback) const {
  const auto* e = find(key);
  return e ? need_count(*e) : fallback;
}

std::string RunConfig::get_text(std::string_view key, std::string fallback) const {
  const auto* e = find(key);
  return e ? e->value : fallback;
}

std::vector<double> RunConfig::get_reals(std::string_view key, std::vector<double> fallback) const {
  const auto* e = find(key);
  if (!e) return fallback;
  std::vector<double> out;
  for (auto item : split_list(e->value)) out.push_back(need_real({e->key, std::string(item), e->line}));
  return out;
}

std::vector<std::uint64_t> RunConfig::get_counts(std::string_view key, std::vector<std::uint64_t> fallback) const {
  const auto* e = find(key);
  if (!e) return fallback;
  std::vector<std::uint64_t> out;
  for (auto item : split_list(e->value)) out.push_back(need_count({e->key, std::string(item), e->line}));
  return out;
}

// ---- parse / serialize ----------------------------------------------------

RunConfig parse_config(std::string_view text) {
  static const std::set<std::string> known = {"family.f1", "family.f2", "base", "experiment", "output"};
  std::vector<Section> sections;
  Section* cur = nullptr;
  std::size_t lineno = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("parse_error", "malformed section header", lineno);
      std::string name(trim(line.substr(1, line.size() - 2)));
      if (!known.count(name)) throw ConfigError("parse_error", "unknown section [" + name + "]", lineno);
      for (const auto& s : sections) {
        if (s.name == name) throw ConfigError("parse_error", "duplicate section [" + name + "]", lineno);
      }
      sections.push_back({name, {}, lineno});
      cur = &sections.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("parse_error", "expected key = value", lineno);
    if (!cur) throw ConfigError("parse_error", "key outside of any section", lineno);
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("parse_error", "empty key", lineno);
    if (cur->find(key)) throw ConfigError("parse_error", "duplicate key '" + key + "'", lineno);
    cur->entries.push_back({key, value, lineno});
  }

  auto section = [&](std::string_view name) -> const Section* {
    for (const auto& s : sections) {
      if (s.name == name) return &s;
    }
    return nullptr;
  };

  RunConfig c;
  if (const auto* s = section("family.f1")) c.f1 = build_map(*s, Direction::down);
  if (const auto* s = section("family.f2")) c.f2 = build_map(*s, Direction::up);
  if (const auto* s = section("base")) {
    only_keys(*s, {"p1", "p2", "seed"});
    if (const auto* e = s->find("p1")) c.p1 = need_real(*e);
    if (const auto* e = s->find("p2")) {
      const double p2 = need_real(*e);
      if (!s->find("p1")) c.p1 = 1.0 - p2;
      if (std::fabs(c.p1 + p2 - 1.0) > 1e-15) {
        throw ConfigError("validation_error", "probabilities: p1 + p2 must equal 1", e->line);
      }
    }
    if (const auto* e = s->find("seed")) c.seed = need_count(*e);
  }
  if (const auto* s = section("experiment")) {
    for (const auto& e : s->entries) {
      if (e.key == "name") {
        c.experiment = e.value;
      } else {
        c.parameters.push_back(e);
      }
    }
  }
  if (const auto* s = section("output")) {
    only_keys(*s, {"dir", "bins", "workers"});
    if (const auto* e = s->find("dir")) c.outdir = e->value;
    if (const auto* e = s->find("bins")) c.bins = need_count(*e);
    if (const auto* e = s->find("workers")) c.workers = static_cast<unsigned>(need_count(*e));
  }
  validate(c);
  return c;
}

std::string serialize(const RunConfig& c) {
  std::ostringstream os;
  os << "[family.f1]\nexpr = " << c.f1.expression() << "\n\n";
  os << "[family.f2]\nexpr = " << c.f2.expression() << "\n\n";
  os << "[base]\np1 = " << csv::real(c.p1) << "\nseed = " << c.seed << "\n\n";
  os << "[experiment]\n";
  if (!c.experiment.empty()) os << "name = " << c.experiment << "\n";
  for (const auto& e : c.parameters) os << e.key << " = " << e.value << "\n";
  os << "\n[output]\ndir = " << c.outdir << "\nbins = " << c.bins << "\nworkers = " << c.workers << "\n";
  return os.str();
}

void validate(const RunConfig& c) {
  const MapFamily family = c.family();
  const ValidationReport report = validate_family(family, 1000);
  if (!report.ok()) {
    const Violation& v = report.violations.front();
    throw ConfigError("validation_error", std::string(to_string(v.condition)) + ": " + v.message);
  }
  if (c.bins < 2) throw ConfigError("validation_error", "output.bins must be >= 2");
  if (c.experiment.empty()) return;

  const auto it = catalogue().find(c.experiment);
  if (it == catalogue().end()) throw ConfigError("validation_error", "unknown experiment '" + c.experiment + "'");
  const ExperimentSpec& spec = it->second;
  for (const auto& e : c.parameters) {
    if (std::find(spec.keys.begin(), spec.keys.end(), e.key) == spec.keys.end()) {
      throw ConfigError("parse_error", "unknown key '" + e.key + "' for experiment " + c.experiment, e.line);
    }
  }
  if (!spec.regimes.empty()) {
    const Regime r = classify_regime(family).regime;
    if (std::find(spec.regimes.begin(), spec.regimes.end(), r) == spec.regimes.end()) {
      throw ConfigError("precondition", "experiment " + c.experiment + " needs regime " +
                                            to_string(spec.regimes.front()) + ", family is " + to_string(r));
    }
  }
}

}  // namespace skewprod
