#include "catch_amalgamated.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "skewprod/config.hpp"
#include "skewprod/report.hpp"

using namespace skewprod;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = SKEWPROD_CONFIG_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("skewprod_test_" + name);
  fs::remove_all(p);
  return p;
}

ConfigError config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("no ConfigError for:\n" << text);
  throw;
}

const char* kKan = R"(
[family.f1]
kind = logistic
r = 0.5

[family.f2]
kind = logistic
r = 0.5
)";

}  // namespace

TEST_CASE("map expressions", "[cli]") {
  const auto f = parse_map_expression(" logistic(0.5, down) ");
  const auto ref = IntervalMap::logistic_perturb(0.5, Direction::down);
  for (double x : {0.1, 0.5, 0.9}) CHECK(f.eval(x) == ref.eval(x));

  const auto inv = parse_map_expression("inverse(moebius(1))");
  CHECK(inv.eval(0.5) == Approx(IntervalMap::moebius(-1).eval(0.5)).epsilon(1e-14));

  const auto comp = parse_map_expression("compose(moebius(1), damped_moebius(-1, 0.3))");
  CHECK(parse_map_expression(comp.expression()).eval(0.3) == comp.eval(0.3));
  const auto mir = parse_map_expression("mirror(logistic(0.25,up))");
  CHECK(mir.eval(0.2) == Approx(1 - IntervalMap::logistic_perturb(0.25, Direction::up).eval(0.8)).epsilon(1e-14));

  for (const char* bad : {"moebius(", "moebius(1) x", "logistic(0.5, left)", "foo(1)", "moebius(abc)", ""}) {
    CHECK_THROWS_AS(parse_map_expression(bad), ConfigError);
  }
}

TEST_CASE("config examples", "[cli]") {
  const auto walk = parse_config("[experiment]\nname = classify\n");
  CHECK(classify_regime(walk.family()).regime == Regime::double_neutral);
  CHECK(walk.p1 == 0.5);
  CHECK(walk.bins == 4096);
  CHECK(walk.outdir == "out");

  const auto steep = config_error("[family.f1]\nkind = logistic\nr = 1.5\n");
  CHECK(steep.kind() == "validation_error");
  CHECK_THAT(steep.what(), Catch::Matchers::ContainsSubstring("f1 not increasing"));

  const auto p0 = config_error("[base]\np1 = 0\n");
  CHECK(p0.kind() == "validation_error");
  CHECK_THAT(p0.what(), Catch::Matchers::ContainsSubstring("probabilities"));

  const auto kan = parse_config(kKan);
  CHECK(classify_regime(kan.family()).regime == Regime::intermingled_basins);
  CHECK(kan.f1.eval(0.5) == Approx(0.375));
  CHECK(kan.f2.eval(0.5) == Approx(0.625));
}

TEST_CASE("config errors carry line numbers", "[cli]") {
  auto e = config_error("[base]\np1 = 0.5\n\ncolour = red\n");
  CHECK(e.kind() == "parse_error");
  CHECK(e.line() == 4);

  e = config_error("# comment\n[nonsense]\n");
  CHECK(e.line() == 2);
  e = config_error("[base]\nseed = 1\nseed = 2\n");
  CHECK(e.line() == 3);
  e = config_error("p1 = 0.5\n");
  CHECK(e.line() == 1);
  e = config_error("[base\n");
  CHECK(e.line() == 1);
  e = config_error("[base]\np1 = half\n");
  CHECK(e.line() == 2);
  e = config_error("[experiment]\nname = sync\nhorizn = 10\n");
  CHECK(e.line() == 3);
  e = config_error("[family.f1]\nexpr = moebius(\n");
  CHECK(e.kind() == "parse_error");
  CHECK(e.line() == 2);
  e = config_error("[experiment]\nname = fly\n");
  CHECK(e.kind() == "validation_error");
}

TEST_CASE("regime mismatch fails closed", "[cli]") {
  const auto e = config_error(std::string(kKan) + "[experiment]\nname = sync\n");
  CHECK(e.kind() == "precondition");
  CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("IntermingledBasins"));

  auto cfg = parse_config(kKan);
  try {
    run(cfg, "clt");
    FAIL("ran");
  } catch (const ConfigError& err) {
    CHECK(err.kind() == "precondition");
  }
  cfg.experiment = "classify";
  CHECK_THROWS_AS(run(cfg, "graph"), ConfigError);
}

TEST_CASE("serialize round trip", "[cli][property]") {
  for (const auto& entry : fs::directory_iterator(kConfigs)) {
    const auto cfg = parse_config(slurp(entry.path()));
    const auto again = parse_config(serialize(cfg));
    CHECK(again == cfg);
    CHECK(serialize(again) == serialize(cfg));
  }
  RunConfig c;
  c.f1 = parse_map_expression("compose(inverse(logistic(0.25,up)), mirror(moebius(0.5)))");
  c.f2 = IntervalMap::damped_moebius(0.75, 0.1);
  c.p1 = 0.3;
  c.seed = 123456789;
  c.outdir = "elsewhere";
  c.bins = 100;
  c.workers = 3;
  c.experiment = "orbit";
  c.parameters = {{"x0", "0.25", 0}, {"steps", "1e3", 0}};
  const auto back = parse_config(serialize(c));
  CHECK(back == c);
  CHECK(back.f1.eval(0.4) == c.f1.eval(0.4));
  CHECK(back.get_count("steps", 0) == 1000);
}

TEST_CASE("typed parameter access", "[cli]") {
  const auto c = parse_config(slurp(kConfigs / "onoff-onoff.conf"));
  CHECK(c.experiment == "onoff");
  CHECK(c.get_counts("checkpoints", {}) == std::vector<std::uint64_t>{10000, 100000, 1000000, 10000000});
  CHECK(c.get_real("beta", 0) == 0.05);
  CHECK(c.get_count("missing", 7) == 7);
  CHECK(classify_regime(c.family()).regime == Regime::onoff_at_zero);

  const auto clt = parse_config(slurp(kConfigs / "onoff-clt.conf"));
  CHECK(clt.get_reals("a_grid", {}).size() == 12);
  const auto bad = parse_config("[experiment]\nname = orbit\nsteps = 1.5\n");
  CHECK_THROWS_AS(bad.get_count("steps", 0), ConfigError);
}

TEST_CASE("shipped configs describe the intended families", "[cli]") {
  const auto fam = parse_config(slurp(kConfigs / "inverse-kan-sync.conf")).family();
  const auto ref = families::inverse_kan();
  for (double x : {0.01, 0.3, 0.77}) {
    CHECK(fam.f_down.eval(x) == Approx(ref.f_down.eval(x)).epsilon(1e-13));
    CHECK(fam.f_up.eval(x) == Approx(ref.f_up.eval(x)).epsilon(1e-13));
  }
  CHECK(classify_regime(parse_config(slurp(kConfigs / "drift.conf")).family()).regime == Regime::drift_to_one);
  CHECK(classify_regime(parse_config(slurp(kConfigs / "walk-occupation.conf")).family()).regime ==
        Regime::double_neutral);
}

TEST_CASE("classify run writes a report", "[cli]") {
  auto cfg = parse_config(slurp(kConfigs / "walk.conf"));
  cfg.outdir = scratch("classify").string();
  const auto out = run(cfg, "classify");
  CHECK(out.files.back() == "report.json");
  const auto j = nlohmann::json::parse(slurp(out.outdir / "report.json"));
  CHECK(j["schema"] == kReportSchema);
  CHECK(j["command"] == "classify");
  CHECK(j["regime"]["regime"] == "DoubleNeutral");
  CHECK(j["regime"]["L0"] == 0.0);
  CHECK(j["regime"]["L1"] == 0.0);
  CHECK(j["regime"]["minimality"]["verdict"] == "Inconclusive");
  CHECK(j["provenance"]["prng"] == "philox4x32-10");
  CHECK(slurp(out.outdir / "classify.csv").rfind("endpoint,exponent,", 0) == 0);
  CHECK(j["config"].get<std::string>() == serialize([&] {
          auto c = cfg;
          c.experiment = "classify";
          return c;
        }()));
}

TEST_CASE("runs are byte-identical and replayable", "[cli]") {
  auto cfg = parse_config(slurp(kConfigs / "onoff-onoff.conf"));
  cfg.parameters = {{"orbits", "5", 0}, {"checkpoints", "1e3, 1e4, 3e4", 0}, {"window", "1e4", 0}};
  cfg.outdir = scratch("onoff_a").string();
  cfg.workers = 1;
  const auto a = run(cfg, "onoff");
  cfg.outdir = scratch("onoff_b").string();
  cfg.workers = 3;
  const auto b = run(cfg, "onoff");
  for (const char* f : {"onoff.csv", "onoff_windows.csv"}) CHECK(slurp(a.outdir / f) == slurp(b.outdir / f));

  // occupation column is the mean over orbits at increasing checkpoints
  std::istringstream csv(slurp(a.outdir / "onoff.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "n,mean_fraction,min_fraction,max_fraction");
  double prev_n = 0;
  while (std::getline(csv, line)) {
    const double n = std::stod(line.substr(0, line.find(',')));
    CHECK(n > prev_n);
    prev_n = n;
  }

  const auto r = replay(a.outdir / "report.json", scratch("onoff_replay").string());
  for (const char* f : {"onoff.csv", "onoff_windows.csv"}) CHECK(slurp(a.outdir / f) == slurp(r.outdir / f));
  const auto ja = nlohmann::json::parse(a.report), jr = nlohmann::json::parse(r.report);
  CHECK(ja["experiment"] == jr["experiment"]);
  CHECK(ja["experiment"]["results"]["orbits"] == 5);
  set_worker_hint(0);
}

TEST_CASE("replay rejects foreign files", "[cli]") {
  const auto dir = scratch("replay_bad");
  fs::create_directories(dir);
  write_file_atomic(dir / "report.json", R"({"schema": "other/1"})");
  CHECK_THROWS_AS(replay(dir / "report.json"), ConfigError);
  write_file_atomic(dir / "broken.json", "{");
  CHECK_THROWS_AS(replay(dir / "broken.json"), ConfigError);
  CHECK_THROWS_AS(replay(dir / "absent.json"), fs::filesystem_error);
}

TEST_CASE("plot data", "[cli]") {
  const auto dir = scratch("plots");
  fs::create_directories(dir);

  ExperimentRecord ts;
  ts.name = "orbit";
  ts.columns = {"step", "value"};
  ts.rows = {{0, 0.5}, {1, 0.25}};
  CHECK(slurp(emit_plot_data(ts, PlotStyle::timeseries, dir, "walk")) == "step,x\n0,0.5\n1,0.25\n");
  CHECK(fs::exists(dir / "walk_timeseries.csv"));

  const auto hist = measure_record(BinnedMeasure::lebesgue(4));
  CHECK(slurp(emit_plot_data(hist, PlotStyle::histogram, dir, "leb")) ==
        "bin_left,bin_right,density\n0,0.25,1\n0.25,0.5,1\n0.5,0.75,1\n0.75,1,1\n");

  ExperimentRecord cdf;
  cdf.columns = {"a", "empirical", "theoretical", "difference"};
  cdf.rows = {{1, 0.75, 0.5, 0.25}};
  CHECK(slurp(emit_plot_data(cdf, PlotStyle::cdf, dir, "clt")) == "a,empirical,theoretical\n1,0.75,0.5\n");

  ExperimentRecord empty;
  empty.columns = {"step", "x"};
  CHECK_THROWS_AS(emit_plot_data(empty, PlotStyle::timeseries, dir, "e"), std::invalid_argument);
  CHECK_THROWS_AS(emit_plot_data(ts, PlotStyle::cdf, dir, "e"), std::invalid_argument);
  CHECK_THROWS_AS(emit_plot_data(cdf, PlotStyle::histogram, dir, "e"), std::invalid_argument);
}

TEST_CASE("error records", "[cli]") {
  const auto j = nlohmann::json::parse(error_record(ConfigError("parse_error", "bad", 7)));
  CHECK(j["schema"] == kReportSchema);
  CHECK(j["error"]["kind"] == "parse_error");
  CHECK(j["error"]["line"] == 7);
  const auto k = nlohmann::json::parse(error_record(std::invalid_argument("x")));
  CHECK(k["error"]["kind"] == "invalid_argument");
  CHECK_FALSE(k["error"].contains("line"));
}

TEST_CASE("regime json", "[cli]") {
  const auto fam = families::onoff();
  const auto j = nlohmann::json::parse(regime_json(classify_regime(fam), minimality_check(fam)));
  for (const char* key : {"L0", "L1", "regime", "zero_tolerance", "minimality"}) CHECK(j.contains(key));
  CHECK(j["regime"] == "OnOffAtZero");
  CHECK(j["minimality"]["Q"] == 1000000);
  CHECK(j["minimality"]["tau"] == 1e-9);
}
