#include "skewprod/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "skewprod/csv.hpp"
#include "skewprod/skew_engine.hpp"

#ifndef SKEWPROD_BUILD_ID
#define SKEWPROD_BUILD_ID "unknown"
#endif

namespace skewprod {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

const char* build_id() { return SKEWPROD_BUILD_ID; }

void write_file_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw fs::filesystem_error("cannot open for writing", tmp, std::make_error_code(std::errc::io_error));
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    os.flush();
    if (!os) throw fs::filesystem_error("write failed", tmp, std::make_error_code(std::errc::io_error));
  }
  fs::rename(tmp, path);
}

const char* to_string(PlotStyle s) {
  switch (s) {
    case PlotStyle::timeseries: return "timeseries";
    case PlotStyle::histogram: return "histogram";
    case PlotStyle::cdf: return "cdf";
  }
  return "?";
}

namespace {

std::optional<std::size_t> maybe_column(const ExperimentRecord& r, const std::string& name) {
  auto it = std::find(r.columns.begin(), r.columns.end(), name);
  if (it == r.columns.end()) return std::nullopt;
  return static_cast<std::size_t>(it - r.columns.begin());
}

}  // namespace

fs::path emit_plot_data(const ExperimentRecord& record, PlotStyle style, const fs::path& dir, const std::string& stem) {
  if (record.rows.empty()) throw std::invalid_argument("emit_plot_data: record '" + record.name + "' is empty");
  auto need = [&](const std::string& name) {
    auto c = maybe_column(record, name);
    if (!c) {
      throw std::invalid_argument(std::string("emit_plot_data: ") + to_string(style) + " needs column '" + name +
                                  "' in record '" + record.name + "'");
    }
    return *c;
  };
  std::ostringstream os;
  switch (style) {
    case PlotStyle::timeseries: {
      const std::size_t s = need("step");
      auto x = maybe_column(record, "x");
      const std::size_t v = x ? *x : need("value");
      os << "step,x\n";
      for (const auto& r : record.rows) os << csv::real(r[s]) << ',' << csv::real(r[v]) << '\n';
      break;
    }
    case PlotStyle::histogram: {
      const std::size_t l = need("left"), rr = need("right"), m = need("mass");
      os << "bin_left,bin_right,density\n";
      for (const auto& r : record.rows) {
        os << csv::real(r[l]) << ',' << csv::real(r[rr]) << ',' << csv::real(r[m] / (r[rr] - r[l])) << '\n';
      }
      break;
    }
    case PlotStyle::cdf: {
      const std::size_t a = need("a"), e = need("empirical"), t = need("theoretical");
      os << "a,empirical,theoretical\n";
      for (const auto& r : record.rows) os << csv::real(r[a]) << ',' << csv::real(r[e]) << ',' << csv::real(r[t]) << '\n';
      break;
    }
  }
  const fs::path path = dir / (stem + "_" + to_string(style) + ".csv");
  write_file_atomic(path, os.str());
  return path;
}

ExperimentRecord measure_record(const BinnedMeasure& m) {
  ExperimentRecord r;
  r.name = "measure";
  r.columns = {"left", "right", "mass"};
  const auto bins = m.bins();
  for (std::size_t k = 0; k < bins.size(); ++k) r.rows.push_back({m.left(k), m.right(k), bins[k]});
  r.set("atom0", m.atom0());
  r.set("atom1", m.atom1());
  return r;
}

namespace {

Json real_json(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

// record parameters are kept as text; numbers go back out as JSON numbers
Json scalar_json(const std::string& v) {
  if (v == "nan") return nullptr;
  std::uint64_t n = 0;
  if (auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n); ec == std::errc() && p == v.data() + v.size()) {
    return n;
  }
  double d = 0.0;
  if (auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), d); ec == std::errc() && p == v.data() + v.size()) {
    return real_json(d);
  }
  return v;
}

Json regime_object(const RegimeReport& regime, const MinimalityReport& m) {
  Json j;
  j["L0"] = real_json(regime.L0);
  j["L1"] = real_json(regime.L1);
  j["regime"] = to_string(regime.regime);
  j["zero_tolerance"] = regime.zero_tolerance;
  j["minimality"] = {{"verdict", to_string(m.verdict)}, {"clause", to_string(m.clause)}, {"Q", m.Q}, {"tau", m.tau}};
  return j;
}

Json endpoint_object(const EndpointMinimality& e) {
  return {{"endpoint", e.endpoint == Endpoint::zero ? 0 : 1},
          {"precondition", e.precondition},
          {"lambda", real_json(e.lambda)},
          {"mu", real_json(e.mu)},
          {"ratio", real_json(e.ratio)},
          {"numerator", e.numerator},
          {"denominator", e.denominator},
          {"residual", real_json(e.residual)},
          {"rationally_dependent", e.rationally_dependent},
          {"curvature_down", real_json(e.curvature_down)},
          {"curvature_up", real_json(e.curvature_up)},
          {"clause", to_string(e.clause)}};
}

Coordinate parse_coordinate(const std::string& s) {
  if (s == "plain") return Coordinate::plain;
  if (s == "log") return Coordinate::log;
  if (s == "logit") return Coordinate::logit;
  throw ConfigError("parse_error", "coordinate must be plain, log or logit, got '" + s + "'");
}

Metric parse_metric(const std::string& s) {
  if (s == "total_variation") return Metric::total_variation;
  if (s == "bounded_lipschitz") return Metric::bounded_lipschitz;
  throw ConfigError("parse_error", "metric must be total_variation or bounded_lipschitz, got '" + s + "'");
}

class Writer {
 public:
  explicit Writer(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void record(const ExperimentRecord& r, const std::string& file) {
    std::ostringstream os;
    write_record_csv(os, r);
    text(file, os.str());
  }
  void text(const std::string& file, const std::string& content) {
    write_file_atomic(dir_ / file, content);
    files_.push_back(file);
  }
  void plot(const ExperimentRecord& r, PlotStyle style, const std::string& stem) {
    files_.push_back(emit_plot_data(r, style, dir_, stem).filename().string());
  }
  const fs::path& dir() const { return dir_; }
  std::vector<std::string>& files() { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

}  // namespace

std::string regime_json(const RegimeReport& regime, const MinimalityReport& minimality) {
  return regime_object(regime, minimality).dump();
}

RunOutcome run(RunConfig cfg, const std::string& command) {
  if (!cfg.experiment.empty() && cfg.experiment != command) {
    throw ConfigError("precondition", "config is for experiment '" + cfg.experiment + "', not '" + command + "'");
  }
  cfg.experiment = command;
  validate(cfg);
  if (cfg.workers) set_worker_hint(cfg.workers);

  const MapFamily family = cfg.family();
  const RegimeReport regime = classify_regime(family, cfg.get_real("zero_tolerance", 1e-12));
  const MinimalityReport minimality = minimality_check(family, cfg.get_count("Q", 1000000), cfg.get_real("tau", 1e-9));
  const std::uint64_t seed = cfg.seed;

  Writer out(cfg.outdir);
  Json results = Json::object();
  std::vector<std::string> warnings;
  std::uint64_t streams = 0;
  auto absorb = [&](const ExperimentRecord& r) {
    for (const auto& [k, v] : r.parameters) results[k] = scalar_json(v);
    warnings.insert(warnings.end(), r.warnings.begin(), r.warnings.end());
    streams = std::max(streams, r.streams);
  };

  if (command == "classify") {
    ExperimentRecord r;
    r.name = command;
    r.columns = {"endpoint", "exponent", "f1_log_derivative", "f2_log_derivative"};
    r.rows.push_back({0.0, regime.L0, family.f_down.log_derivative_at(Endpoint::zero),
                      family.f_up.log_derivative_at(Endpoint::zero)});
    r.rows.push_back({1.0, regime.L1, family.f_down.log_derivative_at(Endpoint::one),
                      family.f_up.log_derivative_at(Endpoint::one)});
    out.record(r, "classify.csv");
  } else if (command == "minimality") {
    ExperimentRecord r;
    r.name = command;
    r.columns = {"endpoint", "precondition", "lambda", "mu", "ratio", "numerator", "denominator", "residual",
                 "rationally_dependent", "curvature_down", "curvature_up", "fires"};
    for (const EndpointMinimality* e : {&minimality.at_zero, &minimality.at_one}) {
      const bool fires =
          e->clause == MinimalityClause::irrational_ratio || e->clause == MinimalityClause::second_derivative;
      r.rows.push_back({e->endpoint == Endpoint::zero ? 0.0 : 1.0, double(e->precondition), e->lambda, e->mu,
                        e->ratio, double(e->numerator), double(e->denominator), e->residual,
                        double(e->rationally_dependent), e->curvature_down, e->curvature_up, double(fires)});
    }
    results["at_zero"] = endpoint_object(minimality.at_zero);
    results["at_one"] = endpoint_object(minimality.at_one);
    out.record(r, "minimality.csv");
  } else if (command == "stationary") {
    const auto iterations = cfg.get_count("iterations", 10000);
    const StationaryResult st =
        stationary_experiment(family, cfg.bins, iterations, parse_metric(cfg.get_text("metric", "total_variation")));
    std::ostringstream os;
    write_measure_csv(os, st.measure);
    out.text("stationary.csv", os.str());
    ExperimentRecord res;
    res.name = "stationary_residuals";
    res.columns = {"iteration", "residual"};
    for (std::size_t i = 0; i < st.residuals.size(); ++i) res.rows.push_back({double(i + 1), st.residuals[i]});
    out.record(res, "stationary_residuals.csv");
    out.plot(measure_record(st.measure), PlotStyle::histogram, "stationary");
    results["final_residual"] = real_json(st.residuals.back());
    results["interior_mass"] = st.measure.interior_mass();
    results["atom0"] = st.measure.atom0();
    results["atom1"] = st.measure.atom1();
    results["fiber_exponent"] = real_json(st.fiber_exponent);
    if (st.cone) {
      results["cone"] = {{"c", st.cone->cone.c},
                         {"alpha", st.cone->cone.alpha},
                         {"q", st.cone->cone.q},
                         {"delta", st.cone->delta},
                         {"contraction_zero", st.cone->contraction_zero},
                         {"contraction_one", st.cone->contraction_one}};
    } else {
      results["cone"] = nullptr;
    }
  } else if (command == "basin-scan") {
    ScanParams p;
    p.cylinder_length = static_cast<unsigned>(cfg.get_count("cylinder_length", p.cylinder_length));
    p.subdivisions = static_cast<unsigned>(cfg.get_count("subdivisions", p.subdivisions));
    p.samples_per_cell = cfg.get_count("samples_per_cell", p.samples_per_cell);
    p.horizon = cfg.get_count("horizon", p.horizon);
    p.delta = cfg.get_real("delta", p.delta);
    const ScanResult r = intermingled_scan(family, p, seed);
    absorb(r.record);
    out.record(r.record, "basin-scan.csv");
  } else if (command == "graph") {
    GraphParams p;
    p.words = cfg.get_count("words", p.words);
    p.horizon = cfg.get_count("horizon", p.horizon);
    p.tolerance = cfg.get_real("tolerance", p.tolerance);
    const ExperimentRecord r = invariant_graph_experiment(family, p, seed);
    absorb(r);
    out.record(r, "graph.csv");
  } else if (command == "sync") {
    SyncParams p;
    p.pairs = cfg.get_count("pairs", p.pairs);
    p.x0 = cfg.get_real("x0", p.x0);
    p.y0 = cfg.get_real("y0", p.y0);
    p.horizon = cfg.get_count("horizon", p.horizon);
    p.stride = cfg.get_count("stride", p.stride);
    const SyncResult r = synchronization_experiment(family, p, seed);
    absorb(r.record);
    out.record(r.record, "sync.csv");
  } else if (command == "onoff" || command == "excursions") {
    OnOffParams p;
    p.orbits = cfg.get_count("orbits", p.orbits);
    p.x0 = cfg.get_real("x0", p.x0);
    p.beta = cfg.get_real("beta", p.beta);
    p.checkpoints = cfg.get_counts("checkpoints", p.checkpoints);
    p.window = cfg.get_count("window", p.window);
    p.indicator = regime.regime == Regime::double_neutral ? Indicator::middle_band : Indicator::below_beta;
    const OnOffResult r = onoff_survey(family, p, seed);
    if (command == "onoff") {
      absorb(r.occupation);
      out.record(r.occupation, "onoff.csv");
      out.record(r.windows, "onoff_windows.csv");
    } else {
      absorb(r.excursions);
      out.record(r.excursions, "excursions.csv");
    }
  } else if (command == "clt") {
    CltParams p;
    p.x0 = cfg.get_real("x0", p.x0);
    p.steps = cfg.get_count("steps", p.steps);
    p.samples = cfg.get_count("samples", p.samples);
    p.a_grid = cfg.get_reals("a_grid", p.a_grid);
    const CltResult r = clt_experiment(family, p, seed);
    absorb(r.record);
    out.record(r.record, "clt.csv");
    out.plot(r.record, PlotStyle::cdf, "clt");
  } else if (command == "pullback") {
    PullbackParams p;
    p.x0 = cfg.get_real("x0", p.x0);
    p.n_grid = cfg.get_counts("n_grid", p.n_grid);
    p.words = cfg.get_count("words", p.words);
    p.beta = cfg.get_real("beta", p.beta);
    p.window = cfg.get_count("window", p.window);
    const ExperimentRecord r = pullback_vs_forward(family, p, seed);
    absorb(r);
    out.record(r, "pullback.csv");
  } else if (command == "drift") {
    DriftParams p;
    p.x0 = cfg.get_real("x0", p.x0);
    p.samples = cfg.get_count("samples", p.samples);
    p.horizon = cfg.get_count("horizon", p.horizon);
    p.delta = cfg.get_real("delta", p.delta);
    const DriftResult r = drift_experiment(family, p, seed);
    absorb(r.record);
    out.record(r.record, "drift.csv");
  } else if (command == "orbit") {
    const double x0 = cfg.get_real("x0", 0.5);
    const auto steps = cfg.get_count("steps", 1000);
    const auto stride = cfg.get_count("stride", 1);
    const Coordinate coord = parse_coordinate(cfg.get_text("coordinate", "logit"));
    const SymbolWord w = sample_word(family.p1, steps, seed, symbol_stream(0));
    const Orbit orbit = forward_orbit(family, w.view(), from_plain(x0, coord), steps, coord, stride);
    std::ostringstream os;
    write_orbit_csv(os, orbit);
    out.text("orbit.csv", os.str());
    ExperimentRecord ts;
    ts.name = "orbit";
    ts.columns = {"step", "x"};
    for (const auto& s : orbit.samples) ts.rows.push_back({double(s.step), to_plain(s.value, coord)});
    out.plot(ts, PlotStyle::timeseries, "orbit");
    streams = 1;
  } else {
    throw ConfigError("validation_error", "unknown subcommand '" + command + "'");
  }

  Json report;
  report["schema"] = kReportSchema;
  report["build_id"] = build_id();
  report["command"] = command;
  report["family"] = {{"f1", family.f_down.expression()},
                      {"f2", family.f_up.expression()},
                      {"p1", family.p1},
                      {"p2", family.p2}};
  report["regime"] = regime_object(regime, minimality);
  Json params = Json::object();
  for (const auto& e : cfg.parameters) params[e.key] = e.value;
  report["experiment"] = {{"name", command}, {"parameters", params}, {"results", results}, {"warnings", warnings}};
  report["provenance"] = {{"seed", seed}, {"streams", streams}, {"prng", "philox4x32-10"}, {"bins", cfg.bins}};
  report["files"] = out.files();
  report["config"] = serialize(cfg);

  RunOutcome outcome;
  outcome.outdir = out.dir();
  outcome.report = report.dump(2) + "\n";
  out.text("report.json", outcome.report);
  outcome.files = out.files();
  return outcome;
}

RunOutcome replay(const fs::path& report_path, const std::string& outdir) {
  std::ifstream in(report_path);
  if (!in) throw fs::filesystem_error("cannot read report", report_path, std::make_error_code(std::errc::io_error));
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("parse_error", std::string("report.json: ") + e.what());
  }
  if (!j.contains("schema") || j["schema"] != kReportSchema) {
    throw ConfigError("parse_error", std::string("report.json: expected schema ") + kReportSchema);
  }
  RunConfig cfg = parse_config(j.at("config").get<std::string>());
  if (!outdir.empty()) cfg.outdir = outdir;
  return run(cfg, j.at("command").get<std::string>());
}

std::string error_record(const std::exception& e) {
  Json err;
  if (const auto* c = dynamic_cast<const ConfigError*>(&e)) {
    err = {{"kind", c->kind()}, {"message", c->what()}};
    if (c->line()) err["line"] = c->line();
  } else if (dynamic_cast<const fs::filesystem_error*>(&e)) {
    err = {{"kind", "io_error"}, {"message", e.what()}};
  } else if (dynamic_cast<const std::invalid_argument*>(&e) || dynamic_cast<const std::domain_error*>(&e)) {
    err = {{"kind", "invalid_argument"}, {"message", e.what()}};
  } else {
    err = {{"kind", "runtime_error"}, {"message", e.what()}};
  }
  return Json{{"schema", kReportSchema}, {"error", err}}.dump();
}

}  // namespace skewprod
