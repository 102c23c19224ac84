#include "skewprod/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "skewprod/csv.hpp"

namespace skewprod {

void ExperimentRecord::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : parameters) {
    if (k == key) {
      v = value;
      return;
    }
  }
  parameters.emplace_back(key, value);
}

void ExperimentRecord::set(const std::string& key, double value) { set(key, csv::real(value)); }

void ExperimentRecord::set(const std::string& key, std::uint64_t value) { set(key, std::to_string(value)); }

const std::string* ExperimentRecord::get(const std::string& key) const {
  for (const auto& [k, v] : parameters) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::size_t ExperimentRecord::column(const std::string& name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::out_of_range("record " + this->name + " has no column " + name);
  return static_cast<std::size_t>(it - columns.begin());
}

void write_record_csv(std::ostream& os, const ExperimentRecord& record) {
  for (std::size_t c = 0; c < record.columns.size(); ++c) os << (c ? "," : "") << record.columns[c];
  os << '\n';
  for (const auto& row : record.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << csv::real(row[c]);
    os << '\n';
  }
}

// ---------------------------------------------------------------------------

namespace {
std::atomic<unsigned> g_worker_hint{0};
}

void set_worker_hint(unsigned workers) { g_worker_hint = workers; }

unsigned worker_count() {
  if (unsigned hint = g_worker_hint.load()) return hint;
  if (const char* env = std::getenv("SKEWPROD_WORKERS"); env && *env) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (*end != '\0' || v == 0 || v > 4096) {
      throw std::invalid_argument(std::string("SKEWPROD_WORKERS must be a positive integer, got '") + env + "'");
    }
    return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  std::size_t failed_index = std::numeric_limits<std::size_t>::max();
  std::exception_ptr error;

  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_index) {
          failed_index = i;
          error = std::current_exception();
        }
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::optional<double> log_slope(std::span<const double> steps, std::span<const double> values, double lo, double hi) {
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < steps.size() && i < values.size(); ++i) {
    const double v = values[i];
    if (!(v >= lo && v <= hi)) continue;
    const double x = steps[i];
    const double y = std::log(v);
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  if (n < 3) return std::nullopt;
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return std::nullopt;
  return (n * sxy - sx * sy) / den;
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty sample");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("quantile of empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q must be in [0,1]");
  std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  rank = std::clamp<std::size_t>(rank, 1, v.size()) - 1;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(rank), v.end());
  return v[rank];
}

namespace {

void require_unit_open(double x, const char* what) {
  if (!(x > 0.0 && x < 1.0)) throw std::invalid_argument(std::string(what) + " must lie in (0,1)");
}

void warn_unless(ExperimentRecord& rec, const MapFamily& family, std::initializer_list<Regime> expected) {
  const Regime r = classify_regime(family).regime;
  for (Regime e : expected) {
    if (r == e) return;
  }
  rec.warnings.push_back(std::string("regime is ") + to_string(r) + ", experiment assumes " +
                         to_string(*expected.begin()));
}

}  // namespace

// ---------------------------------------------------------------------------

const char* to_string(BasinOutcome b) {
  switch (b) {
    case BasinOutcome::to_zero: return "ToZero";
    case BasinOutcome::to_one: return "ToOne";
    case BasinOutcome::undecided: return "Undecided";
  }
  return "?";
}

BasinOutcome basin_classify(const MapFamily& family, std::span<const Symbol> word, double x0, std::uint64_t horizon,
                            double delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw std::invalid_argument("basin_classify: delta must be in (0, 1/2)");
  if (word.size() < horizon) throw std::length_error("basin_classify: word shorter than horizon");
  if (x0 <= 0.0) return BasinOutcome::to_zero;
  if (x0 >= 1.0) return BasinOutcome::to_one;

  const double low = logit(delta);  // x < delta  <=>  y < low;  x > 1 - delta  <=>  y > -low
  const std::uint64_t start = horizon - horizon / 10;
  bool below = true, above = true;
  double y = logit(x0);
  for (std::uint64_t k = 0;; ++k) {
    if (k >= start) {
      below = below && y < low;
      above = above && y > -low;
      if (!below && !above) return BasinOutcome::undecided;
    }
    if (k == horizon) break;
    y = family.map_for(word[k]).eval_logit(y);
  }
  return below ? BasinOutcome::to_zero : BasinOutcome::to_one;
}

ScanResult intermingled_scan(const MapFamily& family, const ScanParams& p, std::uint64_t seed) {
  if (p.subdivisions == 0 || p.samples_per_cell == 0) throw std::invalid_argument("intermingled_scan: empty grid");
  if (p.cylinder_length > 20) throw std::invalid_argument("intermingled_scan: cylinder length too large");
  const std::size_t cylinders = std::size_t{1} << p.cylinder_length;
  const std::size_t cells = cylinders * p.subdivisions;
  const std::size_t total = cells * p.samples_per_cell;

  std::vector<BasinOutcome> outcome(total);
  parallel_for(total, [&](std::size_t g) {
    const std::size_t cell = g / p.samples_per_cell;
    const std::size_t cyl = cell / p.subdivisions;
    const std::size_t j = cell % p.subdivisions;
    SymbolWord w = sample_word(family.p1, p.horizon, seed, symbol_stream(g));
    for (unsigned t = 0; t < p.cylinder_length && t < w.size(); ++t) {
      const bool two = (cyl >> (p.cylinder_length - 1 - t)) & 1u;
      w.symbols[t] = two ? Symbol::two : Symbol::one;
    }
    const double u = CounterRng(seed, aux_stream(g)).uniform(0);
    const double x0 = (static_cast<double>(j) + u) / static_cast<double>(p.subdivisions);
    outcome[g] = basin_classify(family, w.view(), x0, p.horizon, p.delta);
  });

  ScanResult res;
  auto& rec = res.record;
  rec.name = "basin-scan";
  rec.columns = {"cell", "cylinder", "interval", "to_zero", "to_one", "undecided"};
  rec.seed = seed;
  rec.streams = 2 * total;
  warn_unless(rec, family, {Regime::intermingled_basins});

  res.min_both = 1.0;
  std::size_t undecided = 0;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    std::size_t n0 = 0, n1 = 0, nu = 0;
    for (std::size_t s = 0; s < p.samples_per_cell; ++s) {
      switch (outcome[cell * p.samples_per_cell + s]) {
        case BasinOutcome::to_zero: ++n0; break;
        case BasinOutcome::to_one: ++n1; break;
        case BasinOutcome::undecided: ++nu; break;
      }
    }
    undecided += nu;
    const double m = static_cast<double>(p.samples_per_cell);
    rec.rows.push_back({static_cast<double>(cell), static_cast<double>(cell / p.subdivisions),
                        static_cast<double>(cell % p.subdivisions), n0 / m, n1 / m, nu / m});
    res.min_both = std::min(res.min_both, std::min(n0, n1) / m);
  }
  res.undecided = static_cast<double>(undecided) / static_cast<double>(total);

  rec.set("cylinder_length", std::uint64_t{p.cylinder_length});
  rec.set("subdivisions", std::uint64_t{p.subdivisions});
  rec.set("samples_per_cell", std::uint64_t{p.samples_per_cell});
  rec.set("horizon", p.horizon);
  rec.set("delta", p.delta);
  rec.set("min_both", res.min_both);
  rec.set("undecided_fraction", res.undecided);
  return res;
}

double invariant_graph_estimate(const MapFamily& family, std::span<const Symbol> word, double tolerance,
                                std::uint64_t horizon) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("invariant_graph_estimate: tolerance must be > 0");
  if (word.size() < horizon) throw std::length_error("invariant_graph_estimate: word shorter than horizon");
  auto ends_low = [&](double x) {
    double y = logit(x);
    for (std::uint64_t k = 0; k < horizon; ++k) y = family.map_for(word[k]).eval_logit(y);
    return y < 0.0;
  };
  double lo = 0.0, hi = 1.0;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (ends_low(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

ExperimentRecord invariant_graph_experiment(const MapFamily& family, const GraphParams& p, std::uint64_t seed) {
  ExperimentRecord rec;
  rec.name = "graph";
  rec.columns = {"word", "xi", "xi_shift", "image", "residual"};
  rec.seed = seed;
  rec.streams = 2 * p.words;
  warn_unless(rec, family, {Regime::intermingled_basins});

  rec.rows.resize(p.words);
  parallel_for(p.words, [&](std::size_t i) {
    const SymbolWord w = sample_word(family.p1, p.horizon + 1, seed, symbol_stream(i));
    const auto v = w.view();
    const double xi = invariant_graph_estimate(family, v.first(p.horizon), p.tolerance, p.horizon);
    const double xi_shift = invariant_graph_estimate(family, v.subspan(1), p.tolerance, p.horizon);
    const double image = family.map_for(v[0]).eval(xi);
    rec.rows[i] = {static_cast<double>(i), xi, xi_shift, image, std::fabs(xi_shift - image)};
  });
  double worst = 0.0;
  for (const auto& r : rec.rows) worst = std::max(worst, r[4]);
  rec.set("words", std::uint64_t{p.words});
  rec.set("horizon", p.horizon);
  rec.set("tolerance", p.tolerance);
  rec.set("max_residual", worst);
  return rec;
}

// ---------------------------------------------------------------------------

double plain_distance_from_logit(double a, double b) {
  if (a == b) return 0.0;
  if (a < b) std::swap(a, b);
  // logistic(a) - logistic(b) = -expm1(b - a) logistic(a) (1 - logistic(b))
  return -std::expm1(b - a) * logistic(a) * logistic_complement(b);
}

SyncResult synchronization_experiment(const MapFamily& family, const SyncParams& p, std::uint64_t seed) {
  require_unit_open(p.x0, "sync x0");
  require_unit_open(p.y0, "sync y0");
  if (p.stride == 0 || p.pairs == 0) throw std::invalid_argument("sync: stride and pairs must be >= 1");
  const std::size_t samples = static_cast<std::size_t>(p.horizon / p.stride) + 1;

  std::vector<double> dist(samples * p.pairs);
  parallel_for(p.pairs, [&](std::size_t i) {
    SymbolStream src(family.p1, seed, symbol_stream(i));
    double a = logit(p.x0), b = logit(p.y0);
    double* out = dist.data() + i * samples;
    out[0] = plain_distance_from_logit(a, b);
    for (std::uint64_t k = 1; k <= p.horizon; ++k) {
      const auto& f = family.map_for(src.next());
      a = f.eval_logit(a);
      b = f.eval_logit(b);
      if (k % p.stride == 0) out[k / p.stride] = plain_distance_from_logit(a, b);
    }
  });

  SyncResult res;
  auto& rec = res.record;
  rec.name = "sync";
  rec.columns = {"step", "median", "p90"};
  rec.seed = seed;
  rec.streams = 2 * p.pairs;
  warn_unless(rec, family, {Regime::synchronization});

  std::vector<double> steps, medians, column(p.pairs);
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < p.pairs; ++i) column[i] = dist[i * samples + s];
    const double step = static_cast<double>(s * p.stride);
    const double med = median(column);
    rec.rows.push_back({step, med, quantile(column, 0.9)});
    steps.push_back(step);
    medians.push_back(med);
  }
  res.decay_slope = log_slope(steps, medians, 1e-13, 1e-2);

  rec.set("pairs", std::uint64_t{p.pairs});
  rec.set("x0", p.x0);
  rec.set("y0", p.y0);
  rec.set("horizon", p.horizon);
  rec.set("stride", p.stride);
  rec.set("decay_slope", res.decay_slope ? csv::real(*res.decay_slope) : std::string("nan"));
  return res;
}

// ---------------------------------------------------------------------------

namespace {

bool in_set(double y, double low, Indicator ind) {
  return ind == Indicator::below_beta ? y < low : (y >= low && y <= -low);
}

void check_checkpoints(std::span<const std::uint64_t> cps) {
  if (cps.empty()) throw std::invalid_argument("need at least one checkpoint");
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (cps[i] == 0 || (i && cps[i] <= cps[i - 1])) {
      throw std::invalid_argument("checkpoints must be positive and strictly increasing");
    }
  }
}

}  // namespace

std::vector<double> occupation_fraction(const MapFamily& family, SymbolStream& source, double x0,
                                        std::span<const std::uint64_t> checkpoints, double beta,
                                        Indicator indicator) {
  check_checkpoints(checkpoints);
  if (!(beta > 0.0 && beta < 0.5)) throw std::invalid_argument("occupation_fraction: beta must be in (0, 1/2)");
  const double low = logit(beta);
  double y = logit(x0);
  std::uint64_t count = 0;
  std::vector<double> out;
  std::uint64_t k = 0;
  for (std::uint64_t cp : checkpoints) {
    for (; k < cp; ++k) {
      count += in_set(y, low, indicator);
      y = family.map_for(source.next()).eval_logit(y);
    }
    out.push_back(static_cast<double>(count) / static_cast<double>(cp));
  }
  return out;
}

RunSummary summarize(std::span<const std::uint64_t> runs) {
  RunSummary s;
  s.count = runs.size();
  if (runs.empty()) return s;
  s.mean = static_cast<double>(std::accumulate(runs.begin(), runs.end(), std::uint64_t{0})) /
           static_cast<double>(runs.size());
  s.max = *std::max_element(runs.begin(), runs.end());
  return s;
}

ExcursionStats excursion_statistics(const MapFamily& family, SymbolStream& source, double x0, std::uint64_t horizon,
                                    double K) {
  if (!std::isfinite(K)) throw std::invalid_argument("excursion_statistics: K must be finite");
  ExcursionStats st;
  if (horizon == 0) return st;
  double y = logit(x0);
  bool low = y <= K;
  std::uint64_t run = 0;
  for (std::uint64_t k = 0; k < horizon; ++k) {
    const bool now = y <= K;
    if (now != low) {
      (low ? st.eta : st.xi).push_back(run);
      low = now;
      run = 0;
    }
    ++run;
    y = family.map_for(source.next()).eval_logit(y);
  }
  (low ? st.eta : st.xi).push_back(run);
  st.last_is_eta = low;
  st.truncated = (y <= K) == low;
  return st;
}

OnOffResult onoff_survey(const MapFamily& family, const OnOffParams& p, std::uint64_t seed) {
  check_checkpoints(p.checkpoints);
  require_unit_open(p.x0, "onoff x0");
  if (!(p.beta > 0.0 && p.beta < 0.5)) throw std::invalid_argument("onoff: beta must be in (0, 1/2)");
  if (p.orbits == 0 || p.window == 0) throw std::invalid_argument("onoff: orbits and window must be >= 1");
  const std::size_t C = p.checkpoints.size();
  const std::uint64_t horizon = p.checkpoints.back();
  const std::uint64_t windows = horizon / p.window;
  const double K = logit(p.beta);

  struct Snapshot {
    std::uint64_t occupied = 0;
    std::uint64_t runs[2] = {0, 0};  // [0] eta, [1] xi
    std::uint64_t sum[2] = {0, 0};
    std::uint64_t max[2] = {0, 0};
  };
  std::vector<Snapshot> snaps(p.orbits * C);
  std::vector<std::uint64_t> hit_windows(p.orbits);

  parallel_for(p.orbits, [&](std::size_t o) {
    SymbolStream src(family.p1, seed, symbol_stream(o));
    double y = logit(p.x0);
    Snapshot cur;
    int cls = y <= K ? 0 : 1;
    std::uint64_t run = 0;
    std::uint64_t hits = 0;
    bool window_hit = false;
    std::size_t next_cp = 0;
    for (std::uint64_t k = 0; k < horizon; ++k) {
      cur.occupied += in_set(y, K, p.indicator);
      const int now = y <= K ? 0 : 1;
      if (now != cls) {
        cur.runs[cls] += 1;
        cur.sum[cls] += run;
        cur.max[cls] = std::max(cur.max[cls], run);
        cls = now;
        run = 0;
      }
      ++run;
      window_hit = window_hit || y >= K;
      if ((k + 1) % p.window == 0) {
        hits += window_hit;
        window_hit = false;
      }
      if (k + 1 == p.checkpoints[next_cp]) {
        Snapshot s = cur;  // the run in progress counts as a (truncated) run
        s.runs[cls] += 1;
        s.sum[cls] += run;
        s.max[cls] = std::max(s.max[cls], run);
        snaps[o * C + next_cp] = s;
        ++next_cp;
      }
      y = family.map_for(src.next()).eval_logit(y);
    }
    hit_windows[o] = hits;
  });

  OnOffResult res;
  auto base = [&](ExperimentRecord& r, const char* name) {
    r.name = name;
    r.seed = seed;
    r.streams = 2 * p.orbits;
    r.set("orbits", std::uint64_t{p.orbits});
    r.set("x0", p.x0);
    r.set("beta", p.beta);
    r.set("horizon", horizon);
    r.set("indicator", p.indicator == Indicator::below_beta ? "below_beta" : "middle_band");
  };
  base(res.occupation, "onoff");
  base(res.excursions, "excursions");
  base(res.windows, "windows");
  res.windows.set("window", p.window);
  res.occupation.columns = {"n", "mean_fraction", "min_fraction", "max_fraction"};
  res.excursions.columns = {"horizon", "eta_runs", "eta_mean", "eta_max", "xi_runs", "xi_mean", "xi_max"};
  res.windows.columns = {"orbit", "windows", "windows_with_excursion"};
  warn_unless(res.occupation, family,
              p.indicator == Indicator::below_beta ? std::initializer_list<Regime>{Regime::onoff_at_zero}
                                                   : std::initializer_list<Regime>{Regime::double_neutral});

  for (std::size_t c = 0; c < C; ++c) {
    const double n = static_cast<double>(p.checkpoints[c]);
    double sum = 0.0, lo = 1.0, hi = 0.0;
    std::uint64_t runs[2] = {0, 0}, total[2] = {0, 0}, mx[2] = {0, 0};
    for (std::size_t o = 0; o < p.orbits; ++o) {
      const Snapshot& s = snaps[o * C + c];
      const double f = static_cast<double>(s.occupied) / n;
      sum += f;
      lo = std::min(lo, f);
      hi = std::max(hi, f);
      for (int k = 0; k < 2; ++k) {
        runs[k] += s.runs[k];
        total[k] += s.sum[k];
        mx[k] = std::max(mx[k], s.max[k]);
      }
    }
    res.occupation.rows.push_back({n, sum / static_cast<double>(p.orbits), lo, hi});
    auto mean = [](std::uint64_t t, std::uint64_t r) { return r ? static_cast<double>(t) / r : 0.0; };
    res.excursions.rows.push_back({n, static_cast<double>(runs[0]), mean(total[0], runs[0]),
                                   static_cast<double>(mx[0]), static_cast<double>(runs[1]), mean(total[1], runs[1]),
                                   static_cast<double>(mx[1])});
  }
  for (std::size_t o = 0; o < p.orbits; ++o) {
    res.windows.rows.push_back({static_cast<double>(o), static_cast<double>(windows),
                                static_cast<double>(hit_windows[o])});
  }
  return res;
}

// ---------------------------------------------------------------------------

double half_normal_cdf(double a) { return a <= 0.0 ? 0.0 : std::erf(a / std::sqrt(2.0)); }

CltResult clt_experiment(const MapFamily& family, const CltParams& p, std::uint64_t seed) {
  require_unit_open(p.x0, "clt x0");
  if (p.samples == 0 || p.steps == 0) throw std::invalid_argument("clt: steps and samples must be >= 1");
  std::vector<double> log_x(p.samples);
  parallel_for(p.samples, [&](std::size_t i) {
    SymbolStream src(family.p1, seed, symbol_stream(i));
    log_x[i] = log_from_logit(advance_logit(family, src, logit(p.x0), p.steps));
  });

  CltResult res;
  auto& rec = res.record;
  rec.name = "clt";
  rec.columns = {"a", "empirical", "theoretical", "difference"};
  rec.seed = seed;
  rec.streams = 2 * p.samples;
  warn_unless(rec, family, {Regime::onoff_at_zero});
  const double root = std::sqrt(static_cast<double>(p.steps));
  for (double a : p.a_grid) {
    if (!(a > 0.0)) throw std::invalid_argument("clt: a_grid entries must be > 0");
    const auto hits = std::count_if(log_x.begin(), log_x.end(), [&](double u) { return u >= -a * root; });
    const double emp = static_cast<double>(hits) / static_cast<double>(p.samples);
    const double th = half_normal_cdf(a);
    rec.rows.push_back({a, emp, th, emp - th});
    res.sup_difference = std::max(res.sup_difference, std::fabs(emp - th));
  }
  rec.set("x0", p.x0);
  rec.set("steps", p.steps);
  rec.set("samples", std::uint64_t{p.samples});
  rec.set("sup_difference", res.sup_difference);
  return res;
}

// ---------------------------------------------------------------------------

ExperimentRecord pullback_vs_forward(const MapFamily& family, const PullbackParams& p, std::uint64_t seed) {
  require_unit_open(p.x0, "pullback x0");
  if (p.words == 0) throw std::invalid_argument("pullback: words must be >= 1");
  if (!(p.beta > 0.0 && p.beta < 0.5)) throw std::invalid_argument("pullback: beta must be in (0, 1/2)");
  const std::size_t G = p.n_grid.size();
  const std::size_t total = G * p.words;
  const double K = logit(p.beta);

  struct Sample {
    double pullback = 0.0;  // logit
    double forward = 0.0;   // logit
    bool recurred = false;
  };
  std::vector<Sample> out(total);
  parallel_for(total, [&](std::size_t g) {
    const std::uint64_t n = p.n_grid[g / p.words];
    // f^n over a past word oldest-first is the same finite composition as the forward orbit over that word
    SymbolStream past(family.p1, seed, symbol_stream(g));
    out[g].pullback = advance_logit(family, past, logit(p.x0), n);

    SymbolStream fut(family.p1, seed, symbol_stream(total + g));
    double y = advance_logit(family, fut, logit(p.x0), n);
    out[g].forward = y;
    for (std::uint64_t k = 0; k < p.window && !out[g].recurred; ++k) {
      y = family.map_for(fut.next()).eval_logit(y);
      out[g].recurred = y >= K;
    }
  });

  ExperimentRecord rec;
  rec.name = "pullback";
  rec.columns = {"n", "pullback_median", "pullback_median_logit", "forward_median", "forward_below_beta",
                 "recurred_in_window"};
  rec.seed = seed;
  rec.streams = 2 * total;
  warn_unless(rec, family, {Regime::onoff_at_zero});
  for (std::size_t gi = 0; gi < G; ++gi) {
    std::vector<double> pb, fw, pb_plain;
    std::size_t below = 0, recurred = 0;
    for (std::size_t w = 0; w < p.words; ++w) {
      const Sample& s = out[gi * p.words + w];
      pb.push_back(s.pullback);
      pb_plain.push_back(logistic(s.pullback));
      fw.push_back(logistic(s.forward));
      below += s.forward < K;
      recurred += s.recurred;
    }
    const double m = static_cast<double>(p.words);
    rec.rows.push_back({static_cast<double>(p.n_grid[gi]), median(pb_plain), median(pb), median(fw), below / m,
                        recurred / m});
  }
  rec.set("x0", p.x0);
  rec.set("words", std::uint64_t{p.words});
  rec.set("beta", p.beta);
  rec.set("window", p.window);
  return rec;
}

// ---------------------------------------------------------------------------

DriftResult drift_experiment(const MapFamily& family, const DriftParams& p, std::uint64_t seed) {
  if (!(p.x0 >= 0.0 && p.x0 <= 1.0)) throw std::invalid_argument("drift: x0 must lie in [0,1]");
  if (!(p.delta > 0.0 && p.delta < 0.5)) throw std::invalid_argument("drift: delta must be in (0, 1/2)");
  if (p.samples == 0) throw std::invalid_argument("drift: samples must be >= 1");
  std::vector<double> final_y(p.samples);
  parallel_for(p.samples, [&](std::size_t i) {
    const double y0 = logit(p.x0);
    if (std::isinf(y0)) {  // fixed endpoint
      final_y[i] = y0;
      return;
    }
    SymbolStream src(family.p1, seed, symbol_stream(i));
    final_y[i] = advance_logit(family, src, y0, p.horizon);
  });

  DriftResult res;
  auto& rec = res.record;
  rec.name = "drift";
  rec.columns = {"sample", "final_logit"};
  rec.seed = seed;
  rec.streams = 2 * p.samples;
  warn_unless(rec, family, {Regime::drift_to_one, Regime::drift_to_zero});
  const double low = logit(p.delta);
  std::size_t above = 0, below = 0;
  for (std::size_t i = 0; i < p.samples; ++i) {
    rec.rows.push_back({static_cast<double>(i), final_y[i]});
    above += final_y[i] > -low;
    below += final_y[i] < low;
  }
  res.above = static_cast<double>(above) / static_cast<double>(p.samples);
  res.below = static_cast<double>(below) / static_cast<double>(p.samples);
  rec.set("x0", p.x0);
  rec.set("samples", std::uint64_t{p.samples});
  rec.set("horizon", p.horizon);
  rec.set("delta", p.delta);
  rec.set("fraction_above", res.above);
  rec.set("fraction_below", res.below);
  return res;
}

// ---------------------------------------------------------------------------

StationaryResult stationary_experiment(const MapFamily& family, std::size_t bins, std::size_t iterations,
                                       Metric metric) {
  auto kb = krylov_bogolyubov(BinnedMeasure::lebesgue(bins), family, iterations, metric);
  StationaryResult res{std::move(kb.average), std::move(kb.residuals), 0.0, std::nullopt};
  res.fiber_exponent = lyapunov_vs_measure(family, res.measure);
  res.cone = find_cone(family, bins);
  return res;
}

}  // namespace skewprod
