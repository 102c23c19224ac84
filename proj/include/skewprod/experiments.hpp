#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skewprod/coordinates.hpp"
#include "skewprod/lyapunov.hpp"
#include "skewprod/map_family.hpp"
#include "skewprod/measure.hpp"
#include "skewprod/skew_engine.hpp"
#include "skewprod/symbols.hpp"

namespace skewprod {

// ---- plumbing -------------------------------------------------------------

/// Tabular output of an experiment driver.
struct ExperimentRecord {
  std::string name;
  std::vector<std::pair<std::string, std::string>> parameters;  // insertion order is kept
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::uint64_t seed = 0;
  std::uint64_t streams = 0;  // stream ids 0 .. streams-1 were used
  std::vector<std::string> warnings;

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, std::uint64_t value);
  const std::string* get(const std::string& key) const;
  std::size_t column(const std::string& name) const;  // throws if absent
};

/// CSV of the rows; numbers use 17 significant digits.
void write_record_csv(std::ostream& os, const ExperimentRecord& record);

/// Worker count: explicit hint if set, else $SKEWPROD_WORKERS, else the hardware concurrency.
unsigned worker_count();
void set_worker_hint(unsigned workers);  // 0 clears the hint

/// Calls body(i) for i in [0, n) on worker_count() threads. Every index is
/// processed exactly once; if any call throws, the exception of the lowest
/// failing index is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Stream ids are assigned per sample index: symbols of sample i come from
/// stream 2i, auxiliary uniforms (initial points) from stream 2i + 1.
inline std::uint64_t symbol_stream(std::uint64_t index) { return 2 * index; }
inline std::uint64_t aux_stream(std::uint64_t index) { return 2 * index + 1; }

/// Least-squares slope of ln(value) against step over the rows whose value lies in [lo, hi].
/// Returns nullopt with fewer than 3 usable rows.
std::optional<double> log_slope(std::span<const double> steps, std::span<const double> values, double lo, double hi);

double median(std::vector<double> v);
/// Nearest-rank quantile, q in [0,1].
double quantile(std::vector<double> v, double q);

// ---- basins ---------------------------------------------------------------

enum class BasinOutcome { to_zero, to_one, undecided };
const char* to_string(BasinOutcome b);

/// ToZero if x_k < delta for every k in the trailing 10% of [0, horizon];
/// ToOne if x_k > 1 - delta there; otherwise Undecided.
BasinOutcome basin_classify(const MapFamily& family, std::span<const Symbol> word, double x0, std::uint64_t horizon,
                            double delta);

struct ScanParams {
  unsigned cylinder_length = 3;  // l
  unsigned subdivisions = 8;     // J
  std::size_t samples_per_cell = 500;
  std::uint64_t horizon = 10000;
  double delta = 1e-3;
};

struct ScanResult {
  ExperimentRecord record;     // cell,cylinder,interval,to_zero,to_one,undecided
  double min_both = 0.0;       // min over cells of min(to_zero, to_one)
  double undecided = 0.0;      // global undecided fraction
};

/// Basin fractions on cells (cylinder of length l) x (interval j/J, (j+1)/J).
/// Cylinder index c encodes the prefix in binary, most significant symbol first, bit 1 = symbol two.
ScanResult intermingled_scan(const MapFamily& family, const ScanParams& params, std::uint64_t seed);

/// Point where x -> f^horizon_word(x) crosses 1/2, by bisection to `tolerance`.
double invariant_graph_estimate(const MapFamily& family, std::span<const Symbol> word, double tolerance,
                                std::uint64_t horizon);

struct GraphParams {
  std::size_t words = 100;
  std::uint64_t horizon = 2000;
  double tolerance = 1e-10;
};

/// Per word: xi(w), xi(sigma w), f_{w0}(xi(w)) and the equivariance residual.
ExperimentRecord invariant_graph_experiment(const MapFamily& family, const GraphParams& params, std::uint64_t seed);

// ---- synchronization ------------------------------------------------------

struct SyncParams {
  std::size_t pairs = 1000;
  double x0 = 0.1;
  double y0 = 0.9;
  std::uint64_t horizon = 10000;
  std::uint64_t stride = 10;
};

struct SyncResult {
  ExperimentRecord record;  // step,median,p90
  std::optional<double> decay_slope;  // fit of ln(median) over medians in [1e-13, 1e-2]
};

SyncResult synchronization_experiment(const MapFamily& family, const SyncParams& params, std::uint64_t seed);

/// |logistic(a) - logistic(b)| without cancellation.
double plain_distance_from_logit(double a, double b);

// ---- on-off ---------------------------------------------------------------

enum class Indicator { below_beta, middle_band };

/// Running fraction of the first n states x_0 .. x_{n-1} in the indicator set,
/// reported at each checkpoint (ascending, each <= horizon).
std::vector<double> occupation_fraction(const MapFamily& family, SymbolStream& source, double x0,
                                        std::span<const std::uint64_t> checkpoints, double beta,
                                        Indicator indicator);

struct ExcursionStats {
  std::vector<std::uint64_t> eta;  // maximal runs with y <= K
  std::vector<std::uint64_t> xi;   // maximal runs with y > K
  bool truncated = false;          // the last run was cut by the horizon
  bool last_is_eta = true;
  std::uint64_t offset = 0;        // states skipped before the first run
};

struct RunSummary {
  std::uint64_t count = 0;
  double mean = 0.0;
  std::uint64_t max = 0;
};
RunSummary summarize(std::span<const std::uint64_t> runs);

/// Run-length decomposition of the logit orbit y_0 .. y_{horizon-1} at threshold K.
ExcursionStats excursion_statistics(const MapFamily& family, SymbolStream& source, double x0, std::uint64_t horizon,
                                    double K);

struct OnOffParams {
  std::size_t orbits = 32;
  double x0 = 0.5;
  double beta = 0.05;
  std::vector<std::uint64_t> checkpoints{10000, 100000, 1000000, 10000000};
  std::uint64_t window = 1000000;
  Indicator indicator = Indicator::below_beta;
};

struct OnOffResult {
  ExperimentRecord occupation;   // n,mean_fraction,min_fraction,max_fraction
  ExperimentRecord excursions;   // horizon,eta_runs,eta_mean,eta_max,xi_runs,xi_mean,xi_max
  ExperimentRecord windows;      // orbit,windows,windows_with_excursion
};

/// Pooled single-pass survey: occupation checkpoints, run statistics of the
/// prefix up to each checkpoint (pooled over orbits, the run in progress
/// counted as truncated) and per-window recurrence to [beta, 1].
OnOffResult onoff_survey(const MapFamily& family, const OnOffParams& params, std::uint64_t seed);

// ---- central limit theorem ------------------------------------------------

struct CltParams {
  double x0 = 0.5;
  std::uint64_t steps = 100000;
  std::size_t samples = 10000;
  std::vector<double> a_grid{0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0};
};

/// Half-normal distribution function 2 Phi(a) - 1 = erf(a / sqrt 2).
double half_normal_cdf(double a);

struct CltResult {
  ExperimentRecord record;  // a,empirical,theoretical,difference
  double sup_difference = 0.0;
};

/// Empirical P(x_n >= exp(-a sqrt n)) over independent words.
CltResult clt_experiment(const MapFamily& family, const CltParams& params, std::uint64_t seed);

// ---- pullback vs forward --------------------------------------------------

struct PullbackParams {
  double x0 = 0.5;
  std::vector<std::uint64_t> n_grid{0, 10, 100, 1000, 10000, 100000};
  std::size_t words = 100;
  double beta = 0.05;
  std::uint64_t window = 1000000;  // forward steps watched after n
};

/// Rows n,pullback_median,forward_median,forward_below_beta,recurred_in_window.
/// Pullback and forward use independent words; the last column is the
/// fraction of forward orbits reaching [beta, 1] within `window` further steps.
ExperimentRecord pullback_vs_forward(const MapFamily& family, const PullbackParams& params, std::uint64_t seed);

// ---- drift ----------------------------------------------------------------

struct DriftParams {
  double x0 = 0.5;
  std::size_t samples = 1000;
  std::uint64_t horizon = 100000;
  double delta = 1e-6;
};

struct DriftResult {
  ExperimentRecord record;  // sample,final_logit
  double above = 0.0;       // fraction with x_horizon > 1 - delta
  double below = 0.0;       // fraction with x_horizon < delta
};

DriftResult drift_experiment(const MapFamily& family, const DriftParams& params, std::uint64_t seed);

// ---- stationary measure ---------------------------------------------------

struct StationaryResult {
  BinnedMeasure measure;
  std::vector<double> residuals;
  double fiber_exponent = 0.0;  // lyapunov_vs_measure of the average
  std::optional<ConeSearch> cone;
};

StationaryResult stationary_experiment(const MapFamily& family, std::size_t bins, std::size_t iterations,
                                       Metric metric = Metric::total_variation);

}  // namespace skewprod
