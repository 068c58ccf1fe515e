#pragma once

#include <csignal>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "vanetcap/analytic.hpp"
#include "vanetcap/highway.hpp"
#include "vanetcap/simulator.hpp"

namespace vanetcap::harness {

inline constexpr const char* kCsvSchema = "vanetcap-sweep-csv v1";

// --- Parameters ---------------------------------------------------------------

/// Field names accepted in config files, in declaration order.
const std::vector<std::string>& param_keys();

/// Sets one NetworkParams field by its name. Throws ParamError on unknown keys.
void set_param(NetworkParams& params, const std::string& key, double value);
double get_param(const NetworkParams& params, const std::string& key);

/// Applies `key = value` lines on top of `params`. Blank lines and text after
/// '#' are ignored. Throws ParamError with the line number on bad input.
void apply_config(NetworkParams& params, std::istream& in);
NetworkParams load_config(const std::string& path, NetworkParams base = {});

/// "voi_fraction" -> "voi-fraction".
std::string flag_name(const std::string& key);

// --- Sweeps -------------------------------------------------------------------

enum class Variable { p, rho, d, Rc, wV, wI };
const char* to_string(Variable v);
Variable variable_from_string(const std::string& s);

/// Returns a copy of `base` with the swept variable set. rho keeps the
/// east:west ratio of `base` (an even split when base has no traffic).
/// d keeps the road length, so the value must divide it.
NetworkParams with_value(const NetworkParams& base, Variable v, double value);

enum class Mode { analytic, simulate, both };
const char* to_string(Mode m);
Mode mode_from_string(const std::string& s);

/// capacity: road-wide bits/s. pair_count: simultaneously active pairs per
/// V2V area, simulated from independent single-cycle snapshots.
enum class Metric { capacity, pair_count };
const char* to_string(Metric m);
Metric metric_from_string(const std::string& s);

std::vector<double> linear_grid(double start, double stop, int count);
std::vector<double> log_grid(double start, double stop, int count);

struct SweepSpec {
    std::string series = "main";
    Variable variable = Variable::p;
    std::vector<double> values;
    NetworkParams base;
    Mode mode = Mode::both;
    Metric metric = Metric::capacity;
    /// Trials per point; snapshots per point for Metric::pair_count.
    long trials = 200;
    double duration_s = 600.0;
    double slot_s = 0.1;
    std::uint64_t seed = 1;
    bool cooperative = true;
    sim::BufferScope buffer_scope = sim::BufferScope::cycle_local;
    unsigned threads = 0;

    /// Throws ParamError: empty or non-increasing values, or any point whose
    /// params fail validation.
    void validate() const;
    sim::SimConfig sim_config(double value) const;
};

struct ComparisonRow {
    std::string series;
    Variable variable = Variable::p;
    double value = 0.0;
    Metric metric = Metric::capacity;
    /// Unset, with NaN analytic_value, when the analytic side was not requested.
    std::optional<analytic::CapacityBreakdown> breakdown;
    double analytic_value = std::numeric_limits<double>::quiet_NaN();
    /// NaN when no simulation ran.
    double sim_mean = std::numeric_limits<double>::quiet_NaN();
    double sim_se = std::numeric_limits<double>::quiet_NaN();
    double sim_east = std::numeric_limits<double>::quiet_NaN();
    double sim_west = std::numeric_limits<double>::quiet_NaN();
    double rel_dev = std::numeric_limits<double>::quiet_NaN();
    /// "ok" or "error: ...".
    std::string status = "ok";

    bool ok() const { return status == "ok"; }
};

/// |sim - analytic| / max(analytic, 1).
double relative_deviation(double sim, double analytic);

/// The analytic value a point is compared against: total_capacity (or the
/// V2I-only share for non-cooperative runs) or expected_pair_count.
double analytic_reference(const SweepSpec& spec, const NetworkParams& params);

/// Evaluates one point. Errors are caught and reported in row.status.
ComparisonRow evaluate_point(const SweepSpec& spec, double value);

// --- CSV ----------------------------------------------------------------------

const std::vector<std::string>& csv_columns();

void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const ComparisonRow& row);
/// Parses a file produced by the writer. Throws std::runtime_error on schema
/// mismatch or malformed rows.
std::vector<ComparisonRow> read_csv(std::istream& in);

/// Field-wise equality treating NaN == NaN.
bool same_row(const ComparisonRow& a, const ComparisonRow& b);

/// Writes the `.meta` sidecar text for a set of series.
void write_metadata(std::ostream& out, const std::string& name, const std::vector<SweepSpec>& series);

/// Runs every series in order, writing and flushing each row as soon as it is
/// ready. `stop`, when set, is polled between points. Returns all rows.
std::vector<ComparisonRow> run_sweep(const std::vector<SweepSpec>& series, std::ostream& csv,
                                     const volatile std::sig_atomic_t* stop = nullptr);

// --- Presets ------------------------------------------------------------------

struct Preset {
    std::string name;
    std::string description;
    std::vector<SweepSpec> series;
};

const std::vector<Preset>& presets();
/// Throws ParamError for unknown names.
const Preset& find_preset(const std::string& name);

/// Densities used across presets (vehicles/m, total of both directions).
/// The figures do not state theirs; these are chosen grids.
inline constexpr double kPresetDensities[] = {0.005, 0.01, 0.02};

}  // namespace vanetcap::harness
