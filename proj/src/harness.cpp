#include "vanetcap/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "vanetcap/scheduler.hpp"

namespace vanetcap::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Field = double NetworkParams::*;

const std::vector<std::pair<std::string, Field>>& fields() {
    static const std::vector<std::pair<std::string, Field>> table = {
        {"road_length_m", &NetworkParams::road_length_m},
        {"infra_spacing_m", &NetworkParams::infra_spacing_m},
        {"infra_radio_m", &NetworkParams::infra_radio_m},
        {"vehicle_radio_m", &NetworkParams::vehicle_radio_m},
        {"sensing_range_m", &NetworkParams::sensing_range_m},
        {"density_east_per_m", &NetworkParams::density_east_per_m},
        {"density_west_per_m", &NetworkParams::density_west_per_m},
        {"voi_fraction", &NetworkParams::voi_fraction},
        {"speed_east_mps", &NetworkParams::speed_east_mps},
        {"speed_west_mps", &NetworkParams::speed_west_mps},
        {"v2i_rate_bps", &NetworkParams::v2i_rate_bps},
        {"v2v_rate_bps", &NetworkParams::v2v_rate_bps},
    };
    return table;
}

Field field_of(const std::string& key) {
    for (const auto& [name, f] : fields())
        if (name == key) return f;
    throw ParamError("unknown parameter: " + key);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string format_double(double x) {
    if (std::isnan(x)) return {};
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    if (s.empty()) return kNaN;
    double x = 0.0;
    const char* end = s.data() + s.size();
    auto res = std::from_chars(s.data(), end, x);
    if (res.ec != std::errc{} || res.ptr != end) throw std::runtime_error("bad number: " + s);
    return x;
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool same_double(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace

const std::vector<std::string>& param_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& f : fields()) k.push_back(f.first);
        return k;
    }();
    return keys;
}

void set_param(NetworkParams& params, const std::string& key, double value) { params.*field_of(key) = value; }

double get_param(const NetworkParams& params, const std::string& key) { return params.*field_of(key); }

void apply_config(NetworkParams& params, std::istream& in) {
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const auto where = "config line " + std::to_string(number) + ": ";
        if (eq == std::string::npos) throw ParamError(where + "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string text = trim(line.substr(eq + 1));
        if (text.empty()) throw ParamError(where + "missing value for " + key);
        double value = 0.0;
        try {
            value = parse_double(text);
        } catch (const std::runtime_error&) {
            throw ParamError(where + "not a number: " + text);
        }
        try {
            set_param(params, key, value);
        } catch (const ParamError& e) {
            throw ParamError(where + e.what());
        }
    }
}

NetworkParams load_config(const std::string& path, NetworkParams base) {
    std::ifstream in(path);
    if (!in) throw ParamError("cannot open config file: " + path);
    apply_config(base, in);
    return base;
}

std::string flag_name(const std::string& key) {
    std::string s = key;
    std::replace(s.begin(), s.end(), '_', '-');
    return s;
}

const char* to_string(Variable v) {
    switch (v) {
        case Variable::p: return "p";
        case Variable::rho: return "rho";
        case Variable::d: return "d";
        case Variable::Rc: return "Rc";
        case Variable::wV: return "wV";
        case Variable::wI: return "wI";
    }
    return "?";
}

Variable variable_from_string(const std::string& s) {
    for (Variable v : {Variable::p, Variable::rho, Variable::d, Variable::Rc, Variable::wV, Variable::wI})
        if (s == to_string(v)) return v;
    throw ParamError("unknown sweep variable: " + s);
}

NetworkParams with_value(const NetworkParams& base, Variable v, double value) {
    NetworkParams p = base;
    switch (v) {
        case Variable::p: p.voi_fraction = value; break;
        case Variable::rho: {
            const double total = base.total_density();
            const double east = total > 0.0 ? base.density_east_per_m / total : 0.5;
            p.density_east_per_m = value * east;
            p.density_west_per_m = value - p.density_east_per_m;
            break;
        }
        case Variable::d: p.infra_spacing_m = value; break;
        case Variable::Rc: p.sensing_range_m = value; break;
        case Variable::wV: p.v2v_rate_bps = value; break;
        case Variable::wI: p.v2i_rate_bps = value; break;
    }
    return p;
}

const char* to_string(Mode m) {
    switch (m) {
        case Mode::analytic: return "analytic";
        case Mode::simulate: return "simulate";
        case Mode::both: return "both";
    }
    return "?";
}

Mode mode_from_string(const std::string& s) {
    for (Mode m : {Mode::analytic, Mode::simulate, Mode::both})
        if (s == to_string(m)) return m;
    throw ParamError("unknown mode: " + s);
}

const char* to_string(Metric m) { return m == Metric::capacity ? "capacity" : "pair_count"; }

Metric metric_from_string(const std::string& s) {
    if (s == "capacity") return Metric::capacity;
    if (s == "pair_count") return Metric::pair_count;
    throw ParamError("unknown metric: " + s);
}

std::vector<double> linear_grid(double start, double stop, int count) {
    if (count < 1) throw ParamError("grid count must be >= 1");
    if (count == 1) return {start};
    std::vector<double> v;
    for (int i = 0; i < count; ++i) v.push_back(start + (stop - start) * i / (count - 1));
    v.back() = stop;
    return v;
}

std::vector<double> log_grid(double start, double stop, int count) {
    if (!(start > 0.0 && stop > 0.0)) throw ParamError("log grid needs positive bounds");
    auto v = linear_grid(std::log(start), std::log(stop), count);
    for (double& x : v) x = std::exp(x);
    v.front() = start;
    v.back() = stop;
    return v;
}

void SweepSpec::validate() const {
    if (values.empty()) throw ParamError("sweep values must be non-empty");
    for (std::size_t i = 1; i < values.size(); ++i)
        if (!(values[i] > values[i - 1])) throw ParamError("sweep values must be strictly increasing");
    if (trials < 1) throw ParamError("trials must be >= 1");
    for (double v : values) {
        if (mode == Mode::analytic) with_value(base, variable, v).validate();
        else sim_config(v).validate();
    }
}

sim::SimConfig SweepSpec::sim_config(double value) const {
    sim::SimConfig c;
    c.params = with_value(base, variable, value);
    c.slot_s = slot_s;
    c.duration_s = duration_s;
    c.trials = trials;
    c.seed = seed;
    c.cooperative = cooperative;
    c.buffer_scope = buffer_scope;
    c.threads = threads;
    return c;
}

double relative_deviation(double sim, double analytic) {
    return std::abs(sim - analytic) / std::max(analytic, 1.0);
}

double analytic_reference(const SweepSpec& spec, const NetworkParams& params) {
    if (spec.metric == Metric::pair_count) return analytic::expected_pair_count(params);
    if (!spec.cooperative) return params.cycle_count() * analytic::v2i_voi_rate(params);
    return analytic::total_capacity(params);
}

ComparisonRow evaluate_point(const SweepSpec& spec, double value) {
    ComparisonRow row;
    row.series = spec.series;
    row.variable = spec.variable;
    row.value = value;
    row.metric = spec.metric;
    try {
        const NetworkParams params = with_value(spec.base, spec.variable, value);
        params.validate();
        if (spec.mode != Mode::simulate) {
            row.breakdown = analytic::cycle_capacity(params);
            row.analytic_value = analytic_reference(spec, params);
        }
        if (spec.mode != Mode::analytic) {
            if (spec.metric == Metric::pair_count) {
                const auto stats = scheduler::empirical_pair_stats(params, spec.trials, spec.seed);
                row.sim_mean = stats.mean_pairs;
                row.sim_se = stats.mean_pairs_se;
            } else {
                const auto result = sim::run_experiment(spec.sim_config(value));
                row.sim_mean = result.capacity_bps.mean;
                row.sim_se = result.capacity_bps.standard_error;
                row.sim_east = result.east_bps.mean;
                row.sim_west = result.west_bps.mean;
            }
        }
        if (spec.mode == Mode::both) row.rel_dev = relative_deviation(row.sim_mean, row.analytic_value);
    } catch (const std::exception& e) {
        ComparisonRow failed;
        failed.series = row.series;
        failed.variable = row.variable;
        failed.value = row.value;
        failed.metric = row.metric;
        failed.status = "error: " + sanitize(e.what());
        return failed;
    }
    return row;
}

const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols = {
        "series",        "swept_var",        "value",
        "metric",        "v2i_voi_rate",     "helper_fetch_rate",
        "v2v_unconstrained_rate", "v2v_effective_rate", "cycle_capacity",
        "total_capacity", "east_share",      "west_share",
        "bottleneck",    "analytic_value",   "sim_mean",
        "sim_se",        "sim_east",         "sim_west",
        "rel_dev",       "status"};
    return cols;
}

void write_csv_header(std::ostream& out) {
    out << "# " << kCsvSchema << " (vanetcap " << VANETCAP_VERSION << ")\n";
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
}

void write_csv_row(std::ostream& out, const ComparisonRow& row) {
    std::vector<std::string> f;
    f.push_back(sanitize(row.series));
    f.push_back(to_string(row.variable));
    f.push_back(format_double(row.value));
    f.push_back(to_string(row.metric));
    if (row.breakdown) {
        const auto& b = *row.breakdown;
        for (double x : {b.v2i_voi_rate, b.helper_fetch_rate, b.v2v_unconstrained_rate, b.v2v_effective_rate,
                         b.cycle_capacity, b.total_capacity, b.east_share, b.west_share})
            f.push_back(format_double(x));
        f.push_back(analytic::to_string(b.bottleneck));
    } else {
        f.insert(f.end(), 9, std::string());
    }
    for (double x : {row.analytic_value, row.sim_mean, row.sim_se, row.sim_east, row.sim_west, row.rel_dev})
        f.push_back(format_double(x));
    f.push_back(sanitize(row.status));
    for (std::size_t i = 0; i < f.size(); ++i) out << (i ? "," : "") << f[i];
    out << '\n';
}

std::vector<ComparisonRow> read_csv(std::istream& in) {
    std::vector<ComparisonRow> rows;
    std::string line;
    bool have_schema = false;
    bool have_columns = false;
    const auto& cols = csv_columns();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.find(kCsvSchema) != std::string::npos) have_schema = true;
            continue;
        }
        auto f = split_csv(line);
        if (!have_columns) {
            if (!have_schema) throw std::runtime_error("missing schema line");
            if (f != cols) throw std::runtime_error("unexpected CSV columns");
            have_columns = true;
            continue;
        }
        if (f.size() != cols.size()) throw std::runtime_error("row has wrong field count: " + line);
        ComparisonRow r;
        r.series = f[0];
        r.variable = variable_from_string(f[1]);
        r.value = parse_double(f[2]);
        r.metric = metric_from_string(f[3]);
        if (!f[12].empty()) {
            analytic::CapacityBreakdown b;
            double* slots[] = {&b.v2i_voi_rate, &b.helper_fetch_rate, &b.v2v_unconstrained_rate,
                               &b.v2v_effective_rate, &b.cycle_capacity, &b.total_capacity,
                               &b.east_share, &b.west_share};
            for (std::size_t i = 0; i < 8; ++i) *slots[i] = parse_double(f[4 + i]);
            b.bottleneck = analytic::bottleneck_from_string(f[12]);
            r.breakdown = b;
        }
        r.analytic_value = parse_double(f[13]);
        r.sim_mean = parse_double(f[14]);
        r.sim_se = parse_double(f[15]);
        r.sim_east = parse_double(f[16]);
        r.sim_west = parse_double(f[17]);
        r.rel_dev = parse_double(f[18]);
        r.status = f[19];
        rows.push_back(std::move(r));
    }
    if (!have_columns) throw std::runtime_error("missing CSV header");
    return rows;
}

bool same_row(const ComparisonRow& a, const ComparisonRow& b) {
    if (a.series != b.series || a.variable != b.variable || a.metric != b.metric || a.status != b.status)
        return false;
    if (a.breakdown.has_value() != b.breakdown.has_value()) return false;
    if (a.breakdown && !(*a.breakdown == *b.breakdown)) return false;
    return same_double(a.value, b.value) && same_double(a.analytic_value, b.analytic_value) &&
           same_double(a.sim_mean, b.sim_mean) && same_double(a.sim_se, b.sim_se) &&
           same_double(a.sim_east, b.sim_east) && same_double(a.sim_west, b.sim_west) &&
           same_double(a.rel_dev, b.rel_dev);
}

void write_metadata(std::ostream& out, const std::string& name, const std::vector<SweepSpec>& series) {
    out << "artifact = vanetcap " << VANETCAP_VERSION << '\n';
    out << "csv_schema = " << kCsvSchema << '\n';
    out << "name = " << name << '\n';
    out << "seed_rule = trial i of every point uses derive_seed(seed, i)\n";
    out << "preset_densities_note = densities are chosen grids; the source figures do not state them\n";
    for (const auto& s : series) {
        out << "\n[series " << s.series << "]\n";
        out << "variable = " << to_string(s.variable) << '\n';
        out << "values =";
        for (double v : s.values) out << ' ' << format_double(v);
        out << '\n';
        out << "mode = " << to_string(s.mode) << '\n';
        out << "metric = " << to_string(s.metric) << '\n';
        out << "trials = " << s.trials << '\n';
        out << "duration_s = " << format_double(s.duration_s) << '\n';
        out << "slot_s = " << format_double(s.slot_s) << '\n';
        out << "seed = " << s.seed << '\n';
        out << "cooperative = " << (s.cooperative ? "true" : "false") << '\n';
        out << "buffer_scope = " << sim::to_string(s.buffer_scope) << '\n';
        out << "scale_road_vs_100km = " << format_double(s.base.road_length_m / 100000.0) << '\n';
        out << "scale_trials_vs_2000 = " << format_double(static_cast<double>(s.trials) / 2000.0) << '\n';
        for (const auto& key : param_keys()) out << key << " = " << format_double(get_param(s.base, key)) << '\n';
    }
}

std::vector<ComparisonRow> run_sweep(const std::vector<SweepSpec>& series, std::ostream& csv,
                                     const volatile std::sig_atomic_t* stop) {
    for (const auto& s : series) s.validate();
    std::vector<ComparisonRow> rows;
    write_csv_header(csv);
    csv.flush();
    for (const auto& s : series) {
        for (double v : s.values) {
            if (stop && *stop) return rows;
            rows.push_back(evaluate_point(s, v));
            write_csv_row(csv, rows.back());
            csv.flush();
        }
    }
    return rows;
}

namespace {

/// log-spaced low end plus a linear top end, as used by the p-sweep figures
std::vector<double> p_grid() {
    auto v = log_grid(0.01, 0.3, 5);
    for (double x : {0.5, 0.75, 1.0}) v.push_back(x);
    return v;
}

NetworkParams desk(double rho = 0.01) {
    NetworkParams p;
    p.density_east_per_m = rho / 2.0;
    p.density_west_per_m = rho / 2.0;
    return p;
}

SweepSpec spec(std::string series, Variable var, std::vector<double> values, NetworkParams base, Mode mode) {
    SweepSpec s;
    s.series = std::move(series);
    s.variable = var;
    s.values = std::move(values);
    s.base = base;
    s.mode = mode;
    return s;
}

std::vector<Preset> build_presets() {
    std::vector<Preset> out;

    Preset fig3{"fig3", "E[N_p] vs p, sensing range below, at and above 2 r0 (pair_count, 1e4 snapshots, d = 100 km)", {}};
    for (double rc : {300.0, 400.0, 600.0}) {
        NetworkParams b = desk();
        b.road_length_m = 100000.0;
        b.infra_spacing_m = 100000.0;
        b.sensing_range_m = rc;
        auto s = spec("Rc=" + format_double(rc), Variable::p, log_grid(0.01, 0.5, 8), b, Mode::both);
        s.metric = Metric::pair_count;
        s.trials = 10000;
        fig3.series.push_back(s);
    }
    out.push_back(fig3);

    out.push_back({"fig4a", "total capacity vs p, R_c = 2 r0", {spec("capacity", Variable::p, p_grid(), desk(), Mode::both)}});

    NetworkParams skew = desk();
    skew.density_east_per_m = 0.004;
    skew.density_west_per_m = 0.006;
    out.push_back({"fig4b", "capacity and east/west split vs p, rho1:rho2 = 2:3",
                   {spec("capacity", Variable::p, p_grid(), skew, Mode::both)}});

    NetworkParams wide = desk();
    wide.road_length_m = 40000.0;
    wide.infra_spacing_m = 20000.0;
    const std::vector<double> fig5_p = {0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0};
    Preset fig5{"fig5", "cooperative vs V2I-only capacity vs p (L = 40 km, d = 20 km)", {}};
    fig5.series.push_back(spec("cooperative", Variable::p, fig5_p, wide, Mode::both));
    auto solo = spec("v2i-only", Variable::p, fig5_p, wide, Mode::both);
    solo.cooperative = false;
    fig5.series.push_back(solo);
    out.push_back(fig5);

    Preset fig7a{"fig7a", "total capacity vs rho at several p", {}};
    for (double p : {0.02, 0.05, 0.1}) {
        NetworkParams b = desk();
        b.voi_fraction = p;
        fig7a.series.push_back(spec("p=" + format_double(p), Variable::rho, log_grid(0.001, 0.05, 12), b, Mode::analytic));
    }
    out.push_back(fig7a);

    Preset fig7b{"fig7b", "total capacity vs d at several rho (p = 0.05)", {}};
    for (double rho : kPresetDensities) {
        NetworkParams b = desk(rho);
        b.voi_fraction = 0.05;
        fig7b.series.push_back(spec("rho=" + format_double(rho), Variable::d,
                                    {1000, 1250, 2000, 2500, 4000, 5000, 10000, 20000}, b, Mode::analytic));
    }
    out.push_back(fig7b);
    return out;
}

}  // namespace

const std::vector<Preset>& presets() {
    static const std::vector<Preset> all = build_presets();
    return all;
}

const Preset& find_preset(const std::string& name) {
    for (const auto& p : presets())
        if (p.name == name) return p;
    throw ParamError("unknown preset: " + name);
}

}  // namespace vanetcap::harness
