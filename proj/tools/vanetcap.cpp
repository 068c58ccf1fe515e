// vanetcap: closed-form capacity, sweeps and presets from the command line.
#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "vanetcap/analytic.hpp"
#include "vanetcap/harness.hpp"
#include "vanetcap/simulator.hpp"

using namespace vanetcap;

namespace {

volatile std::sig_atomic_t g_stop = 0;

void on_interrupt(int) { g_stop = 1; }

struct ParamFlags {
    std::string config;
    std::map<std::string, std::optional<double>> values;

    void attach(CLI::App* app) {
        app->add_option("--config", config, "key = value parameter file")->check(CLI::ExistingFile);
        for (const auto& key : harness::param_keys())
            app->add_option("--" + harness::flag_name(key), values[key], key);
    }

    NetworkParams resolve(NetworkParams base = {}) const {
        if (!config.empty()) base = harness::load_config(config, base);
        for (const auto& [key, v] : values)
            if (v) harness::set_param(base, key, *v);
        return base;
    }
};

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

int cmd_analytic(const ParamFlags& flags, const std::string& output) {
    const NetworkParams p = flags.resolve();
    p.validate();
    harness::SweepSpec spec;
    spec.series = "analytic";
    spec.base = p;
    spec.mode = harness::Mode::analytic;
    spec.values = {p.voi_fraction};
    const auto row = harness::evaluate_point(spec, p.voi_fraction);
    if (!row.ok()) throw std::runtime_error(row.status);
    const auto& b = *row.breakdown;
    std::cout << std::setprecision(6) << "v2i_voi_rate            " << b.v2i_voi_rate << " bit/s\n"
              << "helper_fetch_rate       " << b.helper_fetch_rate << " bit/s\n"
              << "v2v_unconstrained_rate  " << b.v2v_unconstrained_rate << " bit/s\n"
              << "v2v_effective_rate      " << b.v2v_effective_rate << " bit/s\n"
              << "cycle_capacity          " << b.cycle_capacity << " bit/s\n"
              << "total_capacity          " << b.total_capacity << " bit/s\n"
              << "east/west share         " << b.east_share << " / " << b.west_share << " bit/s\n"
              << "bottleneck              " << analytic::to_string(b.bottleneck) << '\n';
    auto out = open_output(output);
    harness::write_csv_header(out);
    harness::write_csv_row(out, row);
    return 0;
}

struct SweepFlags {
    std::string preset;
    std::string variable = "p";
    std::vector<double> values;
    std::vector<double> grid;
    bool log = false;
    std::string mode = "both";
    std::string metric = "capacity";
    long trials = 200;
    double duration_s = 600.0;
    double slot_s = 0.1;
    std::uint64_t seed = 1;
    bool v2i_only = false;
    std::string buffer_scope = "cycle-local";
    unsigned threads = 0;
};

int cmd_sweep(const ParamFlags& pflags, const SweepFlags& f, const std::string& output) {
    std::vector<harness::SweepSpec> series;
    std::string name = f.preset;
    if (!f.preset.empty()) {
        series = harness::find_preset(f.preset).series;
        for (auto& s : series) {
            s.base = pflags.resolve(s.base);
            s.seed = f.seed;
            s.threads = f.threads;
        }
    } else {
        name = "custom";
        harness::SweepSpec s;
        s.variable = harness::variable_from_string(f.variable);
        if (!f.values.empty()) s.values = f.values;
        else if (f.grid.size() == 3)
            s.values = f.log ? harness::log_grid(f.grid[0], f.grid[1], static_cast<int>(f.grid[2]))
                             : harness::linear_grid(f.grid[0], f.grid[1], static_cast<int>(f.grid[2]));
        else throw ParamError("sweep needs --preset, --values or --grid start stop count");
        s.base = pflags.resolve();
        s.mode = harness::mode_from_string(f.mode);
        s.metric = harness::metric_from_string(f.metric);
        s.trials = f.trials;
        s.duration_s = f.duration_s;
        s.slot_s = f.slot_s;
        s.seed = f.seed;
        s.cooperative = !f.v2i_only;
        s.buffer_scope = sim::buffer_scope_from_string(f.buffer_scope);
        s.threads = f.threads;
        series.push_back(s);
    }
    for (const auto& s : series) s.validate();

    {
        auto meta = open_output(output + ".meta");
        harness::write_metadata(meta, name, series);
    }
    auto out = open_output(output);
    std::signal(SIGINT, on_interrupt);
    const auto rows = harness::run_sweep(series, out, &g_stop);
    int failed = 0;
    for (const auto& r : rows) {
        std::cout << r.series << ' ' << harness::to_string(r.variable) << '=' << r.value << "  ";
        if (!r.ok()) {
            ++failed;
            std::cout << r.status << '\n';
            continue;
        }
        if (!std::isnan(r.analytic_value)) std::cout << "analytic " << r.analytic_value << "  ";
        if (!std::isnan(r.sim_mean)) std::cout << "sim " << r.sim_mean << " +- " << r.sim_se << "  ";
        if (!std::isnan(r.rel_dev)) std::cout << "dev " << r.rel_dev;
        std::cout << '\n';
    }
    if (g_stop) {
        std::cerr << "interrupted; completed rows kept in " << output << '\n';
        return 2;
    }
    return failed ? 2 : 0;
}

int cmd_presets() {
    for (const auto& p : harness::presets()) {
        std::cout << p.name << ": " << p.description << '\n';
        for (const auto& s : p.series)
            std::cout << "    " << s.series << "  " << harness::to_string(s.variable) << " x" << s.values.size()
                      << "  mode=" << harness::to_string(s.mode) << " metric=" << harness::to_string(s.metric)
                      << " trials=" << s.trials << '\n';
    }
    std::cout << "densities are chosen grids (vehicles/m):";
    for (double r : harness::kPresetDensities) std::cout << ' ' << r;
    std::cout << '\n';
    return 0;
}

int cmd_simulate(const ParamFlags& pflags, const SweepFlags& f, const std::string& debug_log) {
    sim::SimConfig c;
    c.params = pflags.resolve();
    c.trials = f.trials;
    c.duration_s = f.duration_s;
    c.slot_s = f.slot_s;
    c.seed = f.seed;
    c.cooperative = !f.v2i_only;
    c.buffer_scope = sim::buffer_scope_from_string(f.buffer_scope);
    c.threads = f.threads;
    c.validate();
    if (!debug_log.empty()) {
        auto log = open_output(debug_log);
        sim::run_trial(c, 0, &log);
    }
    const auto r = sim::run_experiment(c);
    std::cout << "capacity " << r.capacity_bps.mean << " +- " << r.capacity_bps.standard_error << " bit/s\n"
              << "east " << r.east_bps.mean << "  west " << r.west_bps.mean << '\n'
              << "v2i " << r.v2i_bps.mean << "  v2v " << r.v2v_bps.mean << '\n'
              << "pairs per cycle " << r.pair_mean.mean << '\n'
              << "analytic " << analytic::total_capacity(c.params) << " bit/s\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Capacity of cooperative V2I/V2V data delivery on a highway"};
    app.require_subcommand(1);
    app.set_version_flag("--version", VANETCAP_VERSION);

    ParamFlags analytic_flags, sweep_params, sim_params;
    SweepFlags sweep, simf;
    std::string analytic_out, sweep_out, debug_log;

    auto* a = app.add_subcommand("analytic", "closed-form capacity breakdown for one parameter set");
    analytic_flags.attach(a);
    a->add_option("--output,-o", analytic_out, "CSV output path")->required();

    auto* s = app.add_subcommand("sweep", "sweep one variable (or run a preset) and write CSV");
    sweep_params.attach(s);
    s->add_option("--preset", sweep.preset, "named preset (see `presets`)");
    s->add_option("--variable", sweep.variable, "p, rho, d, Rc, wV or wI");
    s->add_option("--values", sweep.values, "explicit increasing values");
    s->add_option("--grid", sweep.grid, "start stop count")->expected(3);
    s->add_flag("--log", sweep.log, "log-spaced grid");
    s->add_option("--mode", sweep.mode, "analytic, simulate or both");
    s->add_option("--metric", sweep.metric, "capacity or pair_count");
    s->add_option("--trials", sweep.trials);
    s->add_option("--duration-s", sweep.duration_s);
    s->add_option("--slot-s", sweep.slot_s);
    s->add_option("--seed", sweep.seed);
    s->add_flag("--v2i-only", sweep.v2i_only, "disable V2V relaying");
    s->add_option("--buffer-scope", sweep.buffer_scope, "cycle-local or global");
    s->add_option("--threads", sweep.threads);
    s->add_option("--output,-o", sweep_out, "CSV output path; metadata goes to <path>.meta")->required();

    auto* m = app.add_subcommand("simulate", "run one simulated experiment");
    sim_params.attach(m);
    m->add_option("--trials", simf.trials);
    m->add_option("--duration-s", simf.duration_s);
    m->add_option("--slot-s", simf.slot_s);
    m->add_option("--seed", simf.seed);
    m->add_flag("--v2i-only", simf.v2i_only);
    m->add_option("--buffer-scope", simf.buffer_scope);
    m->add_option("--threads", simf.threads);
    m->add_option("--debug-log", debug_log, "JSON lines, one per slot of trial 0");

    auto* p = app.add_subcommand("presets", "list named presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 1;
    }

    try {
        if (a->parsed()) return cmd_analytic(analytic_flags, analytic_out);
        if (s->parsed()) return cmd_sweep(sweep_params, sweep, sweep_out);
        if (m->parsed()) return cmd_simulate(sim_params, simf, debug_log);
        if (p->parsed()) return cmd_presets();
    } catch (const ParamError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
