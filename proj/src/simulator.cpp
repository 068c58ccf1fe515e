#include "vanetcap/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "vanetcap/scheduler.hpp"

namespace vanetcap::sim {

namespace {

std::size_t direction_index(Direction d) { return d == Direction::east ? kEast : kWest; }

long slot_count(double seconds, double slot_s) {
    return static_cast<long>(std::llround(seconds / slot_s));
}

}  // namespace

const char* to_string(BufferScope s) {
    return s == BufferScope::cycle_local ? "cycle-local" : "global";
}

BufferScope buffer_scope_from_string(const std::string& s) {
    if (s == "cycle-local") return BufferScope::cycle_local;
    if (s == "global") return BufferScope::global;
    throw ParamError("unknown buffer scope: " + s);
}

void SimConfig::validate() const {
    params.validate();
    if (!(slot_s > 0.0) || !std::isfinite(slot_s)) throw ParamError("slot_s must be > 0");
    const double vmax = std::max(params.speed_east_mps, params.speed_west_mps);
    if (vmax * slot_s > params.vehicle_radio_m / 10.0 * (1.0 + 1e-12)) {
        throw ParamError("slot_s too long: max(v1, v2) * slot_s must be <= vehicle_radio_m / 10");
    }
    if (!(duration_s > 0.0) || !std::isfinite(duration_s)) throw ParamError("duration_s must be > 0");
    if (slot_count(duration_s, slot_s) < 1) throw ParamError("duration_s shorter than one slot");
    if (trials < 1) throw ParamError("trials must be >= 1");
    if (warmup_s && (!(*warmup_s >= 0.0) || !std::isfinite(*warmup_s)))
        throw ParamError("warmup_s must be >= 0");
}

double SimConfig::effective_warmup_s() const {
    if (warmup_s) return *warmup_s;
    return std::max(params.infra_spacing_m / params.speed_east_mps,
                    params.infra_spacing_m / params.speed_west_mps);
}

TrialStats run_trial(const SimConfig& config, long trial_index, std::ostream* debug_log) {
    config.validate();
    const NetworkParams& p = config.params;
    const int cycles = p.cycle_count();
    const double dt = config.slot_s;
    const double v2i_slot_bits = p.v2i_rate_bps * dt;
    const double v2v_slot_bits = p.v2v_rate_bps * dt;
    const long warmup_slots = slot_count(config.effective_warmup_s(), dt);
    const long measured_slots = slot_count(config.duration_s, dt);

    std::vector<CycleGeometry> geometry;
    for (int k = 0; k < cycles; ++k) geometry.push_back(cycle_geometry(p, k));

    TrialStats stats;
    stats.v2i_bits.assign(static_cast<std::size_t>(cycles), {0.0, 0.0});
    stats.v2v_bits.assign(static_cast<std::size_t>(cycles), {0.0, 0.0});
    std::vector<double> buffer(config.buffer_scope == BufferScope::global ? 1 : cycles, 0.0);
    double pair_total = 0.0;

    Snapshot snap = sample_snapshot(p, derive_seed(config.seed, static_cast<std::uint64_t>(trial_index)));
    for (long slot = 0; slot < warmup_slots + measured_slots; ++slot) {
        const bool measured = slot >= warmup_slots;
        long slot_q1 = 0;
        long slot_q2 = 0;
        long slot_pairs = 0;
        double slot_v2i = 0.0;
        double slot_v2v = 0.0;
        for (int k = 0; k < cycles; ++k) {
            const auto& g = geometry[static_cast<std::size_t>(k)];
            double& buf = buffer[config.buffer_scope == BufferScope::global ? 0 : static_cast<std::size_t>(k)];

            const auto covered = snap.slice(g.v2i.begin_m, g.v2i.end_m);
            const auto voi = std::find_if(covered.begin(), covered.end(),
                                          [](const Vehicle& v) { return v.role == Role::voi; });
            if (voi != covered.end()) {
                ++slot_q1;
                if (measured) stats.v2i_bits[static_cast<std::size_t>(k)][direction_index(voi->direction)] += v2i_slot_bits;
                slot_v2i += v2i_slot_bits;
            } else if (!covered.empty()) {
                ++slot_q2;
                buf += v2i_slot_bits;
                stats.audit_fetched_bits += v2i_slot_bits;
            }

            if (config.cooperative) {
                const auto pairs = scheduler::select_pairs_in(snap.slice(g.v2v.begin_m, g.v2v.end_m),
                                                              p.vehicle_radio_m, p.sensing_range_m);
                slot_pairs += static_cast<long>(pairs.size());
                for (const auto& pr : pairs) {
                    const double amount = std::min(v2v_slot_bits, buf);
                    if (amount <= 0.0) break;
                    buf -= amount;
                    stats.audit_v2v_bits += amount;
                    slot_v2v += amount;
                    if (measured)
                        stats.v2v_bits[static_cast<std::size_t>(k)][direction_index(pr.receiver.direction)] += amount;
                }
            }
        }
        if (measured) {
            stats.q1_slots += slot_q1;
            stats.q2_slots += slot_q2;
            stats.cycle_slots += cycles;
            pair_total += static_cast<double>(slot_pairs);
        }
        if (debug_log) {
            double buffered = 0.0;
            for (double b : buffer) buffered += b;
            nlohmann::json rec = {{"trial", trial_index}, {"slot", slot},
                                  {"time_s", snap.time_s()}, {"measured", measured},
                                  {"q1", slot_q1}, {"q2", slot_q2},
                                  {"pairs", slot_pairs}, {"v2i_bits", slot_v2i},
                                  {"v2v_bits", slot_v2v}, {"buffer_bits", buffered}};
            *debug_log << rec.dump() << '\n';
        }
        snap = advance(snap, dt);
    }

    for (int k = 0; k < cycles; ++k) {
        for (std::size_t d : {kEast, kWest}) {
            const double v2i = stats.v2i_bits[static_cast<std::size_t>(k)][d];
            const double v2v = stats.v2v_bits[static_cast<std::size_t>(k)][d];
            stats.v2i_total_bits += v2i;
            stats.v2v_total_bits += v2v;
            stats.direction_bits[d] += v2i + v2v;
        }
    }
    stats.total_delivered_bits = stats.v2i_total_bits + stats.v2v_total_bits;
    stats.measured_s = static_cast<double>(measured_slots) * dt;
    stats.empirical_capacity_bps = stats.total_delivered_bits / stats.measured_s;
    stats.empirical_pair_mean = pair_total / static_cast<double>(measured_slots * cycles);
    return stats;
}

MeanSe mean_and_se(const std::vector<double>& samples) {
    MeanSe r;
    if (samples.empty()) return r;
    double sum = 0.0;
    for (double x : samples) sum += x;
    const double n = static_cast<double>(samples.size());
    r.mean = sum / n;
    if (samples.size() > 1) {
        double ss = 0.0;
        for (double x : samples) ss += (x - r.mean) * (x - r.mean);
        r.standard_error = std::sqrt(ss / (n - 1.0) / n);
    }
    return r;
}

ExperimentResult run_experiment(const SimConfig& config) {
    config.validate();
    const long n = config.trials;
    std::vector<TrialStats> results(static_cast<std::size_t>(n));

    unsigned workers = config.threads != 0 ? config.threads : std::thread::hardware_concurrency();
    workers = std::clamp<unsigned>(workers, 1U, static_cast<unsigned>(n));
    std::atomic<long> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto work = [&] {
        for (long i = next++; i < n; i = next++) {
            try {
                results[static_cast<std::size_t>(i)] = run_trial(config, i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    ExperimentResult out;
    out.trials = n;
    std::vector<double> cap, east, west, v2i, v2v, pairs, q1, q2;
    double east_bits = 0.0;
    double all_bits = 0.0;
    for (const auto& t : results) {
        cap.push_back(t.empirical_capacity_bps);
        east.push_back(t.direction_bits[kEast] / t.measured_s);
        west.push_back(t.direction_bits[kWest] / t.measured_s);
        v2i.push_back(t.v2i_total_bits / t.measured_s);
        v2v.push_back(t.v2v_total_bits / t.measured_s);
        pairs.push_back(t.empirical_pair_mean);
        q1.push_back(static_cast<double>(t.q1_slots) / static_cast<double>(t.cycle_slots));
        q2.push_back(static_cast<double>(t.q2_slots) / static_cast<double>(t.cycle_slots));
        east_bits += t.direction_bits[kEast];
        all_bits += t.total_delivered_bits;
    }
    out.capacity_bps = mean_and_se(cap);
    out.east_bps = mean_and_se(east);
    out.west_bps = mean_and_se(west);
    out.v2i_bps = mean_and_se(v2i);
    out.v2v_bps = mean_and_se(v2v);
    out.pair_mean = mean_and_se(pairs);
    out.q1_fraction = mean_and_se(q1);
    out.q2_fraction = mean_and_se(q2);
    out.east_fraction = all_bits > 0.0 ? east_bits / all_bits : 0.0;
    out.per_trial = std::move(results);
    return out;
}

}  // namespace vanetcap::sim
