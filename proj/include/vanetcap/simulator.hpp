#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "vanetcap/highway.hpp"

namespace vanetcap::sim {

/// Where helper-fetched data waits before V2V delivery.
enum class BufferScope { cycle_local, global };

const char* to_string(BufferScope s);
BufferScope buffer_scope_from_string(const std::string& s);

struct SimConfig {
    NetworkParams params;
    double slot_s = 0.1;
    /// Measured simulated time per trial, after warm-up.
    double duration_s = 600.0;
    long trials = 200;
    std::uint64_t seed = 1;
    /// false = V2I-only baseline: VoIs receive only from infrastructure.
    bool cooperative = true;
    BufferScope buffer_scope = BufferScope::cycle_local;
    /// Unset: max(d / v1, d / v2), long enough for the buffers to settle.
    std::optional<double> warmup_s;
    /// Worker threads for run_experiment; 0 = hardware concurrency.
    unsigned threads = 0;

    /// Throws ParamError (includes the quasi-static slot bound
    /// max(v1, v2) * slot <= r0 / 10).
    void validate() const;
    double effective_warmup_s() const;
};

inline constexpr std::size_t kEast = 0;
inline constexpr std::size_t kWest = 1;

struct TrialStats {
    /// Per cycle, per direction (kEast / kWest), measured window only.
    std::vector<std::array<double, 2>> v2i_bits;
    std::vector<std::array<double, 2>> v2v_bits;

    double total_delivered_bits = 0.0;
    std::array<double, 2> direction_bits{};  // V2I + V2V per direction
    double v2i_total_bits = 0.0;
    double v2v_total_bits = 0.0;
    double measured_s = 0.0;
    double empirical_capacity_bps = 0.0;

    /// Mean simultaneously active pairs per cycle per slot.
    double empirical_pair_mean = 0.0;
    /// Cycle-slots with a VoI in coverage (q1) and with only helpers (q2).
    long q1_slots = 0;
    long q2_slots = 0;
    long cycle_slots = 0;

    /// Whole-trial audit including warm-up: V2V delivery never exceeds what
    /// helpers fetched.
    double audit_fetched_bits = 0.0;
    double audit_v2v_bits = 0.0;

    bool operator==(const TrialStats&) const = default;
};

/// Runs one trial: sample traffic from (seed, trial_index), then per slot and
/// per cycle serve a covered VoI (leftmost) or else fill the cycle buffer from
/// a covered helper; if cooperative, drain the buffer through the greedy pair
/// schedule at w_V per pair; finally advance all vehicles by one slot.
/// `debug_log`, when set, receives one JSON record per slot.
TrialStats run_trial(const SimConfig& config, long trial_index, std::ostream* debug_log = nullptr);

struct MeanSe {
    double mean = 0.0;
    double standard_error = 0.0;
};

struct ExperimentResult {
    long trials = 0;
    MeanSe capacity_bps;
    MeanSe east_bps;
    MeanSe west_bps;
    MeanSe v2i_bps;
    MeanSe v2v_bps;
    MeanSe pair_mean;
    MeanSe q1_fraction;
    MeanSe q2_fraction;
    /// Pooled east share of all delivered bits.
    double east_fraction = 0.0;
    std::vector<TrialStats> per_trial;
};

MeanSe mean_and_se(const std::vector<double>& samples);

/// Runs config.trials independent trials (possibly concurrently) and reduces
/// them in trial order, so results do not depend on the thread count.
ExperimentResult run_experiment(const SimConfig& config);

}  // namespace vanetcap::sim
