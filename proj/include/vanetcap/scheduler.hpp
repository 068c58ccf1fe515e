#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "vanetcap/highway.hpp"

namespace vanetcap::scheduler {

/// Raised by the exhaustive oracle when an instance exceeds its size bound.
class SizeError : public std::length_error {
public:
    using std::length_error::length_error;
};

struct HelperVoiPair {
    Vehicle transmitter;
    Vehicle receiver;
    double tx_position_m = 0.0;
    double rx_position_m = 0.0;
};

struct PairSchedule {
    std::vector<HelperVoiPair> pairs;  // ascending tx position
    CycleGeometry cycle;

    std::size_t size() const { return pairs.size(); }
};

/// Greedy left-to-right selection on the cycle's V2V area. Each step takes
/// the nearest helper at least R_c beyond the previous transmitter that can
/// reach an unused VoI inside the area, and pairs it with the leftmost such
/// VoI. Receivers of earlier pairs are never reused.
PairSchedule select_pairs_opt(const Snapshot& snapshot, const CycleGeometry& cycle);

/// Same selection over an already-extracted, position-sorted run of vehicles
/// (every vehicle in `area` is eligible).
std::vector<HelperVoiPair> select_pairs_in(std::span<const Vehicle> area, double radio_m,
                                           double sensing_m);

/// Throws std::logic_error if the schedule breaks spacing, reachability,
/// role, distinct-receiver or containment rules.
void check_schedule(const PairSchedule& schedule, const NetworkParams& params);

inline constexpr std::size_t kOracleHelperLimit = 25;

/// Exact maximum number of simultaneously schedulable pairs, by depth-first
/// search over sensing-feasible helper subsets with a bipartite matching per
/// subset. Throws SizeError above kOracleHelperLimit helpers in the area.
int max_pairs_oracle(const Snapshot& snapshot, const CycleGeometry& cycle);

struct PairStats {
    long snapshots = 0;
    double mean_pairs = 0.0;
    double mean_pairs_se = 0.0;
    /// Mean spacing between consecutive transmitters (completed renewals).
    double mean_gap_m = 0.0;
    long gap_samples = 0;
    /// Mean origin-to-first-transmitter distance, over snapshots with a pair.
    double first_gap_m = 0.0;
    long first_gap_samples = 0;
    /// m -> count: index of the next transmitter among helpers in
    /// [S_k + R_c, S_{k+1}].
    std::map<long, long> m_histogram;
    /// m -> count: index of the first transmitter among helpers in (0, S_1].
    std::map<long, long> m0_histogram;
};

/// Monte-Carlo statistics of the greedy schedule over `slots` independent
/// single-cycle snapshots (road length set to d). Renewals starting less than
/// `censor_guard_m` before the area's right border are left out of the gap
/// and m statistics so the border does not truncate them.
PairStats empirical_pair_stats(const NetworkParams& params, long slots, std::uint64_t seed,
                               double censor_guard_m = 0.0);

}  // namespace vanetcap::scheduler
