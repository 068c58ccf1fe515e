#include "vanetcap/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace vanetcap::scheduler {

namespace {

struct Selection {
    HelperVoiPair pair;
    /// Helpers inspected (at or beyond the exclusion point) up to and
    /// including this transmitter.
    long inspected = 0;
};

std::vector<Selection> greedy(std::span<const Vehicle> area, double radio_m, double sensing_m) {
    std::vector<std::size_t> vois;
    for (std::size_t i = 0; i < area.size(); ++i)
        if (area[i].role == Role::voi) vois.push_back(i);
    std::vector<bool> used(vois.size(), false);

    std::vector<Selection> out;
    bool have_tx = false;
    double last_tx = 0.0;
    long inspected = 0;
    for (const Vehicle& h : area) {
        if (h.role != Role::helper) continue;
        if (have_tx && h.position_m - last_tx < sensing_m) continue;
        ++inspected;
        auto it = std::lower_bound(vois.begin(), vois.end(), h.position_m - radio_m,
                                   [&](std::size_t idx, double x) { return area[idx].position_m < x; });
        for (; it != vois.end() && area[*it].position_m <= h.position_m + radio_m; ++it) {
            const auto k = static_cast<std::size_t>(it - vois.begin());
            if (used[k]) continue;
            used[k] = true;
            Selection s;
            s.pair.transmitter = h;
            s.pair.receiver = area[*it];
            s.pair.tx_position_m = h.position_m;
            s.pair.rx_position_m = area[*it].position_m;
            s.inspected = inspected;
            out.push_back(s);
            have_tx = true;
            last_tx = h.position_m;
            inspected = 0;
            break;
        }
    }
    return out;
}

std::span<const Vehicle> v2v_area(const Snapshot& snapshot, const CycleGeometry& cycle) {
    return snapshot.slice(cycle.v2v.begin_m, cycle.v2v.end_m);
}

/// Kuhn augmenting path; match_of_voi[v] = helper slot or -1.
bool augment(int helper, const std::vector<std::vector<int>>& reach, std::vector<int>& match_of_voi,
             std::vector<char>& seen) {
    for (int v : reach[static_cast<std::size_t>(helper)]) {
        if (seen[static_cast<std::size_t>(v)]) continue;
        seen[static_cast<std::size_t>(v)] = 1;
        int& owner = match_of_voi[static_cast<std::size_t>(v)];
        if (owner < 0 || augment(owner, reach, match_of_voi, seen)) {
            owner = helper;
            return true;
        }
    }
    return false;
}

struct OracleSearch {
    std::vector<double> positions;          // useful helpers, ascending
    std::vector<std::vector<int>> reach;    // VoI indices per helper
    std::vector<int> spaced_bound;          // max R_c-spaced helpers in [j, end)
    std::vector<std::size_t> next_allowed;  // first index >= R_c beyond helper j
    std::size_t voi_count = 0;
    int best = 0;

    void run(std::size_t from, int matched, std::vector<int> match_of_voi) {
        best = std::max(best, matched);
        for (std::size_t j = from; j < positions.size(); ++j) {
            if (matched + spaced_bound[j] <= best) return;  // bound[j] is nonincreasing in j
            std::vector<int> trial = match_of_voi;
            std::vector<char> seen(voi_count, 0);
            const bool grew = augment(static_cast<int>(j), reach, trial, seen);
            run(next_allowed[j], matched + (grew ? 1 : 0), std::move(trial));
        }
    }
};

}  // namespace

std::vector<HelperVoiPair> select_pairs_in(std::span<const Vehicle> area, double radio_m,
                                           double sensing_m) {
    std::vector<HelperVoiPair> pairs;
    for (auto& s : greedy(area, radio_m, sensing_m)) pairs.push_back(s.pair);
    return pairs;
}

PairSchedule select_pairs_opt(const Snapshot& snapshot, const CycleGeometry& cycle) {
    const auto& p = snapshot.params();
    PairSchedule schedule;
    schedule.cycle = cycle;
    schedule.pairs = select_pairs_in(v2v_area(snapshot, cycle), p.vehicle_radio_m, p.sensing_range_m);
    return schedule;
}

void check_schedule(const PairSchedule& schedule, const NetworkParams& params) {
    const auto fail = [](const std::string& what) { throw std::logic_error("invalid schedule: " + what); };
    std::vector<std::uint32_t> receivers;
    std::vector<std::uint32_t> transmitters;
    for (std::size_t i = 0; i < schedule.pairs.size(); ++i) {
        const auto& pr = schedule.pairs[i];
        if (pr.transmitter.role != Role::helper) fail("transmitter is not a helper");
        if (pr.receiver.role != Role::voi) fail("receiver is not a VoI");
        if (std::abs(pr.tx_position_m - pr.rx_position_m) > params.vehicle_radio_m)
            fail("receiver beyond radio range");
        if (pr.tx_position_m < schedule.cycle.v2v.begin_m || pr.tx_position_m >= schedule.cycle.v2v.end_m)
            fail("transmitter outside V2V area");
        if (pr.rx_position_m < schedule.cycle.v2v.begin_m || pr.rx_position_m >= schedule.cycle.v2v.end_m)
            fail("receiver outside V2V area");
        if (i > 0 && pr.tx_position_m - schedule.pairs[i - 1].tx_position_m < params.sensing_range_m)
            fail("transmitters closer than sensing range");
        receivers.push_back(pr.receiver.id);
        transmitters.push_back(pr.transmitter.id);
    }
    std::sort(receivers.begin(), receivers.end());
    if (std::adjacent_find(receivers.begin(), receivers.end()) != receivers.end())
        fail("receiver used twice");
    for (auto id : transmitters)
        if (std::binary_search(receivers.begin(), receivers.end(), id))
            fail("vehicle both transmits and receives");
}

int max_pairs_oracle(const Snapshot& snapshot, const CycleGeometry& cycle) {
    const auto& params = snapshot.params();
    const auto area = v2v_area(snapshot, cycle);
    const double r0 = params.vehicle_radio_m;

    std::vector<double> voi_pos;
    std::size_t helper_count = 0;
    for (const auto& v : area) {
        if (v.role == Role::voi) voi_pos.push_back(v.position_m);
        else ++helper_count;
    }
    if (helper_count > kOracleHelperLimit) {
        std::ostringstream os;
        os << "max_pairs_oracle: " << helper_count << " helpers exceed limit " << kOracleHelperLimit;
        throw SizeError(os.str());
    }

    OracleSearch search;
    search.voi_count = voi_pos.size();
    for (const auto& v : area) {
        if (v.role != Role::helper) continue;
        std::vector<int> r;
        for (std::size_t k = 0; k < voi_pos.size(); ++k)
            if (std::abs(voi_pos[k] - v.position_m) <= r0) r.push_back(static_cast<int>(k));
        // a helper with nothing in range can never be part of a pair
        if (r.empty()) continue;
        search.positions.push_back(v.position_m);
        search.reach.push_back(std::move(r));
    }
    const std::size_t n = search.positions.size();
    search.next_allowed.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t k = j + 1;
        while (k < n && search.positions[k] - search.positions[j] < params.sensing_range_m) ++k;
        search.next_allowed[j] = k;
    }
    search.spaced_bound.assign(n + 1, 0);
    for (std::size_t j = n; j-- > 0;)
        search.spaced_bound[j] = 1 + search.spaced_bound[search.next_allowed[j]];
    search.run(0, 0, std::vector<int>(voi_pos.size(), -1));
    return search.best;
}

PairStats empirical_pair_stats(const NetworkParams& params, long slots, std::uint64_t seed,
                               double censor_guard_m) {
    params.validate();
    if (slots < 1) throw ParamError("empirical_pair_stats requires slots >= 1");
    NetworkParams one_cycle = params;
    one_cycle.road_length_m = params.infra_spacing_m;
    const auto cycle = cycle_geometry(one_cycle, 0);
    const double origin = cycle.v2v.begin_m;
    const double border = cycle.v2v.end_m;

    PairStats stats;
    double pair_sum = 0.0;
    double pair_sq = 0.0;
    double gap_sum = 0.0;
    double first_sum = 0.0;
    for (long s = 0; s < slots; ++s) {
        const auto snap = sample_snapshot(one_cycle, derive_seed(seed, static_cast<std::uint64_t>(s)));
        const auto sel = greedy(snap.slice(origin, border), one_cycle.vehicle_radio_m,
                                one_cycle.sensing_range_m);
        pair_sum += static_cast<double>(sel.size());
        pair_sq += static_cast<double>(sel.size() * sel.size());
        if (!sel.empty()) {
            first_sum += sel.front().pair.tx_position_m - origin;
            ++stats.first_gap_samples;
            ++stats.m0_histogram[sel.front().inspected];
        }
        for (std::size_t k = 1; k < sel.size(); ++k) {
            const double start = sel[k - 1].pair.tx_position_m;
            if (start > border - censor_guard_m) break;
            gap_sum += sel[k].pair.tx_position_m - start;
            ++stats.gap_samples;
            ++stats.m_histogram[sel[k].inspected];
        }
    }
    stats.snapshots = slots;
    const double n = static_cast<double>(slots);
    stats.mean_pairs = pair_sum / n;
    if (slots > 1)
        stats.mean_pairs_se = std::sqrt(std::max(0.0, pair_sq / n - stats.mean_pairs * stats.mean_pairs) / (n - 1.0));
    if (stats.gap_samples > 0) stats.mean_gap_m = gap_sum / static_cast<double>(stats.gap_samples);
    if (stats.first_gap_samples > 0)
        stats.first_gap_m = first_sum / static_cast<double>(stats.first_gap_samples);
    return stats;
}

}  // namespace vanetcap::scheduler
