#include "vanetcap/highway.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace vanetcap {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ParamError(what);
}

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

double wrap(double x, double length) {
    double r = std::fmod(x, length);
    if (r < 0.0) r += length;
    // fmod of a tiny negative value plus L can round up to L itself
    if (r >= length) r = 0.0;
    return r;
}

}  // namespace

void NetworkParams::validate() const {
    require(positive_finite(road_length_m), "road_length_m must be > 0");
    require(positive_finite(infra_spacing_m), "infra_spacing_m must be > 0");
    require(positive_finite(infra_radio_m), "infra_radio_m must be > 0");
    require(positive_finite(vehicle_radio_m), "vehicle_radio_m must be > 0");
    require(positive_finite(sensing_range_m), "sensing_range_m must be > 0");
    require(std::isfinite(density_east_per_m) && density_east_per_m >= 0.0,
            "density_east_per_m must be >= 0");
    require(std::isfinite(density_west_per_m) && density_west_per_m >= 0.0,
            "density_west_per_m must be >= 0");
    require(total_density() > 0.0, "density_east_per_m + density_west_per_m must be > 0");
    require(std::isfinite(voi_fraction) && voi_fraction > 0.0 && voi_fraction <= 1.0,
            "voi_fraction must satisfy 0 < p <= 1");
    require(positive_finite(speed_east_mps), "speed_east_mps must be > 0");
    require(positive_finite(speed_west_mps), "speed_west_mps must be > 0");
    require(positive_finite(v2i_rate_bps), "v2i_rate_bps must be > 0");
    require(std::isfinite(v2v_rate_bps) && v2v_rate_bps >= 0.0, "v2v_rate_bps must be >= 0");
    require(infra_spacing_m > 2.0 * infra_radio_m,
            "infra_spacing_m must exceed 2 * infra_radio_m (non-empty V2V area)");
    const double cycles = road_length_m / infra_spacing_m;
    require(cycles >= 1.0 - 1e-9 && std::abs(cycles - std::round(cycles)) <= 1e-9 * cycles,
            "road_length_m must be an integer multiple of infra_spacing_m");
}

int NetworkParams::cycle_count() const {
    return static_cast<int>(std::lround(road_length_m / infra_spacing_m));
}

const char* to_string(Direction d) { return d == Direction::east ? "east" : "west"; }
const char* to_string(Role r) { return r == Role::voi ? "voi" : "helper"; }

Snapshot::Snapshot(NetworkParams params, std::vector<Vehicle> vehicles, double time_s)
    : params_(params), vehicles_(std::move(vehicles)), time_s_(time_s) {
    params_.validate();
    for (const auto& v : vehicles_) {
        if (!(v.position_m >= 0.0 && v.position_m < params_.road_length_m)) {
            std::ostringstream os;
            os << "vehicle position " << v.position_m << " outside [0, road_length_m)";
            throw ParamError(os.str());
        }
    }
    std::stable_sort(vehicles_.begin(), vehicles_.end(), position_less);
}

Snapshot::Snapshot(Presorted, NetworkParams params, std::vector<Vehicle> vehicles, double time_s)
    : params_(params), vehicles_(std::move(vehicles)), time_s_(time_s) {}

std::span<const Vehicle> Snapshot::slice(double a, double b) const {
    auto lo = std::lower_bound(vehicles_.begin(), vehicles_.end(), a,
                               [](const Vehicle& v, double x) { return v.position_m < x; });
    auto hi = std::lower_bound(lo, vehicles_.end(), b,
                               [](const Vehicle& v, double x) { return v.position_m < x; });
    return {lo, hi};
}

bool Snapshot::is_sorted() const {
    return std::is_sorted(vehicles_.begin(), vehicles_.end(), position_less);
}

CycleGeometry cycle_geometry(const NetworkParams& params, int cycle_index) {
    if (cycle_index < 0 || cycle_index >= params.cycle_count()) {
        throw ParamError("cycle_index out of range");
    }
    const double start = cycle_index * params.infra_spacing_m;
    const double v2i_end = start + 2.0 * params.infra_radio_m;
    CycleGeometry g;
    g.cycle_index = cycle_index;
    g.infra_position_m = start + params.infra_radio_m;
    g.v2i = {start, v2i_end};
    g.v2v = {v2i_end, start + params.infra_spacing_m};
    return g;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Snapshot sample_snapshot(const NetworkParams& params, std::uint64_t seed) {
    params.validate();
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      0x5eed5eedU};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const double length = params.road_length_m;
    std::vector<Vehicle> vehicles;
    std::uint32_t next_id = 0;
    const auto add_direction = [&](double density, Direction dir) {
        if (density <= 0.0) return;
        std::poisson_distribution<long> count_dist(density * length);
        const long n = count_dist(rng);
        for (long i = 0; i < n; ++i) {
            Vehicle v;
            v.position_m = wrap(unit(rng) * length, length);
            v.direction = dir;
            v.role = unit(rng) < params.voi_fraction ? Role::voi : Role::helper;
            v.id = next_id++;
            vehicles.push_back(v);
        }
    };
    add_direction(params.density_east_per_m, Direction::east);
    add_direction(params.density_west_per_m, Direction::west);
    return Snapshot(params, std::move(vehicles), 0.0);
}

Snapshot advance(const Snapshot& snapshot, double dt_s) {
    if (!(dt_s > 0.0) || !std::isfinite(dt_s)) throw ParamError("advance requires dt > 0");
    const NetworkParams& p = snapshot.params();
    const double length = p.road_length_m;

    // Each direction translates rigidly, so it stays sorted up to one rotation
    // at the wrap point; merging the two runs restores global order in O(n).
    std::vector<Vehicle> east;
    std::vector<Vehicle> west;
    for (const auto& v : snapshot.vehicles()) {
        Vehicle moved = v;
        if (v.direction == Direction::east) {
            moved.position_m = wrap(v.position_m + p.speed_east_mps * dt_s, length);
            east.push_back(moved);
        } else {
            moved.position_m = wrap(v.position_m - p.speed_west_mps * dt_s, length);
            west.push_back(moved);
        }
    }
    const auto restore = [](std::vector<Vehicle>& run) {
        auto pivot = std::is_sorted_until(run.begin(), run.end(), position_less);
        if (pivot != run.end()) {
            std::rotate(run.begin(), pivot, run.end());
            if (!std::is_sorted(run.begin(), run.end(), position_less)) {
                std::stable_sort(run.begin(), run.end(), position_less);
            }
        }
    };
    restore(east);
    restore(west);

    std::vector<Vehicle> merged;
    merged.reserve(east.size() + west.size());
    std::merge(east.begin(), east.end(), west.begin(), west.end(), std::back_inserter(merged),
               position_less);
    return Snapshot(Snapshot::Presorted{}, p, std::move(merged), snapshot.time_s() + dt_s);
}

std::vector<Vehicle> vehicles_in(const Snapshot& snapshot, Interval interval, RoleFilter role,
                                 DirectionFilter direction) {
    const double length = snapshot.params().road_length_m;
    const double a = interval.begin_m;
    const double b = interval.end_m;
    if (!std::isfinite(a) || !std::isfinite(b) || a < 0.0 || b < 0.0 || a > length ||
        b > length || a == b) {
        throw ParamError("malformed interval");
    }
    const auto keep = [&](const Vehicle& v) {
        if (role == RoleFilter::voi && v.role != Role::voi) return false;
        if (role == RoleFilter::helper && v.role != Role::helper) return false;
        if (direction == DirectionFilter::east && v.direction != Direction::east) return false;
        if (direction == DirectionFilter::west && v.direction != Direction::west) return false;
        return true;
    };
    std::vector<Vehicle> out;
    const auto collect = [&](std::span<const Vehicle> run) {
        for (const auto& v : run)
            if (keep(v)) out.push_back(v);
    };
    if (a < b) {
        collect(snapshot.slice(a, b));
    } else {
        collect(snapshot.slice(a, length));
        collect(snapshot.slice(0.0, b));
    }
    return out;
}

}  // namespace vanetcap
