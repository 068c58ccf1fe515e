#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vanetcap {

/// Raised when a NetworkParams (or derived config) violates an invariant.
/// The message names the violated invariant.
class ParamError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when an operation is evaluated outside its mathematical domain
/// (e.g. helper-dependent quantities at p = 1).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Scenario parameterization. Units: meters, seconds, vehicles/meter, bits/second.
struct NetworkParams {
    double road_length_m = 20000.0;
    double infra_spacing_m = 2000.0;
    double infra_radio_m = 400.0;
    double vehicle_radio_m = 200.0;
    double sensing_range_m = 400.0;
    double density_east_per_m = 0.005;
    double density_west_per_m = 0.005;
    double voi_fraction = 0.1;
    double speed_east_mps = 20.0;
    double speed_west_mps = 25.0;
    double v2i_rate_bps = 20e6;
    double v2v_rate_bps = 2e6;

    /// Throws ParamError naming the first violated invariant.
    void validate() const;

    double total_density() const { return density_east_per_m + density_west_per_m; }
    double v2v_area_length() const { return infra_spacing_m - 2.0 * infra_radio_m; }
    int cycle_count() const;

    bool operator==(const NetworkParams&) const = default;
};

enum class Direction : std::uint8_t { east, west };
enum class Role : std::uint8_t { voi, helper };

const char* to_string(Direction d);
const char* to_string(Role r);

struct Vehicle {
    double position_m = 0.0;
    Direction direction = Direction::east;
    Role role = Role::helper;
    /// Insertion order at sampling time; breaks position ties.
    std::uint32_t id = 0;
};

/// Strict weak order used for every sorted vehicle sequence.
inline bool position_less(const Vehicle& a, const Vehicle& b) {
    if (a.position_m != b.position_m) return a.position_m < b.position_m;
    return a.id < b.id;
}

/// Half-open interval [begin, end) on the ring. begin > end denotes a wrapped
/// interval [begin, L) ∪ [0, end).
struct Interval {
    double begin_m = 0.0;
    double end_m = 0.0;
};

enum class RoleFilter : std::uint8_t { any, voi, helper };
enum class DirectionFilter : std::uint8_t { any, east, west };

/// Immutable, position-sorted realization of the traffic on the ring road.
class Snapshot {
public:
    /// Sorts `vehicles`; throws ParamError on invalid params or positions
    /// outside [0, L).
    Snapshot(NetworkParams params, std::vector<Vehicle> vehicles, double time_s = 0.0);

    const NetworkParams& params() const { return params_; }
    std::span<const Vehicle> vehicles() const { return vehicles_; }
    double time_s() const { return time_s_; }
    std::size_t size() const { return vehicles_.size(); }

    /// Contiguous run of vehicles with position in [a, b), 0 <= a <= b <= L.
    std::span<const Vehicle> slice(double a, double b) const;

    bool is_sorted() const;

private:
    struct Presorted {};
    Snapshot(Presorted, NetworkParams params, std::vector<Vehicle> vehicles, double time_s);

    NetworkParams params_;
    std::vector<Vehicle> vehicles_;
    double time_s_ = 0.0;

    friend Snapshot advance(const Snapshot&, double);
};

/// One infrastructure coverage interval plus the following uncovered stretch.
/// Cycle k occupies [k*d, (k+1)*d): V2I area [k*d, k*d + 2 r_I), V2V area
/// [k*d + 2 r_I, (k+1)*d).
struct CycleGeometry {
    int cycle_index = 0;
    double infra_position_m = 0.0;
    Interval v2i;
    Interval v2v;
};

CycleGeometry cycle_geometry(const NetworkParams& params, int cycle_index);

/// Independent stream seed for the index-th trial/snapshot under `base`
/// (splitmix64 finalizer over base and index).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Stationary Poisson traffic: Poisson(rho_dir * L) vehicles per direction,
/// i.i.d. uniform positions, each independently a VoI with probability p.
/// The random draws consumed do not depend on p, so snapshots sampled with
/// the same seed at different p share positions (common random numbers).
Snapshot sample_snapshot(const NetworkParams& params, std::uint64_t seed);

/// Moves every vehicle by its direction's speed times dt on the ring.
Snapshot advance(const Snapshot& snapshot, double dt_s);

/// Vehicles in `interval` matching the filters, in position order (wrapped
/// intervals: the [begin, L) part first). Throws ParamError on malformed
/// intervals.
std::vector<Vehicle> vehicles_in(const Snapshot& snapshot, Interval interval,
                                 RoleFilter role = RoleFilter::any,
                                 DirectionFilter direction = DirectionFilter::any);

}  // namespace vanetcap
