#include "vanetcap/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <boost/math/special_functions/gamma.hpp>

namespace vanetcap::analytic {

namespace {

/// 1 - e^{-x} without cancellation for small x.
double one_minus_exp_neg(double x) { return -std::expm1(-x); }

void require_helpers(const NetworkParams& params, const char* op) {
    params.validate();
    if (!(params.voi_fraction < 1.0)) {
        throw DomainError(std::string(op) + " requires 0 < voi_fraction < 1 (no helpers at p = 1)");
    }
}

double helper_density(const NetworkParams& params) {
    return (1.0 - params.voi_fraction) * params.total_density();
}

/// Numerator term p - p e^{-rho 2 r0} + e^{-p rho 2 r0} shared by E[L_k] and E[N_p].
double gap_numerator(const NetworkParams& params) {
    const double p = params.voi_fraction;
    const double rho = params.total_density();
    const double r0 = params.vehicle_radio_m;
    return p * one_minus_exp_neg(rho * 2.0 * r0) + std::exp(-p * rho * 2.0 * r0);
}

/// Closed-form pmf parameters: Pr(m = 1) = first, Pr(m = k >= 2) = scale c1^{k-2}.
struct GeometricPmf {
    double first = 0.0;
    double scale = 0.0;
    double log_c1 = 0.0;
    double c1 = 0.0;

    double at(long m) const {
        if (m == 1) return first;
        return scale * std::exp(static_cast<double>(m - 2) * log_c1);
    }
    /// Pr(m > k) for k >= 1.
    double tail_after(long k) const {
        return scale / (1.0 - c1) * std::exp(static_cast<double>(k - 1) * log_c1);
    }
};

GeometricPmf pmf_parameters(GapKind kind, const NetworkParams& params) {
    const double p = params.voi_fraction;
    const double rho = params.total_density();
    const double r0 = params.vehicle_radio_m;
    const double one_minus_c1 = p * one_minus_exp_neg(rho * 2.0 * r0);
    GeometricPmf g;
    g.c1 = 1.0 - one_minus_c1;
    g.log_c1 = std::log1p(-one_minus_c1);
    if (kind == GapKind::subsequent) {
        g.first = one_minus_exp_neg(p * rho * 2.0 * r0);
        g.scale = std::exp(-p * rho * 2.0 * r0) * one_minus_c1;
    } else {
        // B = 1 - p + p e^{-rho r0}: no VoI in the clipped first coverage stretch
        const double log_b = std::log1p(-p * one_minus_exp_neg(rho * r0));
        g.first = -std::expm1(log_b - p * rho * r0);
        g.scale = std::exp(log_b - p * rho * r0) * one_minus_c1;
    }
    return g;
}

double mixture_shift(const GapDistribution& dist) {
    return dist.kind == GapKind::subsequent ? dist.params.sensing_range_m : 0.0;
}

}  // namespace

DerivedConstants derived_constants(const NetworkParams& params) {
    params.validate();
    const double p = params.voi_fraction;
    const double rho = params.total_density();
    const double r0 = params.vehicle_radio_m;
    DerivedConstants c;
    c.c1 = 1.0 - p * one_minus_exp_neg(rho * 2.0 * r0);
    c.c2 = (1.0 - p) * p * rho * one_minus_exp_neg(rho * 2.0 * r0);
    c.eta_max_cycle = params.v2i_rate_bps * one_minus_exp_neg(rho * 2.0 * params.infra_radio_m);
    return c;
}

const char* to_string(Bottleneck b) {
    switch (b) {
        case Bottleneck::fetch_limited: return "fetch-limited";
        case Bottleneck::delivery_limited: return "delivery-limited";
        case Bottleneck::saturated: return "saturated";
    }
    return "?";
}

Bottleneck bottleneck_from_string(const std::string& s) {
    if (s == "fetch-limited") return Bottleneck::fetch_limited;
    if (s == "delivery-limited") return Bottleneck::delivery_limited;
    if (s == "saturated") return Bottleneck::saturated;
    throw ParamError("unknown bottleneck label: " + s);
}

double v2i_voi_rate(const NetworkParams& params) {
    params.validate();
    const double x = params.voi_fraction * params.total_density() * 2.0 * params.infra_radio_m;
    return params.v2i_rate_bps * one_minus_exp_neg(x);
}

double helper_fetch_rate(const NetworkParams& params) {
    params.validate();
    const double rho2ri = params.total_density() * 2.0 * params.infra_radio_m;
    const double p = params.voi_fraction;
    // e^{-p x} - e^{-x} = e^{-p x} (1 - e^{-(1-p) x})
    return params.v2i_rate_bps * std::exp(-p * rho2ri) * one_minus_exp_neg((1.0 - p) * rho2ri);
}

double expected_gap(const NetworkParams& params) {
    require_helpers(params, "expected_gap");
    const auto c = derived_constants(params);
    return params.sensing_range_m + gap_numerator(params) / c.c2;
}

double expected_pair_count(const NetworkParams& params) {
    require_helpers(params, "expected_pair_count");
    const auto c = derived_constants(params);
    return c.c2 * params.v2v_area_length() /
           (c.c2 * params.sensing_range_m + gap_numerator(params));
}

double v2v_unconstrained_rate(const NetworkParams& params) {
    return params.v2v_rate_bps * expected_pair_count(params);
}

CapacityBreakdown cycle_capacity(const NetworkParams& params) {
    params.validate();
    const auto c = derived_constants(params);
    CapacityBreakdown b;
    b.v2i_voi_rate = v2i_voi_rate(params);
    const bool has_helpers = params.voi_fraction < 1.0;
    b.helper_fetch_rate = has_helpers ? helper_fetch_rate(params) : 0.0;
    b.v2v_unconstrained_rate = has_helpers ? v2v_unconstrained_rate(params) : 0.0;
    b.v2v_effective_rate = std::min(b.helper_fetch_rate, b.v2v_unconstrained_rate);
    b.cycle_capacity = std::min(c.eta_max_cycle, b.v2i_voi_rate + b.v2v_effective_rate);
    b.total_capacity = params.road_length_m / params.infra_spacing_m * b.cycle_capacity;

    if (has_helpers && b.helper_fetch_rate < b.v2v_unconstrained_rate) {
        b.bottleneck = Bottleneck::fetch_limited;
    } else if (b.cycle_capacity >= c.eta_max_cycle * (1.0 - 1e-9)) {
        b.bottleneck = Bottleneck::saturated;
    } else {
        b.bottleneck = Bottleneck::delivery_limited;
    }
    const auto shares = directional_split(params, b.cycle_capacity);
    b.east_share = shares.east;
    b.west_share = shares.west;
    return b;
}

double total_capacity(const NetworkParams& params) {
    return params.road_length_m / params.infra_spacing_m * cycle_capacity(params).cycle_capacity;
}

DirectionalShares directional_split(const NetworkParams& params, double capacity) {
    const double rho = params.density_east_per_m + params.density_west_per_m;
    if (!(rho > 0.0)) throw DomainError("directional_split requires rho_1 + rho_2 > 0");
    if (!(capacity >= 0.0)) throw DomainError("directional_split requires capacity >= 0");
    DirectionalShares s;
    s.east = capacity * (params.density_east_per_m / rho);
    s.west = capacity - s.east;
    return s;
}

GapDistribution make_gap_distribution(GapKind kind, const NetworkParams& params,
                                      double tail_bound) {
    require_helpers(params, "make_gap_distribution");
    if (!(tail_bound > 0.0 && tail_bound < 1.0)) throw ParamError("tail_bound must be in (0, 1)");
    const auto g = pmf_parameters(kind, params);
    GapDistribution dist;
    dist.kind = kind;
    dist.params = params;
    dist.tail_bound = tail_bound;
    // Pr(m > M) <= c1^{M-1}
    long cutoff = 1;
    if (g.c1 > 0.0) {
        cutoff = 1 + static_cast<long>(std::ceil(std::log(tail_bound) / g.log_c1));
    }
    dist.series_cutoff = std::max(1L, cutoff);
    return dist;
}

double pmf_mk(long m, const NetworkParams& params) {
    if (m < 1) throw DomainError("pmf_mk requires m >= 1");
    require_helpers(params, "pmf_mk");
    return pmf_parameters(GapKind::subsequent, params).at(m);
}

double pmf_m0(long m, const NetworkParams& params) {
    if (m < 1) throw DomainError("pmf_m0 requires m >= 1");
    require_helpers(params, "pmf_m0");
    return pmf_parameters(GapKind::first, params).at(m);
}

double erlang_pdf(double x, long shape, double rate) {
    if (x < 0.0) return 0.0;
    if (x == 0.0) return shape == 1 ? rate : 0.0;
    const double k = static_cast<double>(shape);
    return std::exp(k * std::log(rate) + (k - 1.0) * std::log(x) - rate * x - std::lgamma(k));
}

double pdf_gap(double x, const GapDistribution& dist) {
    if (x < 0.0 || std::isnan(x)) throw DomainError("pdf_gap requires x >= 0");
    const double y = x - mixture_shift(dist);
    if (y < 0.0) return 0.0;
    const double rate = helper_density(dist.params);
    const auto g = pmf_parameters(dist.kind, dist.params);
    if (y == 0.0) return g.first * rate;

    // log Erlang(y; m, rate) built up recursively in m
    const double log_ry = std::log(rate * y);
    double log_erlang = std::log(rate) - rate * y;
    double sum = g.first * std::exp(log_erlang);
    const double log_scale = std::log(g.scale);
    double peak = -std::numeric_limits<double>::infinity();
    for (long m = 2; m <= dist.series_cutoff; ++m) {
        log_erlang += log_ry - std::log(static_cast<double>(m - 1));
        const double log_term = log_scale + static_cast<double>(m - 2) * g.log_c1 + log_erlang;
        peak = std::max(peak, log_term);
        sum += std::exp(log_term);
        // past the Erlang mode every later term is smaller still
        if (static_cast<double>(m - 1) > rate * y && log_term < peak - 60.0) break;
    }
    return sum;
}

double gap_survival(double x, const GapDistribution& dist) {
    const double y = x - mixture_shift(dist);
    if (y <= 0.0) return 1.0;
    const double ry = helper_density(dist.params) * y;
    const auto g = pmf_parameters(dist.kind, dist.params);
    double sum = 0.0;
    for (long m = 1; m <= dist.series_cutoff; ++m) {
        const double q = boost::math::gamma_q(static_cast<double>(m), ry);
        if (q > 1.0 - 1e-15) {
            // every remaining component (including the truncated tail) survives
            return sum + (m == 1 ? 1.0 : g.tail_after(m - 1));
        }
        sum += g.at(m) * q;
    }
    return sum + g.tail_after(dist.series_cutoff);
}

double mgf_h(double t, const NetworkParams& params) {
    params.validate();
    const double rate = helper_density(params);
    const double a = 2.0 * params.vehicle_radio_m;
    const double delta = t - rate;
    const double z = delta * a;
    if (std::abs(delta) < 1e-8 * rate) {
        // removable singularity at t = rate: expm1(z)/delta = a (1 + z/2 + z^2/6 + ...)
        return std::exp(z) + rate * a * (1.0 + z / 2.0 + z * z / 6.0);
    }
    return std::exp(z) + rate * std::expm1(z) / delta;
}

Estimate exact_pair_count_oracle(const NetworkParams& params, long samples, std::uint64_t seed) {
    require_helpers(params, "exact_pair_count_oracle");
    if (samples < 1) throw ParamError("exact_pair_count_oracle requires samples >= 1");
    const double window = params.v2v_area_length();
    const double rate = helper_density(params);
    const double sensing = params.sensing_range_m;
    const auto first = pmf_parameters(GapKind::first, params);
    const auto next = pmf_parameters(GapKind::subsequent, params);

    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      0x0dac1e5U};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::geometric_distribution<long> extra(1.0 - next.c1);

    const auto draw_index = [&](const GeometricPmf& g) -> long {
        if (unit(rng) < g.first) return 1;
        return 2 + extra(rng);
    };
    const auto draw_erlang = [&](long shape) {
        std::gamma_distribution<double> gamma(static_cast<double>(shape), 1.0 / rate);
        return gamma(rng);
    };

    double sum = 0.0;
    double sum_sq = 0.0;
    for (long s = 0; s < samples; ++s) {
        double position = draw_erlang(draw_index(first));
        long count = 0;
        while (position <= window) {
            ++count;
            position += sensing + draw_erlang(draw_index(next));
        }
        sum += static_cast<double>(count);
        sum_sq += static_cast<double>(count) * static_cast<double>(count);
    }
    const double n = static_cast<double>(samples);
    Estimate e;
    e.mean = sum / n;
    if (samples > 1) {
        const double var = std::max(0.0, (sum_sq - n * e.mean * e.mean) / (n - 1.0));
        e.standard_error = std::sqrt(var / n);
    }
    return e;
}

}  // namespace vanetcap::analytic
