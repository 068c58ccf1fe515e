#pragma once

#include <cstdint>
#include <string>

#include "vanetcap/highway.hpp"

namespace vanetcap::analytic {

struct DerivedConstants {
    /// Probability that a helper's fresh coverage stretch holds no VoI,
    /// 1 - p + p e^{-rho 2 r0}.
    double c1 = 0.0;
    /// (1-p) p rho (1 - e^{-rho 2 r0}), per meter.
    double c2 = 0.0;
    /// Per-cycle ceiling w_I (1 - e^{-rho 2 r_I}).
    double eta_max_cycle = 0.0;
};

DerivedConstants derived_constants(const NetworkParams& params);

enum class Bottleneck { fetch_limited, delivery_limited, saturated };
const char* to_string(Bottleneck b);
Bottleneck bottleneck_from_string(const std::string& s);

struct CapacityBreakdown {
    double v2i_voi_rate = 0.0;
    double helper_fetch_rate = 0.0;
    double v2v_unconstrained_rate = 0.0;
    double v2v_effective_rate = 0.0;
    double cycle_capacity = 0.0;
    double total_capacity = 0.0;
    double east_share = 0.0;  // of cycle_capacity
    double west_share = 0.0;
    Bottleneck bottleneck = Bottleneck::delivery_limited;

    bool operator==(const CapacityBreakdown&) const = default;
};

/// w_I (1 - e^{-p rho 2 r_I}): infrastructure serves a VoI whenever one is covered.
double v2i_voi_rate(const NetworkParams& params);

/// w_I (e^{-p rho 2 r_I} - e^{-rho 2 r_I}): slots with helpers but no VoI in coverage.
double helper_fetch_rate(const NetworkParams& params);

/// Mean spacing between consecutive scheduled transmitters. Needs 0 < p < 1.
double expected_gap(const NetworkParams& params);

/// Delayed-renewal estimate (d - 2 r_I) / E[L_k] of simultaneously active
/// helper-VoI pairs in one V2V area. Needs 0 < p < 1.
double expected_pair_count(const NetworkParams& params);

/// w_V times expected_pair_count. Needs 0 < p < 1.
double v2v_unconstrained_rate(const NetworkParams& params);

/// Full per-cycle breakdown. p = 1 short-circuits the V2V terms to 0.
///
/// Bottleneck labels: fetch_limited when the helpers' fetch rate is the
/// binding side of the min (capacity reaches eta_max through cooperation);
/// saturated when V2I alone already reaches eta_max within 1e-9 relative
/// (p = 1, or so dense that helpers are never needed); delivery_limited
/// otherwise.
CapacityBreakdown cycle_capacity(const NetworkParams& params);

/// (L/d) * cycle capacity, in bits/s for the whole road.
double total_capacity(const NetworkParams& params);

struct DirectionalShares {
    double east = 0.0;
    double west = 0.0;
};

/// Splits a capacity between directions in proportion to rho_1 : rho_2.
/// east + west reproduces `capacity` up to one rounding.
DirectionalShares directional_split(const NetworkParams& params, double capacity);

// --- Gap distributions -------------------------------------------------------

enum class GapKind { first, subsequent };  // L_0, L_k (k >= 1)

struct GapDistribution {
    GapKind kind = GapKind::subsequent;
    NetworkParams params;
    /// Largest m kept in the Erlang mixture.
    long series_cutoff = 1;
    /// Upper bound on the pmf mass beyond series_cutoff.
    double tail_bound = 1e-9;
};

/// Picks the smallest cutoff whose geometric pmf tail is below tail_bound.
GapDistribution make_gap_distribution(GapKind kind, const NetworkParams& params,
                                      double tail_bound = 1e-9);

/// Pr(m_k = m): index, among helpers past the exclusion zone, of the next
/// schedulable transmitter.
double pmf_mk(long m, const NetworkParams& params);

/// Pr(m_0 = m): index of the first transmitter among helpers right of the
/// V2V-area origin.
double pmf_m0(long m, const NetworkParams& params);

/// Erlang(shape, rate) density at x >= 0.
double erlang_pdf(double x, long shape, double rate);

/// Density of L_k (shifted by R_c) or L_0 as a truncated Erlang mixture.
double pdf_gap(double x, const GapDistribution& dist);

/// Pr(L > x) for the truncated mixture (regularized incomplete gamma per term).
double gap_survival(double x, const GapDistribution& dist);

/// Moment generating function of min(X, 2 r0) with X ~ Exp((1-p) rho).
double mgf_h(double t, const NetworkParams& params);

struct Estimate {
    double mean = 0.0;
    double standard_error = 0.0;
};

/// Monte-Carlo estimate of sum_n Pr(L_0 + ... + L_{n-1} <= d - 2 r_I), drawing
/// L_0 and i.i.d. L_k from their mixture laws (m from its pmf, then Erlang).
Estimate exact_pair_count_oracle(const NetworkParams& params, long samples, std::uint64_t seed);

}  // namespace vanetcap::analytic
