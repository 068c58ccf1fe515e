#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "vanetcap/analytic.hpp"
#include "vanetcap/simulator.hpp"

using namespace vanetcap;
using namespace vanetcap::sim;

namespace {

SimConfig small(double p, long trials = 8) {
    SimConfig c;
    c.params.voi_fraction = p;
    c.trials = trials;
    c.duration_s = 120;
    return c;
}

}  // namespace

TEST(SimConfig, Validation) {
    SimConfig c;
    EXPECT_NO_THROW(c.validate());
    c.slot_s = 1.0;  // 25 m/s * 1 s > r0 / 10
    EXPECT_THROW(c.validate(), ParamError);
    c = SimConfig{};
    c.trials = 0;
    EXPECT_THROW(c.validate(), ParamError);
    c = SimConfig{};
    c.duration_s = 0;
    EXPECT_THROW(c.validate(), ParamError);
    c = SimConfig{};
    c.warmup_s = -1.0;
    EXPECT_THROW(c.validate(), ParamError);
    EXPECT_EQ(SimConfig{}.effective_warmup_s(), 100.0);
    EXPECT_EQ(buffer_scope_from_string(to_string(BufferScope::global)), BufferScope::global);
    EXPECT_THROW(buffer_scope_from_string("shared"), ParamError);
}

TEST(RunTrial, DeterministicGivenSeedAndIndex) {
    const auto c = small(0.1);
    EXPECT_EQ(run_trial(c, 3), run_trial(c, 3));
    EXPECT_NE(run_trial(c, 3).total_delivered_bits, run_trial(c, 4).total_delivered_bits);
}

TEST(RunTrial, NeverDeliversMoreThanFetched) {
    for (double p : {0.02, 0.1, 0.3})
        for (auto scope : {BufferScope::cycle_local, BufferScope::global}) {
            auto c = small(p);
            c.buffer_scope = scope;
            for (long t = 0; t < 4; ++t) {
                const auto s = run_trial(c, t);
                EXPECT_LE(s.audit_v2v_bits, s.audit_fetched_bits * (1 + 1e-12));
                EXPECT_LE(s.v2v_total_bits, s.audit_v2v_bits * (1 + 1e-12));
                EXPECT_NEAR(s.total_delivered_bits, s.direction_bits[kEast] + s.direction_bits[kWest],
                            1e-6 * s.total_delivered_bits + 1e-9);
                EXPECT_LE(s.q1_slots + s.q2_slots, s.cycle_slots);
                // one V2I transmission per cycle-slot at most
                EXPECT_LE(s.v2i_total_bits, c.params.v2i_rate_bps * s.measured_s * c.params.cycle_count() * (1 + 1e-12));
            }
        }
}

TEST(RunTrial, NonCooperativeHasNoRelaying) {
    auto c = small(0.05);
    c.cooperative = false;
    const auto s = run_trial(c, 0);
    EXPECT_EQ(s.v2v_total_bits, 0.0);
    EXPECT_EQ(s.empirical_pair_mean, 0.0);
}

TEST(RunTrial, DebugLogHasOneRecordPerSlot) {
    auto c = small(0.2, 1);
    c.duration_s = 5;
    c.warmup_s = 1.0;
    std::ostringstream log;
    run_trial(c, 0, &log);
    std::istringstream in(log.str());
    std::string line;
    long n = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        EXPECT_EQ(j.at("slot").get<long>(), n);
        EXPECT_GE(j.at("buffer_bits").get<double>(), 0.0);
        ++n;
    }
    EXPECT_EQ(n, 60);
}

TEST(RunExperiment, IndependentOfThreadCount) {
    auto c = small(0.1, 6);
    c.threads = 1;
    const auto a = run_experiment(c);
    c.threads = 4;
    const auto b = run_experiment(c);
    EXPECT_EQ(a.capacity_bps.mean, b.capacity_bps.mean);
    EXPECT_EQ(a.per_trial, b.per_trial);
}

TEST(RunExperiment, CoverageFractionsMatchClosedForm) {
    auto c = small(0.1, 40);
    const auto r = run_experiment(c);
    const double q1 = analytic::v2i_voi_rate(c.params) / c.params.v2i_rate_bps;
    const double q2 = analytic::helper_fetch_rate(c.params) / c.params.v2i_rate_bps;
    EXPECT_NEAR(r.q1_fraction.mean, q1, 4 * r.q1_fraction.standard_error + 0.005);
    EXPECT_NEAR(r.q2_fraction.mean, q2, 4 * r.q2_fraction.standard_error + 0.005);
}

TEST(RunExperiment, AllVoisReachCeiling) {
    auto c = small(1.0, 20);
    const auto r = run_experiment(c);
    const double eta = c.params.cycle_count() * analytic::derived_constants(c.params).eta_max_cycle;
    EXPECT_NEAR(r.capacity_bps.mean, eta, 0.01 * eta);
    EXPECT_EQ(r.v2v_bps.mean, 0.0);
}

TEST(RunExperiment, MatchesClosedFormPastTheCrossover) {
    SimConfig c;
    c.params.voi_fraction = 0.3;
    c.trials = 200;
    const auto r = run_experiment(c);
    const double want = analytic::total_capacity(c.params);
    EXPECT_NEAR(r.capacity_bps.mean, want, 0.03 * want);
}

TEST(RunExperiment, DirectionalShareFollowsDensities) {
    auto c = small(0.1, 60);
    c.params.density_east_per_m = 0.004;
    c.params.density_west_per_m = 0.006;
    const auto r = run_experiment(c);
    EXPECT_NEAR(r.east_fraction, 0.4, 0.03);
}

TEST(MeanSe, Basics) {
    const auto m = mean_and_se({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(m.mean, 2.5);
    EXPECT_NEAR(m.standard_error, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
    EXPECT_EQ(mean_and_se({}).mean, 0.0);
}
