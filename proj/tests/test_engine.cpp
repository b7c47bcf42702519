#include <cmath>

#include "doctest.h"
#include "mgsim/engine.hpp"
#include "mgsim/error.hpp"
#include "support.hpp"

using namespace mgsim;
using doctest::Approx;

TEST_CASE("settling time") {
    std::vector<double> t;
    for (int k = 0; k <= 500; ++k) t.push_back(k * 0.01);
    const std::vector<double> ref(t.size(), 0.3);

    CHECK(settling_time(t, {std::vector<double>(t.size(), 0.3)}, ref) == Approx(0.0));

    std::vector<double> step(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) step[k] = t[k] < 2.0 - 1e-9 ? 0.3 + 0.5 * std::exp(-t[k]) : 0.3 + 1e-4;
    auto st = settling_time(t, {step}, ref);
    REQUIRE(st);
    CHECK(*st == Approx(2.0));

    std::vector<double> osc(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) osc[k] = 0.3 + 0.01 * std::sin(20 * t[k]);
    CHECK_FALSE(settling_time(t, {osc}, ref));

    // Entering the band too close to the end to cover the hold time.
    std::vector<double> late(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) late[k] = t[k] < 4.8 ? 1.0 : 0.3;
    CHECK_FALSE(settling_time(t, {late}, ref, 0.0, 0.5));
    CHECK(settling_time(t, {late}, ref, 0.0, 0.1));
}

TEST_CASE("event statistics") {
    const auto none = event_statistics({});
    CHECK(none.count == 0);
    CHECK_FALSE(none.mean_interval);
    CHECK_FALSE(none.min_interval);

    const std::vector<EventRecord> recs{{0, 1.0, std::nullopt, 0.0}, {0, 1.5, 0.5, 0.1}, {0, 2.5, 1.0, 0.2}};
    const auto s = event_statistics(recs);
    CHECK(s.count == 3);
    CHECK(*s.mean_interval == Approx(0.75));
    CHECK(*s.min_interval == Approx(0.5));
    CHECK(s.per_agent_count.at(0) == 3);
}

TEST_CASE("overshoot on q") {
    const std::vector<std::vector<double>> q{{0.0, 0.6, 1.2, 1.05, 1.0}, {2.0, 1.5, 1.0, 0.95, 1.0}};
    CHECK(overshoot(q, {1.0, 1.0}, 0, 5) == Approx(0.2));
    CHECK(overshoot({{1.0, 1.0}}, {1.0}, 0, 2) == 0.0);
}

namespace {
ScenarioSpec small() {
    auto s = bundled("recon3");
    s.monitoring = Monitoring::Continuous;
    s.horizon = 1.5;
    s.record_interval = 1e-3;
    return s;
}
}  // namespace

TEST_CASE("zero-mismatch scenario is an equilibrium") {
    auto s = small();
    s.load.steps = {{0.0, 10000.0}};  // equals the RES set point
    s.soc0 = {0.5, 0.5, 0.5};
    s.lambda0 = {0.0, 0.0, 0.0};
    const auto r = run_scenario(s);
    for (const auto& e : r.events) CHECK(e.t == 0.0);
    CHECK(r.events.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(r.trace.lambda[i].back() == 0.0);
        CHECK(r.trace.soc[i].back() == 0.5);
        CHECK(std::abs(r.trace.omega[i].back()) < 1e-9);
    }
    REQUIRE(r.metrics.settling_time);
    CHECK(*r.metrics.settling_time == 0.0);
}

TEST_CASE("scenario runs are deterministic and events are well formed") {
    const auto s = small();
    const auto a = run_scenario(s);
    const auto b = run_scenario(s);
    CHECK(a.trace.lambda == b.trace.lambda);
    CHECK(a.trace.soc == b.trace.soc);
    CHECK(a.trace.omega == b.trace.omega);
    REQUIRE(a.events.size() == b.events.size());
    for (std::size_t k = 0; k < a.events.size(); ++k) {
        CHECK(a.events[k].t == b.events[k].t);
        CHECK(a.events[k].f_value >= 0.0);
        if (a.events[k].interval) CHECK(*a.events[k].interval > 0.0);
    }
    REQUIRE(a.metrics.events.min_interval);
    CHECK(*a.metrics.events.min_interval >= s.dt * (1 - 1e-9));
    CHECK(a.metrics.max_power_residual <= 1e-6);
}

TEST_CASE("controller converges to the leader on the small system") {
    auto s = small();
    s.horizon = 3.0;
    s.load.steps = {{0.0, 20000.0}};
    const auto r = run_scenario(s);
    const double lam = (20000.0 - 10000.0) / 75000.0;
    for (std::size_t i = 0; i < 3; ++i) CHECK(r.trace.lambda[i].back() == Approx(lam).epsilon(1e-4));
    CHECK(r.metrics.final_soc_spread < 1e-4);
    CHECK(r.metrics.settling_time);
}

TEST_CASE("a unit at the SoC floor stops discharging") {
    auto s = small();
    s.constraints_enabled = true;
    s.deadband_hz = 0.0;
    for (auto& u : s.fleet) u.soc_lo = 0.56;
    const auto r = run_scenario(s);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < r.trace.t.size(); ++k) {
            if (r.trace.soc[i][k] > 0.56) continue;
            ++hits;
            CHECK(r.trace.lambda[i][k] == 0.0);
            // Only the step that crosses the bound may overshoot it.
            CHECK(r.trace.soc[i][k] >= 0.56 - std::abs(s.fleet[i].k_soc()) * s.dt);
        }
    CHECK(hits > 0);
}

TEST_CASE("scenario validation") {
    auto s = small();
    s.res_scale.steps = {{0.0, 1.0}, {1.0, 1.5}};
    CHECK_THROWS_AS(run_scenario(s), ValidationError);
    s = small();
    s.load.steps = {{0.5, 1000.0}};
    CHECK_THROWS_AS(run_scenario(s), ValidationError);
    s = small();
    s.constraints_enabled = true;
    s.load.steps = {{0.0, 200000.0}};
    CHECK_THROWS_WITH_AS(run_scenario(s), doctest::Contains("capacity"), ValidationError);
    s = small();
    s.ic_scale = 100.0;
    CHECK_THROWS_AS(run_scenario(s), ValidationError);
}
