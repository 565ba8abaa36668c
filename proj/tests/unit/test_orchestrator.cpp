// SPDX-License-Identifier: Apache-2.0
//
// flybs: FlyBS positioning and power allocation with a channel-reusing backhaul
// Copyright (C) 2026 The flybs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"

#include "flybs/access_power.hpp"
#include "flybs/errors.hpp"
#include "flybs/orchestrator.hpp"
#include "flybs/scenario.hpp"

#include <cmath>
#include <random>
#include <utility>

using namespace flybs;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
    ScenarioConfig small_config(int n_users, double duration)
    {
        ScenarioConfig c;
        c.n_users = n_users;
        c.duration = duration;
        c.drops = 1;
        return c;
    }
} // namespace

TEST_CASE("Orchestrator - configuration", "[orchestrator]")
{
    StepConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK_THAT(c.allowed_speed(), WithinAbs(speed_threshold(200.0, c.propulsion), 1e-12));

    StepConfig bad = c;
    bad.epsilon = 0.0;
    bad.max_iters = 0;
    bad.p_pr_th = 100.0;
    try
    {
        bad.validate();
        FAIL("invalid step configuration must be rejected");
    }
    catch (const ConfigError &e)
    {
        CHECK(e.violations().size() == 3);
    }
}

TEST_CASE("Orchestrator - constraint audit", "[orchestrator]")
{
    fixture::Network net = fixture::network(20, 7);
    const FlybsState state{net.flybs, net.alloc};
    const ConstraintResiduals hold = audit_constraints(net.flybs, state, net.users, net.env, net.step);
    CHECK(hold.speed == -net.step.v_f_max);
    CHECK(hold.propulsion == propulsion_power(0.0, net.step.propulsion) - net.step.p_pr_th);
    CHECK_THAT(hold.gbs_power, WithinAbs(net.alloc.total_gbs() - net.step.p_gbs_max, 1e-15));
    CHECK_THAT(hold.flybs_power, WithinAbs(net.alloc.total_fly() - net.step.p_fly_max, 1e-15));

    // Powers at the exact rate floors make the QoS residual vanish.
    FlybsState floors = state;
    const AccessProblem ap = make_access_problem(net.alloc, net.geometry(), net.env.radio, net.env.min_rate,
                                                 net.step.p_fly_max, net.step.taylor_step);
    floors.alloc.p_fly = qos_power_floors(ap);
    const ConstraintResiduals at_floor = audit_constraints(net.flybs, floors, net.users, net.env, net.step);
    CHECK(std::abs(at_floor.qos) <= 1e-9 * net.config.c_min);

    FlybsState moved = state;
    moved.position.z = net.step.h_max + 5.0;
    moved.position.x += 30.0;
    const ConstraintResiduals r = audit_constraints(net.flybs, moved, net.users, net.env, net.step);
    CHECK_THAT(r.altitude, WithinAbs(5.0, 1e-9));
    CHECK(r.speed > 0.0);
    CHECK(r.propulsion > 0.0);
    CHECK_FALSE(r.satisfied(1e-6));
}

TEST_CASE("Orchestrator - time steps on the default scenario", "[orchestrator]")
{
    const ScenarioConfig config = small_config(100, 40);
    long steps = 0, restored = 0;
    run_drop(config, 0, {Scheme::proposed}, [&](const StepRecord &rec) {
        const StepMetrics &m = rec.metrics;
        ++steps;
        CHECK(m.iterations >= 1);
        CHECK(m.iterations <= config.solver.max_iters);
        if (m.feasible)
            CHECK(m.residuals.max() <= 1e-6);
        CHECK(m.residuals.speed <= 1e-9);
        // Never worse than the entry state, except when the entry breaks a constraint and the
        // step restores feasibility.
        if (m.entry_feasible)
            CHECK(m.sum_capacity >= m.entry_capacity);
        else if (m.sum_capacity < m.entry_capacity)
        {
            CHECK(m.feasible);
            ++restored;
        }
        double total = 0.0;
        for (double c : m.per_user_capacity)
            total += c;
        CHECK_THAT(total, WithinRel(m.sum_capacity, 1e-12));
    });
    CHECK(steps == config.steps());
    INFO("steps that traded capacity for feasibility: " << restored);
}

TEST_CASE("Orchestrator - fixed point with static users", "[orchestrator]")
{
    for (auto [n, seed] : {std::pair{5, 1}, std::pair{50, 9}})
    {
        fixture::Network net = fixture::network(n, static_cast<std::uint64_t>(seed));
        FlybsState state{net.flybs, net.alloc};
        StepResult last;
        for (int k = 0; k < 60; ++k)
        {
            last = time_step(state, net.users, net.env, net.step);
            state = last.state;
        }
        REQUIRE(last.metrics.feasible);
        const StepResult again = time_step(state, net.users, net.env, net.step);
        CHECK(again.state.position == state.position);
        CHECK_THAT(again.metrics.sum_capacity, WithinRel(last.metrics.sum_capacity, 1e-9));
        REQUIRE_FALSE(again.metrics.iteration_movement.empty());
        // When the alternation itself is at rest the first movement is already below epsilon.
        if (again.metrics.iteration_movement.front() < net.step.epsilon)
            CHECK(again.metrics.iterations == 1);
        if (n == 5)
            CHECK(again.metrics.iterations == 1);
    }
}

TEST_CASE("Orchestrator - mirror symmetry", "[orchestrator]")
{
    // Two users mirrored across y = 250, GBS on that plane.
    ScenarioConfig config = small_config(2, 1);
    const Environment env = config.environment();
    const StepConfig sc = config.step_config(1);
    REQUIRE(env.gbs.y == 250.0);
    const std::vector<Position3D> users{{200, 200, 0}, {200, 300, 0}};
    FlybsState state{{260, 250, 200}, equal_split_powers({260, 250, 200}, users, env, sc)};
    for (int k = 0; k < 20; ++k)
        state = time_step(state, users, env, sc).state;
    CHECK_THAT(state.position.y, WithinAbs(250.0, 1e-4));
}

TEST_CASE("Orchestrator - baselines", "[orchestrator]")
{
    fixture::Network net = fixture::network(60, 10);
    const FlybsState entry{net.flybs, net.alloc};
    const Position3D anchor{250, 250, 200};

    const StepResult s1 = baseline_static(entry, anchor, net.users, net.env, net.step);
    const StepResult s2 = baseline_static(s1.state, anchor, net.users, net.env, net.step);
    CHECK(s1.state.position == anchor);
    CHECK(s2.state.position == anchor);
    CHECK(s1.state.alloc.total_fly() <= net.step.p_fly_max * (1.0 + 1e-12));
    CHECK(s1.state.alloc.total_gbs() <= net.step.p_gbs_max * (1.0 + 1e-12));

    // With no rate floors nothing is clipped: both budgets are spent evenly.
    Environment free_env = net.env;
    std::fill(free_env.min_rate.begin(), free_env.min_rate.end(), 0.0);
    const PowerAllocation even = equal_split_powers(anchor, net.users, free_env, net.step);
    CHECK_THAT(even.total_gbs(), WithinRel(net.step.p_gbs_max, 1e-12));
    if (sum_capacity(even, {anchor, net.env.gbs, net.users}, net.env.radio) <=
        backhaul_capacity(even, distance(anchor, net.env.gbs), net.env.radio.backhaul))
        CHECK_THAT(even.total_fly(), WithinRel(net.step.p_fly_max, 1e-12));

    // Every user at one spot: the centroid tracker ends up right above it.
    const std::vector<Position3D> crowd(5, Position3D{120, 380, 0});
    ScenarioConfig c5 = small_config(5, 1);
    const Environment env5 = c5.environment();
    const StepConfig sc5 = c5.step_config(1);
    FlybsState s{{400, 100, 250}, equal_split_powers({400, 100, 250}, crowd, env5, sc5)};
    for (int k = 0; k < 40; ++k)
    {
        const StepResult r = baseline_centroid_track(s, crowd, env5, sc5);
        CHECK(distance(r.state.position, s.position) <= sc5.allowed_speed() * sc5.delta + 1e-9);
        s = r.state;
    }
    CHECK(distance(s.position, Position3D{120, 380, sc5.h_min}) < 1e-6);
}
