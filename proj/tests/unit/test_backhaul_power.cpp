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

#include "oracles.hpp"

#include "flybs/backhaul_power.hpp"
#include "flybs/errors.hpp"

#include <cmath>
#include <random>

using namespace flybs;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
    BackhaulProblem one_user(double signal, double noise, double b, double bandwidth, double min_rate)
    {
        BackhaulProblem pb;
        pb.user_channel = {0};
        pb.interference_gain = {b};
        pb.signal_power = {signal};
        pb.noise_power = {noise};
        pb.bandwidth = {bandwidth};
        pb.min_rate = {min_rate};
        pb.channel_bandwidth = {bandwidth};
        pb.backhaul_gain = {1.0};
        pb.power_budget = 10.0;
        return pb;
    }

    double user_rate(const BackhaulProblem &pb, std::size_t n, double p)
    {
        return pb.bandwidth[n] * std::log2(1.0 + pb.signal_power[n] / (pb.noise_power[n] + pb.interference_gain[n] * p));
    }

    double demand_scale(const BackhaulProblem &pb)
    {
        return backhaul_objective(pb, std::vector<double>(pb.n_channels(), 0.0));
    }
} // namespace

TEST_CASE("Backhaul - rate-floor caps", "[backhaul]")
{
    // signal / (2^(C/B) - 1) = noise leaves no room for interference.
    CHECK_THAT(qos_power_cap(0, one_user(3.0, 1.0, 1.0, 1.0, 2.0)), WithinAbs(0.0, 1e-15));
    CHECK_THAT(qos_power_cap(0, one_user(1.0, 0.5, 1.0, 1.0, 1.0)), WithinRel(0.5, 1e-15));
    CHECK(std::isinf(qos_power_cap(0, one_user(2.0, 0.5, 1.0, 1.0, 0.0))));
    try
    {
        qos_power_cap(0, one_user(1.0, 1.0, 1.0, 1.0, 2.0));
        FAIL("a user that misses its floor without interference must be rejected");
    }
    catch (const InfeasibleError &e)
    {
        CHECK(e.kind() == Infeasibility::qos);
    }

    std::mt19937_64 rng(41);
    for (int i = 0; i < 300; ++i)
    {
        const BackhaulProblem pb = oracle::random_backhaul_problem(rng, 3, 5);
        for (std::size_t n = 0; n < pb.n_users(); ++n)
        {
            if (pb.min_rate[n] <= 0.0)
                continue;
            CHECK_THAT(user_rate(pb, n, qos_power_cap(n, pb)), WithinRel(pb.min_rate[n], 1e-9));
        }
        const std::vector<double> caps = channel_power_caps(pb);
        const std::vector<oracle::ld> ref = oracle::channel_caps(pb);
        for (std::size_t s = 0; s < caps.size(); ++s)
            CHECK_THAT(caps[s], WithinRel(double(ref[s]), 1e-12));
    }
}

TEST_CASE("Backhaul - flow residual", "[backhaul]")
{
    std::mt19937_64 rng(42);
    for (int i = 0; i < 200; ++i)
    {
        const BackhaulProblem pb = oracle::random_backhaul_problem(rng, 1, 1 + i % 4);
        CHECK(flow_residual(pb, std::vector<double>{0.0}) > 0.0);

        const double root = oracle::single_channel_optimum(pb);
        if (std::isnan(root))
            continue;
        CHECK(std::abs(flow_residual(pb, std::vector<double>{root})) <= 1e-6 * demand_scale(pb));

        const double cap = double(oracle::channel_caps(pb)[0]);
        const double a = oracle::uniform(rng, 0.0, cap), b = oracle::uniform(rng, 0.0, cap);
        const double mid = flow_residual(pb, std::vector<double>{0.5 * (a + b)});
        CHECK(mid <= 0.5 * (flow_residual(pb, std::vector<double>{a}) + flow_residual(pb, std::vector<double>{b})) +
                         1e-9 * demand_scale(pb));
    }
}

TEST_CASE("Backhaul - single channel against bisection", "[backhaul][oracle]")
{
    std::mt19937_64 rng(43);
    int checked = 0;
    for (int i = 0; i < 200; ++i)
    {
        const BackhaulProblem pb = oracle::random_backhaul_problem(rng, 1, 1 + i % 4);
        const double root = oracle::single_channel_optimum(pb);
        if (std::isnan(root))
        {
            CHECK_THROWS_AS(solve_backhaul(pb), InfeasibleError);
            continue;
        }
        ++checked;
        const BackhaulSolution sol = solve_backhaul(pb);
        CHECK_THAT(sol.p_gbs[0], WithinRel(root, 1e-6));
        CHECK_THAT(sol.objective, WithinRel(backhaul_objective(pb, std::vector<double>{root}), 1e-6));
    }
    CHECK(checked > 150);
}

TEST_CASE("Backhaul - two channels against the grid oracle", "[backhaul][oracle]")
{
    std::mt19937_64 rng(44);
    int checked = 0;
    while (checked < 25)
    {
        const BackhaulProblem pb = oracle::random_backhaul_problem(rng, 2, 2 + checked % 3);
        const oracle::GridOptimum ref = oracle::two_channel_grid(pb);
        if (ref.objective < 0.0)
            continue;
        ++checked;
        const BackhaulSolution sol = solve_backhaul(pb);
        CHECK_THAT(sol.objective, WithinRel(ref.objective, 5e-3));
    }
}

TEST_CASE("Backhaul - solver output properties", "[backhaul]")
{
    std::mt19937_64 rng(45);
    int solved = 0;
    for (int i = 0; i < 300; ++i)
    {
        const std::size_t n_ch = 1 + i % 6;
        const BackhaulProblem pb = oracle::random_backhaul_problem(rng, n_ch, n_ch + i % 3);
        BackhaulOptions opt;
        opt.seed = static_cast<std::uint64_t>(i);
        BackhaulSolution sol;
        try
        {
            sol = solve_backhaul(pb, opt);
        }
        catch (const InfeasibleError &e)
        {
            CHECK(e.kind() == Infeasibility::flow);
            continue;
        }
        ++solved;
        const std::vector<double> caps = channel_power_caps(pb);
        double total = 0.0;
        bool active = false;
        for (std::size_t s = 0; s < n_ch; ++s)
        {
            CHECK(sol.p_gbs[s] >= 0.0);
            CHECK(sol.p_gbs[s] <= caps[s] * (1.0 + 1e-12));
            active = active || sol.p_gbs[s] <= 1e-6 * pb.power_budget || sol.p_gbs[s] >= caps[s] * (1.0 - 1e-6);
            total += sol.p_gbs[s];
        }
        CHECK(total <= pb.power_budget * (1.0 + 1e-12));
        const double residual = flow_residual(pb, sol.p_gbs);
        CHECK(residual <= 1e-8);
        active = active || total >= pb.power_budget * (1.0 - 1e-6) || residual >= -1e-6 * demand_scale(pb);
        CHECK(active);

        REQUIRE(sol.start_objectives.size() == static_cast<std::size_t>(opt.starts + 2));
        for (double f : sol.start_objectives)
            CHECK(sol.objective >= f - 1e-9 * std::abs(f));

        const BackhaulSolution again = solve_backhaul(pb, opt);
        CHECK(again.p_gbs == sol.p_gbs);
    }
    CHECK(solved > 100);
}

TEST_CASE("Backhaul - auxiliary allocations", "[backhaul]")
{
    std::mt19937_64 rng(46);
    for (int i = 0; i < 200; ++i)
    {
        const std::size_t n_ch = 1 + i % 5;
        const BackhaulProblem pb = oracle::random_backhaul_problem(rng, n_ch, n_ch);
        const std::vector<double> caps = channel_power_caps(pb);

        // Water-filling beats any random point inside the caps and the budget.
        const std::vector<double> wf = max_backhaul_allocation(pb);
        double total = 0.0;
        for (std::size_t s = 0; s < n_ch; ++s)
        {
            CHECK(wf[s] <= caps[s] * (1.0 + 1e-12));
            total += wf[s];
        }
        CHECK(total <= pb.power_budget * (1.0 + 1e-12));
        const double best = backhaul_link_capacity(pb, wf);
        for (int k = 0; k < 50; ++k)
        {
            std::vector<double> x(n_ch);
            double sum = 0.0;
            for (std::size_t s = 0; s < n_ch; ++s)
                sum += x[s] = oracle::uniform(rng, 0.0, caps[s]);
            if (sum > pb.power_budget)
                for (double &v : x)
                    v *= pb.power_budget / sum;
            CHECK(backhaul_link_capacity(pb, x) <= best * (1.0 + 1e-12));
        }

        const std::vector<double> witness = min_flow_allocation(pb);
        const bool feasible = flow_residual(pb, witness) <= 0.0;
        if (!feasible)
        {
            CHECK_THROWS_AS(min_weighted_power(pb, std::vector<double>(n_ch, 1.0)), InfeasibleError);
            continue;
        }
        // Minimum total power: no feasible random point uses less.
        const std::vector<double> lean = min_weighted_power(pb, std::vector<double>(n_ch, 1.0));
        CHECK(flow_residual(pb, lean) <= 1e-8);
        double lean_total = 0.0;
        for (double v : lean)
            lean_total += v;
        for (int k = 0; k < 50; ++k)
        {
            std::vector<double> x(n_ch);
            double sum = 0.0;
            for (std::size_t s = 0; s < n_ch; ++s)
                sum += x[s] = oracle::uniform(rng, 0.0, caps[s]);
            if (sum > pb.power_budget || flow_residual(pb, x) > 0.0)
                continue;
            CHECK(lean_total <= sum * (1.0 + 1e-9));
        }
    }
}
