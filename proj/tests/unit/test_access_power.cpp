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

#include "flybs/access_power.hpp"
#include "flybs/errors.hpp"

#include <cmath>
#include <random>

using namespace flybs;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
    AccessProblem two_identical_users()
    {
        AccessProblem pb;
        pb.gain = {10.0, 10.0};
        pb.bandwidth = {1e6, 1e6};
        pb.min_rate = {0.0, 0.0};
        pb.power_budget = 2.0;
        pb.backhaul_capacity = 1e12;
        pb.taylor_step = 1e-3;
        return pb;
    }

    double true_flow(const AccessProblem &pb, const std::vector<double> &p)
    {
        double sum = 0.0;
        for (std::size_t n = 0; n < p.size(); ++n)
            sum += pb.bandwidth[n] * std::log2(1.0 + pb.gain[n] * p[n]);
        return sum;
    }
} // namespace

TEST_CASE("Access - rate floors", "[access]")
{
    AccessProblem pb = two_identical_users();
    pb.min_rate = {1e6, 0.0};
    CHECK_THAT(qos_power_floor(0, pb), WithinRel(0.1, 1e-15));
    CHECK(qos_power_floor(1, pb) == 0.0);

    std::mt19937_64 rng(31);
    for (int i = 0; i < 500; ++i)
    {
        const AccessProblem r = oracle::random_access_problem(rng, 4);
        for (std::size_t n = 0; n < 4; ++n)
        {
            if (r.min_rate[n] == 0.0)
                continue;
            const double c = r.bandwidth[n] * std::log1p(r.gain[n] * qos_power_floor(n, r)) / std::log(2.0);
            CHECK_THAT(c, WithinRel(r.min_rate[n], 1e-9));
        }
    }
}

TEST_CASE("Access - tangent upper bound on log2(1 + a x)", "[access]")
{
    CHECK_THAT(taylor_log_upper_bound(2.0, 0.0, 0.1), WithinAbs(0.0, 1e-15));
    for (int s : {1, 3, 17, 250})
    {
        const double tau = 0.25, a = 4.0, x = s * tau / a;
        CHECK_THAT(taylor_log_upper_bound(a, x, tau), WithinRel(std::log2(1.0 + s * tau), 1e-13));
    }

    std::mt19937_64 rng(32);
    for (int i = 0; i < 10000; ++i)
    {
        const double a = oracle::log_uniform(rng, 1e-2, 1e4), x = oracle::uniform(rng, 0.0, 2.0);
        const double tau = oracle::log_uniform(rng, 1e-4, 1.0);
        const oracle::ld exact = oracle::log2p1(oracle::ld(a) * x);
        const double coarse = taylor_log_upper_bound(a, x, tau);
        const double fine = taylor_log_upper_bound(a, x, 0.5 * tau);
        CHECK(coarse >= exact - 1e-12);
        CHECK(fine >= exact - 1e-12);
        CHECK(fine - exact <= coarse - exact + 1e-12);
    }
}

TEST_CASE("Access - closed-form cases", "[access]")
{
    const std::vector<double> p = solve_access(two_identical_users());
    CHECK_THAT(p[0], WithinAbs(1.0, 1e-9));
    CHECK_THAT(p[1], WithinAbs(1.0, 1e-9));

    AccessProblem tight = two_identical_users();
    tight.min_rate = {1e6 * std::log2(1.0 + 10.0 * 0.7), 1e6 * std::log2(1.0 + 10.0 * 1.3)};
    const std::vector<double> floors = qos_power_floors(tight);
    tight.power_budget = floors[0] + floors[1];
    const std::vector<double> q = solve_access(tight);
    CHECK_THAT(q[0], WithinAbs(floors[0], 1e-12));
    CHECK_THAT(q[1], WithinAbs(floors[1], 1e-12));

    AccessProblem over = two_identical_users();
    over.min_rate = {5e6, 5e6};
    try
    {
        solve_access(over);
        FAIL("floors above the budget must be rejected");
    }
    catch (const InfeasibleError &e)
    {
        CHECK(e.kind() == Infeasibility::qos);
    }

    AccessProblem starved = two_identical_users();
    starved.min_rate = {1e6, 1e6};
    starved.backhaul_capacity = 1e6;
    try
    {
        solve_access(starved);
        FAIL("floors above the backhaul must be rejected");
    }
    catch (const InfeasibleError &e)
    {
        CHECK(e.kind() == Infeasibility::flow);
    }
}

TEST_CASE("Access - three users against the grid oracle", "[access][oracle]")
{
    std::mt19937_64 rng(33);
    for (int i = 0; i < 40; ++i)
    {
        const AccessProblem pb = oracle::random_access_problem(rng, 3);
        const oracle::AccessOracle ref = oracle::access_grid(pb);
        REQUIRE(ref.objective > 0.0);
        const std::vector<double> p = solve_access(pb);
        const double obj = access_objective(pb, p);
        CHECK_THAT(obj, WithinRel(ref.objective, 1e-3));
        const std::vector<double> floors = qos_power_floors(pb);
        double total = 0.0;
        for (std::size_t n = 0; n < 3; ++n)
        {
            CHECK(p[n] >= floors[n] - 1e-9);
            total += p[n];
        }
        CHECK(total <= pb.power_budget + 1e-9);
        const LinearFlowBound flow = linearize_flow(pb);
        CHECK(flow.lhs(p) <= flow.rhs + 1e-9 * pb.backhaul_capacity);
    }
}

TEST_CASE("Access - structural properties", "[access]")
{
    std::mt19937_64 rng(34);
    for (int i = 0; i < 200; ++i)
    {
        AccessProblem pb = oracle::random_access_problem(rng, 6);
        const std::vector<double> p = solve_access(pb);

        // The linearized bound is conservative for the exact flow constraint.
        CHECK(true_flow(pb, p) <= pb.backhaul_capacity * (1.0 + 1e-12));

        // A larger budget never lowers the optimum.
        AccessProblem richer = pb;
        richer.power_budget *= 1.5;
        CHECK(access_objective(richer, solve_access(richer)) >= access_objective(pb, p) * (1.0 - 1e-12));
    }

    // Equal bandwidths, zero floors, slack flow: active users share one marginal rate.
    for (int i = 0; i < 100; ++i)
    {
        AccessProblem pb;
        for (int n = 0; n < 5; ++n)
        {
            pb.gain.push_back(oracle::log_uniform(rng, 1.0, 1e3));
            pb.bandwidth.push_back(1e6);
            pb.min_rate.push_back(0.0);
        }
        pb.power_budget = oracle::uniform(rng, 0.1, 3.0);
        pb.backhaul_capacity = 1e12;
        const std::vector<double> p = solve_access(pb);
        double marginal = -1.0;
        for (std::size_t n = 0; n < p.size(); ++n)
        {
            if (p[n] <= 1e-12)
                continue;
            const double m = pb.gain[n] / (1.0 + pb.gain[n] * p[n]);
            if (marginal < 0.0)
                marginal = m;
            CHECK_THAT(m, WithinRel(marginal, 1e-6));
        }
    }
}
