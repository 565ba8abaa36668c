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

#pragma once

#include "oracles.hpp"

#include "flybs/access_power.hpp"
#include "flybs/backhaul_power.hpp"
#include "flybs/channel_model.hpp"
#include "flybs/orchestrator.hpp"
#include "flybs/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace fixture
{
    using namespace flybs;

    // Default scenario links for n users on one channel each.
    struct Network
    {
        ScenarioConfig config;
        Environment env;
        StepConfig step;
        std::vector<Position3D> users;
        Position3D flybs;
        PowerAllocation alloc;

        Geometry geometry() const { return {flybs, env.gbs, users}; }
    };

    inline Network network(int n_users, std::uint64_t seed, double c_min = 1e6)
    {
        Network net;
        net.config.n_users = n_users;
        net.config.c_min = c_min;
        net.env = net.config.environment();
        net.step = net.config.step_config(seed);
        std::mt19937_64 rng(seed);
        net.users = init_scenario(net.config, rng).positions();
        std::uniform_real_distribution<double> xy(0.0, net.config.area_side), z(net.config.h_min, net.config.h_max);
        net.flybs = {xy(rng), xy(rng), z(rng)};
        net.alloc = equal_split_powers(net.flybs, net.users, net.env, net.step);
        return net;
    }

    inline RadioLink link(double q, double alpha, double bandwidth, double noise)
    {
        RadioLink l;
        l.q_coeff = q;
        l.pathloss_exp = alpha;
        l.bandwidth = bandwidth;
        l.noise_power = noise;
        return l;
    }

    // Powers the orchestrator would hand to positioning: solved access, backhaul headroom.
    inline void solve_powers(Network &net)
    {
        const Geometry g = net.geometry();
        const AccessProblem ap = make_access_problem(net.alloc, g, net.env.radio, net.env.min_rate,
                                                     net.step.p_fly_max, net.step.taylor_step);
        net.alloc.p_fly = solve_access(ap);
        const BackhaulProblem bp = make_backhaul_problem(net.alloc, g, net.env.radio, net.env.min_rate, net.step.p_gbs_max);
        net.alloc.p_gbs = max_backhaul_allocation(bp);
    }

    // Chained linearization evaluated directly from its definition.
    inline oracle::ld linearized_oracle(const Position3D &l, const Position3D &ref, const Network &net, double xi)
    {
        oracle::ld total = 0;
        const Geometry g = net.geometry();
        for (std::size_t n = 0; n < net.users.size(); ++n)
        {
            const RadioLink &a = net.env.radio.access[n];
            const RadioLink &i = net.env.radio.interference[n];
            const Position3D &u = net.users[n];
            const oracle::ld interference = oracle::friis(net.alloc.p_gbs[n], i.q_coeff, i.pathloss_exp, distance(g.gbs, u));
            const oracle::ld k = oracle::ld(net.env.radio.assignment.user_bandwidth(n)) / oracle::kLn2 * a.q_coeff *
                                 net.alloc.p_fly[n] / (a.noise_power + interference);
            const oracle::ld floor_sq = oracle::ld(net.step.h_min - u.z) * (net.step.h_min - u.z);
            const oracle::ld d_sq = oracle::ld(squared_distance(ref, u));
            const oracle::ld j = std::max<oracle::ld>(0, std::floor((d_sq - floor_sq) / (floor_sq * xi)));
            const oracle::ld d0 = floor_sq * (1 + j * xi);
            const oracle::ld h = oracle::ld(a.pathloss_exp) / 2;
            total += k * (std::pow(d0, -h) - h * std::pow(d0, -h - 1) * (oracle::ld(squared_distance(l, u)) - d0));
        }
        return total;
    }

} // namespace fixture
