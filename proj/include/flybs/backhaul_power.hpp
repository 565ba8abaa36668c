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

#include "flybs/channel_model.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace flybs
{
    /// GBS per-channel power allocation at a fixed FlyBS position and fixed FlyBS powers.
    ///
    /// The sum capacity is convex and decreasing in every GBS power, the rate floors turn into
    /// per-channel caps, and the flow constraint sum_n C_n - C_{G,F} <= 0 is convex and separable
    /// over channels. Maximizing a convex function over this convex set is a concave program.
    struct BackhaulProblem
    {
        std::vector<std::size_t> user_channel;  // g_n
        std::vector<double> interference_gain;  // b_n = Q_{n,G} d_{n,G}^-alpha
        std::vector<double> signal_power;       // p^R_{n,F}, W
        std::vector<double> noise_power;        // sigma^2_n, W
        std::vector<double> bandwidth;          // B_{g_n}, Hz
        std::vector<double> min_rate;           // C_{n,min}, bit/s
        std::vector<double> channel_bandwidth;  // B_s, Hz
        std::vector<double> backhaul_gain;      // Q_{F,G} d_{F,G}^-alpha / sigma^2_{F,s}, 1/W
        double power_budget = 0.0;              // p_G,max, W

        std::size_t n_users() const { return user_channel.size(); }
        std::size_t n_channels() const { return channel_bandwidth.size(); }
        void validate() const;
    };

    /// Largest GBS power on channel g_n that keeps user n at its rate floor. Throws InfeasibleError
    /// (qos) when negative, i.e. the user misses its floor even without interference.
    /// Unbounded (+inf) for a zero rate floor.
    double qos_power_cap(std::size_t n, const BackhaulProblem &problem);

    /// Per-channel cap: minimum over the users sharing the channel, clipped to the budget.
    std::vector<double> channel_power_caps(const BackhaulProblem &problem);

    /// Sum access capacity as a function of the GBS powers.
    double backhaul_objective(const BackhaulProblem &problem, std::span<const double> p_gbs);

    /// sum_n C_n - C_{G,F}; feasible iff <= 0.
    double flow_residual(const BackhaulProblem &problem, std::span<const double> p_gbs);

    double backhaul_link_capacity(const BackhaulProblem &problem, std::span<const double> p_gbs);

    struct BackhaulOptions
    {
        int starts = 8;               // random feasible initializations (corners are added on top)
        std::uint64_t seed = 0;
        int max_linearizations = 60;  // per start
    };

    struct BackhaulSolution
    {
        std::vector<double> p_gbs;
        double objective = 0.0;
        std::vector<double> start_objectives; // objective at every initialization, in start order
        int linearizations = 0;               // total linearized subproblems solved
    };

    /// Iterative linearization: from each feasible start, repeatedly maximize the tangent of the
    /// objective over the feasible set, then keep the best local maximum (first one wins ties).
    /// Throws InfeasibleError (flow) if no allocation within caps and budget carries the access traffic.
    BackhaulSolution solve_backhaul(const BackhaulProblem &problem, const BackhaulOptions &options = {});

    /// Minimizes the flow residual over caps and budget; the feasibility witness used by the solver.
    std::vector<double> min_flow_allocation(const BackhaulProblem &problem);

    /// Capped water-filling: maximizes the backhaul capacity within caps and budget.
    std::vector<double> max_backhaul_allocation(const BackhaulProblem &problem);

    /// Minimizes sum_s weight[s] p_s over the feasible set (the linearized subproblem).
    std::vector<double> min_weighted_power(const BackhaulProblem &problem, std::span<const double> weight);

    BackhaulProblem make_backhaul_problem(const PowerAllocation &alloc, const Geometry &geometry,
                                          const RadioModel &radio, std::span<const double> min_rate,
                                          double power_budget);

} // namespace flybs
