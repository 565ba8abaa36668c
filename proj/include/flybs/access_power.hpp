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
#include <span>
#include <vector>

namespace flybs
{
    /// FlyBS power allocation at a fixed position and fixed GBS powers.
    ///
    /// Maximizes sum_n B_n log2(1 + a_n p_n) subject to the per-user rate floors, the FlyBS power
    /// budget, and the flow-conservation bound with each log term replaced by its tangent at the
    /// tau-grid point below `taylor_anchor[n]`. Tangents of a concave function lie above it, so any
    /// point meeting the linearized bound also meets the exact one.
    struct AccessProblem
    {
        std::vector<double> gain;          // a_n = Q d^-alpha / (sigma^2 + I), 1/W
        std::vector<double> bandwidth;     // B_{g_n}, Hz
        std::vector<double> min_rate;      // C_{n,min}, bit/s
        std::vector<double> taylor_anchor; // W; empty means "use the rate floors"
        double power_budget = 0.0;         // p_F,max, W
        double backhaul_capacity = 0.0;    // C_{G,F}, bit/s
        double taylor_step = 1e-3;         // tau, W

        std::size_t size() const { return gain.size(); }
        void validate() const;
    };

    /// Minimum p_fly[n] meeting the user's rate floor: (2^(C_min/B) - 1) / a_n.
    double qos_power_floor(std::size_t n, const AccessProblem &problem);

    std::vector<double> qos_power_floors(const AccessProblem &problem);

    /// Tangent of log2(1 + y) at y0 = s tau, s = floor(a x / tau), evaluated at y = a x.
    /// Never below log2(1 + a x); tight when a x lies on the grid.
    double taylor_log_upper_bound(double a, double x, double tau);

    /// Linearized flow constraint sum_n slope[n] p[n] <= rhs.
    struct LinearFlowBound
    {
        std::vector<double> slope; // bit/s per W
        double rhs = 0.0;          // bit/s
        double lhs(std::span<const double> p) const;
    };

    LinearFlowBound linearize_flow(const AccessProblem &problem);

    double access_objective(const AccessProblem &problem, std::span<const double> p);

    /// Globally optimal solution of the linearized concave program (dual water-filling with one
    /// multiplier per coupling constraint). Throws InfeasibleError (qos) if the floors exceed the
    /// budget, or (flow) if the floors violate the linearized flow bound.
    std::vector<double> solve_access(const AccessProblem &problem);

    /// Builds the subproblem for the current state: gains from the FlyBS position and GBS powers,
    /// backhaul capacity from the current GBS powers.
    AccessProblem make_access_problem(const PowerAllocation &alloc, const Geometry &geometry, const RadioModel &radio,
                                      std::span<const double> min_rate, double power_budget, double taylor_step);

} // namespace flybs
