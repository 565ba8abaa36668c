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

#include "flybs/backhaul_power.hpp"
#include "flybs/channel_model.hpp"
#include "flybs/geometry.hpp"
#include "flybs/positioning.hpp"
#include "flybs/propulsion.hpp"

#include <array>
#include <string>
#include <vector>

namespace flybs
{
    struct StepConfig
    {
        double epsilon = 0.1;      // m, movement below which the alternation stops
        int max_iters = 20;
        double delta = 1.0;        // s, time-step length
        double p_pr_th = 200.0;    // W, propulsion power threshold
        double v_f_max = 25.0;     // m/s
        double h_min = 100.0;      // m
        double h_max = 300.0;      // m
        double p_fly_max = 1.0;    // W
        double p_gbs_max = 3.981;  // W
        double taylor_step = 1e-3; // W
        double xi = 0.01;
        int multistart = 4;
        double radius_cap = 7071.0;   // m
        double backhaul_top = 2207.0; // m
        double audit_tolerance = 1e-6;
        PropulsionParams propulsion;
        BackhaulOptions backhaul;

        /// Throws ConfigError listing every invalid field, including a propulsion threshold that
        /// not even hovering meets.
        void validate() const;
        /// min(v_f_max, speed_threshold(p_pr_th)).
        double allowed_speed() const;
        PositioningConfig positioning() const;
    };

    /// Everything that stays fixed while the users move.
    struct Environment
    {
        RadioModel radio;
        Position3D gbs;
        std::vector<double> min_rate; // bit/s per user
    };

    struct FlybsState
    {
        Position3D position;
        PowerAllocation alloc;
    };

    /// Signed residuals of the system constraints; <= 0 means satisfied.
    struct ConstraintResiduals
    {
        double qos = 0.0;         // max_n (C_min - C_n), bit/s
        double altitude = 0.0;    // m
        double speed = 0.0;       // realized speed - v_f_max, m/s
        double propulsion = 0.0;  // P(v) - p_pr_th, W
        double flow = 0.0;        // sum_n C_n - C_{G,F}, bit/s
        double gbs_power = 0.0;   // W
        double flybs_power = 0.0; // W

        static constexpr std::array<const char *, 7> names{"res_rate_floor", "res_altitude", "res_speed", "res_propulsion",
                                                            "res_flow", "res_gbs_power", "res_flybs_power"};
        std::array<double, 7> values() const { return {qos, altitude, speed, propulsion, flow, gbs_power, flybs_power}; }
        double max() const;
        bool satisfied(double tol) const { return max() <= tol; }
    };

    /// Evaluates every constraint exactly for a move from `prev` to `state`.
    ConstraintResiduals audit_constraints(const Position3D &prev, const FlybsState &state,
                                          const std::vector<Position3D> &users, const Environment &env,
                                          const StepConfig &config);

    struct StepMetrics
    {
        double sum_capacity = 0.0;
        std::vector<double> per_user_capacity;
        Position3D position;
        PowerAllocation alloc;
        int iterations = 0;
        bool feasible = false;
        ConstraintResiduals residuals;
        std::vector<double> iteration_capacity; // sum capacity after each alternation
        std::vector<double> iteration_movement; // m, position change in each alternation
        std::string note;                       // first subsolver infeasibility, if any
        double entry_capacity = 0.0;            // entry state evaluated at the new user positions
        bool entry_feasible = false;
    };

    struct StepResult
    {
        FlybsState state;
        StepMetrics metrics;
    };

    /// One time step: alternate access power, backhaul power and positioning until the position
    /// settles, then keep the best audited candidate. Never returns a lower sum capacity than the
    /// entry state.
    StepResult time_step(const FlybsState &entry, const std::vector<Position3D> &users, const Environment &env,
                         const StepConfig &config);

    /// Hover at `anchor` with equal-split powers, audited like the full pipeline.
    StepResult baseline_static(const FlybsState &entry, const Position3D &anchor, const std::vector<Position3D> &users,
                               const Environment &env, const StepConfig &config);

    /// Move toward the user centroid at the lowest altitude, as fast as allowed, equal-split powers.
    StepResult baseline_centroid_track(const FlybsState &entry, const std::vector<Position3D> &users,
                                       const Environment &env, const StepConfig &config);

    /// Equal split subject to the rate floors and caps, then access powers pulled toward their
    /// floors until the backhaul carries the traffic.
    PowerAllocation equal_split_powers(const Position3D &flybs, const std::vector<Position3D> &users,
                                       const Environment &env, const StepConfig &config);

} // namespace flybs
