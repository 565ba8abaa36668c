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

namespace flybs
{
    /// Rotary-wing propulsion constants. All strictly positive.
    struct PropulsionParams
    {
        double blade_profile_power = 79.86;  // L_0, W
        double induced_power = 88.63;        // L_i, W
        double tip_speed = 120.0;            // U_tip, m/s
        double mean_induced_velocity = 4.03; // v_0h, m/s
        double fuselage_drag_ratio = 0.6;    // eta_0
        double air_density = 1.225;          // rho, kg/m^3
        double rotor_solidity = 0.05;        // s_r
        double rotor_disc_area = 0.503;      // A, m^2

        void validate() const;
    };

    /// Upper end of every speed search, m/s.
    inline constexpr double kSpeedSearchCap = 100.0;

    /// Propulsion power (W) at horizontal speed v >= 0. Equals L_0 + L_i exactly at v = 0.
    double propulsion_power(double v, const PropulsionParams &params);

    struct MinPowerPoint
    {
        double speed; // v*, m/s
        double power; // P(v*), W
    };

    /// Golden-section search for the minimum-power speed on [0, kSpeedSearchCap], 1e-6 m/s.
    MinPowerPoint min_power_speed(const PropulsionParams &params);

    /// Largest speed on the increasing branch of the power curve whose power does not exceed `p_th`.
    /// Returns kSpeedSearchCap when the budget covers it. Throws InfeasibleError when p_th < P(v*).
    double speed_threshold(double p_th, const PropulsionParams &params);

} // namespace flybs
