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

#include "flybs/propulsion.hpp"
#include "flybs/errors.hpp"
#include "flybs/numeric.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace flybs
{
    void PropulsionParams::validate() const
    {
        const double fields[] = {blade_profile_power, induced_power,  tip_speed,      mean_induced_velocity,
                                 fuselage_drag_ratio, air_density, rotor_solidity, rotor_disc_area};
        for (double f : fields)
            if (!(f > 0.0) || !std::isfinite(f))
                throw std::invalid_argument("PropulsionParams: every constant must be strictly positive.");
    }

    double propulsion_power(double v, const PropulsionParams &p)
    {
        const double v2 = v * v;
        const double blade = p.blade_profile_power * (1.0 + 3.0 * v2 / (p.tip_speed * p.tip_speed));
        const double parasite = 0.5 * p.fuselage_drag_ratio * p.air_density * p.rotor_solidity * p.rotor_disc_area * v2 * v;

        // sqrt(1 + x^2) - x == 1 / (sqrt(1 + x^2) + x); the second form does not cancel at high speed.
        const double x = v2 / (2.0 * p.mean_induced_velocity * p.mean_induced_velocity);
        const double induced = p.induced_power * std::sqrt(1.0 / (std::sqrt(1.0 + x * x) + x));

        return blade + parasite + induced;
    }

    MinPowerPoint min_power_speed(const PropulsionParams &params)
    {
        auto f = [&](double v) { return propulsion_power(v, params); };
        const double v = numeric::golden_section_min(f, 0.0, kSpeedSearchCap, 1e-7);
        return {v, f(v)};
    }

    double speed_threshold(double p_th, const PropulsionParams &params)
    {
        const MinPowerPoint min_pt = min_power_speed(params);
        if (p_th < min_pt.power)
            throw InfeasibleError(Infeasibility::propulsion_budget, "propulsion",
                                  "propulsion threshold " + std::to_string(p_th) +
                                      " W is below the minimum achievable power " + std::to_string(min_pt.power) + " W");
        if (p_th >= propulsion_power(kSpeedSearchCap, params))
            return kSpeedSearchCap;

        auto f = [&](double v) { return propulsion_power(v, params); };
        return numeric::bisect_increasing(f, p_th, min_pt.speed, kSpeedSearchCap, 1e-10).first;
    }

} // namespace flybs
