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

#include "flybs/errors.hpp"
#include "flybs/numeric.hpp"
#include "flybs/propulsion.hpp"

#include <cmath>
#include <random>

using namespace flybs;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("Propulsion - power curve", "[propulsion]")
{
    const PropulsionParams p;
    CHECK(propulsion_power(0.0, p) == p.blade_profile_power + p.induced_power);

    const double k = 0.5 * p.fuselage_drag_ratio * p.air_density * p.rotor_solidity * p.rotor_disc_area;
    CHECK_THAT(propulsion_power(1e4, p) / 1e12, WithinRel(k, 0.01));

    // Direct transcription of the model in long double.
    for (double v : {0.5, 3.0, 10.0, 18.0, 30.0, 60.0})
    {
        const long double v2 = (long double)v * v, v0 = p.mean_induced_velocity;
        const long double ref = p.blade_profile_power * (1 + 3 * v2 / (p.tip_speed * (long double)p.tip_speed)) +
                                k * v2 * v +
                                p.induced_power * std::sqrt(std::sqrt(1 + v2 * v2 / (4 * v0 * v0 * v0 * v0)) - v2 / (2 * v0 * v0));
        CHECK_THAT(propulsion_power(v, p), WithinRel(double(ref), 1e-12));
    }

    PropulsionParams bad = p;
    bad.rotor_disc_area = 0.0;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("Propulsion - minimum power speed", "[propulsion]")
{
    const PropulsionParams p;
    const MinPowerPoint m = min_power_speed(p);
    CHECK(m.power < propulsion_power(0.0, p));
    for (int i = 0; i <= 1000; ++i)
        CHECK(m.power <= propulsion_power(kSpeedSearchCap * i / 1000.0, p) + 1e-9);

    PropulsionParams draggy = p;
    draggy.fuselage_drag_ratio = 1e6;
    draggy.air_density = 1.0;
    draggy.rotor_solidity = 1.0;
    draggy.rotor_disc_area = 1.0;
    CHECK(min_power_speed(draggy).speed < 1e-3);
}

TEST_CASE("Propulsion - speed threshold", "[propulsion]")
{
    const PropulsionParams p;
    const MinPowerPoint m = min_power_speed(p);
    CHECK_THAT(speed_threshold(m.power, p), WithinAbs(m.speed, 1e-3));
    CHECK_THAT(speed_threshold(propulsion_power(2.0 * m.speed, p), p), WithinAbs(2.0 * m.speed, 1e-5));
    CHECK_THROWS_AS(speed_threshold(m.power - 1.0, p), InfeasibleError);
    CHECK(speed_threshold(1e9, p) == kSpeedSearchCap);

    // Hover-power crossing on the rising branch, by plain bisection here.
    const double hover = propulsion_power(0.0, p);
    double lo = m.speed, hi = kSpeedSearchCap;
    for (int i = 0; i < 200; ++i)
    {
        const double mid = 0.5 * (lo + hi);
        (propulsion_power(mid, p) <= hover ? lo : hi) = mid;
    }
    CHECK(lo > m.speed);
    CHECK_THAT(speed_threshold(hover, p), WithinAbs(lo, 1e-6));

    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> v(m.speed, 60.0);
    for (int i = 0; i < 500; ++i)
    {
        const double s = v(rng);
        CHECK_THAT(speed_threshold(propulsion_power(s, p), p), WithinAbs(s, 1e-5));
    }
}

TEST_CASE("Propulsion - bisection keeps its bracket", "[propulsion]")
{
    const PropulsionParams p;
    const double target = 200.0;
    bool ok = true;
    auto f = [&](double s) { return propulsion_power(s, p); };
    numeric::bisect_increasing(f, target, min_power_speed(p).speed, kSpeedSearchCap, 1e-10,
                               [&](double, double, double f_lo, double f_hi) { ok = ok && f_lo <= target && target <= f_hi; });
    CHECK(ok);
}
