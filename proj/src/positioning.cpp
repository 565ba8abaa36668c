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

#include "flybs/errors.hpp"
#include "flybs/numeric.hpp"
#include "flybs/positioning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace flybs
{
    namespace
    {
        constexpr double kLn2 = std::numbers::ln2;
        constexpr double kTinyDistance = 1e-9; // m
        // Region tightening before projecting, so the exact audit holds despite rounding.
        constexpr double kRegionMargin = 1e-7; // m

        double signal_to_floor(std::size_t n, const PowerAllocation &alloc, const Geometry &geometry,
                               const RadioModel &radio)
        {
            const RadioLink &link = radio.access[n];
            return link.q_coeff * alloc.p_fly[n] / (link.noise_power + gbs_interference(n, alloc, geometry, radio));
        }

    } // namespace

    void PositioningConfig::validate() const
    {
        if (!(v_max >= 0.0) || !(v_threshold >= 0.0) || !(delta > 0.0))
            throw std::invalid_argument("PositioningConfig: speeds must be nonnegative and delta positive.");
        if (!(h_min <= h_max) || !(radius_cap > 0.0) || !(backhaul_top > 0.0))
            throw std::invalid_argument("PositioningConfig: invalid altitude range or bracket.");
        if (!(xi > 0.0) || multistart < 1)
            throw std::invalid_argument("PositioningConfig: xi must be positive and multistart >= 1.");
    }

    double qos_ball_radius(std::size_t n, const PowerAllocation &alloc, const Geometry &geometry,
                           const RadioModel &radio, double min_rate, double radius_cap)
    {
        const double snr_floor = std::expm1(min_rate / radio.assignment.user_bandwidth(n) * kLn2);
        if (!(snr_floor > 0.0))
            return radius_cap;
        const double k = signal_to_floor(n, alloc, geometry, radio);
        const double r = std::pow(k / snr_floor, 1.0 / radio.access[n].pathloss_exp);
        return std::min(r, radius_cap);
    }

    double motion_radius(double v_max, double v_threshold, double delta)
    {
        return std::min(v_max, v_threshold) * delta;
    }

    double min_user_distance(const Position3D &prev_pos, const Position3D &user, double motion_r, double h_min)
    {
        return std::max({h_min - user.z, distance(prev_pos, user) - motion_r, kTinyDistance});
    }

    double capacity_upper_bound(const PowerAllocation &alloc, const Geometry &geometry, const RadioModel &radio,
                                double motion_r, double h_min)
    {
        double total = 0.0;
        for (std::size_t n = 0; n < radio.n_users(); ++n)
        {
            const double d = min_user_distance(geometry.flybs, geometry.users[n], motion_r, h_min);
            const double k = signal_to_floor(n, alloc, geometry, radio);
            total += shannon_rate(radio.assignment.user_bandwidth(n), k * std::pow(d, -radio.access[n].pathloss_exp));
        }
        return total;
    }

    double backhaul_radius(std::span<const double> p_gbs, std::span<const RadioLink> links, double required,
                           double bracket_top)
    {
        auto capacity = [&](double d) { return backhaul_capacity(p_gbs, d, links); };
        if (capacity(bracket_top) >= required)
            return bracket_top;
        if (capacity(kTinyDistance) < required)
            throw InfeasibleError(Infeasibility::flow, "flow", "backhaul cannot carry the access bound at any distance");
        // -capacity is increasing in d; the first end keeps capacity >= required.
        const auto [lo, hi] = numeric::bisect_increasing([&](double d) { return -capacity(d); }, -required,
                                                         kTinyDistance, bracket_top, 1e-12 * bracket_top);
        (void)hi;
        return lo;
    }

    FeasibilityRegion build_region(const Position3D &prev_pos, const PowerAllocation &alloc, const Geometry &geometry,
                                   const RadioModel &radio, std::span<const double> min_rate,
                                   const PositioningConfig &config)
    {
        config.validate();
        Geometry at_prev = geometry;
        at_prev.flybs = prev_pos;

        FeasibilityRegion region;
        const double r = motion_radius(config.v_max, config.v_threshold, config.delta);
        region.motion_ball = {prev_pos, r};
        region.h_min = config.h_min;
        region.h_max = config.h_max;
        region.qos_balls.reserve(radio.n_users());
        for (std::size_t n = 0; n < radio.n_users(); ++n)
            region.qos_balls.push_back(
                {geometry.users[n], qos_ball_radius(n, alloc, at_prev, radio, min_rate[n], config.radius_cap)});
        const double required = capacity_upper_bound(alloc, at_prev, radio, r, config.h_min);
        region.backhaul_ball = {geometry.gbs, backhaul_radius(alloc.p_gbs, radio.backhaul, required, config.backhaul_top)};
        return region;
    }

    CapacityLowerBound::CapacityLowerBound(const PowerAllocation &alloc, const Geometry &geometry,
                                           const RadioModel &radio)
    {
        for (std::size_t n = 0; n < radio.n_users(); ++n)
        {
            const double k = signal_to_floor(n, alloc, geometry, radio);
            const double bw = radio.assignment.user_bandwidth(n);
            if (!(k > 0.0) || !(bw > 0.0))
                continue; // contributes a constant zero
            const double alpha = radio.access[n].pathloss_exp;
            users_.push_back(geometry.users[n]);
            scale_.push_back(bw / kLn2);
            a_.push_back(1.0 / k);
            x0_.push_back(std::pow(distance(geometry.flybs, geometry.users[n]), alpha));
            alpha_.push_back(alpha);
        }
    }

    double CapacityLowerBound::value(const Position3D &l) const
    {
        double total = 0.0;
        for (std::size_t i = 0; i < users_.size(); ++i)
        {
            const double x = std::pow(distance(l, users_[i]), alpha_[i]);
            const double x0 = x0_[i];
            total += scale_[i] * (std::log1p(1.0 / (a_[i] * x0)) - (x - x0) / (a_[i] * x0 * x0 + x0));
        }
        return total;
    }

    Position3D CapacityLowerBound::gradient(const Position3D &l) const
    {
        Position3D g;
        for (std::size_t i = 0; i < users_.size(); ++i)
        {
            const Position3D v = l - users_[i];
            const double d2 = v.squared_norm();
            const double x0 = x0_[i];
            // d/dl |l-u|^alpha = alpha |l-u|^(alpha-2) (l-u)
            const double dx = alpha_[i] * std::pow(d2, 0.5 * alpha_[i] - 1.0);
            g -= v * (scale_[i] * dx / (a_[i] * x0 * x0 + x0));
        }
        return g;
    }

    Position3D reference_point(const FeasibilityRegion &region, const PowerAllocation &alloc,
                               const Geometry &geometry, const RadioModel &radio, int multistart)
    {
        const CapacityLowerBound bound(alloc, geometry, radio);
        const Position3D prev = region.motion_ball.center;
        const double r = std::max(region.motion_ball.radius, 1e-3);

        const Position3D g0 = bound.gradient(prev);
        const double g0_norm = g0.norm();
        if (!(g0_norm > 0.0))
            return project(prev, region);
        // Gradient-mapping residuals are measured for a step that moves 1 m at the previous position.
        const double unit = 1.0 / g0_norm;

        std::vector<Position3D> starts{prev, prev + g0 * (r * unit)};
        Position3D centroid;
        for (const Position3D &u : geometry.users)
            centroid += u;
        if (!geometry.users.empty())
            centroid *= 1.0 / static_cast<double>(geometry.users.size());
        centroid.z = region.h_min;
        starts.push_back(centroid);
        const Position3D to_gbs = geometry.gbs - prev;
        if (to_gbs.norm() > 0.0)
            starts.push_back(prev + to_gbs * (r / to_gbs.norm()));
        starts.resize(static_cast<std::size_t>(std::clamp<int>(multistart, 1, static_cast<int>(starts.size()))));

        Position3D best;
        double best_value = -std::numeric_limits<double>::infinity();
        for (const Position3D &s : starts)
        {
            Position3D x = project(s, region);
            double fx = bound.value(x);
            double step = r * unit;
            for (int it = 0; it < 500; ++it)
            {
                const Position3D g = bound.gradient(x);
                if (distance(x, project(x + g * unit, region)) <= 1e-7)
                    break;
                bool accepted = false;
                for (int ls = 0; ls < 60; ++ls)
                {
                    const Position3D y = project(x + g * step, region);
                    const double fy = bound.value(y);
                    if (fy >= fx + 1e-4 * g.dot(y - x) && !(y == x))
                    {
                        x = y, fx = fy;
                        step *= 2.0;
                        accepted = true;
                        break;
                    }
                    step *= 0.5;
                }
                if (!accepted)
                    break;
            }
            if (fx > best_value)
                best = x, best_value = fx;
        }
        return best;
    }

    double ladder_anchor(double d_sq, double floor_sq, double xi)
    {
        if (!(floor_sq > 0.0))
            return d_sq;
        const double j = std::max(0.0, std::floor((d_sq - floor_sq) / (floor_sq * xi)));
        return floor_sq * (1.0 + j * xi);
    }

    double LinearizedCapacity::value(const Position3D &l) const
    {
        double total = 0.0;
        for (std::size_t n = 0; n < users.size(); ++n)
            total += c[n] - beta[n] * squared_distance(l, users[n]);
        return total;
    }

    LinearizedCapacity linearize_capacity(const Position3D &ref_point, const PowerAllocation &alloc,
                                          const Geometry &geometry, const RadioModel &radio, double h_min,
                                          double xi)
    {
        LinearizedCapacity lin;
        lin.users = geometry.users;
        lin.c.resize(radio.n_users());
        lin.beta.resize(radio.n_users());
        for (std::size_t n = 0; n < radio.n_users(); ++n)
        {
            const Position3D &u = geometry.users[n];
            const double half_alpha = 0.5 * radio.access[n].pathloss_exp;
            const double floor = h_min - u.z;
            const double d0 = ladder_anchor(squared_distance(ref_point, u), floor > 0.0 ? floor * floor : 0.0, xi);
            const double k = radio.assignment.user_bandwidth(n) / kLn2 * signal_to_floor(n, alloc, geometry, radio);
            const double base = std::pow(d0, -half_alpha);
            lin.beta[n] = k * half_alpha * base / d0;
            lin.c[n] = k * base * (1.0 + half_alpha);
        }
        return lin;
    }

    RadialFit radial_fit(const LinearizedCapacity &lin)
    {
        RadialFit fit;
        for (std::size_t n = 0; n < lin.users.size(); ++n)
        {
            fit.zeta += lin.beta[n];
            fit.center += lin.users[n] * lin.beta[n];
        }
        if (fit.zeta > 0.0)
            fit.center *= 1.0 / fit.zeta;
        double w = 0.0;
        for (std::size_t n = 0; n < lin.users.size(); ++n)
            w += lin.c[n] - lin.beta[n] * squared_distance(lin.users[n], fit.center);
        fit.w_const = w;
        return fit;
    }

    RadialFit radial_fit(const Position3D &ref_point, const PowerAllocation &alloc, const Geometry &geometry,
                         const RadioModel &radio, double h_min, double xi)
    {
        return radial_fit(linearize_capacity(ref_point, alloc, geometry, radio, h_min, xi));
    }

    PositionStep position_step(const PowerAllocation &alloc, const Geometry &geometry, const RadioModel &radio,
                               std::span<const double> min_rate, const PositioningConfig &config)
    {
        PositionStep out;
        const Position3D prev = geometry.flybs;
        out.region = build_region(prev, alloc, geometry, radio, min_rate, config);
        if (out.region.motion_ball.radius <= 0.0)
        {
            if (!out.region.contains(prev))
                throw InfeasibleError(Infeasibility::region, "region", "frozen FlyBS sits outside the region");
            out.position = out.reference = prev;
            out.fit = radial_fit(prev, alloc, geometry, radio, config.h_min, config.xi);
            return out;
        }
        const FeasibilityRegion tight = out.region.shrunk(kRegionMargin);
        try
        {
            out.reference = reference_point(tight, alloc, geometry, radio, config.multistart);
            out.fit = radial_fit(out.reference, alloc, geometry, radio, config.h_min, config.xi);
            out.position = project(out.fit.center, tight);
        }
        catch (const InfeasibleError &e)
        {
            // Users held at their floors pin their QoS spheres to the previous position; the margin
            // can then empty a region whose only point is that position.
            if (e.kind() != Infeasibility::region || !out.region.contains(prev))
                throw;
            out.position = out.reference = prev;
            out.fit = radial_fit(prev, alloc, geometry, radio, config.h_min, config.xi);
        }
        return out;
    }

} // namespace flybs
