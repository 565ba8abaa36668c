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
#include "flybs/geometry.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace flybs
{
    struct Ball
    {
        Position3D center;
        double radius = 0.0;

        bool contains(const Position3D &p, double tol = 0.0) const { return distance(p, center) <= radius + tol; }
    };

    /// Convex set of admissible next positions: QoS balls around users, the motion ball around
    /// the previous position, the altitude slab and the backhaul ball around the GBS.
    struct FeasibilityRegion
    {
        std::vector<Ball> qos_balls;
        Ball motion_ball;
        double h_min = 0.0;
        double h_max = 0.0;
        Ball backhaul_ball;

        void validate() const;
        /// Largest violation over all constraints, in meters (<= 0 inside).
        double violation(const Position3D &p) const;
        bool contains(const Position3D &p, double tol = 0.0) const { return violation(p) <= tol; }
        /// Same region with every constraint tightened by `margin` meters.
        FeasibilityRegion shrunk(double margin) const;
    };

    /// W - zeta |l - center|^2.
    struct RadialFit
    {
        double w_const = 0.0; // bit/s
        double zeta = 0.0;    // bit/s per m^2
        Position3D center;

        double value(const Position3D &l) const { return w_const - zeta * squared_distance(l, center); }
    };

    struct PositioningConfig
    {
        double v_max = 25.0;          // m/s
        double v_threshold = 25.0;    // m/s, from the propulsion budget
        double delta = 1.0;           // s
        double h_min = 100.0;         // m
        double h_max = 300.0;         // m
        double radius_cap = 7071.0;   // m, cap on QoS ball radii
        double backhaul_top = 2207.0; // m, upper end of the backhaul-radius bracket
        double xi = 0.01;             // relative step of the distance ladder
        int multistart = 4;

        void validate() const;
    };

    /// Distance from user n within which its rate floor holds at the current powers.
    double qos_ball_radius(std::size_t n, const PowerAllocation &alloc, const Geometry &geometry,
                           const RadioModel &radio, double min_rate, double radius_cap);

    double motion_radius(double v_max, double v_threshold, double delta);

    /// Lower bound on the user distance after any move of at most motion_r that respects the
    /// altitude floor. Strictly positive.
    double min_user_distance(const Position3D &prev_pos, const Position3D &user, double motion_r, double h_min);

    /// Upper bound on the sum access capacity over all reachable positions, built from
    /// min_user_distance.
    double capacity_upper_bound(const PowerAllocation &alloc, const Geometry &geometry, const RadioModel &radio,
                                double motion_r, double h_min);

    /// Largest FlyBS-GBS distance at which the backhaul still carries `required` bit/s, by bisection.
    /// Returns `bracket_top` when even that distance suffices; throws InfeasibleError (flow) when
    /// no positive distance does.
    double backhaul_radius(std::span<const double> p_gbs, std::span<const RadioLink> links, double required,
                           double bracket_top);

    FeasibilityRegion build_region(const Position3D &prev_pos, const PowerAllocation &alloc, const Geometry &geometry,
                                   const RadioModel &radio, std::span<const double> min_rate,
                                   const PositioningConfig &config);

    /// Euclidean projection onto the region (Dykstra's alternating projections).
    /// Throws InfeasibleError (region) when the region is certified empty.
    Position3D project(const Position3D &target, const FeasibilityRegion &region);

    /// Concave lower bound on the sum capacity, built from tangents in d^alpha at the previous
    /// user distances.
    class CapacityLowerBound
    {
    public:
        CapacityLowerBound(const PowerAllocation &alloc, const Geometry &geometry, const RadioModel &radio);

        double value(const Position3D &l) const;
        Position3D gradient(const Position3D &l) const;

    private:
        std::vector<Position3D> users_;
        std::vector<double> scale_;  // B / ln 2
        std::vector<double> a_;      // (sigma^2 + I) / (Q p)
        std::vector<double> x0_;     // d_prev^alpha
        std::vector<double> alpha_;
    };

    /// Maximizer of the capacity lower bound over the region (projected gradient, multistart).
    Position3D reference_point(const FeasibilityRegion &region, const PowerAllocation &alloc,
                               const Geometry &geometry, const RadioModel &radio, int multistart = 4);

    /// Squared-distance anchor on the ladder a (1 + j xi), j = 0, 1, ..., at or below d_sq,
    /// where a is the squared height of the altitude floor above the user.
    double ladder_anchor(double d_sq, double floor_sq, double xi);

    /// Per-user terms of the linearized capacity c_n - beta_n |l - u_n|^2.
    struct LinearizedCapacity
    {
        std::vector<double> c;
        std::vector<double> beta;
        std::vector<Position3D> users;

        double value(const Position3D &l) const;
    };

    LinearizedCapacity linearize_capacity(const Position3D &ref_point, const PowerAllocation &alloc,
                                          const Geometry &geometry, const RadioModel &radio, double h_min,
                                          double xi);

    RadialFit radial_fit(const LinearizedCapacity &lin);

    RadialFit radial_fit(const Position3D &ref_point, const PowerAllocation &alloc, const Geometry &geometry,
                         const RadioModel &radio, double h_min, double xi);

    struct PositionStep
    {
        Position3D position;
        Position3D reference;
        RadialFit fit;
        FeasibilityRegion region;
    };

    /// One positioning update: region, reference point, radial fit, projection of the fit
    /// center. geometry.flybs is the previous position.
    PositionStep position_step(const PowerAllocation &alloc, const Geometry &geometry, const RadioModel &radio,
                               std::span<const double> min_rate, const PositioningConfig &config);

    /// Closest point to prev_pos within the motion ball and altitude slab that minimizes the
    /// squared violations of the QoS and backhaul balls. Used when the region is empty.
    Position3D fallback_position(const FeasibilityRegion &region);

} // namespace flybs
