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
#include "flybs/positioning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace flybs
{
    namespace
    {
        constexpr int kMaxSweeps = 200000;
        constexpr int kStallWindow = 1000;

        Position3D project_ball(const Position3D &p, const Ball &b)
        {
            const Position3D v = p - b.center;
            const double d = v.norm();
            if (d <= b.radius)
                return p;
            if (b.radius <= 0.0 || d == 0.0)
                return b.center;
            return b.center + v * (b.radius / d);
        }

        // One convex piece of the region: a ball, or the altitude slab when is_slab is set.
        struct Piece
        {
            bool is_slab = false;
            Ball ball;
            double lo = 0.0;
            double hi = 0.0;

            Position3D project(Position3D p) const
            {
                if (!is_slab)
                    return project_ball(p, ball);
                p.z = std::clamp(p.z, lo, hi);
                return p;
            }

            double violation(const Position3D &p) const
            {
                if (is_slab)
                    return std::max(lo - p.z, p.z - hi);
                return distance(p, ball.center) - ball.radius;
            }
        };

        [[noreturn]] void empty_region(const std::string &why)
        {
            throw InfeasibleError(Infeasibility::region, "region", why);
        }

        bool contains_ball(const Ball &outer, const Ball &inner)
        {
            return distance(outer.center, inner.center) + inner.radius <= outer.radius;
        }

        std::vector<Piece> essential_pieces(const FeasibilityRegion &region)
        {
            std::vector<Piece> pieces;
            pieces.push_back({true, {}, region.h_min, region.h_max});
            pieces.push_back({false, region.motion_ball, 0.0, 0.0});
            if (!contains_ball(region.backhaul_ball, region.motion_ball))
                pieces.push_back({false, region.backhaul_ball, 0.0, 0.0});
            for (const Ball &b : region.qos_balls)
                if (!contains_ball(b, region.motion_ball))
                    pieces.push_back({false, b, 0.0, 0.0});
            return pieces;
        }

        void check_certificates(const std::vector<Piece> &pieces)
        {
            for (std::size_t i = 1; i < pieces.size(); ++i)
            {
                const Ball &a = pieces[i].ball;
                if (a.center.z - a.radius > pieces[0].hi || a.center.z + a.radius < pieces[0].lo)
                    empty_region("a ball misses the altitude slab");
                for (std::size_t j = i + 1; j < pieces.size(); ++j)
                {
                    const Ball &b = pieces[j].ball;
                    if (distance(a.center, b.center) > a.radius + b.radius)
                        empty_region("two balls are disjoint");
                }
            }
        }

    } // namespace

    void FeasibilityRegion::validate() const
    {
        auto bad = [](const Ball &b) { return !(b.radius >= 0.0) || !b.center.is_finite(); };
        if (bad(motion_ball) || bad(backhaul_ball) || std::any_of(qos_balls.begin(), qos_balls.end(), bad))
            throw std::invalid_argument("FeasibilityRegion: ball radii must be nonnegative and centers finite.");
        if (!(h_min <= h_max))
            throw std::invalid_argument("FeasibilityRegion: empty altitude range.");
    }

    double FeasibilityRegion::violation(const Position3D &p) const
    {
        double v = std::max(h_min - p.z, p.z - h_max);
        v = std::max(v, distance(p, motion_ball.center) - motion_ball.radius);
        v = std::max(v, distance(p, backhaul_ball.center) - backhaul_ball.radius);
        for (const Ball &b : qos_balls)
            v = std::max(v, distance(p, b.center) - b.radius);
        return v;
    }

    FeasibilityRegion FeasibilityRegion::shrunk(double margin) const
    {
        FeasibilityRegion r = *this;
        auto shrink = [margin](Ball &b) { b.radius = std::max(0.0, b.radius - margin); };
        shrink(r.motion_ball);
        shrink(r.backhaul_ball);
        for (Ball &b : r.qos_balls)
            shrink(b);
        if (h_max - h_min > 2.0 * margin)
            r.h_min += margin, r.h_max -= margin;
        else
            r.h_min = r.h_max = 0.5 * (h_min + h_max);
        return r;
    }

    Position3D project(const Position3D &target, const FeasibilityRegion &region)
    {
        region.validate();
        if (region.contains(target))
            return target;

        const std::vector<Piece> pieces = essential_pieces(region);
        check_certificates(pieces);

        // Dykstra: each piece carries the correction it removed on its last visit.
        std::vector<Position3D> corr(pieces.size());
        Position3D x = target;
        double checkpoint_gap = std::numeric_limits<double>::infinity();
        const double scale = 1.0 + target.norm();
        for (int sweep = 1; sweep <= kMaxSweeps; ++sweep)
        {
            // The iterate can sit still for a sweep while the corrections are still moving, so
            // both count toward convergence.
            double change = 0.0;
            for (std::size_t i = 0; i < pieces.size(); ++i)
            {
                const Position3D y = x + corr[i];
                const Position3D next = pieces[i].project(y);
                change += distance(next, x) + distance(y - next, corr[i]);
                x = next;
                corr[i] = y - x;
            }
            double gap = 0.0;
            for (const Piece &pc : pieces)
                gap = std::max(gap, pc.violation(x));
            if (change <= 1e-14 * scale && gap <= 1e-10)
                return x;
            if (sweep % kStallWindow == 0)
            {
                if (gap > 1e-7 && gap >= 0.999 * checkpoint_gap)
                    empty_region("alternating projections stall with a gap of " + std::to_string(gap) + " m");
                checkpoint_gap = gap;
            }
        }
        double gap = 0.0;
        for (const Piece &pc : pieces)
            gap = std::max(gap, pc.violation(x));
        if (gap > 1e-7)
            empty_region("alternating projections did not close the gap");
        return x;
    }

    Position3D fallback_position(const FeasibilityRegion &region)
    {
        region.validate();
        const Ball &motion = region.motion_ball;
        std::vector<Ball> soft = region.qos_balls;
        soft.push_back(region.backhaul_ball);

        auto hard = [&](Position3D p) {
            p.z = std::clamp(p.z, region.h_min, region.h_max);
            p = project_ball(p, motion);
            // The motion ball may poke out of the slab; one more slab clamp keeps the altitude valid.
            p.z = std::clamp(p.z, region.h_min, region.h_max);
            return p;
        };
        auto cost = [&](const Position3D &p) {
            double c = 0.0;
            for (const Ball &b : soft)
            {
                const double v = distance(p, b.center) - b.radius;
                if (v > 0.0)
                    c += v * v;
            }
            return c;
        };
        auto grad = [&](const Position3D &p) {
            Position3D g;
            for (const Ball &b : soft)
            {
                const Position3D d = p - b.center;
                const double n = d.norm();
                if (n > b.radius && n > 0.0)
                    g += d * (2.0 * (n - b.radius) / n);
            }
            return g;
        };

        Position3D x = hard(motion.center);
        double fx = cost(x);
        double step = 1.0 / (2.0 * static_cast<double>(soft.size()));
        for (int it = 0; it < 2000 && fx > 0.0; ++it)
        {
            const Position3D g = grad(x);
            bool moved = false;
            for (int ls = 0; ls < 60; ++ls)
            {
                const Position3D y = hard(x - g * step);
                const double fy = cost(y);
                if (fy <= fx - 1e-4 * (x - y).squared_norm() / step && !(y == x))
                {
                    moved = distance(x, y) > 1e-12 * (1.0 + x.norm());
                    x = y, fx = fy;
                    step *= 2.0;
                    break;
                }
                step *= 0.5;
            }
            if (!moved)
                break;
        }
        return x;
    }

} // namespace flybs
