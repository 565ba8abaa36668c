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

#include "flybs/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace flybs
{
    namespace
    {
        constexpr double kTwoPi = 2.0 * std::numbers::pi;

        // Folds a coordinate back into [lo, hi]; flips the velocity sign once per wall hit.
        double reflect(double x, double lo, double hi, double &direction)
        {
            const double width = hi - lo;
            if (width <= 0.0)
                return lo;
            for (int bounce = 0; bounce < 64 && (x < lo || x > hi); ++bounce)
            {
                x = x < lo ? 2.0 * lo - x : 2.0 * hi - x;
                direction = -direction;
            }
            return std::clamp(x, lo, hi);
        }

        // Moves `p` by `step` along `heading` inside the box, reflecting off its walls.
        void walk(Position3D &p, double &heading, double step, double lo, double hi)
        {
            double dx = std::cos(heading), dy = std::sin(heading);
            p.x = reflect(p.x + step * dx, lo, hi, dx);
            p.y = reflect(p.y + step * dy, lo, hi, dy);
            heading = std::atan2(dy, dx);
        }

        Position3D uniform_in_disc(const Position3D &center, double radius, std::mt19937_64 &rng)
        {
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            const double r = radius * std::sqrt(unit(rng));
            const double a = kTwoPi * unit(rng);
            return {center.x + r * std::cos(a), center.y + r * std::sin(a), 0.0};
        }

        void clamp_to_area(Position3D &p, double side)
        {
            p.x = std::clamp(p.x, 0.0, side);
            p.y = std::clamp(p.y, 0.0, side);
        }

    } // namespace

    std::vector<Position3D> World::positions() const
    {
        std::vector<Position3D> p;
        p.reserve(users.size());
        for (const UserState &u : users)
            p.push_back(u.position);
        return p;
    }

    World init_scenario(const ScenarioConfig &config, std::mt19937_64 &rng)
    {
        config.validate();
        const MobilityConfig &m = config.mobility;
        const double side = config.area_side;
        std::uniform_real_distribution<double> coord(0.0, side);
        std::uniform_real_distribution<double> inner(m.cluster_radius, side - m.cluster_radius);
        std::uniform_real_distribution<double> angle(0.0, kTwoPi);
        std::uniform_int_distribution<int> pick(0, m.n_clusters - 1);

        World w;
        w.clusters.resize(static_cast<std::size_t>(m.n_clusters));
        for (ClusterState &c : w.clusters)
        {
            c.center = {inner(rng), inner(rng), 0.0};
            c.heading = angle(rng);
        }
        const int walkers = config.n_users - config.n_users / 2;
        w.users.resize(static_cast<std::size_t>(config.n_users));
        for (int n = 0; n < config.n_users; ++n)
        {
            UserState &u = w.users[static_cast<std::size_t>(n)];
            if (n < walkers)
            {
                u.kind = MobilityKind::walker;
                u.position = {coord(rng), coord(rng), 0.0};
                u.heading = angle(rng);
            }
            else
            {
                u.kind = MobilityKind::cluster_member;
                u.cluster = pick(rng);
                u.position = uniform_in_disc(w.clusters[static_cast<std::size_t>(u.cluster)].center, m.cluster_radius, rng);
                clamp_to_area(u.position, side);
            }
        }
        return w;
    }

    void mobility_step(World &world, const ScenarioConfig &config, double delta, std::mt19937_64 &rng)
    {
        const MobilityConfig &m = config.mobility;
        const double side = config.area_side;
        std::uniform_real_distribution<double> angle(0.0, kTwoPi);

        const double before = world.time;
        world.time += delta;
        const bool turn = std::floor(world.time / m.turn_period) > std::floor(before / m.turn_period);

        for (ClusterState &c : world.clusters)
        {
            walk(c.center, c.heading, m.cluster_speed * delta, m.cluster_radius, side - m.cluster_radius);
            if (turn)
                c.heading = angle(rng);
        }
        for (UserState &u : world.users)
        {
            if (u.kind == MobilityKind::walker)
            {
                walk(u.position, u.heading, m.walker_speed * delta, 0.0, side);
                if (turn)
                    u.heading = angle(rng);
            }
            else
            {
                const Position3D &center = world.clusters[static_cast<std::size_t>(u.cluster)].center;
                u.position = uniform_in_disc(center, m.cluster_radius, rng);
                clamp_to_area(u.position, side);
            }
        }
    }

} // namespace flybs
