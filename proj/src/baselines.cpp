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

#include "flybs/access_power.hpp"
#include "flybs/errors.hpp"
#include "flybs/orchestrator.hpp"

#include <algorithm>
#include <cmath>

namespace flybs
{
    namespace
    {
        double water_level(const std::vector<double> &floors, double budget)
        {
            auto total = [&](double level) {
                double t = 0.0;
                for (double f : floors)
                    t += std::max(f, level);
                return t;
            };
            double lo = 0.0, hi = budget;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * budget; ++it)
            {
                const double mid = 0.5 * (lo + hi);
                (total(mid) <= budget ? lo : hi) = mid;
            }
            return lo;
        }

    } // namespace

    PowerAllocation equal_split_powers(const Position3D &flybs, const std::vector<Position3D> &users,
                                       const Environment &env, const StepConfig &config)
    {
        const RadioModel &radio = env.radio;
        const Geometry g{flybs, env.gbs, users};
        PowerAllocation alloc;
        alloc.p_gbs.assign(radio.n_channels(), config.p_gbs_max / static_cast<double>(std::max<std::size_t>(radio.n_channels(), 1)));
        alloc.p_fly.assign(radio.n_users(), 0.0);

        const AccessProblem ap = make_access_problem(alloc, g, radio, env.min_rate, config.p_fly_max, config.taylor_step);
        const std::vector<double> floors = qos_power_floors(ap);
        double floor_total = 0.0;
        for (double f : floors)
            floor_total += f;
        if (floor_total > config.p_fly_max)
        {
            for (std::size_t n = 0; n < floors.size(); ++n)
                alloc.p_fly[n] = floors[n] * config.p_fly_max / floor_total;
            return alloc;
        }
        const double level = water_level(floors, config.p_fly_max);
        for (std::size_t n = 0; n < floors.size(); ++n)
            alloc.p_fly[n] = std::max(floors[n], level);

        // Caps from the rate floors at these FlyBS powers; lowering GBS power only helps the users.
        const BackhaulProblem bp = make_backhaul_problem(alloc, g, radio, env.min_rate, config.p_gbs_max);
        for (std::size_t n = 0; n < bp.n_users(); ++n)
        {
            double cap = 0.0;
            try
            {
                cap = qos_power_cap(n, bp);
            }
            catch (const InfeasibleError &)
            {
            }
            double &p = alloc.p_gbs[bp.user_channel[n]];
            p = std::min(p, cap);
        }

        const double d_fg = distance(flybs, env.gbs);
        auto flow = [&](const PowerAllocation &a) { return sum_capacity(a, g, radio) - backhaul_capacity(a, d_fg, radio.backhaul); };
        if (flow(alloc) <= 0.0)
            return alloc;
        const std::vector<double> full = alloc.p_fly;
        PowerAllocation trial = alloc;
        auto blend = [&](double t) {
            for (std::size_t n = 0; n < full.size(); ++n)
                trial.p_fly[n] = floors[n] + t * (full[n] - floors[n]);
        };
        blend(0.0);
        if (flow(trial) > 0.0)
            return trial;
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 100; ++it)
        {
            const double mid = 0.5 * (lo + hi);
            blend(mid);
            (flow(trial) <= 0.0 ? lo : hi) = mid;
        }
        blend(lo);
        return trial;
    }

    namespace
    {
        StepResult baseline_at(const FlybsState &entry, const Position3D &position, const std::vector<Position3D> &users,
                               const Environment &env, const StepConfig &config)
        {
            StepResult out;
            out.state = {position, equal_split_powers(position, users, env, config)};
            StepMetrics &m = out.metrics;
            const Geometry g{position, env.gbs, users};
            m.per_user_capacity = user_capacities(out.state.alloc, g, env.radio);
            for (double c : m.per_user_capacity)
                m.sum_capacity += c;
            m.position = position;
            m.alloc = out.state.alloc;
            m.iterations = 1;
            m.residuals = audit_constraints(entry.position, out.state, users, env, config);
            m.feasible = m.residuals.satisfied(config.audit_tolerance);
            m.entry_capacity = m.sum_capacity;
            m.entry_feasible = m.feasible;
            return out;
        }
    } // namespace

    StepResult baseline_static(const FlybsState &entry, const Position3D &anchor, const std::vector<Position3D> &users,
                               const Environment &env, const StepConfig &config)
    {
        return baseline_at(entry, anchor, users, env, config);
    }

    StepResult baseline_centroid_track(const FlybsState &entry, const std::vector<Position3D> &users,
                                       const Environment &env, const StepConfig &config)
    {
        Position3D target;
        for (const Position3D &u : users)
            target += u;
        if (!users.empty())
            target *= 1.0 / static_cast<double>(users.size());
        target.z = config.h_min;
        const Position3D gap = target - entry.position;
        const double reach = std::max(0.0, config.allowed_speed() * config.delta - 1e-7);
        Position3D next = target;
        if (gap.norm() > reach)
            next = entry.position + gap * (reach / gap.norm());
        next.z = std::clamp(next.z, config.h_min, config.h_max);
        return baseline_at(entry, next, users, env, config);
    }

} // namespace flybs
