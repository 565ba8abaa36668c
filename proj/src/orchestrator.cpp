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

#include "flybs/orchestrator.hpp"
#include "flybs/access_power.hpp"
#include "flybs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace flybs
{
    namespace
    {
        struct Candidate
        {
            FlybsState state;
            double capacity = 0.0;
            ConstraintResiduals residuals;
            bool feasible = false;
        };

        class StepContext
        {
        public:
            StepContext(const FlybsState &entry, const std::vector<Position3D> &users, const Environment &env,
                        const StepConfig &config)
                : entry_(entry), users_(users), env_(env), config_(config)
            {
            }

            Geometry geometry(const Position3D &flybs) const { return {flybs, env_.gbs, users_}; }

            Candidate evaluate(const FlybsState &s) const
            {
                Candidate c;
                c.state = s;
                c.capacity = sum_capacity(s.alloc, geometry(s.position), env_.radio);
                c.residuals = audit_constraints(entry_.position, s, users_, env_, config_);
                c.feasible = c.residuals.satisfied(config_.audit_tolerance);
                return c;
            }

            std::vector<double> access(const PowerAllocation &alloc, const Position3D &at, bool warm) const
            {
                AccessProblem pb = make_access_problem(alloc, geometry(at), env_.radio, env_.min_rate,
                                                       config_.p_fly_max, config_.taylor_step);
                if (!warm)
                    pb.taylor_anchor.clear();
                try
                {
                    return solve_access(pb);
                }
                catch (const InfeasibleError &e)
                {
                    if (e.kind() != Infeasibility::flow || pb.taylor_anchor.empty())
                        throw;
                    // Tangents at the floors are the tightest possible; retry there.
                    pb.taylor_anchor.clear();
                    return solve_access(pb);
                }
            }

            std::vector<double> access_floors(const PowerAllocation &alloc, const Position3D &at) const
            {
                const AccessProblem pb = make_access_problem(alloc, geometry(at), env_.radio, env_.min_rate,
                                                             config_.p_fly_max, config_.taylor_step);
                return qos_power_floors(pb);
            }

            std::vector<double> backhaul(const PowerAllocation &alloc, const Position3D &at) const
            {
                const BackhaulProblem pb =
                    make_backhaul_problem(alloc, geometry(at), env_.radio, env_.min_rate, config_.p_gbs_max);
                return solve_backhaul(pb, config_.backhaul).p_gbs;
            }

            // Access then backhaul at a fixed position. When the current GBS powers cannot carry
            // even the rate floors, the backhaul is re-solved for the floors first.
            PowerAllocation powers(PowerAllocation alloc, const Position3D &at) const
            {
                try
                {
                    alloc.p_fly = access(alloc, at, true);
                }
                catch (const InfeasibleError &e)
                {
                    if (e.kind() != Infeasibility::flow)
                        throw;
                    alloc.p_fly = access_floors(alloc, at);
                    alloc.p_gbs = backhaul(alloc, at);
                    alloc.p_fly = access(alloc, at, false);
                }
                alloc.p_gbs = backhaul(alloc, at);
                return alloc;
            }

            // GBS powers with the most backhaul headroom within the rate-floor caps; the positioning
            // region is built from these so that the backhaul ball is not pinned to the current
            // distance by a flow-tight allocation.
            PowerAllocation planning_powers(PowerAllocation alloc, const Position3D &at) const
            {
                const BackhaulProblem pb =
                    make_backhaul_problem(alloc, geometry(at), env_.radio, env_.min_rate, config_.p_gbs_max);
                alloc.p_gbs = max_backhaul_allocation(pb);
                return alloc;
            }

            const FlybsState &entry() const { return entry_; }

        private:
            const FlybsState &entry_;
            const std::vector<Position3D> &users_;
            const Environment &env_;
            const StepConfig &config_;
        };

        StepMetrics metrics_for(const Candidate &c, const std::vector<Position3D> &users, const Environment &env)
        {
            StepMetrics m;
            m.sum_capacity = c.capacity;
            m.per_user_capacity = user_capacities(c.state.alloc, {c.state.position, env.gbs, users}, env.radio);
            m.position = c.state.position;
            m.alloc = c.state.alloc;
            m.feasible = c.feasible;
            m.residuals = c.residuals;
            return m;
        }

        // One flight leg toward the users' centroid at the lowest altitude, used when the rate
        // floors cannot be met where the FlyBS is.
        Position3D recovery_position(const Position3D &from, const std::vector<Position3D> &users,
                                     const StepConfig &config)
        {
            Position3D target;
            for (const Position3D &u : users)
                target += u;
            if (!users.empty())
                target *= 1.0 / static_cast<double>(users.size());
            target.z = config.h_min;
            const Position3D gap = target - from;
            const double reach = std::max(0.0, config.allowed_speed() * config.delta - 1e-7);
            Position3D next = target;
            if (gap.norm() > reach)
                next = from + gap * (reach / gap.norm());
            next.z = std::clamp(next.z, config.h_min, config.h_max);
            return next;
        }

        // Powers at a given position that violate as little as the solvers allow.
        FlybsState fallback_state(const StepContext &ctx, const StepConfig &config, const Position3D &at)
        {
            FlybsState s = ctx.entry();
            s.position = at;
            try
            {
                s.alloc = ctx.powers(s.alloc, at);
                return s;
            }
            catch (const InfeasibleError &)
            {
            }
            std::vector<double> floors = ctx.access_floors(s.alloc, at);
            double total = 0.0;
            for (double f : floors)
                total += f;
            if (total > config.p_fly_max)
                for (double &f : floors)
                    f *= config.p_fly_max / total;
            s.alloc.p_fly = floors;
            try
            {
                s.alloc.p_gbs = ctx.backhaul(s.alloc, at);
            }
            catch (const InfeasibleError &)
            {
            }
            return s;
        }

    } // namespace

    void StepConfig::validate() const
    {
        std::vector<std::string> bad;
        if (!(epsilon > 0.0))
            bad.push_back("epsilon must be positive");
        if (max_iters < 1)
            bad.push_back("max_iters must be at least 1");
        if (!(delta > 0.0))
            bad.push_back("delta must be positive");
        if (!(v_f_max > 0.0))
            bad.push_back("v_f_max must be positive");
        if (!(h_min > 0.0) || !(h_min <= h_max))
            bad.push_back("altitude range must satisfy 0 < h_min <= h_max");
        if (!(p_fly_max > 0.0) || !(p_gbs_max > 0.0))
            bad.push_back("power budgets must be positive");
        if (!(taylor_step > 0.0) || !(xi > 0.0))
            bad.push_back("taylor_step and xi must be positive");
        if (multistart < 1 || backhaul.starts < 0 || backhaul.max_linearizations < 1)
            bad.push_back("solver start counts must be positive");
        if (!(audit_tolerance >= 0.0))
            bad.push_back("audit_tolerance must be nonnegative");
        try
        {
            propulsion.validate();
            if (p_pr_th < propulsion_power(0.0, propulsion))
                bad.push_back("p_pr_th is below the hover power " + std::to_string(propulsion_power(0.0, propulsion)) + " W");
        }
        catch (const std::invalid_argument &e)
        {
            bad.push_back(e.what());
        }
        if (!bad.empty())
            throw ConfigError(std::move(bad));
    }

    double StepConfig::allowed_speed() const
    {
        return std::min(v_f_max, speed_threshold(p_pr_th, propulsion));
    }

    PositioningConfig StepConfig::positioning() const
    {
        PositioningConfig pc;
        pc.v_max = v_f_max;
        pc.v_threshold = speed_threshold(p_pr_th, propulsion);
        pc.delta = delta;
        pc.h_min = h_min;
        pc.h_max = h_max;
        pc.radius_cap = radius_cap;
        pc.backhaul_top = backhaul_top;
        pc.xi = xi;
        pc.multistart = multistart;
        return pc;
    }

    double ConstraintResiduals::max() const
    {
        const auto v = values();
        return *std::max_element(v.begin(), v.end());
    }

    ConstraintResiduals audit_constraints(const Position3D &prev, const FlybsState &state,
                                          const std::vector<Position3D> &users, const Environment &env,
                                          const StepConfig &config)
    {
        ConstraintResiduals r;
        const Geometry g{state.position, env.gbs, users};
        r.qos = -std::numeric_limits<double>::infinity();
        double total = 0.0;
        for (std::size_t n = 0; n < env.radio.n_users(); ++n)
        {
            const double c = user_capacity(n, state.alloc, g, env.radio);
            total += c;
            r.qos = std::max(r.qos, env.min_rate[n] - c);
        }
        if (env.radio.n_users() == 0)
            r.qos = 0.0;
        r.altitude = std::max(config.h_min - state.position.z, state.position.z - config.h_max);
        const double v = distance(prev, state.position) / config.delta;
        r.speed = v - config.v_f_max;
        r.propulsion = propulsion_power(v, config.propulsion) - config.p_pr_th;
        r.flow = total - backhaul_capacity(state.alloc, distance(state.position, env.gbs), env.radio.backhaul);
        r.gbs_power = state.alloc.total_gbs() - config.p_gbs_max;
        r.flybs_power = state.alloc.total_fly() - config.p_fly_max;
        return r;
    }

    StepResult time_step(const FlybsState &entry, const std::vector<Position3D> &users, const Environment &env,
                         const StepConfig &config)
    {
        const StepContext ctx(entry, users, env, config);
        const PositioningConfig pc = config.positioning();
        const Geometry prev_geometry = ctx.geometry(entry.position);

        std::vector<Candidate> candidates{ctx.evaluate(entry)};
        std::vector<double> trace_capacity, trace_movement;
        std::string note;
        int iterations = 0;
        bool settled = false;
        bool recovered = false;
        std::optional<Candidate> recovery;

        FlybsState cur = entry;
        for (int it = 1; it <= config.max_iters; ++it)
        {
            iterations = it;
            try
            {
                cur.alloc = ctx.powers(cur.alloc, cur.position);
            }
            catch (const InfeasibleError &e)
            {
                note = e.what();
                if (recovered || e.kind() == Infeasibility::region)
                    break;
                recovered = true;
                cur.position = recovery_position(entry.position, users, config);
                trace_capacity.push_back(candidates.back().capacity);
                trace_movement.push_back(distance(cur.position, entry.position));
                try
                {
                    cur.alloc = ctx.powers(cur.alloc, cur.position);
                    note.clear();
                }
                catch (const InfeasibleError &e2)
                {
                    note = e2.what();
                    recovery = ctx.evaluate(fallback_state(ctx, config, cur.position));
                    break;
                }
            }
            candidates.push_back(ctx.evaluate(cur));

            PositionStep ps;
            try
            {
                cur.alloc = ctx.planning_powers(cur.alloc, cur.position);
                ps = position_step(cur.alloc, prev_geometry, env.radio, env.min_rate, pc);
            }
            catch (const InfeasibleError &e)
            {
                note = e.what();
                trace_capacity.push_back(candidates.back().capacity);
                trace_movement.push_back(0.0);
                break;
            }
            const double moved = distance(ps.position, cur.position);
            cur.position = ps.position;
            candidates.push_back(ctx.evaluate(cur));
            trace_capacity.push_back(candidates.back().capacity);
            trace_movement.push_back(moved);
            if (moved < config.epsilon)
            {
                settled = true;
                break;
            }
        }
        if (note.empty() && !settled)
        {
            // Powers matched to the final position; after a settled alternation the last
            // candidates already sit within epsilon of it.
            try
            {
                cur.alloc = ctx.powers(cur.alloc, cur.position);
                candidates.push_back(ctx.evaluate(cur));
            }
            catch (const InfeasibleError &e)
            {
                note = e.what();
            }
        }

        const Candidate *best = nullptr;
        for (const Candidate &c : candidates)
            if (c.feasible && (!best || c.capacity > best->capacity))
                best = &c;

        Candidate chosen;
        if (best)
            chosen = *best;
        else if (recovery)
            chosen = *recovery;
        else
        {
            chosen = ctx.evaluate(fallback_state(ctx, config, entry.position));
            if (chosen.capacity < candidates.front().capacity)
                chosen = candidates.front();
        }

        StepResult out;
        out.state = chosen.state;
        out.metrics = metrics_for(chosen, users, env);
        out.metrics.iterations = iterations;
        out.metrics.iteration_capacity = std::move(trace_capacity);
        out.metrics.iteration_movement = std::move(trace_movement);
        out.metrics.note = std::move(note);
        out.metrics.entry_capacity = candidates.front().capacity;
        out.metrics.entry_feasible = candidates.front().feasible;
        return out;
    }

} // namespace flybs
