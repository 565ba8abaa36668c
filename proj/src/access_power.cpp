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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace flybs
{
    namespace
    {
        constexpr double kLn2 = std::numbers::ln2;

        struct Tangent
        {
            double intercept; // bit/s at p = 0
            double slope;     // bit/s per W
        };

        // B log2(1 + a p) <= B [log2(1 + y0) + (a p - y0) / ((1 + y0) ln 2)], y0 = s * tau with
        // s = floor(a * anchor / tau), the same grid as taylor_log_upper_bound.
        Tangent user_tangent(double a, double bandwidth, double anchor, double tau)
        {
            const double s = std::floor(a * anchor / tau);
            const double y0 = s * tau;
            return {bandwidth * (std::log1p(y0) / kLn2 - y0 / ((1.0 + y0) * kLn2)),
                    bandwidth * a / ((1.0 + y0) * kLn2)};
        }

        // KKT stationarity: p_n = max(floor_n, B_n / (ln2 (lambda + mu c_n)) - 1 / a_n).
        class WaterFill
        {
        public:
            WaterFill(const AccessProblem &problem, std::span<const double> floors, std::span<const double> slope)
                : pb_(problem), floors_(floors), slope_(slope)
            {
            }

            double power(std::size_t n, double lambda, double mu) const
            {
                const double price = lambda + mu * slope_[n];
                const double p = pb_.bandwidth[n] / (kLn2 * price) - 1.0 / pb_.gain[n];
                return std::max(floors_[n], p);
            }

            void fill(double lambda, double mu, std::vector<double> &p) const
            {
                for (std::size_t n = 0; n < p.size(); ++n)
                    p[n] = power(n, lambda, mu);
            }

            double total(double lambda, double mu) const
            {
                double sum = 0.0;
                for (std::size_t n = 0; n < pb_.size(); ++n)
                    sum += power(n, lambda, mu);
                return sum;
            }

            double flow(double lambda, double mu) const
            {
                double sum = 0.0;
                for (std::size_t n = 0; n < pb_.size(); ++n)
                    sum += slope_[n] * power(n, lambda, mu);
                return sum;
            }

            // Budget price at which every user sits on its floor (for mu = 0).
            double lambda_all_floors(double mu) const
            {
                double hi = 0.0;
                for (std::size_t n = 0; n < pb_.size(); ++n)
                {
                    const double marginal = pb_.bandwidth[n] * pb_.gain[n] / (kLn2 * (1.0 + pb_.gain[n] * floors_[n]));
                    hi = std::max(hi, marginal - mu * slope_[n]);
                }
                return std::max(hi, 0.0);
            }

            // Smallest lambda >= 0 keeping the total power within budget; returns the feasible end.
            double budget_price(double mu) const
            {
                if (mu > 0.0 && total(0.0, mu) <= pb_.power_budget)
                    return 0.0;
                double hi = lambda_all_floors(mu);
                if (hi <= 0.0)
                    return 0.0;
                double lo = hi;
                while (total(lo, mu) <= pb_.power_budget)
                {
                    lo *= 0.5;
                    if (lo < 1e-300)
                        return lo;
                }
                for (int it = 0; it < 200; ++it)
                {
                    const double mid = 0.5 * (lo + hi);
                    if (mid <= lo || mid >= hi)
                        break;
                    if (total(mid, mu) <= pb_.power_budget)
                        hi = mid;
                    else
                        lo = mid;
                }
                return hi;
            }

        private:
            const AccessProblem &pb_;
            std::span<const double> floors_;
            std::span<const double> slope_;
        };

    } // namespace

    void AccessProblem::validate() const
    {
        const std::size_t n = gain.size();
        if (bandwidth.size() != n || min_rate.size() != n || (!taylor_anchor.empty() && taylor_anchor.size() != n))
            throw std::invalid_argument("AccessProblem: per-user vectors must have equal length.");
        for (std::size_t i = 0; i < n; ++i)
        {
            if (!(gain[i] > 0.0) || !std::isfinite(gain[i]))
                throw std::invalid_argument("AccessProblem: effective gains must be positive.");
            if (!(bandwidth[i] > 0.0))
                throw std::invalid_argument("AccessProblem: bandwidths must be positive.");
            if (!(min_rate[i] >= 0.0))
                throw std::invalid_argument("AccessProblem: rate floors must be non-negative.");
        }
        if (!(taylor_step > 0.0))
            throw std::invalid_argument("AccessProblem: Taylor step must be positive.");
        if (!(power_budget >= 0.0) || !(backhaul_capacity >= 0.0))
            throw std::invalid_argument("AccessProblem: budget and backhaul capacity must be non-negative.");
    }

    double qos_power_floor(std::size_t n, const AccessProblem &problem)
    {
        return std::expm1(problem.min_rate[n] / problem.bandwidth[n] * kLn2) / problem.gain[n];
    }

    std::vector<double> qos_power_floors(const AccessProblem &problem)
    {
        std::vector<double> f(problem.size());
        for (std::size_t n = 0; n < f.size(); ++n)
            f[n] = qos_power_floor(n, problem);
        return f;
    }

    double taylor_log_upper_bound(double a, double x, double tau)
    {
        const double s = std::floor(a * x / tau);
        const double y0 = s * tau;
        return std::log2(a) + (std::log((1.0 + y0) / a) + (a * x - y0) / (1.0 + y0)) / kLn2;
    }

    double LinearFlowBound::lhs(std::span<const double> p) const
    {
        double sum = 0.0;
        for (std::size_t n = 0; n < p.size(); ++n)
            sum += slope[n] * p[n];
        return sum;
    }

    LinearFlowBound linearize_flow(const AccessProblem &problem)
    {
        const std::vector<double> anchor = problem.taylor_anchor.empty() ? qos_power_floors(problem) : problem.taylor_anchor;
        LinearFlowBound bound;
        bound.slope.resize(problem.size());
        bound.rhs = problem.backhaul_capacity;
        for (std::size_t n = 0; n < problem.size(); ++n)
        {
            const Tangent t = user_tangent(problem.gain[n], problem.bandwidth[n], anchor[n], problem.taylor_step);
            bound.slope[n] = t.slope;
            bound.rhs -= t.intercept;
        }
        return bound;
    }

    double access_objective(const AccessProblem &problem, std::span<const double> p)
    {
        double sum = 0.0;
        for (std::size_t n = 0; n < problem.size(); ++n)
            sum += shannon_rate(problem.bandwidth[n], problem.gain[n] * p[n]);
        return sum;
    }

    std::vector<double> solve_access(const AccessProblem &problem)
    {
        problem.validate();
        const std::vector<double> floors = qos_power_floors(problem);
        const LinearFlowBound flow = linearize_flow(problem);

        double floor_total = 0.0;
        for (double f : floors)
            floor_total += f;
        if (floor_total > problem.power_budget)
            throw InfeasibleError(Infeasibility::qos, "flybs_power",
                                  "rate floors need " + std::to_string(floor_total) + " W, budget is " +
                                      std::to_string(problem.power_budget) + " W");
        if (flow.lhs(floors) > flow.rhs)
            throw InfeasibleError(Infeasibility::flow, "flow",
                                  "rate floors exceed the linearized backhaul bound by " +
                                      std::to_string(flow.lhs(floors) - flow.rhs) + " bit/s");

        std::vector<double> p(problem.size());
        if (problem.size() == 0 || floor_total == problem.power_budget)
            return floors;

        const WaterFill wf(problem, floors, flow.slope);

        // Budget alone.
        const double lambda0 = wf.budget_price(0.0);
        wf.fill(lambda0, 0.0, p);
        if (flow.lhs(p) <= flow.rhs)
            return p;

        // Flow binds: bisect its price; the budget price is re-solved at every trial.
        double mu_lo = 0.0;
        double mu_hi = 0.0;
        for (std::size_t n = 0; n < problem.size(); ++n)
        {
            const double marginal =
                problem.bandwidth[n] * problem.gain[n] / (kLn2 * (1.0 + problem.gain[n] * floors[n]));
            mu_hi = std::max(mu_hi, marginal / flow.slope[n]);
        }
        double lambda_hi = wf.budget_price(mu_hi);
        for (int it = 0; it < 200; ++it)
        {
            const double mid = 0.5 * (mu_lo + mu_hi);
            if (mid <= mu_lo || mid >= mu_hi)
                break;
            const double lambda = wf.budget_price(mid);
            if (wf.flow(lambda, mid) <= flow.rhs)
                mu_hi = mid, lambda_hi = lambda;
            else
                mu_lo = mid;
        }
        wf.fill(lambda_hi, mu_hi, p);
        return p;
    }

    AccessProblem make_access_problem(const PowerAllocation &alloc, const Geometry &geometry, const RadioModel &radio,
                                      std::span<const double> min_rate, double power_budget, double taylor_step)
    {
        AccessProblem pb;
        const std::size_t n_users = radio.n_users();
        pb.gain.resize(n_users);
        pb.bandwidth.resize(n_users);
        pb.min_rate.assign(min_rate.begin(), min_rate.end());
        for (std::size_t n = 0; n < n_users; ++n)
        {
            const RadioLink &link = radio.access[n];
            const double d = distance(geometry.flybs, geometry.users[n]);
            const double interference = gbs_interference(n, alloc, geometry, radio);
            pb.gain[n] = received_power(1.0, link, d) / (link.noise_power + interference);
            pb.bandwidth[n] = radio.assignment.user_bandwidth(n);
        }
        pb.taylor_anchor = alloc.p_fly;
        pb.power_budget = power_budget;
        pb.backhaul_capacity = backhaul_capacity(alloc, distance(geometry.flybs, geometry.gbs), radio.backhaul);
        pb.taylor_step = taylor_step;
        return pb;
    }

} // namespace flybs
