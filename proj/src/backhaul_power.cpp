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

#include "flybs/backhaul_power.hpp"
#include "flybs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace flybs
{
    namespace
    {
        constexpr double kLn2 = std::numbers::ln2;
        constexpr double kInf = std::numeric_limits<double>::infinity();

        // Per-channel view of the problem: phi_s(p) = sum_{n on s} C_n(p) - B_s log2(1 + h_s p).
        // phi_s is convex and strictly decreasing in p; everything below relies on both facts.
        class ChannelFlows
        {
        public:
            explicit ChannelFlows(const BackhaulProblem &pb) : pb_(pb), ub_(channel_power_caps(pb))
            {
                init_users();
                slope_lo_.resize(ub_.size());
                slope_hi_.resize(ub_.size());
                for (std::size_t s = 0; s < ub_.size(); ++s)
                {
                    slope_lo_[s] = phi_slope(s, 0.0);
                    slope_hi_[s] = ub_[s] > 0.0 ? phi_slope(s, ub_[s]) : slope_lo_[s];
                }
            }

            std::size_t size() const { return ub_.size(); }
            double upper(std::size_t s) const { return ub_[s]; }
            const std::vector<double> &upper() const { return ub_; }
            bool has_users(std::size_t s) const { return offsets_[s + 1] > offsets_[s]; }

            double rate(std::size_t s, double p) const
            {
                double r = 0.0;
                for_users(s, [&](std::size_t n) {
                    r += pb_.bandwidth[n] * std::log1p(pb_.signal_power[n] / (pb_.noise_power[n] + pb_.interference_gain[n] * p));
                });
                return r / kLn2;
            }

            double rate_slope(std::size_t s, double p) const
            {
                double r = 0.0;
                for_users(s, [&](std::size_t n) {
                    const double b = pb_.interference_gain[n];
                    const double den = pb_.noise_power[n] + b * p;
                    r -= pb_.bandwidth[n] * b * pb_.signal_power[n] / (den * (den + pb_.signal_power[n]));
                });
                return r / kLn2;
            }

            double phi(std::size_t s, double p) const
            {
                return rate(s, p) - pb_.channel_bandwidth[s] * std::log1p(pb_.backhaul_gain[s] * p) / kLn2;
            }

            double phi_slope(std::size_t s, double p) const
            {
                const double h = pb_.backhaul_gain[s];
                return rate_slope(s, p) - pb_.channel_bandwidth[s] * h / ((1.0 + h * p) * kLn2);
            }

            double phi_curvature(std::size_t s, double p) const
            {
                double r = 0.0;
                for_users(s, [&](std::size_t n) {
                    const double b = pb_.interference_gain[n];
                    const double den = pb_.noise_power[n] + b * p;
                    const double sig = pb_.signal_power[n];
                    // b^2 / den^2 - b^2 / (den + sig)^2, factored to avoid cancellation
                    r += pb_.bandwidth[n] * b * b * sig * (2.0 * den + sig) / (den * den * (den + sig) * (den + sig));
                });
                const double h = pb_.backhaul_gain[s];
                const double q = 1.0 + h * p;
                return (r + pb_.channel_bandwidth[s] * h * h / (q * q)) / kLn2;
            }

            double flow(std::span<const double> p) const
            {
                double g = 0.0;
                for (std::size_t s = 0; s < size(); ++s)
                    g += phi(s, p[s]);
                return g;
            }

            // Minimizer of phi_s(p) - t p over [0, ub_s], i.e. the root of phi_s'(p) = t.
            // phi_s' and phi_s'' in one pass over the channel's users.
            void slope_curvature(std::size_t s, double p, double &slope, double &curv) const
            {
                double d1 = 0.0, d2 = 0.0;
                for_users(s, [&](std::size_t n) {
                    const double b = pb_.interference_gain[n];
                    const double den = pb_.noise_power[n] + b * p;
                    const double sig = pb_.signal_power[n];
                    const double inv = 1.0 / (den * (den + sig));
                    const double bw = pb_.bandwidth[n] * b * sig * inv;
                    d1 -= bw;
                    d2 += bw * b * (2.0 * den + sig) * inv;
                });
                const double h = pb_.backhaul_gain[s];
                const double q = 1.0 / (1.0 + h * p);
                const double bh = pb_.channel_bandwidth[s] * h * q;
                slope = (d1 - bh) / kLn2;
                curv = (d2 + bh * h * q) / kLn2;
            }

            double channel_power(std::size_t s, double t, double guess) const
            {
                const double ub = ub_[s];
                if (!(ub > 0.0) || slope_lo_[s] >= t)
                    return 0.0;
                if (slope_hi_[s] <= t)
                    return ub;
                double lo = 0.0, hi = ub;
                double x = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
                for (int it = 0; it < 200; ++it)
                {
                    double slope = 0.0, curv = 0.0;
                    slope_curvature(s, x, slope, curv);
                    const double f = slope - t;
                    if (f == 0.0)
                        return x;
                    (f < 0.0 ? lo : hi) = x;
                    double next = x - f / curv;
                    if (!(next > lo && next < hi))
                        next = 0.5 * (lo + hi);
                    // Newton converges quadratically: a 1e-11 relative step leaves an error far below rounding.
                    const bool done = std::abs(next - x) <= 1e-11 * x || hi - lo <= 1e-15 * hi;
                    x = next;
                    if (done)
                        break;
                }
                return x;
            }

        private:
            void init_users()
            {
                const std::size_t n_ch = pb_.n_channels();
                offsets_.assign(n_ch + 1, 0);
                for (std::size_t ch : pb_.user_channel)
                    ++offsets_[ch + 1];
                for (std::size_t s = 0; s < n_ch; ++s)
                    offsets_[s + 1] += offsets_[s];
                users_.resize(pb_.n_users());
                std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
                for (std::size_t n = 0; n < pb_.n_users(); ++n)
                    users_[fill[pb_.user_channel[n]]++] = n;
            }

            template <typename F>
            void for_users(std::size_t s, F &&f) const
            {
                for (std::size_t i = offsets_[s]; i < offsets_[s + 1]; ++i)
                    f(users_[i]);
            }

            const BackhaulProblem &pb_;
            std::vector<double> ub_;
            std::vector<double> slope_lo_; // phi_s'(0)
            std::vector<double> slope_hi_; // phi_s'(ub_s)
            std::vector<std::size_t> offsets_;
            std::vector<std::size_t> users_;
        };

        double sum(std::span<const double> v)
        {
            double t = 0.0;
            for (double x : v)
                t += x;
            return t;
        }

        // Solves min sum_s weight_s p_s s.t. flow <= 0, sum p <= budget, 0 <= p <= caps through
        // the dual: per-channel stationarity weight_s + kappa + nu phi_s'(p_s) = 0, with nu found
        // by safeguarded Newton on log(nu) so that the flow constraint is tight, and kappa > 0
        // only if the budget would otherwise be exceeded.
        class WeightedPowerSolver
        {
        public:
            WeightedPowerSolver(const BackhaulProblem &pb, const ChannelFlows &flows) : pb_(pb), flows_(flows)
            {
                scale_ = 0.0;
                for (std::size_t s = 0; s < flows.size(); ++s)
                    scale_ += flows.rate(s, 0.0);
                scale_ = std::max(scale_, 1.0);
                // Keeps the returned point feasible when the flow is re-evaluated in a different summation order.
                slack_ = 1e-14 * scale_;
            }

            std::vector<double> solve(std::span<const double> weight)
            {
                std::vector<double> p = flow_tight(weight, 0.0);
                if (sum(p) <= pb_.power_budget)
                    return p;

                double k_lo = 0.0;
                double k_hi = 0.0;
                for (double w : weight)
                    k_hi = std::max(k_hi, w);
                k_hi = std::max(k_hi, 1e-12);
                std::vector<double> p_hi;
                for (int it = 0; it < 400; ++it)
                {
                    p_hi = flow_tight(weight, k_hi);
                    if (sum(p_hi) <= pb_.power_budget)
                        break;
                    k_lo = k_hi;
                    k_hi *= 2.0;
                }
                for (int it = 0; it < 200 && k_hi - k_lo > 1e-13 * k_hi; ++it)
                {
                    const double mid = 0.5 * (k_lo + k_hi);
                    std::vector<double> pm = flow_tight(weight, mid);
                    if (sum(pm) <= pb_.power_budget)
                        k_hi = mid, p_hi = std::move(pm);
                    else
                        k_lo = mid;
                }
                return p_hi;
            }

        private:
            // Flow-tight point for prices (weight + kappa); returns the feasible (flow <= 0) end.
            std::vector<double> flow_tight(std::span<const double> weight, double kappa)
            {
                const std::size_t n_ch = flows_.size();
                std::vector<double> p(n_ch, 0.0);
                if (guess_.size() != n_ch)
                    guess_.assign(n_ch, 0.0);

                auto eval = [&](double u, std::vector<double> &out, double &slope) {
                    const double inv_nu = std::exp(-u);
                    double g = slack_;
                    slope = 0.0;
                    for (std::size_t s = 0; s < n_ch; ++s)
                    {
                        const double t = -(weight[s] + kappa) * inv_nu;
                        out[s] = flows_.channel_power(s, t, guess_[s]);
                        g += flows_.phi(s, out[s]);
                        if (t != 0.0 && out[s] > 0.0 && out[s] < flows_.upper(s))
                            slope -= t * t / flows_.phi_curvature(s, out[s]);
                    }
                    return g;
                };

                // Bracket: G(u) is decreasing in u = log(nu).
                constexpr double kUMax = 600.0;
                double u = u_warm_;
                double slope = 0.0;
                double g = eval(u, p, slope);
                double u_lo = -kInf, u_hi = kInf;
                double g_hi = 0.0, slope_hi = 0.0;
                std::vector<double> p_hi;
                if (g <= 0.0)
                    u_hi = u, g_hi = g, slope_hi = slope, p_hi = p;
                else
                    u_lo = u;
                double step = 4.0;
                while (!std::isfinite(u_lo) || !std::isfinite(u_hi))
                {
                    const double next = std::isfinite(u_hi) ? u_hi - step : u_lo + step;
                    step *= 2.0;
                    if (next > kUMax)
                    {
                        // nu -> inf: every channel at its cap.
                        p_hi = flows_.upper();
                        if (flows_.flow(p_hi) > 0.0)
                            throw InfeasibleError(Infeasibility::flow, "flow", "no GBS allocation within the caps carries the access traffic");
                        return p_hi;
                    }
                    if (next < -kUMax)
                    {
                        std::vector<double> silent(n_ch, 0.0);
                        return flows_.flow(silent) + slack_ <= 0.0 ? silent : p_hi;
                    }
                    const double gn = eval(next, p, slope);
                    if (gn <= 0.0)
                        u_hi = next, g_hi = gn, slope_hi = slope, p_hi = p;
                    else
                        u_lo = next;
                }

                // Safeguarded Newton from the feasible end.
                const double tol = 1e-10 * scale_;
                u = u_hi;
                g = g_hi;
                slope = slope_hi;
                p = p_hi;
                for (int it = 0; it < 200; ++it)
                {
                    if (g <= 0.0 && g >= -tol)
                        break;
                    if (u_hi - u_lo <= 1e-14 * std::max(1.0, std::abs(u_hi)))
                        break;
                    double next = (slope < 0.0) ? u - g / slope : 0.5 * (u_lo + u_hi);
                    if (!(next > u_lo && next < u_hi))
                        next = 0.5 * (u_lo + u_hi);
                    u = next;
                    g = eval(u, p, slope);
                    if (g <= 0.0)
                        u_hi = u, p_hi = p;
                    else
                        u_lo = u;
                    guess_ = p;
                }
                u_warm_ = u_hi;
                guess_ = p_hi;
                return p_hi;
            }

            const BackhaulProblem &pb_;
            const ChannelFlows &flows_;
            double scale_ = 1.0;
            double slack_ = 0.0;
            double u_warm_ = 0.0;
            std::vector<double> guess_;
        };

        std::vector<double> min_flow_point(const BackhaulProblem &pb, const ChannelFlows &flows)
        {
            const std::size_t n_ch = flows.size();
            std::vector<double> p = flows.upper();
            if (sum(p) <= pb.power_budget)
                return p;
            // Budget price kappa: p_s minimizes phi_s + kappa p_s.
            double k_hi = 0.0;
            for (std::size_t s = 0; s < n_ch; ++s)
                k_hi = std::max(k_hi, -flows.phi_slope(s, 0.0));
            double k_lo = 0.0;
            std::vector<double> p_hi(n_ch, 0.0), trial(n_ch, 0.0);
            for (int it = 0; it < 300 && k_hi - k_lo > 1e-15 * k_hi; ++it)
            {
                const double mid = 0.5 * (k_lo + k_hi);
                for (std::size_t s = 0; s < n_ch; ++s)
                    trial[s] = flows.channel_power(s, -mid, trial[s]);
                if (sum(trial) <= pb.power_budget)
                    k_hi = mid, p_hi = trial;
                else
                    k_lo = mid;
            }
            return p_hi;
        }

        // Moves x along the segment toward a feasible witness until the flow constraint holds.
        std::vector<double> restore_flow(std::vector<double> x, std::span<const double> witness, const ChannelFlows &flows)
        {
            if (flows.flow(x) <= 0.0)
                return x;
            std::vector<double> trial(x.size()), best(witness.begin(), witness.end());
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 52; ++it)
            {
                const double mid = 0.5 * (lo + hi);
                for (std::size_t s = 0; s < x.size(); ++s)
                    trial[s] = x[s] + mid * (witness[s] - x[s]);
                if (flows.flow(trial) <= 0.0)
                    hi = mid, best = trial;
                else
                    lo = mid;
            }
            return best;
        }

        std::vector<double> objective_weights(const ChannelFlows &flows, std::span<const double> p)
        {
            std::vector<double> w(p.size());
            for (std::size_t s = 0; s < p.size(); ++s)
                w[s] = -flows.rate_slope(s, p[s]);
            return w;
        }

    } // namespace

    void BackhaulProblem::validate() const
    {
        const std::size_t n = user_channel.size();
        if (interference_gain.size() != n || signal_power.size() != n || noise_power.size() != n ||
            bandwidth.size() != n || min_rate.size() != n)
            throw std::invalid_argument("BackhaulProblem: per-user vectors must have equal length.");
        if (backhaul_gain.size() != channel_bandwidth.size())
            throw std::invalid_argument("BackhaulProblem: per-channel vectors must have equal length.");
        for (std::size_t i = 0; i < n; ++i)
        {
            if (user_channel[i] >= channel_bandwidth.size())
                throw std::invalid_argument("BackhaulProblem: user mapped to a nonexistent channel.");
            if (!(interference_gain[i] > 0.0) || !(noise_power[i] > 0.0) || !(bandwidth[i] > 0.0) ||
                !(signal_power[i] >= 0.0) || !(min_rate[i] >= 0.0))
                throw std::invalid_argument("BackhaulProblem: gains, noise and bandwidths must be positive.");
        }
        for (std::size_t s = 0; s < channel_bandwidth.size(); ++s)
            if (!(backhaul_gain[s] > 0.0) || !(channel_bandwidth[s] >= 0.0))
                throw std::invalid_argument("BackhaulProblem: backhaul gains must be positive.");
        if (!(power_budget > 0.0))
            throw std::invalid_argument("BackhaulProblem: GBS budget must be positive.");
    }

    double qos_power_cap(std::size_t n, const BackhaulProblem &pb)
    {
        if (pb.min_rate[n] <= 0.0)
            return kInf;
        const double sinr_floor = std::expm1(pb.min_rate[n] / pb.bandwidth[n] * kLn2);
        const double cap = (pb.signal_power[n] / sinr_floor - pb.noise_power[n]) / pb.interference_gain[n];
        if (cap < 0.0)
            throw InfeasibleError(Infeasibility::qos, "rate_floor",
                                  "user " + std::to_string(n) + " misses its rate floor even without GBS interference");
        return cap;
    }

    std::vector<double> channel_power_caps(const BackhaulProblem &pb)
    {
        std::vector<double> caps(pb.n_channels(), pb.power_budget);
        for (std::size_t n = 0; n < pb.n_users(); ++n)
        {
            double &c = caps[pb.user_channel[n]];
            c = std::min(c, qos_power_cap(n, pb));
        }
        return caps;
    }

    double backhaul_objective(const BackhaulProblem &pb, std::span<const double> p_gbs)
    {
        double total = 0.0;
        for (std::size_t n = 0; n < pb.n_users(); ++n)
        {
            const double interference = pb.interference_gain[n] * p_gbs[pb.user_channel[n]];
            total += shannon_rate(pb.bandwidth[n], pb.signal_power[n] / (pb.noise_power[n] + interference));
        }
        return total;
    }

    double backhaul_link_capacity(const BackhaulProblem &pb, std::span<const double> p_gbs)
    {
        double total = 0.0;
        for (std::size_t s = 0; s < pb.n_channels(); ++s)
            total += shannon_rate(pb.channel_bandwidth[s], pb.backhaul_gain[s] * p_gbs[s]);
        return total;
    }

    double flow_residual(const BackhaulProblem &pb, std::span<const double> p_gbs)
    {
        return backhaul_objective(pb, p_gbs) - backhaul_link_capacity(pb, p_gbs);
    }

    std::vector<double> min_flow_allocation(const BackhaulProblem &pb)
    {
        pb.validate();
        const ChannelFlows flows(pb);
        return min_flow_point(pb, flows);
    }

    std::vector<double> max_backhaul_allocation(const BackhaulProblem &pb)
    {
        pb.validate();
        const std::vector<double> caps = channel_power_caps(pb);
        const std::size_t n_ch = caps.size();
        std::vector<double> p(n_ch);
        // p_s = clamp(B_s / (ln2 lambda) - 1 / h_s, 0, cap_s); level = 1 / (ln2 lambda)
        auto fill = [&](double level) {
            double total = 0.0;
            for (std::size_t s = 0; s < n_ch; ++s)
            {
                p[s] = std::clamp(pb.channel_bandwidth[s] * level - 1.0 / pb.backhaul_gain[s], 0.0, caps[s]);
                if (pb.channel_bandwidth[s] == 0.0)
                    p[s] = 0.0;
                total += p[s];
            }
            return total;
        };
        if (sum(caps) <= pb.power_budget)
            return caps;
        double hi = 1.0;
        for (int k = 0; k < 2100 && fill(hi) < pb.power_budget; ++k)
            hi *= 2.0;
        double lo = 0.0;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it)
        {
            const double mid = 0.5 * (lo + hi);
            (fill(mid) <= pb.power_budget ? lo : hi) = mid;
        }
        fill(lo);
        return p;
    }

    std::vector<double> min_weighted_power(const BackhaulProblem &pb, std::span<const double> weight)
    {
        pb.validate();
        const ChannelFlows flows(pb);
        if (flows.flow(min_flow_point(pb, flows)) > 0.0)
            throw InfeasibleError(Infeasibility::flow, "flow", "no GBS allocation within caps and budget carries the access traffic");
        WeightedPowerSolver solver(pb, flows);
        return solver.solve(weight);
    }

    BackhaulSolution solve_backhaul(const BackhaulProblem &pb, const BackhaulOptions &options)
    {
        pb.validate();
        const ChannelFlows flows(pb);
        const std::size_t n_ch = flows.size();

        const std::vector<double> witness = min_flow_point(pb, flows);
        const double witness_flow = flows.flow(witness);
        if (witness_flow > 0.0)
            throw InfeasibleError(Infeasibility::flow, "flow",
                                  "best GBS allocation still leaves " + std::to_string(witness_flow) +
                                      " bit/s of access traffic uncarried");

        WeightedPowerSolver lin(pb, flows);

        std::vector<std::vector<double>> starts;
        {
            std::vector<double> corner = flows.upper();
            const double total = sum(corner);
            if (total > pb.power_budget)
                for (double &x : corner)
                    x *= pb.power_budget / total;
            starts.push_back(restore_flow(std::move(corner), witness, flows));
        }
        starts.push_back(lin.solve(std::vector<double>(n_ch, 1.0)));
        std::mt19937_64 rng(options.seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int k = 0; k < options.starts; ++k)
        {
            std::vector<double> x(n_ch);
            for (std::size_t s = 0; s < n_ch; ++s)
                x[s] = unit(rng) * flows.upper(s);
            const double total = sum(x);
            if (total > pb.power_budget)
                for (double &v : x)
                    v *= pb.power_budget / total;
            starts.push_back(restore_flow(std::move(x), witness, flows));
        }

        BackhaulSolution best;
        best.objective = -kInf;
        for (const auto &start : starts)
        {
            std::vector<double> x = start;
            double f = backhaul_objective(pb, x);
            best.start_objectives.push_back(f);
            for (int it = 0; it < options.max_linearizations; ++it)
            {
                std::vector<double> y = lin.solve(objective_weights(flows, x));
                ++best.linearizations;
                const double fy = backhaul_objective(pb, y);
                if (!(fy > f + 1e-12 * std::abs(f)))
                    break;
                x = std::move(y);
                f = fy;
            }
            // Later starts must win by a relative 1e-9, so near-ties keep the structured starts.
            if (best.p_gbs.empty() || f > best.objective + 1e-9 * std::abs(best.objective))
            {
                best.objective = f;
                best.p_gbs = std::move(x);
            }
        }
        return best;
    }

    BackhaulProblem make_backhaul_problem(const PowerAllocation &alloc, const Geometry &geometry,
                                          const RadioModel &radio, std::span<const double> min_rate,
                                          double power_budget)
    {
        BackhaulProblem pb;
        const std::size_t n_users = radio.n_users();
        pb.user_channel = radio.assignment.user_to_channel;
        pb.interference_gain.resize(n_users);
        pb.signal_power.resize(n_users);
        pb.noise_power.resize(n_users);
        pb.bandwidth.resize(n_users);
        pb.min_rate.assign(min_rate.begin(), min_rate.end());
        for (std::size_t n = 0; n < n_users; ++n)
        {
            pb.signal_power[n] = received_power(alloc.p_fly[n], radio.access[n], distance(geometry.flybs, geometry.users[n]));
            pb.interference_gain[n] = received_power(1.0, radio.interference[n], distance(geometry.gbs, geometry.users[n]));
            pb.noise_power[n] = radio.access[n].noise_power;
            pb.bandwidth[n] = radio.assignment.user_bandwidth(n);
        }
        const double d_fg = distance(geometry.flybs, geometry.gbs);
        pb.channel_bandwidth = radio.assignment.channel_bandwidths;
        pb.backhaul_gain.resize(radio.n_channels());
        for (std::size_t s = 0; s < radio.n_channels(); ++s)
            pb.backhaul_gain[s] = received_power(1.0, radio.backhaul[s], d_fg) / radio.backhaul[s].noise_power;
        pb.power_budget = power_budget;
        return pb;
    }

} // namespace flybs
