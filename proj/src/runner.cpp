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
#include "flybs/scenario.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstring>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace flybs
{
    namespace
    {
        constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
        constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

        void hash_positions(std::uint64_t &h, const std::vector<Position3D> &users)
        {
            for (const Position3D &p : users)
                for (double v : {p.x, p.y, p.z})
                {
                    unsigned char bytes[sizeof(double)];
                    std::memcpy(bytes, &v, sizeof v);
                    for (unsigned char b : bytes)
                        h = (h ^ b) * kFnvPrime;
                }
        }

        Position3D start_anchor(const ScenarioConfig &config, const std::vector<Position3D> &users)
        {
            Position3D c;
            for (const Position3D &u : users)
                c += u;
            c *= 1.0 / static_cast<double>(users.size());
            c.z = 0.5 * (config.h_min + config.h_max);
            return c;
        }

        void accumulate(SchemeSummary &s, const StepMetrics &m)
        {
            ++s.steps;
            const double w = 1.0 / static_cast<double>(s.steps);
            s.mean_sum_capacity += (m.sum_capacity - s.mean_sum_capacity) * w;
            s.mean_iterations += (m.iterations - s.mean_iterations) * w;
            if (m.feasible)
                s.max_feasible_residual = std::max(s.max_feasible_residual, m.residuals.max());
            else
                ++s.infeasible_steps;
        }

        void merge(SchemeSummary &into, const SchemeSummary &from)
        {
            const long total = into.steps + from.steps;
            if (total == 0)
                return;
            const double a = static_cast<double>(into.steps) / static_cast<double>(total);
            into.mean_sum_capacity = a * into.mean_sum_capacity + (1.0 - a) * from.mean_sum_capacity;
            into.mean_iterations = a * into.mean_iterations + (1.0 - a) * from.mean_iterations;
            into.max_feasible_residual = std::max(into.max_feasible_residual, from.max_feasible_residual);
            into.infeasible_steps += from.infeasible_steps;
            into.steps = total;
        }

        std::string num(double v) { return fmt::format("{:.17g}", v); }

    } // namespace

    const char *to_string(Scheme scheme)
    {
        switch (scheme)
        {
        case Scheme::proposed:
            return "proposed";
        case Scheme::static_hover:
            return "static";
        case Scheme::centroid:
            return "centroid";
        }
        return "unknown";
    }

    Scheme scheme_from_string(const std::string &name)
    {
        for (Scheme s : {Scheme::proposed, Scheme::static_hover, Scheme::centroid})
            if (name == to_string(s))
                return s;
        throw std::invalid_argument("unknown scheme '" + name + "'");
    }

    std::uint64_t drop_seed(std::uint64_t master_seed, int drop)
    {
        // splitmix64 finalizer: nearby master seeds still give unrelated streams
        std::uint64_t z = master_seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(drop + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    DropOutput run_drop(const ScenarioConfig &config, int drop, const std::vector<Scheme> &schemes,
                        const StepSink &sink)
    {
        config.validate();
        DropOutput out;
        out.seed = drop_seed(config.seed, drop);
        std::mt19937_64 rng(out.seed);
        World world = init_scenario(config, rng);
        const Environment env = config.environment();
        const StepConfig step = config.step_config(out.seed);
        step.validate();

        const std::vector<Position3D> initial = world.positions();
        const Position3D anchor = start_anchor(config, initial);
        std::vector<FlybsState> states;
        for (Scheme s : schemes)
        {
            states.push_back({anchor, equal_split_powers(anchor, initial, env, step)});
            out.summaries.push_back({});
            out.summaries.back().scheme = s;
        }

        std::uint64_t hash = kFnvOffset;
        for (int k = 1; k <= config.steps(); ++k)
        {
            mobility_step(world, config, config.delta, rng);
            const std::vector<Position3D> users = world.positions();
            hash_positions(hash, users);
            for (std::size_t i = 0; i < schemes.size(); ++i)
            {
                StepResult r;
                switch (schemes[i])
                {
                case Scheme::proposed:
                    r = time_step(states[i], users, env, step);
                    break;
                case Scheme::static_hover:
                    r = baseline_static(states[i], anchor, users, env, step);
                    break;
                case Scheme::centroid:
                    r = baseline_centroid_track(states[i], users, env, step);
                    break;
                }
                states[i] = r.state;
                accumulate(out.summaries[i], r.metrics);
                if (sink)
                    sink({k, out.seed, schemes[i], std::move(r.metrics)});
            }
        }
        out.trajectory_hash = hash;
        return out;
    }

    std::string csv_header(std::size_t n_users, std::size_t n_channels)
    {
        std::string h = "k,seed,scheme,sum_capacity_bps,x,y,z,iterations,feasible";
        for (const char *name : ConstraintResiduals::names)
            h += fmt::format(",{}", name);
        for (std::size_t n = 0; n < n_users; ++n)
            h += fmt::format(",p_fly_{}", n);
        for (std::size_t s = 0; s < n_channels; ++s)
            h += fmt::format(",p_gbs_{}", s);
        return h + "\n";
    }

    std::string csv_row(const StepRecord &r)
    {
        const StepMetrics &m = r.metrics;
        std::string row = fmt::format("{},{},{},{},{},{},{},{},{}", r.k, r.seed, to_string(r.scheme), num(m.sum_capacity),
                                      num(m.position.x), num(m.position.y), num(m.position.z), m.iterations,
                                      m.feasible ? 1 : 0);
        for (double v : m.residuals.values())
            row += "," + num(v);
        for (double p : m.alloc.p_fly)
            row += "," + num(p);
        for (double p : m.alloc.p_gbs)
            row += "," + num(p);
        return row + "\n";
    }

    RunOutput run_experiment(const ScenarioConfig &config, const std::vector<Scheme> &schemes,
                             const std::string &csv_path, int threads)
    {
        config.validate();
        std::ofstream csv(csv_path, std::ios::binary);
        if (!csv)
            throw IoError("cannot open '" + csv_path + "' for writing");
        const Environment env = config.environment();
        csv << csv_header(env.radio.n_users(), env.radio.n_channels());

        const auto n_drops = static_cast<std::size_t>(config.drops);
        std::vector<std::string> buffers(n_drops);
        std::vector<DropOutput> outputs(n_drops);
        std::vector<char> done(n_drops, 0);
        std::mutex mu;
        std::condition_variable cv;
        std::atomic<int> next{0};
        std::exception_ptr failure;

        auto worker = [&] {
            for (int d = next++; d < config.drops; d = next++)
            {
                try
                {
                    std::string text;
                    DropOutput o = run_drop(config, d, schemes, [&](const StepRecord &r) { text += csv_row(r); });
                    std::lock_guard lock(mu);
                    buffers[static_cast<std::size_t>(d)] = std::move(text);
                    outputs[static_cast<std::size_t>(d)] = std::move(o);
                    done[static_cast<std::size_t>(d)] = 1;
                }
                catch (...)
                {
                    std::lock_guard lock(mu);
                    if (!failure)
                        failure = std::current_exception();
                    done[static_cast<std::size_t>(d)] = 1;
                }
                cv.notify_all();
            }
        };

        const int n_workers = std::clamp(threads, 1, std::max(1, config.drops));
        std::vector<std::thread> pool;
        if (n_workers == 1)
            worker();
        else
            for (int t = 0; t < n_workers; ++t)
                pool.emplace_back(worker);

        // Seed-ordered merge: drop d is written only after drops 0..d-1.
        for (std::size_t d = 0; d < n_drops; ++d)
        {
            std::unique_lock lock(mu);
            cv.wait(lock, [&] { return done[d] != 0; });
            if (failure)
                break;
            const std::string text = std::move(buffers[d]);
            buffers[d].clear();
            lock.unlock();
            csv << text;
            if (!csv)
                break;
        }
        for (std::thread &t : pool)
            t.join();
        if (failure)
            std::rethrow_exception(failure);
        if (!csv)
            throw IoError("write to '" + csv_path + "' failed");

        RunOutput run;
        for (Scheme s : schemes)
        {
            run.summaries.push_back({});
            run.summaries.back().scheme = s;
        }
        for (const DropOutput &o : outputs)
            for (std::size_t i = 0; i < schemes.size(); ++i)
                merge(run.summaries[i], o.summaries[i]);
        run.drops = std::move(outputs);
        csv.flush();
        if (!csv)
            throw IoError("write to '" + csv_path + "' failed");
        return run;
    }

    std::string summary_json(const ScenarioConfig &config, const RunOutput &run)
    {
        using nlohmann::json;
        json root;
        root["config"] = json::parse(config_to_json(config));
        root["derived"] = {
            {"steps_per_drop", config.steps()},
            {"p_fly_max_w", config.p_fly_max()},
            {"p_fly_max_dbm", config.p_fly_max_dbm},
            {"p_gbs_max_w", config.p_gbs_max()},
            {"p_gbs_max_dbm", config.p_gbs_max_dbm},
            {"noise_power_per_channel_w", config.environment().radio.access.front().noise_power},
            {"noise_power_per_channel_dbm", numeric::watts_to_dbm(config.environment().radio.access.front().noise_power)},
        };
        json schemes = json::array();
        for (const SchemeSummary &s : run.summaries)
            schemes.push_back({{"scheme", to_string(s.scheme)},
                               {"steps", s.steps},
                               {"infeasible_steps", s.infeasible_steps},
                               {"infeasible_rate", s.infeasible_rate()},
                               {"mean_sum_capacity_bps", s.mean_sum_capacity},
                               {"mean_iterations", s.mean_iterations},
                               {"max_feasible_residual", s.max_feasible_residual}});
        root["schemes"] = schemes;
        json drops = json::array();
        for (const DropOutput &d : run.drops)
            drops.push_back({{"seed", d.seed}, {"trajectory_hash", d.trajectory_hash}});
        root["drops"] = drops;
        return root.dump(2) + "\n";
    }

    std::vector<ConvergenceTrace> trace_convergence(const ScenarioConfig &config, int drop, int max_steps)
    {
        ScenarioConfig c = config;
        const int steps = std::min(max_steps, config.steps());
        c.duration = steps * config.delta;
        std::vector<ConvergenceTrace> traces;
        const double eps = config.solver.epsilon;
        run_drop(c, drop, {Scheme::proposed}, [&](const StepRecord &r) {
            ConvergenceTrace t;
            t.k = r.k;
            t.capacity = r.metrics.iteration_capacity;
            t.movement = r.metrics.iteration_movement;
            t.iterations = r.metrics.iterations;
            t.settled = !t.movement.empty() && t.movement.back() < eps;
            traces.push_back(std::move(t));
        });
        return traces;
    }

} // namespace flybs
