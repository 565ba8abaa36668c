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
#include "flybs/scenario.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace flybs;

namespace
{
    struct CommonOptions
    {
        std::string config_path;
        std::optional<std::uint64_t> seed;
        std::optional<int> drops;
        std::optional<int> users;
        std::optional<double> duration;
        std::string out = "out";
        std::string scheme = "all";
        int threads = 1;
    };

    void add_common(CLI::App *cmd, CommonOptions &o)
    {
        cmd->add_option("--config", o.config_path, "Scenario configuration (JSON); defaults apply when omitted");
        cmd->add_option("--seed", o.seed, "Master seed");
        cmd->add_option("--drops", o.drops, "Number of independent drops");
        cmd->add_option("--users", o.users, "Number of users");
        cmd->add_option("--duration", o.duration, "Simulated seconds per drop");
        cmd->add_option("--out", o.out, "Output directory");
        cmd->add_option("--scheme", o.scheme, "proposed|static|centroid|all")
            ->check(CLI::IsMember({"proposed", "static", "centroid", "all"}));
        cmd->add_option("--threads", o.threads, "Worker threads over drops")->check(CLI::PositiveNumber);
    }

    ScenarioConfig resolve(const CommonOptions &o)
    {
        ScenarioConfig c = o.config_path.empty() ? ScenarioConfig{} : load_config(o.config_path);
        if (o.seed)
            c.seed = *o.seed;
        if (o.drops)
            c.drops = *o.drops;
        if (o.users)
            c.n_users = *o.users;
        if (o.duration)
            c.duration = *o.duration;
        c.validate();
        return c;
    }

    std::vector<Scheme> schemes_of(const std::string &name)
    {
        if (name == "all")
            return {Scheme::proposed, Scheme::static_hover, Scheme::centroid};
        return {scheme_from_string(name)};
    }

    fs::path ensure_dir(const std::string &dir)
    {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec)
            throw IoError("cannot create output directory '" + dir + "': " + ec.message());
        return fs::path(dir);
    }

    void write_text(const fs::path &path, const std::string &text)
    {
        std::ofstream f(path, std::ios::binary);
        f << text;
        if (!f)
            throw IoError("cannot write '" + path.string() + "'");
    }

    RunOutput run_into(const ScenarioConfig &c, const std::vector<Scheme> &schemes, const fs::path &dir, int threads)
    {
        ensure_dir(dir.string());
        RunOutput run = run_experiment(c, schemes, (dir / "steps.csv").string(), threads);
        write_text(dir / "summary.json", summary_json(c, run));
        return run;
    }

    void print_summary(const RunOutput &run)
    {
        for (const SchemeSummary &s : run.summaries)
            fmt::print("{:<9} mean sum capacity {:.6e} bit/s, infeasible {:.4f}, mean iterations {:.3f}\n",
                       to_string(s.scheme), s.mean_sum_capacity, s.infeasible_rate(), s.mean_iterations);
    }

    std::vector<double> parse_list(const std::string &text)
    {
        std::vector<double> v;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ','))
            v.push_back(std::stod(item));
        if (v.empty())
            throw ConfigError({"--values must list at least one number"});
        return v;
    }

    void write_sweep(const fs::path &path, const std::string &key, const std::vector<std::pair<double, RunOutput>> &rows)
    {
        std::string text = key + ",scheme,mean_sum_capacity_bps,infeasible_rate,mean_iterations\n";
        for (const auto &[value, run] : rows)
            for (const SchemeSummary &s : run.summaries)
                text += fmt::format("{:.17g},{},{:.17g},{:.17g},{:.17g}\n", value, to_string(s.scheme),
                                    s.mean_sum_capacity, s.infeasible_rate(), s.mean_iterations);
        write_text(path, text);
    }

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"FlyBS positioning and power allocation simulator"};
    app.require_subcommand(1);

    CommonOptions run_opts, users_opts, cmin_opts, trace_opts;
    CLI::App *run_cmd = app.add_subcommand("run", "Run all drops of a scenario");
    add_common(run_cmd, run_opts);

    CLI::App *users_cmd = app.add_subcommand("sweep-users", "Sweep the number of users");
    add_common(users_cmd, users_opts);
    std::string users_values = "100,200,300,400,500,600";
    users_cmd->add_option("--values", users_values, "Comma-separated user counts");

    CLI::App *cmin_cmd = app.add_subcommand("sweep-cmin", "Sweep the minimum user rate");
    add_common(cmin_cmd, cmin_opts);
    std::string cmin_values = "0.5e6,1e6,1.5e6,2e6,2.5e6";
    cmin_cmd->add_option("--values", cmin_values, "Comma-separated minimum rates in bit/s");

    CLI::App *trace_cmd = app.add_subcommand("trace-convergence", "Per-iteration sum capacity within time steps");
    add_common(trace_cmd, trace_opts);
    int trace_steps = 50;
    int trace_drop = 0;
    trace_cmd->add_option("--steps", trace_steps, "Time steps to trace")->check(CLI::PositiveNumber);
    trace_cmd->add_option("--drop", trace_drop, "Drop index")->check(CLI::NonNegativeNumber);

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*run_cmd)
        {
            const ScenarioConfig c = resolve(run_opts);
            print_summary(run_into(c, schemes_of(run_opts.scheme), run_opts.out, run_opts.threads));
        }
        else if (*users_cmd)
        {
            const ScenarioConfig base = resolve(users_opts);
            std::vector<std::pair<double, RunOutput>> rows;
            for (double n : parse_list(users_values))
            {
                ScenarioConfig c = base;
                c.n_users = static_cast<int>(n);
                c.validate();
                fmt::print("n_users = {}\n", c.n_users);
                rows.emplace_back(n, run_into(c, schemes_of(users_opts.scheme),
                                              fs::path(users_opts.out) / fmt::format("users_{}", c.n_users),
                                              users_opts.threads));
                print_summary(rows.back().second);
            }
            write_sweep(fs::path(users_opts.out) / "sweep_users.csv", "n_users", rows);
        }
        else if (*cmin_cmd)
        {
            const ScenarioConfig base = resolve(cmin_opts);
            std::vector<std::pair<double, RunOutput>> rows;
            for (double v : parse_list(cmin_values))
            {
                ScenarioConfig c = base;
                c.c_min = v;
                c.validate();
                fmt::print("c_min = {:g} bit/s\n", v);
                rows.emplace_back(v, run_into(c, schemes_of(cmin_opts.scheme),
                                              fs::path(cmin_opts.out) / fmt::format("cmin_{:g}", v), cmin_opts.threads));
                print_summary(rows.back().second);
            }
            write_sweep(fs::path(cmin_opts.out) / "sweep_cmin.csv", "c_min_bps", rows);
        }
        else if (*trace_cmd)
        {
            const ScenarioConfig c = resolve(trace_opts);
            const fs::path dir = ensure_dir(trace_opts.out);
            const std::vector<ConvergenceTrace> traces = trace_convergence(c, trace_drop, trace_steps);
            std::string text = "k,iteration,sum_capacity_bps,movement_m\n";
            int quick = 0;
            for (const ConvergenceTrace &t : traces)
            {
                for (std::size_t i = 0; i < t.capacity.size(); ++i)
                    text += fmt::format("{},{},{:.17g},{:.17g}\n", t.k, i + 1, t.capacity[i], t.movement[i]);
                if (t.settled && t.iterations <= 10)
                    ++quick;
            }
            write_text(dir / "convergence.csv", text);
            const double share = traces.empty() ? 0.0 : static_cast<double>(quick) / static_cast<double>(traces.size());
            nlohmann::json summary = {{"steps", traces.size()},
                                      {"settled_within_10_iterations", quick},
                                      {"share_settled_within_10_iterations", share},
                                      {"epsilon_m", c.solver.epsilon}};
            write_text(dir / "convergence_summary.json", summary.dump(2) + "\n");
            fmt::print("{} of {} steps settled within 10 iterations ({:.4f})\n", quick, traces.size(), share);
        }
    }
    catch (const ConfigError &e)
    {
        std::cerr << e.what() << "\n";
        return 2;
    }
    catch (const IoError &e)
    {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 3;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
