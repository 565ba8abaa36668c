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

#include "flybs/geometry.hpp"
#include "flybs/orchestrator.hpp"
#include "flybs/propulsion.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace flybs
{
    /// One radio link family. Q = G (c / 4 pi f)^2 unless `q_coeff` overrides it.
    struct LinkSpec
    {
        double pathloss_exp = 2.0;
        double antenna_gain_dbi = 0.0; // combined transmit and receive gain
        std::optional<double> q_coeff;
    };

    struct MobilityConfig
    {
        double turn_period = 10.0;   // s, heading redraw period
        double walker_speed = 1.0;   // m/s
        double cluster_speed = 1.0;  // m/s, speed of cluster centers
        double cluster_radius = 20.0; // m
        int n_clusters = 6;
    };

    struct SolverConfig
    {
        double epsilon = 0.1;
        int max_iters = 20;
        double taylor_step_ratio = 1e-3; // tau as a fraction of the FlyBS budget
        double xi = 0.01;
        int multistart = 4;
        int backhaul_starts = 8;
        int max_linearizations = 60;
    };

    struct ScenarioConfig
    {
        double area_side = 500.0;       // m
        int n_users = 300;
        double gbs_offset = 1500.0;     // m east of the area center
        double gbs_altitude = 30.0;     // m
        double duration = 1200.0;       // s
        double delta = 1.0;             // s
        double total_bandwidth = 1e8;   // Hz
        double noise_density_dbm_hz = -174.0;
        double background_dbm = -90.0;
        double carrier_frequency = 2e9; // Hz
        LinkSpec access{2.3, 20.0, {}};
        LinkSpec interference{2.8, 10.0, {}};
        LinkSpec backhaul{2.1, 40.0, {}};
        double h_min = 100.0;           // m
        double h_max = 300.0;           // m
        double p_fly_max_dbm = 30.0;
        double p_gbs_max_dbm = 36.0;
        double c_min = 1e6;             // bit/s
        double v_max = 25.0;            // m/s
        double p_pr_th = 200.0;         // W
        PropulsionParams propulsion;
        MobilityConfig mobility;
        SolverConfig solver;
        std::uint64_t seed = 1;
        int drops = 100;

        /// Throws ConfigError listing every violated field.
        void validate() const;
        int steps() const;
        double p_fly_max() const;
        double p_gbs_max() const;
        Position3D gbs_position() const;
        Position3D area_center() const;
        StepConfig step_config(std::uint64_t drop_seed) const;
        Environment environment() const;
    };

    /// Parses a JSON object; missing fields keep their defaults, unknown fields are violations.
    /// Throws ConfigError on malformed input or invalid values.
    ScenarioConfig config_from_json(const std::string &text);
    ScenarioConfig load_config(const std::string &path);
    /// Full resolved configuration; config_from_json(config_to_json(c)) reproduces c exactly.
    std::string config_to_json(const ScenarioConfig &config, int indent = 2);

    enum class MobilityKind
    {
        walker,
        cluster_member,
    };

    struct UserState
    {
        Position3D position;
        MobilityKind kind = MobilityKind::walker;
        int cluster = -1;
        double heading = 0.0; // rad, walkers only
    };

    struct ClusterState
    {
        Position3D center;
        double heading = 0.0;
    };

    struct World
    {
        std::vector<UserState> users;
        std::vector<ClusterState> clusters;
        double time = 0.0;

        std::vector<Position3D> positions() const;
    };

    /// Uniform user drop: half random walkers, the rest spread over the clusters.
    World init_scenario(const ScenarioConfig &config, std::mt19937_64 &rng);

    /// Walkers and cluster centers move speed * delta along their heading, reflecting off the area
    /// (cluster centers off the area shrunk by the cluster radius); members are redrawn uniformly
    /// in their cluster disc.
    void mobility_step(World &world, const ScenarioConfig &config, double delta, std::mt19937_64 &rng);

    enum class Scheme
    {
        proposed,
        static_hover,
        centroid,
    };

    const char *to_string(Scheme scheme);
    Scheme scheme_from_string(const std::string &name);

    std::uint64_t drop_seed(std::uint64_t master_seed, int drop);

    struct StepRecord
    {
        int k = 0;
        std::uint64_t seed = 0;
        Scheme scheme = Scheme::proposed;
        StepMetrics metrics;
    };

    struct SchemeSummary
    {
        Scheme scheme = Scheme::proposed;
        long steps = 0;
        long infeasible_steps = 0;
        double mean_sum_capacity = 0.0;
        double mean_iterations = 0.0;
        double max_feasible_residual = 0.0;

        double infeasible_rate() const { return steps ? static_cast<double>(infeasible_steps) / static_cast<double>(steps) : 0.0; }
    };

    /// Per-step callback; drops may run on worker threads, callbacks for one drop arrive in order.
    using StepSink = std::function<void(const StepRecord &)>;

    struct DropOutput
    {
        std::uint64_t seed = 0;
        std::vector<SchemeSummary> summaries; // in scheme order
        std::uint64_t trajectory_hash = 0;    // hash of the user positions fed to every scheme
    };

    /// Runs one drop for every scheme on a shared user trajectory.
    DropOutput run_drop(const ScenarioConfig &config, int drop, const std::vector<Scheme> &schemes,
                        const StepSink &sink = {});

    struct RunOutput
    {
        std::vector<SchemeSummary> summaries;
        std::vector<DropOutput> drops;
    };

    /// All drops, on up to `threads` workers; the CSV is written in seed order regardless.
    /// Throws IoError on IO failure.
    RunOutput run_experiment(const ScenarioConfig &config, const std::vector<Scheme> &schemes,
                             const std::string &csv_path, int threads = 1);

    std::string csv_header(std::size_t n_users, std::size_t n_channels);
    std::string csv_row(const StepRecord &record);

    /// JSON summary: resolved config, dBm duplicates of the power budgets, per-scheme aggregates.
    std::string summary_json(const ScenarioConfig &config, const RunOutput &run);

    struct ConvergenceTrace
    {
        int k = 0;
        std::vector<double> capacity;
        std::vector<double> movement;
        int iterations = 0;
        bool settled = false; // last movement below epsilon
    };

    /// Runs the proposed scheme for one drop and keeps the per-iteration trace of every step.
    std::vector<ConvergenceTrace> trace_convergence(const ScenarioConfig &config, int drop, int max_steps);

} // namespace flybs
