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

#include <catch2/catch_amalgamated.hpp>

#include "flybs/errors.hpp"
#include "flybs/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <sys/wait.h>

using namespace flybs;
namespace fs = std::filesystem;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
    fs::path scratch(const std::string &name)
    {
        const fs::path dir = fs::temp_directory_path() / "flybs_tests" / name;
        fs::remove_all(dir);
        fs::create_directories(dir);
        return dir;
    }

    std::string slurp(const fs::path &p)
    {
        std::ifstream f(p, std::ios::binary);
        return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
    }

    std::size_t count_lines(const std::string &text)
    {
        return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
    }

    ScenarioConfig tiny(int users, double duration, int drops)
    {
        ScenarioConfig c;
        c.n_users = users;
        c.duration = duration;
        c.drops = drops;
        return c;
    }

    int run_cli(const std::string &args)
    {
        const std::string cmd = std::string("\"") + FLYBS_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        REQUIRE(status != -1);
        return WEXITSTATUS(status);
    }
} // namespace

TEST_CASE("Scenario - configuration round trip", "[scenario]")
{
    ScenarioConfig c;
    c.n_users = 123;
    c.c_min = 2.5e6;
    c.access.q_coeff = 3.7e-3;
    c.solver.xi = 0.02;
    c.seed = 0xDEADBEEFCAFEULL;
    const std::string text = config_to_json(c);
    const ScenarioConfig back = config_from_json(text);
    CHECK(config_to_json(back) == text);
    CHECK(back.n_users == 123);
    CHECK(back.seed == c.seed);
    REQUIRE(back.access.q_coeff.has_value());
    CHECK(*back.access.q_coeff == 3.7e-3);

    // Missing fields keep their defaults.
    const ScenarioConfig partial = config_from_json(R"({"n_users": 40})");
    CHECK(partial.n_users == 40);
    CHECK(partial.h_max == ScenarioConfig{}.h_max);
}

TEST_CASE("Scenario - configuration errors", "[scenario]")
{
    try
    {
        config_from_json(R"({"n_users": 10, "colour": "red"})");
        FAIL("unknown field must be rejected");
    }
    catch (const ConfigError &e)
    {
        REQUIRE(e.violations().size() == 1);
        CHECK(e.violations()[0].find("colour") != std::string::npos);
    }

    try
    {
        config_from_json(R"({"n_users": 0, "h_min": 400, "delta": -1})");
        FAIL("invalid values must be rejected");
    }
    catch (const ConfigError &e)
    {
        CHECK(e.violations().size() >= 3);
    }

    CHECK_THROWS_AS(config_from_json("{ not json"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/flybs/config.json"), IoError);
}

TEST_CASE("Scenario - initial drop", "[scenario]")
{
    const ScenarioConfig c = tiny(100, 10, 1);
    std::mt19937_64 rng(5);
    const World w = init_scenario(c, rng);
    REQUIRE(w.users.size() == 100);
    int walkers = 0;
    for (const UserState &u : w.users)
    {
        walkers += u.kind == MobilityKind::walker;
        CHECK(u.position.x >= 0.0);
        CHECK(u.position.x <= c.area_side);
        CHECK(u.position.y >= 0.0);
        CHECK(u.position.y <= c.area_side);
        CHECK(u.position.z == 0.0);
        if (u.kind == MobilityKind::cluster_member)
        {
            REQUIRE(u.cluster >= 0);
            REQUIRE(u.cluster < c.mobility.n_clusters);
        }
    }
    CHECK(walkers == 50);

    std::mt19937_64 again(5);
    CHECK(init_scenario(c, again).positions() == w.positions());
}

TEST_CASE("Scenario - mobility", "[scenario]")
{
    const ScenarioConfig c = tiny(200, 10, 1);
    std::mt19937_64 rng(11);
    World w = init_scenario(c, rng);
    for (int k = 0; k < 300; ++k)
    {
        const World before = w;
        mobility_step(w, c, c.delta, rng);
        for (std::size_t n = 0; n < w.users.size(); ++n)
        {
            const UserState &u = w.users[n];
            CHECK(u.position.x >= 0.0);
            CHECK(u.position.x <= c.area_side);
            CHECK(u.position.y >= 0.0);
            CHECK(u.position.y <= c.area_side);
            if (u.kind == MobilityKind::walker)
            {
                const Position3D &p = before.users[n].position;
                const double margin = c.mobility.walker_speed * c.delta;
                const bool clear = p.x > margin && p.x < c.area_side - margin && p.y > margin &&
                                   p.y < c.area_side - margin;
                if (clear)
                    CHECK_THAT(distance(p, u.position), WithinAbs(margin, 1e-9));
                else
                    CHECK(distance(p, u.position) <= margin + 1e-9);
            }
            else
            {
                const Position3D &center = w.clusters[static_cast<std::size_t>(u.cluster)].center;
                CHECK(distance(u.position, center) <= c.mobility.cluster_radius + 1e-9);
            }
        }
    }
}

TEST_CASE("Scenario - experiment output", "[scenario]")
{
    const ScenarioConfig c = tiny(20, 6, 3);
    const std::vector<Scheme> all{Scheme::proposed, Scheme::static_hover, Scheme::centroid};
    const fs::path dir = scratch("experiment");

    const RunOutput one = run_experiment(c, all, (dir / "a.csv").string(), 1);
    const RunOutput many = run_experiment(c, all, (dir / "b.csv").string(), 3);
    const RunOutput rerun = run_experiment(c, all, (dir / "c.csv").string(), 2);
    const std::string a = slurp(dir / "a.csv");
    CHECK(count_lines(a) == 1 + static_cast<std::size_t>(c.drops * c.steps()) * all.size());
    CHECK(a == slurp(dir / "b.csv"));
    CHECK(a == slurp(dir / "c.csv"));
    CHECK(a.substr(0, a.find('\n') + 1) == csv_header(20, c.environment().radio.n_channels()));

    REQUIRE(one.drops.size() == 3);
    for (std::size_t d = 0; d < 3; ++d)
    {
        CHECK(one.drops[d].seed == drop_seed(c.seed, static_cast<int>(d)));
        CHECK(one.drops[d].trajectory_hash == many.drops[d].trajectory_hash);
    }
    CHECK(one.drops[0].seed != one.drops[1].seed);

    // Every scheme sees the same user trajectory: a single-scheme run hashes identically.
    for (Scheme s : all)
    {
        const DropOutput single = run_drop(c, 1, {s});
        CHECK(single.trajectory_hash == one.drops[1].trajectory_hash);
    }

    for (std::size_t i = 0; i < all.size(); ++i)
    {
        CHECK(one.summaries[i].steps == c.drops * c.steps());
        CHECK(one.summaries[i].mean_sum_capacity == rerun.summaries[i].mean_sum_capacity);
    }

    const nlohmann::json summary = nlohmann::json::parse(summary_json(c, one));
    CHECK(summary["config"]["n_users"] == 20);
    CHECK(summary["config"]["drops"] == 3);
    CHECK_THAT(summary["derived"]["p_fly_max_w"].get<double>(), WithinRel(1.0, 1e-12));
    CHECK(summary["schemes"].size() == 3);
    CHECK(summary["drops"].size() == 3);
}

TEST_CASE("Scenario - unwritable output", "[scenario]")
{
    CHECK_THROWS_AS(run_experiment(tiny(5, 2, 1), {Scheme::static_hover}, "/nonexistent/flybs/out.csv"), IoError);
}

TEST_CASE("Scenario - command line", "[scenario]")
{
    const fs::path dir = scratch("cli");
    CHECK(run_cli("run --users 10 --duration 3 --drops 2 --scheme all --out \"" + (dir / "run").string() + "\"") == 0);
    const std::string csv = slurp(dir / "run" / "steps.csv");
    CHECK(count_lines(csv) == 1 + 2 * 3 * 3);
    const nlohmann::json summary = nlohmann::json::parse(slurp(dir / "run" / "summary.json"));
    CHECK(summary["config"]["n_users"] == 10);
    CHECK(summary["config"]["duration"] == 3.0);

    {
        std::ofstream bad(dir / "bad.json");
        bad << R"({"n_users": -4, "unknown_key": 1})";
    }
    CHECK(run_cli("run --config \"" + (dir / "bad.json").string() + "\" --out \"" + dir.string() + "\"") == 2);
    CHECK(run_cli("run --config \"" + (dir / "missing.json").string() + "\" --out \"" + dir.string() + "\"") == 3);
    CHECK(run_cli("run --users 4 --duration 1 --drops 1 --out /proc/flybs_cannot_write") == 3);

    CHECK(run_cli("sweep-users --values 6,8 --duration 2 --drops 1 --out \"" + (dir / "sweep").string() + "\"") == 0);
    CHECK(count_lines(slurp(dir / "sweep" / "sweep_users.csv")) == 1 + 2 * 3);
    CHECK(run_cli("trace-convergence --users 8 --steps 3 --out \"" + (dir / "trace").string() + "\"") == 0);
    CHECK(fs::exists(dir / "trace" / "convergence.csv"));
}
