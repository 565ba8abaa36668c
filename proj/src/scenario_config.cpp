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

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace flybs
{
    namespace
    {
        using nlohmann::json;

        // Lists every field once; both the reader and the writer walk this.
        template <typename V>
        void visit_link(V &v, LinkSpec &l)
        {
            v("pathloss_exp", l.pathloss_exp);
            v("antenna_gain_dbi", l.antenna_gain_dbi);
            v("q_coeff", l.q_coeff);
        }

        template <typename V>
        void visit_fields(V &v, ScenarioConfig &c)
        {
            v("area_side", c.area_side);
            v("n_users", c.n_users);
            v("gbs_offset", c.gbs_offset);
            v("gbs_altitude", c.gbs_altitude);
            v("duration", c.duration);
            v("delta", c.delta);
            v("total_bandwidth", c.total_bandwidth);
            v("noise_density_dbm_hz", c.noise_density_dbm_hz);
            v("background_dbm", c.background_dbm);
            v("carrier_frequency", c.carrier_frequency);
            v.group("links", [&] {
                v.group("access", [&] { visit_link(v, c.access); });
                v.group("interference", [&] { visit_link(v, c.interference); });
                v.group("backhaul", [&] { visit_link(v, c.backhaul); });
            });
            v("h_min", c.h_min);
            v("h_max", c.h_max);
            v("p_fly_max_dbm", c.p_fly_max_dbm);
            v("p_gbs_max_dbm", c.p_gbs_max_dbm);
            v("c_min", c.c_min);
            v("v_max", c.v_max);
            v("p_pr_th", c.p_pr_th);
            v.group("propulsion", [&] {
                PropulsionParams &p = c.propulsion;
                v("blade_profile_power", p.blade_profile_power);
                v("induced_power", p.induced_power);
                v("tip_speed", p.tip_speed);
                v("mean_induced_velocity", p.mean_induced_velocity);
                v("fuselage_drag_ratio", p.fuselage_drag_ratio);
                v("air_density", p.air_density);
                v("rotor_solidity", p.rotor_solidity);
                v("rotor_disc_area", p.rotor_disc_area);
            });
            v.group("mobility", [&] {
                MobilityConfig &m = c.mobility;
                v("turn_period", m.turn_period);
                v("walker_speed", m.walker_speed);
                v("cluster_speed", m.cluster_speed);
                v("cluster_radius", m.cluster_radius);
                v("n_clusters", m.n_clusters);
            });
            v.group("solver", [&] {
                SolverConfig &s = c.solver;
                v("epsilon", s.epsilon);
                v("max_iters", s.max_iters);
                v("taylor_step_ratio", s.taylor_step_ratio);
                v("xi", s.xi);
                v("multistart", s.multistart);
                v("backhaul_starts", s.backhaul_starts);
                v("max_linearizations", s.max_linearizations);
            });
            v("seed", c.seed);
            v("drops", c.drops);
        }

        class Writer
        {
        public:
            explicit Writer(json &root) { stack_.push_back(&root); }

            template <typename T>
            void operator()(const char *key, const T &value)
            {
                (*stack_.back())[key] = value;
            }

            void operator()(const char *key, const std::optional<double> &value)
            {
                (*stack_.back())[key] = value ? json(*value) : json(nullptr);
            }

            template <typename F>
            void group(const char *key, F &&body)
            {
                json &child = (*stack_.back())[key];
                child = json::object();
                stack_.push_back(&child);
                body();
                stack_.pop_back();
            }

        private:
            std::vector<json *> stack_;
        };

        class Reader
        {
        public:
            Reader(const json &root, std::vector<std::string> &errors) : errors_(errors) { push(&root, ""); }

            void finish() { pop(); }

            template <typename T>
            void operator()(const char *key, T &value)
            {
                const json *node = child(key);
                if (!node)
                    return;
                try
                {
                    if constexpr (std::is_integral_v<T>)
                    {
                        if (!node->is_number_integer())
                            throw std::invalid_argument("expected an integer");
                        if constexpr (std::is_unsigned_v<T>)
                        {
                            if (node->is_number_unsigned())
                                value = node->get<T>();
                            else if (node->get<long long>() < 0)
                                throw std::invalid_argument("expected a nonnegative integer");
                            else
                                value = static_cast<T>(node->get<long long>());
                        }
                        else
                            value = node->get<T>();
                    }
                    else
                    {
                        if (!node->is_number())
                            throw std::invalid_argument("expected a number");
                        value = node->get<T>();
                    }
                }
                catch (const std::exception &e)
                {
                    errors_.push_back(path(key) + ": " + e.what());
                }
            }

            void operator()(const char *key, std::optional<double> &value)
            {
                const json *node = child(key);
                if (!node)
                    return;
                if (node->is_null())
                    value.reset();
                else if (node->is_number())
                    value = node->get<double>();
                else
                    errors_.push_back(path(key) + ": expected a number or null");
            }

            template <typename F>
            void group(const char *key, F &&body)
            {
                const json *node = child(key);
                if (!node)
                    return;
                if (!node->is_object())
                {
                    errors_.push_back(path(key) + ": expected an object");
                    return;
                }
                push(node, path(key));
                body();
                pop();
            }

        private:
            struct Frame
            {
                const json *node;
                std::string prefix;
                std::set<std::string> seen;
            };

            std::string path(const char *key) const
            {
                return frames_.back().prefix.empty() ? std::string(key) : frames_.back().prefix + "." + key;
            }

            const json *child(const char *key)
            {
                Frame &f = frames_.back();
                f.seen.insert(key);
                auto it = f.node->find(key);
                return it == f.node->end() ? nullptr : &*it;
            }

            void push(const json *node, std::string prefix) { frames_.push_back({node, std::move(prefix), {}}); }

            void pop()
            {
                const Frame &f = frames_.back();
                for (auto it = f.node->begin(); it != f.node->end(); ++it)
                    if (!f.seen.count(it.key()))
                        errors_.push_back((f.prefix.empty() ? "" : f.prefix + ".") + it.key() + ": unknown field");
                frames_.pop_back();
            }

            std::vector<std::string> &errors_;
            std::vector<Frame> frames_;
        };

        double noise_power(const ScenarioConfig &c, double bandwidth)
        {
            return numeric::dbm_to_watts(c.noise_density_dbm_hz) * bandwidth + numeric::dbm_to_watts(c.background_dbm);
        }

        double link_q(const ScenarioConfig &c, const LinkSpec &l)
        {
            return l.q_coeff ? *l.q_coeff : free_space_q(c.carrier_frequency, l.antenna_gain_dbi);
        }

    } // namespace

    void ScenarioConfig::validate() const
    {
        std::vector<std::string> bad;
        auto positive = [&](const char *name, double v) {
            if (!(v > 0.0) || !std::isfinite(v))
                bad.push_back(std::string(name) + " must be positive and finite");
        };
        auto finite = [&](const char *name, double v) {
            if (!std::isfinite(v))
                bad.push_back(std::string(name) + " must be finite");
        };
        positive("area_side", area_side);
        if (n_users < 1)
            bad.push_back("n_users must be at least 1");
        positive("gbs_offset", gbs_offset);
        positive("gbs_altitude", gbs_altitude);
        positive("duration", duration);
        positive("delta", delta);
        if (duration > 0.0 && delta > 0.0)
        {
            const double ratio = duration / delta;
            if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
                bad.push_back("duration must be a whole number of delta steps");
        }
        positive("total_bandwidth", total_bandwidth);
        finite("noise_density_dbm_hz", noise_density_dbm_hz);
        finite("background_dbm", background_dbm);
        positive("carrier_frequency", carrier_frequency);
        const std::pair<const char *, const LinkSpec *> links[] = {
            {"links.access", &access}, {"links.interference", &interference}, {"links.backhaul", &backhaul}};
        for (const auto &[name, l] : links)
        {
            if (!(l->pathloss_exp >= 1.0 && l->pathloss_exp <= 6.0))
                bad.push_back(std::string(name) + ".pathloss_exp must lie in [1, 6]");
            finite(name, l->antenna_gain_dbi);
            if (l->q_coeff && !(*l->q_coeff > 0.0 && std::isfinite(*l->q_coeff)))
                bad.push_back(std::string(name) + ".q_coeff must be positive");
        }
        positive("h_min", h_min);
        positive("h_max", h_max);
        if (h_min > h_max)
            bad.push_back("h_min must not exceed h_max");
        finite("p_fly_max_dbm", p_fly_max_dbm);
        finite("p_gbs_max_dbm", p_gbs_max_dbm);
        if (!(c_min >= 0.0) || !std::isfinite(c_min))
            bad.push_back("c_min must be nonnegative");
        positive("v_max", v_max);
        positive("p_pr_th", p_pr_th);
        try
        {
            propulsion.validate();
            const double hover = propulsion_power(0.0, propulsion);
            if (p_pr_th < hover)
                bad.push_back("p_pr_th must be at least the hover power " + std::to_string(hover) + " W");
        }
        catch (const std::invalid_argument &e)
        {
            bad.push_back(std::string("propulsion: ") + e.what());
        }
        positive("mobility.turn_period", mobility.turn_period);
        if (!(mobility.walker_speed >= 0.0) || !(mobility.cluster_speed >= 0.0))
            bad.push_back("mobility speeds must be nonnegative");
        if (!(mobility.cluster_radius >= 0.0) || !(2.0 * mobility.cluster_radius < area_side))
            bad.push_back("mobility.cluster_radius must be nonnegative and below half the area side");
        if (mobility.n_clusters < 1)
            bad.push_back("mobility.n_clusters must be at least 1");
        positive("solver.epsilon", solver.epsilon);
        if (solver.max_iters < 1)
            bad.push_back("solver.max_iters must be at least 1");
        positive("solver.taylor_step_ratio", solver.taylor_step_ratio);
        positive("solver.xi", solver.xi);
        if (solver.multistart < 1)
            bad.push_back("solver.multistart must be at least 1");
        if (solver.backhaul_starts < 0)
            bad.push_back("solver.backhaul_starts must be nonnegative");
        if (solver.max_linearizations < 1)
            bad.push_back("solver.max_linearizations must be at least 1");
        if (drops < 1)
            bad.push_back("drops must be at least 1");
        if (!bad.empty())
            throw ConfigError(std::move(bad));
    }

    int ScenarioConfig::steps() const { return static_cast<int>(std::lround(duration / delta)); }
    double ScenarioConfig::p_fly_max() const { return numeric::dbm_to_watts(p_fly_max_dbm); }
    double ScenarioConfig::p_gbs_max() const { return numeric::dbm_to_watts(p_gbs_max_dbm); }
    Position3D ScenarioConfig::area_center() const { return {0.5 * area_side, 0.5 * area_side, 0.0}; }

    Position3D ScenarioConfig::gbs_position() const
    {
        const Position3D c = area_center();
        return {c.x + gbs_offset, c.y, gbs_altitude};
    }

    StepConfig ScenarioConfig::step_config(std::uint64_t drop_seed) const
    {
        StepConfig s;
        s.epsilon = solver.epsilon;
        s.max_iters = solver.max_iters;
        s.delta = delta;
        s.p_pr_th = p_pr_th;
        s.v_f_max = v_max;
        s.h_min = h_min;
        s.h_max = h_max;
        s.p_fly_max = p_fly_max();
        s.p_gbs_max = p_gbs_max();
        s.taylor_step = solver.taylor_step_ratio * s.p_fly_max;
        s.xi = solver.xi;
        s.multistart = solver.multistart;
        const double diagonal = area_side * std::sqrt(2.0);
        s.radius_cap = 10.0 * diagonal;
        s.backhaul_top = diagonal + gbs_offset + h_max;
        s.propulsion = propulsion;
        s.backhaul.starts = solver.backhaul_starts;
        s.backhaul.seed = drop_seed;
        s.backhaul.max_linearizations = solver.max_linearizations;
        return s;
    }

    Environment ScenarioConfig::environment() const
    {
        Environment env;
        const auto n = static_cast<std::size_t>(n_users);
        RadioModel &r = env.radio;
        r.assignment = ChannelAssignment::one_per_user(n, total_bandwidth);
        const double b = total_bandwidth / static_cast<double>(n);
        const double noise = noise_power(*this, b);
        r.access.assign(n, RadioLink{link_q(*this, access), access.pathloss_exp, b, noise});
        r.interference.assign(n, RadioLink{link_q(*this, interference), interference.pathloss_exp, b, noise});
        r.backhaul.assign(n, RadioLink{link_q(*this, backhaul), backhaul.pathloss_exp, b, noise});
        env.gbs = gbs_position();
        env.min_rate.assign(n, c_min);
        return env;
    }

    ScenarioConfig config_from_json(const std::string &text)
    {
        json root;
        try
        {
            root = json::parse(text);
        }
        catch (const json::parse_error &e)
        {
            throw ConfigError({std::string("malformed JSON: ") + e.what()});
        }
        if (!root.is_object())
            throw ConfigError({"configuration must be a JSON object"});
        ScenarioConfig c;
        std::vector<std::string> errors;
        Reader reader(root, errors);
        visit_fields(reader, c);
        reader.finish();
        if (!errors.empty())
            throw ConfigError(std::move(errors));
        c.validate();
        return c;
    }

    ScenarioConfig load_config(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw IoError("cannot read configuration file '" + path + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        return config_from_json(buf.str());
    }

    std::string config_to_json(const ScenarioConfig &config, int indent)
    {
        json root = json::object();
        Writer writer(root);
        ScenarioConfig copy = config;
        visit_fields(writer, copy);
        return root.dump(indent);
    }

} // namespace flybs
