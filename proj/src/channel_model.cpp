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

#include "flybs/channel_model.hpp"
#include "flybs/numeric.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace flybs
{
    void RadioLink::validate() const
    {
        if (!(q_coeff > 0.0) || !std::isfinite(q_coeff))
            throw std::invalid_argument("RadioLink: q_coeff must be positive and finite.");
        if (!(pathloss_exp >= 1.0 && pathloss_exp <= 6.0))
            throw std::invalid_argument("RadioLink: pathloss exponent must lie in [1, 6].");
        if (!(bandwidth >= 0.0) || !std::isfinite(bandwidth))
            throw std::invalid_argument("RadioLink: bandwidth must be non-negative.");
        if (!(noise_power > 0.0) || !std::isfinite(noise_power))
            throw std::invalid_argument("RadioLink: noise power must be positive.");
    }

    ChannelAssignment ChannelAssignment::one_per_user(std::size_t n_users, double total_bandwidth)
    {
        ChannelAssignment a;
        a.user_to_channel.resize(n_users);
        std::iota(a.user_to_channel.begin(), a.user_to_channel.end(), std::size_t{0});
        a.channel_bandwidths.assign(n_users, total_bandwidth / static_cast<double>(n_users));
        return a;
    }

    void ChannelAssignment::validate(double total_bandwidth) const
    {
        for (std::size_t n = 0; n < user_to_channel.size(); ++n)
            if (user_to_channel[n] >= channel_bandwidths.size())
                throw std::invalid_argument("ChannelAssignment: user " + std::to_string(n) +
                                            " is mapped to a nonexistent channel.");
        for (double b : channel_bandwidths)
            if (!(b >= 0.0))
                throw std::invalid_argument("ChannelAssignment: negative channel bandwidth.");
        const double sum = std::accumulate(channel_bandwidths.begin(), channel_bandwidths.end(), 0.0);
        if (std::abs(sum - total_bandwidth) > 1e-9 * std::abs(total_bandwidth))
            throw std::invalid_argument("ChannelAssignment: channel bandwidths do not add up to the total bandwidth.");
    }

    double PowerAllocation::total_fly() const { return std::accumulate(p_fly.begin(), p_fly.end(), 0.0); }
    double PowerAllocation::total_gbs() const { return std::accumulate(p_gbs.begin(), p_gbs.end(), 0.0); }

    double received_power(double p_tx, const RadioLink &link, double d)
    {
        if (!(d > 0.0))
            throw std::domain_error("received_power: transmitter and receiver must be separated (d > 0).");
        return link.q_coeff * p_tx * std::pow(d, -link.pathloss_exp);
    }

    double shannon_rate(double bandwidth, double sinr)
    {
        return bandwidth * std::log1p(sinr) / std::numbers::ln2;
    }

    double gbs_interference(std::size_t n, const PowerAllocation &alloc, const Geometry &geometry,
                            const RadioModel &radio)
    {
        const std::size_t s = radio.assignment.user_to_channel[n];
        return received_power(alloc.p_gbs[s], radio.interference[n], distance(geometry.gbs, geometry.users[n]));
    }

    double user_capacity(std::size_t n, const PowerAllocation &alloc, const Geometry &geometry,
                         const RadioModel &radio)
    {
        const RadioLink &link = radio.access[n];
        const double signal = received_power(alloc.p_fly[n], link, distance(geometry.flybs, geometry.users[n]));
        const double interference = gbs_interference(n, alloc, geometry, radio);
        return shannon_rate(radio.assignment.user_bandwidth(n), signal / (link.noise_power + interference));
    }

    std::vector<double> user_capacities(const PowerAllocation &alloc, const Geometry &geometry,
                                        const RadioModel &radio)
    {
        std::vector<double> c(radio.n_users());
        for (std::size_t n = 0; n < c.size(); ++n)
            c[n] = user_capacity(n, alloc, geometry, radio);
        return c;
    }

    double sum_capacity(const PowerAllocation &alloc, const Geometry &geometry, const RadioModel &radio)
    {
        double total = 0.0;
        for (std::size_t n = 0; n < radio.n_users(); ++n)
            total += user_capacity(n, alloc, geometry, radio);
        return total;
    }

    double backhaul_capacity(std::span<const double> p_gbs, double d_fg, std::span<const RadioLink> links)
    {
        if (p_gbs.size() != links.size())
            throw std::invalid_argument("backhaul_capacity: one power per backhaul channel is required.");
        double total = 0.0;
        for (std::size_t s = 0; s < links.size(); ++s)
            total += shannon_rate(links[s].bandwidth, received_power(p_gbs[s], links[s], d_fg) / links[s].noise_power);
        return total;
    }

    double free_space_q(double carrier_frequency_hz, double antenna_gain_dbi)
    {
        constexpr double speed_of_light = 299792458.0;
        const double factor = speed_of_light / (4.0 * std::numbers::pi * carrier_frequency_hz);
        return factor * factor * numeric::db_to_linear(antenna_gain_dbi);
    }

} // namespace flybs
