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

#include <cstddef>
#include <span>
#include <vector>

namespace flybs
{
    /// Deterministic Friis link: received power is q_coeff * p_tx * d^(-pathloss_exp).
    struct RadioLink
    {
        double q_coeff = 1.0;      // antenna/frequency gain coefficient Q
        double pathloss_exp = 2.0; // alpha, in [1, 6]
        double bandwidth = 0.0;    // Hz
        double noise_power = 1.0;  // W; thermal noise plus the background-interference floor

        void validate() const;
    };

    struct ChannelAssignment
    {
        std::vector<std::size_t> user_to_channel; // g_n, zero-based
        std::vector<double> channel_bandwidths;   // B_s in Hz

        /// One orthogonal channel per user, total bandwidth split equally.
        static ChannelAssignment one_per_user(std::size_t n_users, double total_bandwidth);

        std::size_t n_users() const { return user_to_channel.size(); }
        std::size_t n_channels() const { return channel_bandwidths.size(); }
        double user_bandwidth(std::size_t n) const { return channel_bandwidths.at(user_to_channel.at(n)); }

        /// Throws std::invalid_argument unless every user maps to a valid channel and the
        /// channel bandwidths add up to `total_bandwidth` (1e-9 relative).
        void validate(double total_bandwidth) const;
    };

    struct PowerAllocation
    {
        std::vector<double> p_fly; // FlyBS -> user n, W
        std::vector<double> p_gbs; // GBS on channel s, W

        double total_fly() const;
        double total_gbs() const;
    };

    struct Geometry
    {
        Position3D flybs;
        Position3D gbs;
        std::vector<Position3D> users;
    };

    /// Static radio description of a scenario. Access link n carries B_{g_n} and sigma^2_n;
    /// interference link n only uses Q_{n,G} and alpha_{n,G}; backhaul link s carries B_s and sigma^2_{F,s}.
    struct RadioModel
    {
        std::vector<RadioLink> access;
        std::vector<RadioLink> interference;
        std::vector<RadioLink> backhaul;
        ChannelAssignment assignment;

        std::size_t n_users() const { return access.size(); }
        std::size_t n_channels() const { return backhaul.size(); }
    };

    /// Friis received power Q * p_tx * d^(-alpha). Throws std::domain_error for d <= 0.
    double received_power(double p_tx, const RadioLink &link, double d);

    /// B log2(1 + sinr), with log1p for accuracy at low SINR.
    double shannon_rate(double bandwidth, double sinr);

    /// Received interference at user n from the GBS transmitting on the user's channel.
    double gbs_interference(std::size_t n, const PowerAllocation &alloc, const Geometry &geometry,
                            const RadioModel &radio);

    double user_capacity(std::size_t n, const PowerAllocation &alloc, const Geometry &geometry,
                         const RadioModel &radio);

    std::vector<double> user_capacities(const PowerAllocation &alloc, const Geometry &geometry,
                                        const RadioModel &radio);

    double sum_capacity(const PowerAllocation &alloc, const Geometry &geometry, const RadioModel &radio);

    /// GBS -> FlyBS capacity summed over all reused channels at separation d_fg.
    double backhaul_capacity(std::span<const double> p_gbs, double d_fg, std::span<const RadioLink> backhaul_links);

    inline double backhaul_capacity(const PowerAllocation &alloc, double d_fg, std::span<const RadioLink> links)
    {
        return backhaul_capacity(alloc.p_gbs, d_fg, links);
    }

    /// Free-space gain at the 1 m reference distance, (c / (4 pi f))^2, times a combined antenna gain.
    double free_space_q(double carrier_frequency_hz, double antenna_gain_dbi);

} // namespace flybs
