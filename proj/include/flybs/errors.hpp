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

#include <stdexcept>
#include <string>
#include <vector>

namespace flybs
{
    enum class Infeasibility
    {
        qos,               // a user cannot reach its minimum rate
        flow,              // access traffic cannot be carried by the backhaul
        region,            // the FlyBS feasibility region is empty
        propulsion_budget, // no speed satisfies the propulsion power threshold
    };

    const char *to_string(Infeasibility kind);

    /// Raised by the solvers when their constraint set is empty. Callers in the
    /// time-step loop treat it as data (a flagged step), not as a failure.
    class InfeasibleError : public std::runtime_error
    {
    public:
        InfeasibleError(Infeasibility kind, std::string constraint, const std::string &detail)
            : std::runtime_error(std::string(to_string(kind)) + " infeasible [" + constraint + "]: " + detail),
              kind_(kind), constraint_(std::move(constraint))
        {
        }

        Infeasibility kind() const noexcept { return kind_; }
        const std::string &constraint() const noexcept { return constraint_; }

    private:
        Infeasibility kind_;
        std::string constraint_;
    };

    /// Scenario configuration failed validation; carries every offending field.
    class ConfigError : public std::invalid_argument
    {
    public:
        explicit ConfigError(std::vector<std::string> violations);

        const std::vector<std::string> &violations() const noexcept { return violations_; }

    private:
        std::vector<std::string> violations_;
    };

    /// Reading or writing a file failed; the message names the path.
    class IoError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

} // namespace flybs
