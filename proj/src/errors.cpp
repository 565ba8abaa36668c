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

namespace flybs
{
    const char *to_string(Infeasibility kind)
    {
        switch (kind)
        {
        case Infeasibility::qos:
            return "qos";
        case Infeasibility::flow:
            return "flow";
        case Infeasibility::region:
            return "region";
        case Infeasibility::propulsion_budget:
            return "propulsion-budget";
        }
        return "unknown";
    }

    namespace
    {
        std::string join_violations(const std::vector<std::string> &v)
        {
            std::string msg = "invalid configuration:";
            for (const auto &s : v)
                msg += "\n  - " + s;
            return msg;
        }
    } // namespace

    ConfigError::ConfigError(std::vector<std::string> violations)
        : std::invalid_argument(join_violations(violations)), violations_(std::move(violations))
    {
    }

} // namespace flybs
