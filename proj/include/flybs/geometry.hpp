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

#include <cmath>

namespace flybs
{
    /// Point in meters in a right-handed East/North/Up frame; z is the altitude above ground.
    struct Position3D
    {
        double x = 0.0;
        double y = 0.0;
        double z = 0.0;

        constexpr Position3D &operator+=(const Position3D &o)
        {
            x += o.x, y += o.y, z += o.z;
            return *this;
        }
        constexpr Position3D &operator-=(const Position3D &o)
        {
            x -= o.x, y -= o.y, z -= o.z;
            return *this;
        }
        constexpr Position3D &operator*=(double s)
        {
            x *= s, y *= s, z *= s;
            return *this;
        }

        friend constexpr Position3D operator+(Position3D a, const Position3D &b) { return a += b; }
        friend constexpr Position3D operator-(Position3D a, const Position3D &b) { return a -= b; }
        friend constexpr Position3D operator*(Position3D a, double s) { return a *= s; }
        friend constexpr Position3D operator*(double s, Position3D a) { return a *= s; }
        friend constexpr bool operator==(const Position3D &, const Position3D &) = default;

        constexpr double dot(const Position3D &o) const { return x * o.x + y * o.y + z * o.z; }
        constexpr double squared_norm() const { return dot(*this); }
        double norm() const { return std::sqrt(squared_norm()); }

        bool is_finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
    };

    inline double distance(const Position3D &a, const Position3D &b) { return (a - b).norm(); }
    constexpr double squared_distance(const Position3D &a, const Position3D &b) { return (a - b).squared_norm(); }

} // namespace flybs
