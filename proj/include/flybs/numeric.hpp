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
#include <functional>
#include <utility>

namespace flybs::numeric
{
    /// Bracket [lo, hi] of an increasing function around `target`, reported after every halving.
    using BracketObserver = std::function<void(double lo, double hi, double f_lo, double f_hi)>;

    /// Bisection for f(x) = target with f nondecreasing on [lo, hi] and f(lo) <= target <= f(hi).
    /// Returns the final bracket; `first` is on the f <= target side.
    template <typename F>
    std::pair<double, double> bisect_increasing(F &&f, double target, double lo, double hi, double x_tol,
                                                const BracketObserver &observer = {})
    {
        double f_lo = f(lo), f_hi = f(hi);
        if (observer)
            observer(lo, hi, f_lo, f_hi);
        while (hi - lo > x_tol)
        {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi)
                break;
            const double f_mid = f(mid);
            if (f_mid <= target)
                lo = mid, f_lo = f_mid;
            else
                hi = mid, f_hi = f_mid;
            if (observer)
                observer(lo, hi, f_lo, f_hi);
        }
        return {lo, hi};
    }

    /// Golden-section minimization of a unimodal function on [lo, hi]; returns the abscissa.
    template <typename F>
    double golden_section_min(F &&f, double lo, double hi, double x_tol)
    {
        const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = lo, b = hi;
        double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
        double fc = f(c), fd = f(d);
        while (b - a > x_tol)
        {
            if (fc <= fd)
            {
                b = d, d = c, fd = fc;
                c = b - inv_phi * (b - a);
                fc = f(c);
            }
            else
            {
                a = c, c = d, fc = fd;
                d = a + inv_phi * (b - a);
                fd = f(d);
            }
        }
        // The interval ends are candidates too; keeps the search honest when the minimum sits on a bound.
        double best = 0.5 * (a + b), f_best = f(best);
        for (double x : {lo, hi})
        {
            const double fx = f(x);
            if (fx < f_best)
                best = x, f_best = fx;
        }
        return best;
    }

    inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
    inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }
    inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

} // namespace flybs::numeric
