// SPDX-License-Identifier: Apache-2.0
//
// railbeam: ray-tracing narrow-beam channel simulation for high-speed railway scenarios
// Copyright (C) 2026 The railbeam Authors
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

#include "railbeam/geometry.hpp"

#include <optional>
#include <vector>

namespace railbeam
{

// Beam tracking geometry for a TX mounted beside a straight track.
//
// h  : TX height above the track [m]
// d  : lateral TX-track distance [m]
// phi: horizontal beam direction measured from the perpendicular to the track [deg]
// D0 : along-track distance between the train and the TX foot point [m]

struct TxGeometry
{
    double height = 22.0;        // h
    double offset = 100.0;       // d
    double chainage = 0.0;       // along-track position of the TX foot point
};

/// Beam direction angle atan(D0 / sqrt(h^2 + d^2)) in degrees.
inline double beam_direction(double h, double d, double D0)
{
    if (!(h > 0.0) || !(d > 0.0))
        throw std::invalid_argument("beam_direction: h and d must be positive");
    if (!(D0 >= 0.0))
        throw std::invalid_argument("beam_direction: D0 must be non-negative");
    return rad2deg(std::atan(D0 / std::hypot(h, d)));
}

namespace detail
{
inline void check_beam_edge(double phi, double hpbw, const char *who)
{
    if (!std::isfinite(phi) || !(hpbw >= 0.0))
        throw std::invalid_argument(std::string(who) + ": invalid beam direction or HPBW");
    if (std::abs(phi) + hpbw / 2.0 >= 90.0)
        throw std::domain_error(std::string(who) + ": beam edge reaches 90 deg (parallel to the track)");
}
} // namespace detail

/// Coverage length on the track using the slant geometry (no d >> h approximation).
inline double coverage_distance_exact(double h, double d, double phi, double hpbw)
{
    if (!(h > 0.0) || !(d > 0.0))
        throw std::invalid_argument("coverage_distance_exact: h and d must be positive");
    detail::check_beam_edge(phi, hpbw, "coverage_distance_exact");
    double slant = std::hypot(h, d);
    double theta = std::atan(d * std::tan(deg2rad(phi)) / slant);
    double half = deg2rad(hpbw / 2.0);
    return slant * (std::tan(theta + half) - std::tan(theta - half));
}

/// Coverage length for d >> h: s = d (tan(phi + HPBW/2) - tan(phi - HPBW/2)).
inline double coverage_distance_approx(double d, double phi, double hpbw)
{
    if (!(d > 0.0))
        throw std::invalid_argument("coverage_distance_approx: d must be positive");
    detail::check_beam_edge(phi, hpbw, "coverage_distance_approx");
    double half = deg2rad(hpbw / 2.0);
    double p = deg2rad(phi);
    return d * (std::tan(p + half) - std::tan(p - half));
}

/// Horizontal beam direction (from the perpendicular) that points at a track chainage.
inline double phi_for_chainage(const TxGeometry &g, double chainage)
{
    return rad2deg(std::atan((chainage - g.chainage) / g.offset));
}

/// Scene azimuth of a beam direction phi, for a TX on the +y side of a track running along +x.
inline double azimuth_for_phi(double phi) { return wrap_degrees(phi - 90.0); }

/// Along-track interval [lo, hi] lit between the -3 dB edges of a beam aimed at phi (hi may be +inf).
inline std::pair<double, double> beam_footprint(const TxGeometry &g, double phi, double hpbw)
{
    auto edge = [&](double a) {
        if (a >= 90.0)
            return std::numeric_limits<double>::infinity();
        if (a <= -90.0)
            return -std::numeric_limits<double>::infinity();
        return g.chainage + g.offset * std::tan(deg2rad(a));
    };
    return {edge(phi - hpbw / 2.0), edge(phi + hpbw / 2.0)};
}

struct BeamSegment
{
    double start = 0.0; // chainage [m]
    double end = 0.0;
    double phi = 0.0;     // horizontal beam direction from the track perpendicular [deg]
    double theta = 0.0;   // beam direction within the TX-track slant plane [deg]
    double azimuth = 0.0; // scene azimuth [deg]
};

struct BeamSchedule
{
    std::optional<double> hpbw;  // horizontal HPBW, empty for omni
    double interval = 0.0;       // update interval [m]
    TxGeometry geometry;
    std::vector<BeamSegment> segments;

    /// Segment active at a chainage; boundaries belong to the following segment.
    const BeamSegment &active(double chainage) const
    {
        if (segments.empty() || chainage < segments.front().start - 1e-9 || chainage > segments.back().end + 1e-9)
            throw std::out_of_range("BeamSchedule: chainage " + std::to_string(chainage) + " is not covered");
        auto it = std::upper_bound(segments.begin(), segments.end(), chainage,
                                   [](double c, const BeamSegment &s) { return c < s.start; });
        if (it == segments.begin())
            return segments.front();
        return *(it - 1);
    }

    bool covers(double start, double end) const
    {
        if (segments.empty())
            return false;
        if (segments.front().start > start + 1e-9 || segments.back().end < end - 1e-9)
            return false;
        for (std::size_t i = 1; i < segments.size(); ++i)
            if (std::abs(segments[i].start - segments[i - 1].end) > 1e-9)
                return false;
        return true;
    }
};

/// Smallest coverage distance over the beam directions needed for [start, end] (infinite if none bounded).
inline double min_coverage_distance(const TxGeometry &g, double start, double end, double hpbw)
{
    double phi_a = phi_for_chainage(g, start), phi_b = phi_for_chainage(g, end);
    double phi_min = (phi_a <= 0.0 && phi_b >= 0.0) ? 0.0 : std::min(std::abs(phi_a), std::abs(phi_b));
    if (phi_min + hpbw / 2.0 >= 90.0)
        return std::numeric_limits<double>::infinity();
    return coverage_distance_approx(g.offset, phi_min, hpbw);
}

/*!
Builds the beam update schedule for a train running from `start` to `end`.

With `interval` empty the update interval is the largest multiple of 5 m not exceeding the minimum
coverage distance. Every segment's beam is aimed at the segment midpoint. Throws std::invalid_argument
when the requested interval exceeds the minimum coverage distance or any segment would leave part of
the track outside its beam footprint (a coverage hole).
*/
inline BeamSchedule make_schedule(double start, double end, const TxGeometry &g, std::optional<double> hpbw,
                                  std::optional<double> interval = std::nullopt)
{
    if (!(end > start) || !(g.offset > 0.0) || !(g.height > 0.0))
        throw std::invalid_argument("make_schedule: track extent and TX geometry must be positive");
    if (interval && !(*interval > 0.0))
        throw std::invalid_argument("make_schedule: update interval must be positive");

    BeamSchedule sched;
    sched.hpbw = hpbw;
    sched.geometry = g;
    auto make_segment = [&](double a, double b) {
        double mid = 0.5 * (a + b);
        double phi = phi_for_chainage(g, mid);
        double D0 = mid - g.chainage;
        double theta = std::copysign(beam_direction(g.height, g.offset, std::abs(D0)), D0);
        return BeamSegment{a, b, phi, theta, azimuth_for_phi(phi)};
    };

    if (!hpbw)
    {
        sched.interval = interval.value_or(end - start);
        for (double a = start; a < end - 1e-9; a += sched.interval)
            sched.segments.push_back(make_segment(a, std::min(end, a + sched.interval)));
        return sched;
    }
    if (!(*hpbw > 0.0 && *hpbw < 180.0))
        throw std::invalid_argument("make_schedule: HPBW must lie in (0, 180) degrees");

    double min_cov = min_coverage_distance(g, start, end, *hpbw);
    if (interval)
    {
        if (*interval > min_cov)
            throw std::invalid_argument("make_schedule: coverage hole, interval " + std::to_string(*interval) +
                                        " m exceeds minimum coverage distance " + std::to_string(min_cov) + " m");
        sched.interval = *interval;
    }
    else
    {
        double span = std::min(min_cov, end - start);
        sched.interval = std::floor(span / 5.0 + 1e-9) * 5.0;
        if (sched.interval <= 0.0)
            throw std::invalid_argument("make_schedule: coverage distance below 5 m, no usable update interval");
    }

    std::size_t n = static_cast<std::size_t>(std::ceil((end - start) / sched.interval - 1e-9));
    for (std::size_t i = 0; i < n; ++i)
    {
        double a = start + i * sched.interval;
        double b = (i + 1 == n) ? end : start + (i + 1) * sched.interval;
        BeamSegment seg = make_segment(a, b);
        auto [lo, hi] = beam_footprint(g, seg.phi, *hpbw);
        if (lo > a + 1e-9 || hi < b - 1e-9)
            throw std::invalid_argument("make_schedule: coverage hole in segment [" + std::to_string(a) + ", " +
                                        std::to_string(b) + "] m");
        sched.segments.push_back(seg);
    }
    return sched;
}

} // namespace railbeam
