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

#include <algorithm>
#include <cctype>
#include <optional>

namespace railbeam
{

/// Omnidirectional antenna or a directional beam described by its half-power beamwidths (deg).
struct BeamType
{
    enum class Kind
    {
        Omni,
        TypeA,
        TypeB,
        TypeC,
        Custom
    };

    Kind kind = Kind::Omni;
    double hpbw_h = 360.0;
    double hpbw_v = 360.0;

    static BeamType omni() { return {}; }
    static BeamType type_a() { return {Kind::TypeA, 60.0, 10.0}; }
    static BeamType type_b() { return {Kind::TypeB, 30.0, 10.0}; }
    static BeamType type_c() { return {Kind::TypeC, 12.0, 10.0}; }
    static BeamType custom(double h, double v)
    {
        if (!(h > 0.0 && h < 360.0) || !(v > 0.0 && v < 360.0))
            throw std::invalid_argument("BeamType: HPBW must lie in (0, 360) degrees");
        return {Kind::Custom, h, v};
    }

    bool directional() const { return kind != Kind::Omni; }

    std::string name() const
    {
        switch (kind)
        {
        case Kind::Omni: return "omni";
        case Kind::TypeA: return "typeA";
        case Kind::TypeB: return "typeB";
        case Kind::TypeC: return "typeC";
        case Kind::Custom: break;
        }
        return "custom:" + std::to_string(hpbw_h) + "x" + std::to_string(hpbw_v);
    }

    /// Parses "omni", "typeA", "typeB", "typeC" (case-insensitive letter) or "custom:H,V".
    static BeamType parse(std::string_view text)
    {
        std::string s(text);
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
        if (s == "omni")
            return omni();
        if (s == "typea" || s == "a")
            return type_a();
        if (s == "typeb" || s == "b")
            return type_b();
        if (s == "typec" || s == "c")
            return type_c();
        if (s.rfind("custom:", 0) == 0)
        {
            auto body = s.substr(7);
            auto comma = body.find_first_of(",x");
            if (comma != std::string::npos)
            {
                try
                {
                    return custom(std::stod(body.substr(0, comma)), std::stod(body.substr(comma + 1)));
                }
                catch (const std::logic_error &)
                {
                }
            }
        }
        throw std::invalid_argument("Unknown beam type '" + std::string(text) + "'");
    }
};

/// Directivity estimate 10*log10(41253 / (HPBW_h * HPBW_v)) dBi for directional beams, 0 dBi for omni.
inline double peak_gain_for(const BeamType &beam)
{
    if (!beam.directional())
        return 0.0;
    return 10.0 * std::log10(41253.0 / (beam.hpbw_h * beam.hpbw_v));
}

enum class Polarization
{
    Vertical
};

/*!
Antenna pattern. The boresight is given in the antenna mounting frame, which is the scene frame
rotated down by `mount_tilt` degrees towards the scene azimuth `mount_azimuth`. With zero tilt both
frames coincide.
*/
struct AntennaPattern
{
    BeamType beam;
    double boresight_azimuth = 0.0;   // deg, mounting frame
    double boresight_elevation = 0.0; // deg, mounting frame
    double mount_tilt = 0.0;          // deg, positive tilts the horizontal cut downwards
    double mount_azimuth = 0.0;       // deg, scene azimuth the tilt faces
    double peak_gain = 0.0;           // dBi
    double front_to_back = 30.0;      // dB
    Polarization polarization = Polarization::Vertical;

    static AntennaPattern omni() { return {}; }

    static AntennaPattern directional(const BeamType &beam, double azimuth, double elevation,
                                      std::optional<double> peak_gain_dbi = std::nullopt)
    {
        AntennaPattern p;
        p.beam = beam;
        p.boresight_azimuth = wrap_degrees(azimuth);
        p.boresight_elevation = elevation;
        p.peak_gain = peak_gain_dbi.value_or(peak_gain_for(beam));
        return p;
    }
};

/// Scene direction (azimuth, elevation) expressed in the mounting frame of `p`.
inline Angles to_mount_frame(const AntennaPattern &p, double azimuth, double elevation)
{
    if (p.mount_tilt == 0.0)
        return {azimuth, elevation};
    const double ma = deg2rad(p.mount_azimuth), t = deg2rad(p.mount_tilt);
    const Vec3 f{std::cos(ma), std::sin(ma), 0.0}, s{-std::sin(ma), std::cos(ma), 0.0}, z{0.0, 0.0, 1.0};
    const Vec3 f_t = f * std::cos(t) - z * std::sin(t);
    const Vec3 z_t = f * std::sin(t) + z * std::cos(t);
    const Vec3 v = direction_from_angles(azimuth, elevation);
    const double a = dot(v, f_t), b = dot(v, s), c = std::clamp(dot(v, z_t), -1.0, 1.0);
    return {wrap_degrees(p.mount_azimuth + rad2deg(std::atan2(b, a))), rad2deg(std::asin(c))};
}

/*!
Gain in dBi towards the scene direction (azimuth, elevation) in degrees.

Omni patterns are isotropic. Directional patterns use the parabolic-in-dB form

    A = G_peak - min(12 (dphi / HPBW_h)^2 + 12 (dtheta / HPBW_v)^2, FBR)

with the azimuth offset wrapped to (-180, 180], so the -3 dB points sit exactly at +-HPBW/2 on each
principal cut and the floor is FBR below the peak. Offsets are taken in the mounting frame.
*/
inline double gain(const AntennaPattern &p, double azimuth, double elevation)
{
    if (!p.beam.directional())
        return p.peak_gain;
    const Angles m = to_mount_frame(p, azimuth, elevation);
    double dphi = wrap_degrees(m.azimuth - p.boresight_azimuth);
    double dtheta = m.elevation - p.boresight_elevation;
    double att = 12.0 * (dphi / p.beam.hpbw_h) * (dphi / p.beam.hpbw_h) +
                 12.0 * (dtheta / p.beam.hpbw_v) * (dtheta / p.beam.hpbw_v);
    return p.peak_gain - std::min(att, p.front_to_back);
}

inline double gain(const AntennaPattern &p, const Angles &a) { return gain(p, a.azimuth, a.elevation); }

/// Horizontal-only steering: replaces the boresight azimuth in the mounting frame, keeps the elevation.
inline AntennaPattern steer(AntennaPattern p, double azimuth)
{
    if (!std::isfinite(azimuth))
        throw std::invalid_argument("steer: azimuth must be finite");
    p.boresight_azimuth = wrap_degrees(azimuth);
    return p;
}

} // namespace railbeam
