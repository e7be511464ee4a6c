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

#include "railbeam/beam_tracking.hpp"
#include "railbeam/tracer.hpp"

#include <atomic>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>

namespace railbeam
{

struct SweepConfig
{
    double rx_height = 3.1;         // RX antenna height above the track [m]
    double rx_step = 1.0;           // [m]
    double train_speed = 300.0;     // [km/h]
    double start = 0.0;             // chainage [m]
    std::optional<double> end;      // chainage [m], defaults to the track length
    TxGeometry tx;                  // TX height above the track, lateral offset, foot-point chainage
    BeamType beam = BeamType::omni();
    std::optional<double> tx_peak_gain;    // dBi, defaults to the HPBW directivity estimate
    std::optional<double> tx_downtilt;     // deg, mechanical tilt of a directional TX, defaults to atan((h - rx_height) / d)
    double front_to_back = 30.0;           // dB
    std::uint64_t seed = 1;

    double speed_mps() const { return train_speed / 3.6; }
    double end_chainage(const Scene &scene) const { return end.value_or(scene.track_length()); }

    void validate() const
    {
        if (!(train_speed > 0.0))
            throw std::invalid_argument("SweepConfig: train_speed must be positive");
        if (!(rx_step > 0.0))
            throw std::invalid_argument("SweepConfig: rx_step must be positive");
        if (!(rx_height >= 0.0))
            throw std::invalid_argument("SweepConfig: rx_height must be non-negative");
        if (!(tx.height > 0.0) || !(tx.offset > 0.0))
            throw std::invalid_argument("SweepConfig: TX height and offset must be positive");
        if (end && !(*end > start))
            throw std::invalid_argument("SweepConfig: end must exceed start");
        if (!(front_to_back > 0.0))
            throw std::invalid_argument("SweepConfig: front_to_back must be positive");
    }
};

/*!
Mechanical downtilt of a directional TX in degrees. The default tilts the antenna's horizontal cut
into the plane through the TX and the RX trajectory, so steering in that cut follows the train.
*/
inline double tx_downtilt(const SweepConfig &s)
{
    if (!s.beam.directional())
        return 0.0;
    return s.tx_downtilt.value_or(rad2deg(std::atan((s.tx.height - s.rx_height) / s.tx.offset)));
}

/// TX pattern before steering.
inline AntennaPattern tx_base_pattern(const SweepConfig &s)
{
    if (!s.beam.directional())
    {
        AntennaPattern p = AntennaPattern::omni();
        if (s.tx_peak_gain)
            p.peak_gain = *s.tx_peak_gain;
        return p;
    }
    AntennaPattern p = AntennaPattern::directional(s.beam, -90.0, 0.0, s.tx_peak_gain);
    p.front_to_back = s.front_to_back;
    p.mount_tilt = tx_downtilt(s);
    p.mount_azimuth = -90.0;
    return p;
}

/// TX position: TX geometry applied to the track at the TX foot-point chainage, on the +y side.
inline Vec3 tx_position(const Scene &scene, const TxGeometry &g)
{
    Vec3 foot = scene.track_point(g.chainage);
    Vec3 t = scene.track_direction(g.chainage);
    Vec3 lateral = Vec3{-t.y, t.x, 0.0}.normalized();
    return foot + lateral * g.offset + Vec3{0.0, 0.0, g.height};
}

inline Vec3 rx_position(const Scene &scene, const SweepConfig &s, double chainage)
{
    return scene.track_point(chainage) + Vec3{0.0, 0.0, s.rx_height};
}

/// TX pattern steered at the RX position in the middle of a scheduled segment.
inline AntennaPattern tx_pattern_for(const Scene &scene, const SweepConfig &s, const AntennaPattern &base,
                                     const BeamSegment &seg)
{
    if (!s.beam.directional())
        return base;
    const Vec3 aim = rx_position(scene, s, 0.5 * (seg.start + seg.end)) - tx_position(scene, s.tx);
    const Angles a = direction_angles(aim);
    return steer(base, to_mount_frame(base, a.azimuth, a.elevation).azimuth);
}

struct ChannelSnapshot
{
    std::size_t index = 0;
    double chainage = 0.0;   // m
    double time = 0.0;       // s, chainage / speed
    double tx_azimuth = 0.0; // active beam azimuth [deg]
    Vec3 tx;
    Vec3 rx;
    std::vector<PropagationPath> paths;
};

struct SnapshotSeries
{
    std::string scene_name;
    SweepConfig sweep;
    TraceConfig trace;
    double schedule_interval = 0.0;
    double dt = 0.0; // s
    double dd = 0.0; // m
    std::vector<ChannelSnapshot> snapshots;
};

/*!
Kinematic Doppler shift of a path seen by a receiver moving with `velocity` (m/s):
f_D = f_c / c * dot(velocity, u), where u is the unit vector from the RX towards the arriving wave.
Positive when the receiver moves towards the last interaction point.
*/
inline double path_doppler(const PropagationPath &p, const Vec3 &velocity, double carrier_frequency)
{
    if (!velocity.is_finite() || !std::isfinite(carrier_frequency))
        throw std::invalid_argument("path_doppler: non-finite input");
    Vec3 u = direction_from_angles(p.aoa.azimuth, p.aoa.elevation);
    return carrier_frequency / speed_of_light * dot(velocity, u);
}

/// Number of RX positions in [start, end] at the configured step.
inline std::size_t snapshot_count(double start, double end, double step)
{
    return static_cast<std::size_t>(std::floor((end - start) / step + 1e-9)) + 1;
}

/*!
Runs the moving-train simulation. One snapshot per RX position; the TX beam is steered to the schedule
segment active at the RX chainage. Snapshots are traced on `jobs` worker threads and collected in
chainage order, so the result does not depend on the worker count.
*/
inline SnapshotSeries run_sweep(const Scene &scene, const Bvh *accel, const SweepConfig &sweep,
                                const BeamSchedule &schedule, const TraceConfig &trace, unsigned jobs = 1)
{
    sweep.validate();
    trace.validate();
    const double start = sweep.start, end = sweep.end_chainage(scene);
    if (!(end > start))
        throw std::invalid_argument("run_sweep: empty chainage range");
    if (!schedule.covers(start, end))
        throw std::invalid_argument("run_sweep: beam schedule leaves a gap in [" + std::to_string(start) + ", " +
                                    std::to_string(end) + "] m");

    std::vector<Vec3> route;
    for (const auto &p : scene.track)
        route.push_back(p + Vec3{0.0, 0.0, sweep.rx_height});
    const Vec3 tx = tx_position(scene, sweep.tx);
    const Tracer tracer(scene, accel, tx, trace, route);
    const AntennaPattern base = tx_base_pattern(sweep);
    const AntennaPattern rx_pattern = AntennaPattern::omni();
    const double v = sweep.speed_mps();

    SnapshotSeries series;
    series.scene_name = scene.name;
    series.sweep = sweep;
    series.sweep.end = end;
    series.trace = trace;
    series.schedule_interval = schedule.interval;
    series.dd = sweep.rx_step;
    series.dt = sweep.rx_step / v;
    series.snapshots.resize(snapshot_count(start, end, sweep.rx_step));

    auto work = [&](std::size_t i) {
        ChannelSnapshot &s = series.snapshots[i];
        s.index = i;
        s.chainage = start + static_cast<double>(i) * sweep.rx_step;
        s.time = s.chainage / v;
        const BeamSegment &seg = schedule.active(s.chainage);
        s.tx_azimuth = seg.azimuth;
        s.tx = tx;
        s.rx = rx_position(scene, sweep, s.chainage);
        s.paths = tracer.trace(s.rx, tx_pattern_for(scene, sweep, base, seg), rx_pattern);
        Vec3 velocity = scene.track_direction(s.chainage) * v;
        for (auto &p : s.paths)
            p.doppler_hz = path_doppler(p, velocity, trace.carrier_frequency);
    };

    const std::size_t n = series.snapshots.size();
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
    if (jobs == 1)
    {
        for (std::size_t i = 0; i < n; ++i)
            work(i);
        return series;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++)
            {
                try
                {
                    work(i);
                }
                catch (...)
                {
                    std::lock_guard lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                    next = n;
                }
            }
        });
    for (auto &t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
    return series;
}

/// Acceleration structure for a scene, or null for an empty (free-space) scene.
inline std::unique_ptr<Bvh> make_accel(const Scene &scene)
{
    if (scene.triangle_count() == 0)
        return nullptr;
    return std::make_unique<Bvh>(scene);
}

} // namespace railbeam
