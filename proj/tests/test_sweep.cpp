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


#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace railbeam;

namespace
{

BeamSchedule schedule_for(const Scene &scene, const SweepConfig &sw)
{
    std::optional<double> hpbw;
    if (sw.beam.directional())
        hpbw = sw.beam.hpbw_h;
    return make_schedule(sw.start, sw.end_chainage(scene), sw.tx, hpbw);
}

SnapshotSeries sweep_of(const Scene &scene, const SweepConfig &sw, const TraceConfig &tc, unsigned jobs = 1)
{
    auto accel = make_accel(scene);
    return run_sweep(scene, accel.get(), sw, schedule_for(scene, sw), tc, jobs);
}

constexpr double f_max = 300.0 / 3.6 * 2.1e9 / speed_of_light;

} // namespace

TEST(Doppler, KinematicExamples)
{
    PropagationPath p;
    const Vec3 v{300.0 / 3.6, 0.0, 0.0};
    p.aoa = {90.0, 0.0};
    EXPECT_NEAR(path_doppler(p, v, 2.1e9), 0.0, 1e-9);
    p.aoa = {180.0, 0.0};
    EXPECT_NEAR(path_doppler(p, v, 2.1e9), -f_max, 1e-9);
    p.aoa = {0.0, 0.0};
    EXPECT_NEAR(path_doppler(p, v, 2.1e9), f_max, 1e-9);
    EXPECT_NEAR(f_max, 583.3, 0.5);
    EXPECT_THROW(path_doppler(p, {std::nan(""), 0.0, 0.0}, 2.1e9), std::invalid_argument);
}

TEST(Sweep, SnapshotCount)
{
    EXPECT_EQ(snapshot_count(0.0, 700.0, 1.0), 701u);
    EXPECT_EQ(snapshot_count(0.0, 700.0, 3.0), 234u);
    EXPECT_EQ(snapshot_count(10.0, 10.5, 1.0), 1u);
}

TEST(Sweep, FreeSpaceOmni)
{
    Scene s = build_free_space();
    SweepConfig sw;
    sw.tx.chainage = 350.0;
    auto series = sweep_of(s, sw, TraceConfig{});
    ASSERT_EQ(series.snapshots.size(), 701u);
    EXPECT_DOUBLE_EQ(series.dd, 1.0);
    EXPECT_DOUBLE_EQ(series.dt, 1.0 / (300.0 / 3.6));
    int flips = 0;
    double max_abs = 0.0;
    for (std::size_t i = 0; i < series.snapshots.size(); ++i)
    {
        const auto &snap = series.snapshots[i];
        ASSERT_EQ(snap.paths.size(), 1u);
        EXPECT_EQ(snap.paths[0].kind, PathKind::Los);
        EXPECT_EQ(snap.index, i);
        EXPECT_DOUBLE_EQ(snap.chainage, static_cast<double>(i));
        if (i > 0)
        {
            EXPECT_GT(snap.time, series.snapshots[i - 1].time);
            double a = series.snapshots[i - 1].paths[0].doppler_hz, b = snap.paths[0].doppler_hz;
            if ((a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0))
            {
                ++flips;
                EXPECT_NEAR(snap.chainage, 350.0, 1.0);
            }
        }
        max_abs = std::max(max_abs, std::abs(snap.paths[0].doppler_hz));
        EXPECT_LE(std::abs(snap.paths[0].doppler_hz), f_max * (1.0 + 1e-9));
    }
    EXPECT_EQ(flips, 1);
    const double end_cosine = 350.0 / std::sqrt(350.0 * 350.0 + 100.0 * 100.0 + 18.9 * 18.9);
    EXPECT_NEAR(max_abs, f_max * end_cosine, 0.05);
}

TEST(Sweep, FreeSpaceDopplerCeiling)
{
    Scene s = build_free_space(8000.0);
    SweepConfig sw;
    sw.tx.chainage = 4000.0;
    sw.rx_step = 5.0;
    auto series = sweep_of(s, sw, TraceConfig{});
    double max_abs = 0.0;
    for (const auto &snap : series.snapshots)
        max_abs = std::max(max_abs, std::abs(snap.paths.at(0).doppler_hz));
    EXPECT_NEAR(max_abs, 583.3, 0.5);
    EXPECT_LE(max_abs, f_max);
}

TEST(Sweep, ScheduleGapRejected)
{
    Scene s = build_free_space();
    SweepConfig sw;
    auto sched = make_schedule(0.0, 600.0, sw.tx, std::nullopt);
    EXPECT_THROW(run_sweep(s, nullptr, sw, sched, TraceConfig{}), std::invalid_argument);
    sw.rx_step = 0.0;
    EXPECT_THROW(run_sweep(s, nullptr, sw, make_schedule(0.0, 700.0, sw.tx, std::nullopt), TraceConfig{}),
                 std::invalid_argument);
}

TEST(Sweep, WorkerCountDoesNotChangeTheSeries)
{
    Scene s = build_cutting({}, 1);
    SweepConfig sw;
    sw.beam = BeamType::type_b();
    sw.end = 120.0;
    sw.rx_step = 3.0;
    TraceConfig tc;
    tc.max_reflection_order = 2;
    auto one = sweep_of(s, sw, tc, 1);
    auto four = sweep_of(s, sw, tc, 4);
    EXPECT_EQ(series_to_jsonl(one), series_to_jsonl(four));
}

TEST(Sweep, TypeCLosDepartsInsideTheActiveBeam)
{
    Scene s = build_viaduct({}, 1);
    SweepConfig sw;
    sw.beam = BeamType::type_c();
    TraceConfig tc;
    tc.max_reflection_order = 1;
    tc.enable_scattering = false;
    auto series = sweep_of(s, sw, tc);
    EXPECT_EQ(series.schedule_interval, 20.0);
    std::size_t checked = 0;
    for (const auto &snap : series.snapshots)
        for (const auto &p : snap.paths)
            if (p.kind == PathKind::Los)
            {
                EXPECT_LE(std::abs(wrap_degrees(p.aod.azimuth - snap.tx_azimuth)), 7.0) << snap.chainage;
                ++checked;
            }
    EXPECT_GT(checked, 600u);
}

TEST(Sweep, DefaultDowntiltFollowsTheTrack)
{
    SweepConfig sw;
    EXPECT_EQ(tx_downtilt(sw), 0.0);
    sw.beam = BeamType::type_c();
    EXPECT_NEAR(tx_downtilt(sw), rad2deg(std::atan((22.0 - 3.1) / 100.0)), 1e-12);
    sw.tx_downtilt = 4.0;
    EXPECT_EQ(tx_downtilt(sw), 4.0);
    EXPECT_EQ(tx_base_pattern(SweepConfig{}).beam.kind, BeamType::Kind::Omni);
}
