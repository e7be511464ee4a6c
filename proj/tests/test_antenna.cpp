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


#include "railbeam/railbeam.hpp"

#include <gtest/gtest.h>

using namespace railbeam;

TEST(Antenna, OmniIsIsotropic)
{
    auto p = AntennaPattern::omni();
    EXPECT_DOUBLE_EQ(gain(p, 0.0, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(gain(p, 137.0, -40.0), 0.0);
}

class BeamTypes : public ::testing::TestWithParam<BeamType>
{
};

TEST_P(BeamTypes, HalfPowerPointsOnPrincipalCuts)
{
    const BeamType b = GetParam();
    auto p = AntennaPattern::directional(b, 30.0, 0.0);
    EXPECT_NEAR(p.peak_gain, peak_gain_for(b), 1e-12);
    EXPECT_NEAR(gain(p, 30.0, 0.0), p.peak_gain, 1e-12);
    EXPECT_NEAR(gain(p, 30.0 + b.hpbw_h / 2, 0.0), p.peak_gain - 3.0, 1e-9);
    EXPECT_NEAR(gain(p, 30.0 - b.hpbw_h / 2, 0.0), p.peak_gain - 3.0, 1e-9);
    EXPECT_NEAR(gain(p, 30.0, b.hpbw_v / 2), p.peak_gain - 3.0, 1e-9);
    EXPECT_NEAR(gain(p, 30.0, -b.hpbw_v / 2), p.peak_gain - 3.0, 1e-9);
}

TEST_P(BeamTypes, FrontToBackFloor)
{
    auto p = AntennaPattern::directional(GetParam(), 0.0, 0.0);
    EXPECT_NEAR(gain(p, 180.0, 0.0), p.peak_gain - p.front_to_back, 1e-12);
    for (double az = -180.0; az <= 180.0; az += 7.5)
        EXPECT_GE(gain(p, az, 20.0), p.peak_gain - p.front_to_back - 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Standard, BeamTypes,
                         ::testing::Values(BeamType::type_a(), BeamType::type_b(), BeamType::type_c(),
                                           BeamType::custom(20.0, 8.0)));

TEST(Antenna, StandardBeamwidths)
{
    EXPECT_EQ(BeamType::type_a().hpbw_h, 60.0);
    EXPECT_EQ(BeamType::type_b().hpbw_h, 30.0);
    EXPECT_EQ(BeamType::type_c().hpbw_h, 12.0);
    EXPECT_EQ(BeamType::type_c().hpbw_v, 10.0);
    EXPECT_NEAR(peak_gain_for(BeamType::type_c()), 10.0 * std::log10(41253.0 / 120.0), 1e-12);
}

TEST(Antenna, ParseNames)
{
    EXPECT_EQ(BeamType::parse("typeC").kind, BeamType::Kind::TypeC);
    EXPECT_EQ(BeamType::parse("TYPEA").kind, BeamType::Kind::TypeA);
    EXPECT_EQ(BeamType::parse("omni").kind, BeamType::Kind::Omni);
    auto c = BeamType::parse("custom:20,8");
    EXPECT_EQ(c.hpbw_h, 20.0);
    EXPECT_EQ(c.hpbw_v, 8.0);
    EXPECT_THROW(BeamType::parse("typeD"), std::invalid_argument);
    EXPECT_THROW(BeamType::parse("custom:0,5"), std::invalid_argument);
}

TEST(Antenna, SteerKeepsElevation)
{
    auto p = AntennaPattern::directional(BeamType::type_b(), 0.0, -4.0);
    auto s = steer(p, 190.0);
    EXPECT_DOUBLE_EQ(s.boresight_azimuth, -170.0);
    EXPECT_DOUBLE_EQ(s.boresight_elevation, -4.0);
    EXPECT_THROW(steer(p, std::nan("")), std::invalid_argument);
}

TEST(Antenna, MountFrameContainsTrackLine)
{
    // TX 22 m above and 100 m beside the RX line: a tilt of atan(22 / 100) facing the track puts every
    // point on that line at zero elevation in the mounting frame.
    const double h = 22.0, d = 100.0;
    AntennaPattern p = AntennaPattern::directional(BeamType::type_c(), -90.0, 0.0);
    p.mount_tilt = rad2deg(std::atan(h / d));
    p.mount_azimuth = -90.0;
    const Vec3 tx{0.0, d, h};
    for (double x = -600.0; x <= 600.0; x += 37.0)
    {
        Angles a = direction_angles(Vec3{x, 0.0, 0.0} - tx);
        Angles m = to_mount_frame(p, a.azimuth, a.elevation);
        EXPECT_NEAR(m.elevation, 0.0, 1e-9) << x;
        auto aimed = steer(p, m.azimuth);
        EXPECT_NEAR(gain(aimed, a), aimed.peak_gain, 1e-9);
    }
}

TEST(Antenna, ZeroTiltFrameIsIdentity)
{
    AntennaPattern p = AntennaPattern::directional(BeamType::type_a(), 0.0, 0.0);
    Angles m = to_mount_frame(p, 33.0, -12.0);
    EXPECT_DOUBLE_EQ(m.azimuth, 33.0);
    EXPECT_DOUBLE_EQ(m.elevation, -12.0);
}
