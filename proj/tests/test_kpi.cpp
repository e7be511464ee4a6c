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

#include <random>

using namespace railbeam;

namespace
{

Deployment two_sites(double isd = 2000.0)
{
    Deployment d = Deployment::linear(2, isd);
    d.noise_override = -std::numeric_limits<double>::infinity();
    return d;
}

} // namespace

TEST(Kpi, FreeSpaceRsrpAtHundredMetres)
{
    Deployment d = Deployment::linear(1, 2000.0);
    d.geometry = {3.1, 100.0, 0.0};
    auto t = evaluate_kpis(d, {0.0}, free_space_gain(2.1e9, 3.1));
    EXPECT_NEAR(t.rsrp[0][0], -35.9, 0.1);
    EXPECT_EQ(t.serving[0], 0u);
}

TEST(Kpi, DefaultNoisePower)
{
    Deployment d = Deployment::linear(2, 2000.0);
    EXPECT_NEAR(d.noise_power(), -97.0, 1e-9);
    d.noise_override = -120.0;
    EXPECT_EQ(d.noise_power(), -120.0);
}

TEST(Kpi, SpectralEfficiencyAndThroughput)
{
    EXPECT_DOUBLE_EQ(spectral_efficiency(0.0), 1.0);
    EXPECT_NEAR(spectral_efficiency(20.0), 6.658, 1e-3);
    EXPECT_NEAR(throughput_mbps(2.0, 10e6, 0.2), 16.0, 1e-12);
    EXPECT_NEAR(throughput_mbps(2.0, 20e6, 0.2), 2.0 * throughput_mbps(2.0, 10e6, 0.2), 1e-12);
    double prev = -1.0;
    for (double s = -20.0; s <= 40.0; s += 0.5)
    {
        EXPECT_GT(spectral_efficiency(s), prev);
        prev = spectral_efficiency(s);
    }
}

TEST(Kpi, SymmetricPairMidpoint)
{
    Deployment d = two_sites();
    auto positions = position_grid(0.0, 2000.0, 1.0);
    auto t = evaluate_kpis(d, positions, free_space_gain(2.1e9));
    EXPECT_NEAR(t.sinr[1000], 0.0, 0.01);
    EXPECT_NEAR(t.spectral_efficiency[1000], 1.0, 1e-3);
    EXPECT_NEAR(t.rsrq[1000], -10.0 * std::log10(2.0), 1e-9);
    auto r = cell_edge_report(t, d);
    ASSERT_EQ(r.edges.size(), 1u);
    ASSERT_TRUE(r.edges[0].position.has_value());
    EXPECT_NEAR(*r.edges[0].position, 1000.0, 1e-9);
    EXPECT_NEAR(r.edges[0].min_sinr, 0.0, 1e-9);
    EXPECT_EQ(r.edges[0].min_sinr_position, 1000.0);
    EXPECT_TRUE(r.crossover_positions.empty());
}

TEST(Kpi, SinrNeverExceedsSnr)
{
    Deployment d = Deployment::linear(3, 700.0);
    auto positions = position_grid(0.0, 1400.0, 10.0);
    auto g = gain_matrix(d, positions, free_space_gain(2.1e9));
    auto t = evaluate_kpis(d, positions, g);
    for (std::size_t i = 0; i < positions.size(); ++i)
    {
        double snr = t.rsrp[i][t.serving[i]] - d.noise_power();
        EXPECT_LE(t.sinr[i], snr + 1e-12);
    }
}

TEST(Kpi, RemovingAnInterfererNeverLowersSinr)
{
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> gain(-140.0, -60.0);
    std::uniform_int_distribution<int> count(2, 6);
    for (int fixture = 0; fixture < 100; ++fixture)
    {
        const std::size_t n = static_cast<std::size_t>(count(rng));
        Deployment d = Deployment::linear(n, 500.0);
        std::vector<std::vector<double>> g(1, std::vector<double>(n));
        for (auto &x : g[0])
            x = gain(rng);
        auto full = evaluate_kpis(d, {0.0}, g);
        const std::size_t serving = full.serving[0];
        for (std::size_t drop = 0; drop < n; ++drop)
        {
            if (drop == serving)
                continue;
            Deployment fewer = Deployment::linear(n - 1, 500.0);
            std::vector<std::vector<double>> h(1);
            for (std::size_t b = 0; b < n; ++b)
                if (b != drop)
                    h[0].push_back(g[0][b]);
            auto reduced = evaluate_kpis(fewer, {0.0}, h);
            EXPECT_GE(reduced.sinr[0], full.sinr[0] - 1e-12) << "fixture " << fixture;
            EXPECT_DOUBLE_EQ(reduced.rsrp[0][reduced.serving[0]], full.rsrp[0][serving]);
        }
    }
}

TEST(Kpi, ServingCellInvariantUnderGlobalOffset)
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> gain(-140.0, -60.0), offset(-30.0, 30.0);
    Deployment d = Deployment::linear(4, 700.0);
    std::vector<std::vector<double>> g(50, std::vector<double>(4));
    for (auto &row : g)
        for (auto &x : row)
            x = gain(rng);
    std::vector<double> positions(50, 0.0);
    auto a = evaluate_kpis(d, positions, g);
    for (int trial = 0; trial < 10; ++trial)
    {
        double o = offset(rng);
        auto shifted = g;
        for (auto &row : shifted)
            for (auto &x : row)
                x += o;
        EXPECT_EQ(evaluate_kpis(d, positions, shifted).serving, a.serving);
    }
}

TEST(Kpi, CrossoverDetection)
{
    // Narrow beam: 6 dB stronger near each site, 8 dB weaker in the middle third.
    Deployment d = two_sites(2000.0);
    auto positions = position_grid(0.0, 2000.0, 10.0);
    GainModel wide = free_space_gain(2.1e9);
    GainModel narrow = [&](const Deployment &dep, std::size_t bs, double x) {
        double off = std::abs(x - dep.bs_chainages[bs]);
        return wide(dep, bs, x) + (off < 700.0 ? 6.0 : -8.0);
    };
    auto tw = evaluate_kpis(d, positions, wide);
    auto tn = evaluate_kpis(d, positions, narrow);
    auto r = cell_edge_report(tn, d, &tw);
    ASSERT_FALSE(r.crossover_positions.empty());
    for (double x : r.crossover_positions)
    {
        EXPECT_GE(x, 700.0);
        EXPECT_LE(x, 1300.0);
    }
    EXPECT_NEAR(*r.edges[0].position, 1000.0, 1e-9);
}

TEST(Kpi, SeriesGainLookup)
{
    SnapshotSeries s;
    s.dd = 1.0;
    s.sweep.tx.chainage = 0.0;
    for (int i = 0; i <= 10; ++i)
    {
        ChannelSnapshot c;
        c.chainage = i;
        PropagationPath p;
        p.amplitude = std::pow(10.0, -(60.0 + i) / 20.0);
        c.paths = {p};
        s.snapshots.push_back(c);
    }
    auto model = series_gain(s);
    Deployment d = Deployment::linear(2, 10.0);
    EXPECT_NEAR(model(d, 0, 3.0), -63.0, 1e-9);
    EXPECT_NEAR(model(d, 1, 7.0), -63.0, 1e-9);
    EXPECT_NEAR(model(d, 0, 2.5), -62.5, 1e-9);
    EXPECT_THROW(model(d, 0, 12.0), std::out_of_range);
}

TEST(Kpi, Errors)
{
    Deployment one = Deployment::linear(1, 2000.0);
    auto t = evaluate_kpis(one, {0.0}, free_space_gain(2.1e9));
    EXPECT_THROW(cell_edge_report(t, one), std::invalid_argument);
    Deployment d = two_sites();
    EXPECT_THROW(evaluate_kpis(d, {0.0}, std::vector<std::vector<double>>{{-80.0}}), std::invalid_argument);
    EXPECT_THROW(evaluate_kpis(d, {0.0}, std::vector<std::vector<double>>{{-80.0, std::nan("")}}),
                 std::invalid_argument);
    EXPECT_THROW(Deployment::linear(2, 0.0), std::invalid_argument);
    Deployment bad = d;
    bad.overhead = 1.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    EXPECT_THROW(position_grid(10.0, 0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(free_space_gain(0.0), std::invalid_argument);
}
