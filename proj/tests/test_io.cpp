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

#include <filesystem>

using namespace railbeam;
namespace fs = std::filesystem;

namespace
{

class TempDir
{
  public:
    TempDir()
    {
        path_ = fs::temp_directory_path() /
                ("railbeam_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                 ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path &path() const { return path_; }

  private:
    fs::path path_;
};

struct SmallRun
{
    SnapshotSeries series;
    BeamSchedule schedule;
};

SmallRun small_run()
{
    Scene s = build_cutting({}, 3);
    auto accel = make_accel(s);
    SweepConfig sw;
    sw.beam = BeamType::type_b();
    sw.end = 60.0;
    sw.rx_step = 5.0;
    TraceConfig tc;
    tc.max_reflection_order = 2;
    SmallRun r;
    r.schedule = make_schedule(0.0, 60.0, sw.tx, sw.beam.hpbw_h);
    r.series = run_sweep(s, accel.get(), sw, r.schedule, tc);
    return r;
}

} // namespace

TEST(Checksum, Fnv1a64Vectors)
{
    EXPECT_EQ(hex64(fnv1a64("")), "cbf29ce484222325");
    EXPECT_EQ(hex64(fnv1a64("a")), "af63dc4c8601ec8c");
    EXPECT_EQ(hex64(fnv1a64("foobar")), "85944171f73967e8");
    EXPECT_EQ(checksum("a"), "fnv1a64:af63dc4c8601ec8c");
}

TEST(Format, NonFiniteValues)
{
    EXPECT_EQ(fmt(-std::numeric_limits<double>::infinity()), "-inf");
    EXPECT_EQ(fmt(std::optional<double>{}), "");
    EXPECT_EQ(fmt(0.5), "0.5");
}

TEST(Series, JsonlRoundTripIsExact)
{
    auto run = small_run();
    const std::string text = series_to_jsonl(run.series);
    SnapshotSeries back = series_from_jsonl(text);
    EXPECT_EQ(series_to_jsonl(back), text);
    ASSERT_EQ(back.snapshots.size(), run.series.snapshots.size());
    for (std::size_t i = 0; i < back.snapshots.size(); ++i)
    {
        ASSERT_EQ(back.snapshots[i].paths.size(), run.series.snapshots[i].paths.size());
        for (std::size_t k = 0; k < back.snapshots[i].paths.size(); ++k)
        {
            EXPECT_EQ(back.snapshots[i].paths[k].amplitude, run.series.snapshots[i].paths[k].amplitude);
            EXPECT_EQ(back.snapshots[i].paths[k].doppler_hz, run.series.snapshots[i].paths[k].doppler_hz);
        }
    }
    EXPECT_EQ(back.sweep.beam.kind, BeamType::Kind::TypeB);
    EXPECT_EQ(back.schedule_interval, run.series.schedule_interval);
}

TEST(RunDirectory, DeterministicManifest)
{
    TempDir tmp;
    auto a = small_run(), b = small_run();
    nlohmann::json cfg = {{"scenario", "cutting"}, {"seed", 3}};
    auto ma = write_run(tmp.path() / "a", a.series, a.schedule, cfg);
    auto mb = write_run(tmp.path() / "b", b.series, b.schedule, cfg);
    EXPECT_EQ(ma.dump(), mb.dump());
    EXPECT_EQ(read_text(tmp.path() / "a" / "manifest.json"), read_text(tmp.path() / "b" / "manifest.json"));
    EXPECT_EQ(ma["snapshots"], 13);
    EXPECT_EQ(ma["files"].size(), 15u);
    EXPECT_EQ(ma["tool_version"], tool_version);
    for (auto &[name, sum] : ma["files"].items())
        EXPECT_EQ(checksum(read_text(tmp.path() / "a" / name)), sum.get<std::string>()) << name;
    const std::string first = read_text(tmp.path() / "a" / snapshot_file_name(0));
    EXPECT_EQ(first.rfind("# railbeam " + std::string(tool_version) + " config " + config_hash(cfg), 0), 0u);
    EXPECT_NE(first.find("kind,delay_ns,power_db,aod_az,aod_el,aoa_az,aoa_el,doppler_hz\n"), std::string::npos);
}

TEST(RunDirectory, LoadVerifiesChecksum)
{
    TempDir tmp;
    auto run = small_run();
    write_run(tmp.path() / "r", run.series, run.schedule, nlohmann::json::object());
    EXPECT_EQ(series_to_jsonl(load_series(tmp.path() / "r")), series_to_jsonl(run.series));
    {
        std::ofstream out(tmp.path() / "r" / "series.jsonl", std::ios::app);
        out << " ";
    }
    EXPECT_THROW(load_series(tmp.path() / "r"), std::runtime_error);
    EXPECT_THROW(load_series(tmp.path() / "missing"), std::invalid_argument);
}

TEST(RunDirectory, RerunReplacesOwnOutputOnly)
{
    TempDir tmp;
    auto run = small_run();
    const fs::path dir = tmp.path() / "r";
    write_run(dir, run.series, run.schedule, nlohmann::json::object());
    EXPECT_NO_THROW(write_run(dir, run.series, run.schedule, nlohmann::json::object()));

    const fs::path foreign = tmp.path() / "foreign";
    fs::create_directories(foreign);
    write_atomic(foreign / "notes.txt", "keep me");
    EXPECT_THROW(write_run(foreign, run.series, run.schedule, nlohmann::json::object()), std::invalid_argument);
    EXPECT_EQ(read_text(foreign / "notes.txt"), "keep me");
}

TEST(RunDirectory, WriteAtomicLeavesNoTemporary)
{
    TempDir tmp;
    write_atomic(tmp.path() / "x.txt", "hello");
    EXPECT_EQ(read_text(tmp.path() / "x.txt"), "hello");
    EXPECT_FALSE(fs::exists(tmp.path() / "x.txt.tmp"));
    EXPECT_THROW(read_text(tmp.path() / "nope.txt"), std::runtime_error);
}

TEST(Config, SweepConfigJsonRoundTrip)
{
    SweepConfig s;
    s.beam = BeamType::custom(20.0, 8.0);
    s.tx_downtilt = 3.5;
    s.end = 500.0;
    nlohmann::json j = s;
    SweepConfig back = j.get<SweepConfig>();
    EXPECT_EQ(nlohmann::json(back).dump(), j.dump());
    EXPECT_EQ(back.beam.hpbw_v, 8.0);
    EXPECT_FALSE(back.tx_peak_gain.has_value());
}

TEST(Config, DiffractionModelNames)
{
    TraceConfig t;
    t.diffraction_model = DiffractionModel::KnifeEdge;
    nlohmann::json j = t;
    EXPECT_EQ(j["diffraction_model"], "knife-edge");
    EXPECT_EQ(j.get<TraceConfig>().diffraction_model, DiffractionModel::KnifeEdge);
}
