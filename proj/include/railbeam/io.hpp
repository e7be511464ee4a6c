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

#include "railbeam/kpi.hpp"
#include "railbeam/scene_builders.hpp"
#include "railbeam/scene_io.hpp"
#include "railbeam/version.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace railbeam
{

// Run directory layout:
//
//   manifest.json        schema, tool version, config echo, seed, schedule, checksums of every file below
//   series.jsonl         header line, then one snapshot per line at full precision
//   schedule.csv         beam update schedule
//   snapshots/NNNNNN.csv per-snapshot path table
//
// No file carries timestamps or absolute paths, so equal configs and seeds give byte-identical runs.

constexpr const char *run_schema = "railbeam.run/1";
constexpr const char *series_schema = "railbeam.series/1";
constexpr const char *stats_schema = "railbeam.stats/1";
constexpr const char *kpi_schema = "railbeam.kpi/1";

inline std::uint64_t fnv1a64(std::string_view data)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data)
    {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

inline std::string checksum(std::string_view data) { return "fnv1a64:" + hex64(fnv1a64(data)); }

/// Writes through a temporary sibling and renames it into place.
inline void write_atomic(const std::filesystem::path &path, std::string_view content)
{
    namespace fs = std::filesystem;
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out)
            throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline std::string read_text(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// printf-style number formatting for CSV cells; non-finite values become empty cells.
inline std::string fmt(double v, int digits = 10)
{
    if (!std::isfinite(v))
        return v == -std::numeric_limits<double>::infinity() ? "-inf" : (std::isnan(v) ? "" : "inf");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

inline std::string fmt(const std::optional<double> &v) { return v ? fmt(*v) : std::string(); }

// ---------- configuration echo ----------

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SiteClearance, x, y, radius)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ViaductParams, length, width, bridge_height, top_width,
                                                guardrail_height, guardrail_thickness, deck_thickness, pier_spacing,
                                                low_trees_per_side, tall_trees_per_side, buildings_per_side,
                                                billboards_per_side, clearance)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(CuttingParams, length, width, depth, bottom_width, top_width,
                                                bridge_width, bridge_position, bridge_thickness, pole_height,
                                                pole_spacing, pole_offset, tree_height_max, coppice_height_max,
                                                building_height_max, trees_per_side, coppice_per_side,
                                                buildings_per_side, cable_box_spacing, clearance)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(StationParams, length, width, platform_length, platform_width,
                                                platform_height, track_clearance, ceiling_height, ceiling_thickness,
                                                column_rows, column_cols, column_size, sign_spacing,
                                                station_building, trees_per_side, clearance)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TxGeometry, height, offset, chainage)

NLOHMANN_JSON_SERIALIZE_ENUM(DiffractionModel, {{DiffractionModel::Utd, "utd"},
                                                {DiffractionModel::KnifeEdge, "knife-edge"}})

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TraceConfig, carrier_frequency, bandwidth, max_reflection_order,
                                                max_diffraction_order, enable_scattering, scattering_coefficient,
                                                path_power_floor, scattering_tile_size, diffraction_model,
                                                max_scattered_paths, max_image_nodes)

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(StatsOptions, d0, delay_bin, doppler_bin, azimuth_bin, c_th)

inline void to_json(nlohmann::json &j, const BeamType &b) { j = b.name(); }
inline void from_json(const nlohmann::json &j, BeamType &b) { b = BeamType::parse(j.get<std::string>()); }

namespace detail
{
template <class T>
nlohmann::json optional_json(const std::optional<T> &v)
{
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <class T>
std::optional<T> optional_from(const nlohmann::json &j, const char *key)
{
    if (!j.contains(key) || j.at(key).is_null())
        return std::nullopt;
    return j.at(key).get<T>();
}
} // namespace detail

inline void to_json(nlohmann::json &j, const SweepConfig &s)
{
    j = {{"rx_height", s.rx_height},
         {"rx_step", s.rx_step},
         {"train_speed", s.train_speed},
         {"start", s.start},
         {"end", detail::optional_json(s.end)},
         {"tx", s.tx},
         {"beam", s.beam},
         {"tx_peak_gain", detail::optional_json(s.tx_peak_gain)},
         {"tx_downtilt", detail::optional_json(s.tx_downtilt)},
         {"front_to_back", s.front_to_back},
         {"seed", s.seed}};
}

inline void from_json(const nlohmann::json &j, SweepConfig &s)
{
    s = SweepConfig{};
    s.rx_height = j.value("rx_height", s.rx_height);
    s.rx_step = j.value("rx_step", s.rx_step);
    s.train_speed = j.value("train_speed", s.train_speed);
    s.start = j.value("start", s.start);
    s.end = detail::optional_from<double>(j, "end");
    if (j.contains("tx"))
        s.tx = j.at("tx").get<TxGeometry>();
    if (j.contains("beam"))
        s.beam = j.at("beam").get<BeamType>();
    s.tx_peak_gain = detail::optional_from<double>(j, "tx_peak_gain");
    s.tx_downtilt = detail::optional_from<double>(j, "tx_downtilt");
    s.front_to_back = j.value("front_to_back", s.front_to_back);
    s.seed = j.value("seed", s.seed);
}

// ---------- snapshots ----------

inline nlohmann::json path_to_json(const PropagationPath &p)
{
    nlohmann::json pts = nlohmann::json::array();
    for (const auto &q : p.interactions)
        pts.push_back(to_json(q));
    return {{"kind", to_string(p.kind)},
            {"order", p.order},
            {"points", std::move(pts)},
            {"length", p.length},
            {"delay", p.delay},
            {"amplitude", {p.amplitude.real(), p.amplitude.imag()}},
            {"aod", {p.aod.azimuth, p.aod.elevation}},
            {"aoa", {p.aoa.azimuth, p.aoa.elevation}},
            {"doppler_hz", p.doppler_hz}};
}

inline PropagationPath path_from_json(const nlohmann::json &j)
{
    PropagationPath p;
    p.kind = path_kind_from_string(j.at("kind").get<std::string>());
    p.order = j.at("order").get<int>();
    for (const auto &q : j.at("points"))
        p.interactions.push_back(vec3_from_json(q));
    p.length = j.at("length").get<double>();
    p.delay = j.at("delay").get<double>();
    p.amplitude = {j.at("amplitude").at(0).get<double>(), j.at("amplitude").at(1).get<double>()};
    p.aod = {j.at("aod").at(0).get<double>(), j.at("aod").at(1).get<double>()};
    p.aoa = {j.at("aoa").at(0).get<double>(), j.at("aoa").at(1).get<double>()};
    p.doppler_hz = j.at("doppler_hz").get<double>();
    return p;
}

inline nlohmann::json snapshot_to_json(const ChannelSnapshot &s)
{
    nlohmann::json paths = nlohmann::json::array();
    for (const auto &p : s.paths)
        paths.push_back(path_to_json(p));
    return {{"index", s.index},         {"chainage", s.chainage}, {"time", s.time},
            {"tx_azimuth", s.tx_azimuth}, {"tx", to_json(s.tx)},     {"rx", to_json(s.rx)},
            {"paths", std::move(paths)}};
}

inline ChannelSnapshot snapshot_from_json(const nlohmann::json &j)
{
    ChannelSnapshot s;
    s.index = j.at("index").get<std::size_t>();
    s.chainage = j.at("chainage").get<double>();
    s.time = j.at("time").get<double>();
    s.tx_azimuth = j.at("tx_azimuth").get<double>();
    s.tx = vec3_from_json(j.at("tx"));
    s.rx = vec3_from_json(j.at("rx"));
    for (const auto &p : j.at("paths"))
        s.paths.push_back(path_from_json(p));
    return s;
}

/// Series as JSON lines: a header object followed by one snapshot object per line.
inline std::string series_to_jsonl(const SnapshotSeries &series)
{
    nlohmann::json header = {{"schema", series_schema},
                             {"scene", series.scene_name},
                             {"sweep", series.sweep},
                             {"trace", series.trace},
                             {"schedule_interval", series.schedule_interval},
                             {"dt", series.dt},
                             {"dd", series.dd},
                             {"snapshots", series.snapshots.size()}};
    std::string out = header.dump() + "\n";
    for (const auto &s : series.snapshots)
        out += snapshot_to_json(s).dump() + "\n";
    return out;
}

inline SnapshotSeries series_from_jsonl(const std::string &text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("series: missing header line");
    const auto header = nlohmann::json::parse(line);
    if (header.value("schema", "") != series_schema)
        throw std::runtime_error("series: unsupported schema '" + header.value("schema", "") + "'");
    SnapshotSeries s;
    s.scene_name = header.at("scene").get<std::string>();
    s.sweep = header.at("sweep").get<SweepConfig>();
    s.trace = header.at("trace").get<TraceConfig>();
    s.schedule_interval = header.at("schedule_interval").get<double>();
    s.dt = header.at("dt").get<double>();
    s.dd = header.at("dd").get<double>();
    while (std::getline(in, line))
        if (!line.empty())
            s.snapshots.push_back(snapshot_from_json(nlohmann::json::parse(line)));
    if (s.snapshots.size() != header.at("snapshots").get<std::size_t>())
        throw std::runtime_error("series: expected " + std::to_string(header.at("snapshots").get<std::size_t>()) +
                                 " snapshots, found " + std::to_string(s.snapshots.size()));
    return s;
}

inline std::string provenance_line(const std::string &config_hash)
{
    return std::string("# railbeam ") + tool_version + " config " + config_hash + "\n";
}

inline std::string snapshot_csv(const ChannelSnapshot &s, const std::string &config_hash)
{
    std::string out = provenance_line(config_hash);
    out += "# chainage " + fmt(s.chainage) + " time " + fmt(s.time) + " tx_azimuth " + fmt(s.tx_azimuth) + "\n";
    out += "kind,delay_ns,power_db,aod_az,aod_el,aoa_az,aoa_el,doppler_hz\n";
    for (const auto &p : s.paths)
        out += to_string(p.kind) + "," + fmt(p.delay * 1e9) + "," + fmt(path_power(p)) + "," + fmt(p.aod.azimuth) +
               "," + fmt(p.aod.elevation) + "," + fmt(p.aoa.azimuth) + "," + fmt(p.aoa.elevation) + "," +
               fmt(p.doppler_hz) + "\n";
    return out;
}

inline std::string schedule_csv(const BeamSchedule &sched, const std::string &config_hash)
{
    std::string out = provenance_line(config_hash);
    out += "segment,start_m,end_m,phi_deg,theta_deg,azimuth_deg\n";
    for (std::size_t i = 0; i < sched.segments.size(); ++i)
    {
        const auto &s = sched.segments[i];
        out += std::to_string(i) + "," + fmt(s.start) + "," + fmt(s.end) + "," + fmt(s.phi) + "," + fmt(s.theta) +
               "," + fmt(s.azimuth) + "\n";
    }
    return out;
}

inline nlohmann::json schedule_to_json(const BeamSchedule &sched)
{
    return {{"hpbw", detail::optional_json(sched.hpbw)},
            {"interval", sched.interval},
            {"segments", sched.segments.size()}};
}

// ---------- run directories ----------

inline std::string snapshot_file_name(std::size_t index)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "snapshots/%06zu.csv", index);
    return buf;
}

inline std::string config_hash(const nlohmann::json &config) { return hex64(fnv1a64(config.dump())); }

/// Clears an existing run directory; refuses to touch a non-empty directory that is not a run.
inline void prepare_output_dir(const std::filesystem::path &dir, const char *schema)
{
    namespace fs = std::filesystem;
    if (fs::exists(dir))
    {
        if (!fs::is_directory(dir))
            throw std::invalid_argument(dir.string() + " exists and is not a directory");
        const fs::path manifest = dir / "manifest.json";
        if (!fs::is_empty(dir))
        {
            bool ours = false;
            if (fs::exists(manifest))
            {
                auto j = nlohmann::json::parse(read_text(manifest), nullptr, false);
                ours = !j.is_discarded() && j.is_object() && j.value("schema", "") == schema;
            }
            if (!ours)
                throw std::invalid_argument(dir.string() + " is not empty and holds no " + schema + " manifest");
            fs::remove_all(dir / "snapshots");
            fs::remove(manifest);
        }
    }
    fs::create_directories(dir);
}

/*!
Writes a sweep run directory and returns its manifest. `config` is the echo of everything that
determines the result; the manifest is written last so a complete manifest implies complete data.
*/
inline nlohmann::json write_run(const std::filesystem::path &dir, const SnapshotSeries &series,
                                const BeamSchedule &schedule, const nlohmann::json &config)
{
    prepare_output_dir(dir, run_schema);
    const std::string hash = config_hash(config);
    nlohmann::json files = nlohmann::json::object();
    auto emit = [&](const std::string &name, const std::string &content) {
        write_atomic(dir / name, content);
        files[name] = checksum(content);
    };
    emit("series.jsonl", series_to_jsonl(series));
    emit("schedule.csv", schedule_csv(schedule, hash));
    for (const auto &s : series.snapshots)
        emit(snapshot_file_name(s.index), snapshot_csv(s, hash));
    nlohmann::json manifest = {{"schema", run_schema},
                               {"tool_version", tool_version},
                               {"command", "sweep"},
                               {"config", config},
                               {"config_hash", hash},
                               {"seed", series.sweep.seed},
                               {"scene", series.scene_name},
                               {"beam", series.sweep.beam},
                               {"schedule", schedule_to_json(schedule)},
                               {"snapshots", series.snapshots.size()},
                               {"files", std::move(files)}};
    write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
    return manifest;
}

inline nlohmann::json read_manifest(const std::filesystem::path &dir)
{
    const auto path = dir / "manifest.json";
    if (!std::filesystem::exists(path))
        throw std::invalid_argument("no run manifest in " + dir.string());
    auto j = nlohmann::json::parse(read_text(path));
    if (j.value("schema", "") != run_schema)
        throw std::invalid_argument(path.string() + ": unsupported schema '" + j.value("schema", "") + "'");
    return j;
}

/// Loads the series of a run directory after checking it against the manifest checksum.
inline SnapshotSeries load_series(const std::filesystem::path &dir)
{
    const auto manifest = read_manifest(dir);
    const auto path = dir / "series.jsonl";
    if (!std::filesystem::exists(path))
        throw std::invalid_argument("missing snapshots: " + path.string());
    const std::string text = read_text(path);
    const std::string expected = manifest.at("files").value("series.jsonl", "");
    if (checksum(text) != expected)
        throw std::runtime_error(path.string() + ": checksum mismatch with the manifest");
    return series_from_jsonl(text);
}

// ---------- statistics output ----------

inline nlohmann::json summary_json(const std::optional<Summary> &s)
{
    if (!s)
        return nullptr;
    return {{"mean", s->mean}, {"std", s->std}, {"defined", s->defined}, {"excluded", s->excluded}};
}

inline nlohmann::json stats_to_json(const StatsReport &r, const StatsOptions &opt, const std::string &run_hash)
{
    nlohmann::json pl = nullptr;
    if (r.pl)
        pl = {{"pl0_db", r.pl->pl0}, {"n", r.pl->n}, {"d0_m", r.pl->d0}, {"sigma_sf_db", r.pl->sigma_sf},
              {"points", r.pl->distances.size()}};
    nlohmann::json si = nlohmann::json::array();
    for (const auto &s : r.si)
        si.push_back({{"c_th", s.c_th}, {"mean_m", s.mean}, {"step_m", s.step}, {"samples", s.samples.size()}});
    return {{"schema", stats_schema},
            {"tool_version", tool_version},
            {"run_config_hash", run_hash},
            {"options", opt},
            {"scene", r.scene_name},
            {"beam", r.beam},
            {"snapshots", r.snapshots},
            {"empty_snapshots", r.empty_snapshots},
            {"path_loss", pl},
            {"k_factor_db", summary_json(r.kf_summary)},
            {"delay_spread_ns", summary_json(r.ds_summary)},
            {"doppler_spread_hz", summary_json(r.dps_summary)},
            {"arrival_azimuth_spread_deg", summary_json(r.aas_summary)},
            {"departure_azimuth_spread_deg", summary_json(r.das_summary)},
            {"stationarity", si}};
}

/// Per-snapshot metric table.
inline std::string stats_series_csv(const StatsReport &r, const std::string &run_hash)
{
    std::string out = provenance_line(run_hash);
    out += "chainage_m,paths,path_loss_db,k_factor_db,delay_spread_ns,doppler_spread_hz,aas_deg,das_deg\n";
    std::size_t k = 0;
    for (std::size_t i = 0; i < r.chainage.size(); ++i)
    {
        std::string pl;
        if (r.pl && r.path_count[i] > 0 && k < r.pl->path_loss.size())
            pl = fmt(r.pl->path_loss[k++]);
        out += fmt(r.chainage[i]) + "," + std::to_string(r.path_count[i]) + "," + pl + "," + fmt(r.kf[i]) + "," +
               fmt(r.ds[i]) + "," + fmt(r.dps[i]) + "," + fmt(r.aas[i]) + "," + fmt(r.das[i]) + "\n";
    }
    return out;
}

inline std::string ccdf_csv(const SiReport &si, const std::string &run_hash)
{
    std::string out = provenance_line(run_hash);
    out += "si_m,probability_greater\n";
    for (const auto &[v, p] : si.ccdf)
        out += fmt(v) + "," + fmt(p) + "\n";
    return out;
}

inline nlohmann::json trends_to_json(const std::vector<TrendVerdict> &verdicts, const std::vector<std::string> &beams)
{
    nlohmann::json list = nlohmann::json::array();
    for (const auto &v : verdicts)
        list.push_back({{"metric", v.metric}, {"direction", v.direction}, {"values", v.values}, {"pass", v.pass}});
    return {{"schema", stats_schema}, {"tool_version", tool_version}, {"beams", beams}, {"verdicts", std::move(list)}};
}

// ---------- KPI output ----------

inline std::string kpi_csv(const KpiTrace &t, const Deployment &d, const std::string &header_hash)
{
    std::string out = provenance_line(header_hash);
    out += "# isd_m " + fmt(d.inter_site_distance) + " bs " + std::to_string(d.size()) + " tx_power_dbm " +
           fmt(d.tx_power) + " noise_dbm " + fmt(d.noise_power()) + "\n";
    out += "position_m";
    for (std::size_t b = 0; b < d.size(); ++b)
        out += ",rsrp_bs" + std::to_string(b) + "_dbm";
    out += ",serving,sinr_db,rsrq_db,se_bps_hz,throughput_mbps\n";
    for (std::size_t i = 0; i < t.positions.size(); ++i)
    {
        out += fmt(t.positions[i]);
        for (double r : t.rsrp[i])
            out += "," + fmt(r);
        out += "," + std::to_string(t.serving[i]) + "," + fmt(t.sinr[i]) + "," + fmt(t.rsrq[i]) + "," +
               fmt(t.spectral_efficiency[i]) + "," + fmt(t.throughput[i]) + "\n";
    }
    return out;
}

inline nlohmann::json cell_edge_json(const CellEdgeReport &r)
{
    nlohmann::json edges = nlohmann::json::array();
    for (const auto &e : r.edges)
        edges.push_back({{"left", e.left},
                         {"right", e.right},
                         {"position_m", detail::optional_json(e.position)},
                         {"min_sinr_db", e.min_sinr},
                         {"min_sinr_position_m", e.min_sinr_position},
                         {"min_rsrp_dbm", e.min_rsrp},
                         {"min_rsrp_position_m", e.min_rsrp_position}});
    return {{"edges", edges}, {"crossover_positions_m", r.crossover_positions}};
}

} // namespace railbeam
