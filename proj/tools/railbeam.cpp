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

#include <CLI11.hpp>

#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace railbeam;

namespace
{

// Raised for anything detected before compute starts; maps to exit code 2.
struct ConfigError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

template <class F>
auto prepare(F &&f) -> decltype(f())
{
    try
    {
        return f();
    }
    catch (const ConfigError &)
    {
        throw;
    }
    catch (const std::exception &e)
    {
        throw ConfigError(e.what());
    }
}

struct GlobalOptions
{
    unsigned jobs = 1;
    std::uint64_t seed = 1;
};

struct SceneOptions
{
    std::string scenario = "viaduct";
    std::string params_file;
    double length = 700.0;
    double width = 0.0; // 0 keeps the scenario default
    double pole_spacing = 0.0;
    double bridge_height = 0.0;
    bool no_station_building = false;
};

struct BeamOptions
{
    std::string beam = "omni";
    std::string update = "auto";
    double tx_height = 22.0;
    double tx_offset = 100.0;
    double tx_chainage = 0.0;
    double start = 0.0;
    double end = -1.0; // negative: track length
};

struct TraceOptions
{
    int order = 3;
    int diffraction_order = 1;
    std::string diffraction = "utd";
    bool no_scattering = false;
    double scattering_coefficient = 0.4;
    double floor = 40.0;
    double tile_size = 4.0;
    double frequency = 2.1e9;
    std::size_t max_scattered = 256;
};

struct SweepOptions
{
    double step = 1.0;
    double speed = 300.0;
    double rx_height = 3.1;
    double tx_gain = std::numeric_limits<double>::quiet_NaN();
    double downtilt = std::numeric_limits<double>::quiet_NaN();
    double front_to_back = 30.0;
};

void add_scene_options(CLI::App *cmd, SceneOptions &o)
{
    cmd->add_option("--scenario", o.scenario, "viaduct, cutting, station or free-space")
        ->check(CLI::IsMember({"viaduct", "cutting", "station", "free-space"}))
        ->capture_default_str();
    cmd->add_option("--scene-params", o.params_file, "JSON object of scenario parameters")->check(CLI::ExistingFile);
    cmd->add_option("--length", o.length, "scene length along the track [m]")->capture_default_str();
    cmd->add_option("--width", o.width, "scene width across the track [m]");
    cmd->add_option("--pole-spacing", o.pole_spacing, "cutting: catenary pole spacing [m]");
    cmd->add_option("--bridge-height", o.bridge_height, "viaduct: deck height above ground [m]");
    cmd->add_flag("--no-station-building", o.no_station_building, "station: drop the building beside the TX");
}

void add_beam_options(CLI::App *cmd, BeamOptions &o, bool with_range = true)
{
    cmd->add_option("--beam", o.beam, "omni, typeA, typeB, typeC or custom:H,V")->capture_default_str();
    cmd->add_option("--update", o.update, "beam update interval in m, or auto")->capture_default_str();
    cmd->add_option("--tx-height", o.tx_height, "TX height above the track [m]")->capture_default_str();
    cmd->add_option("--tx-offset", o.tx_offset, "TX lateral distance from the track [m]")->capture_default_str();
    cmd->add_option("--tx-chainage", o.tx_chainage, "chainage of the TX foot point [m]")->capture_default_str();
    if (with_range)
    {
        cmd->add_option("--start", o.start, "first RX chainage [m]")->capture_default_str();
        cmd->add_option("--end", o.end, "last RX chainage [m], default track end");
    }
}

void add_trace_options(CLI::App *cmd, TraceOptions &o)
{
    cmd->add_option("--order", o.order, "maximum reflection order")->check(CLI::Range(0, 8))->capture_default_str();
    cmd->add_option("--diffraction-order", o.diffraction_order, "0 or 1")->check(CLI::Range(0, 1))->capture_default_str();
    cmd->add_option("--diffraction", o.diffraction, "utd or knife-edge")
        ->check(CLI::IsMember({"utd", "knife-edge"}))
        ->capture_default_str();
    cmd->add_flag("--no-scattering", o.no_scattering, "disable diffuse scattering");
    cmd->add_option("--scattering-coefficient", o.scattering_coefficient)->capture_default_str();
    cmd->add_option("--floor", o.floor, "path power floor below the strongest path [dB]")->capture_default_str();
    cmd->add_option("--tile-size", o.tile_size, "scattering tile size [m]")->capture_default_str();
    cmd->add_option("--frequency", o.frequency, "carrier frequency [Hz]")->capture_default_str();
    cmd->add_option("--max-scattered", o.max_scattered, "scattered paths kept per snapshot")->capture_default_str();
}

void add_sweep_options(CLI::App *cmd, SweepOptions &o)
{
    cmd->add_option("--step", o.step, "RX spacing [m]")->capture_default_str();
    cmd->add_option("--speed", o.speed, "train speed [km/h]")->capture_default_str();
    cmd->add_option("--rx-height", o.rx_height, "RX height above the track [m]")->capture_default_str();
    cmd->add_option("--tx-gain", o.tx_gain, "TX peak gain [dBi], default from the HPBW");
    cmd->add_option("--downtilt", o.downtilt, "TX mechanical downtilt [deg], default atan((h - rx_h) / d)");
    cmd->add_option("--front-to-back", o.front_to_back, "TX front-to-back ratio [dB]")->capture_default_str();
}

struct BuiltScene
{
    Scene scene;
    json params;
};

BuiltScene build_scene(const SceneOptions &o, std::uint64_t seed)
{
    json overrides = json::object();
    if (!o.params_file.empty())
    {
        overrides = json::parse(read_text(o.params_file));
        if (!overrides.is_object())
            throw std::invalid_argument("--scene-params must hold a JSON object");
    }
    auto apply = [&](auto params) {
        json j = params;
        for (auto &[k, v] : overrides.items())
        {
            if (!j.contains(k))
                throw std::invalid_argument("scene parameter '" + k + "' is not known for " + o.scenario);
            j[k] = v;
        }
        j["length"] = o.length;
        if (o.width > 0.0)
            j["width"] = o.width;
        return j.get<decltype(params)>();
    };
    if (o.scenario == "viaduct")
    {
        auto p = apply(ViaductParams{});
        if (o.bridge_height > 0.0)
            p.bridge_height = o.bridge_height;
        return {build_viaduct(p, seed), p};
    }
    if (o.scenario == "cutting")
    {
        auto p = apply(CuttingParams{});
        if (o.pole_spacing > 0.0)
            p.pole_spacing = o.pole_spacing;
        return {build_cutting(p, seed), p};
    }
    if (o.scenario == "station")
    {
        auto p = apply(StationParams{});
        if (o.no_station_building)
            p.station_building = false;
        return {build_station(p, seed), p};
    }
    const double width = o.width > 0.0 ? o.width : 400.0;
    return {build_free_space(o.length, width), json{{"length", o.length}, {"width", width}, {"track_height", 0.0}}};
}

TraceConfig make_trace(const TraceOptions &o)
{
    TraceConfig t;
    t.carrier_frequency = o.frequency;
    t.max_reflection_order = o.order;
    t.max_diffraction_order = o.diffraction_order;
    t.diffraction_model = o.diffraction == "utd" ? DiffractionModel::Utd : DiffractionModel::KnifeEdge;
    t.enable_scattering = !o.no_scattering;
    t.scattering_coefficient = o.scattering_coefficient;
    t.path_power_floor = o.floor;
    t.scattering_tile_size = o.tile_size;
    t.max_scattered_paths = o.max_scattered;
    t.validate();
    return t;
}

std::optional<double> parse_update(const std::string &update)
{
    if (update == "auto")
        return std::nullopt;
    std::size_t used = 0;
    double v = 0.0;
    try
    {
        v = std::stod(update, &used);
    }
    catch (const std::exception &)
    {
        used = 0;
    }
    if (used != update.size() || !(v > 0.0))
        throw std::invalid_argument("--update must be 'auto' or a positive distance in m, got '" + update + "'");
    return v;
}

BeamSchedule make_beam_schedule(const BeamOptions &b, const BeamType &beam, double start, double end)
{
    TxGeometry g{b.tx_height, b.tx_offset, b.tx_chainage};
    auto hpbw = beam.directional() ? std::optional<double>(beam.hpbw_h) : std::nullopt;
    return make_schedule(start, end, g, hpbw, parse_update(b.update));
}

std::string census_text(const Scene &scene)
{
    std::ostringstream out;
    out << "scene " << scene.name << ": " << scene.triangle_count() << " triangles, " << scene.edges.size()
        << " edges, track " << fmt(scene.track_length()) << " m\n";
    for (const auto &[name, n] : material_census(scene))
        out << "  material " << name << ": " << n << " triangles\n";
    std::map<std::string, std::size_t> tags;
    for (const auto &s : scene.surfaces)
        ++tags[s.tag];
    for (const auto &[tag, n] : tags)
        out << "  object " << tag << ": " << n << "\n";
    return out.str();
}

// ---------- subcommands ----------

int cmd_scene(const GlobalOptions &g, const SceneOptions &o, const std::string &out)
{
    auto built = prepare([&] { return build_scene(o, g.seed); });
    json j = scene_to_json(built.scene);
    j["params"] = built.params;
    j["seed"] = g.seed;
    j["tool_version"] = tool_version;
    write_atomic(out, j.dump() + "\n");
    std::cout << census_text(built.scene) << "wrote " << out << "\n";
    return 0;
}

int cmd_schedule(const BeamOptions &b, const std::string &out)
{
    auto sched = prepare([&] {
        const BeamType beam = BeamType::parse(b.beam);
        const double end = b.end < 0.0 ? 700.0 : b.end;
        return make_beam_schedule(b, beam, b.start, end);
    });
    json cfg = {{"beam", b.beam}, {"update", b.update}, {"tx", TxGeometry{b.tx_height, b.tx_offset, b.tx_chainage}}};
    const std::string csv = schedule_csv(sched, config_hash(cfg));
    if (out.empty())
        std::cout << csv;
    else
        write_atomic(out, csv);
    std::cerr << "interval " << fmt(sched.interval) << " m, " << sched.segments.size() << " segments\n";
    return 0;
}

int cmd_sweep(const GlobalOptions &g, const SceneOptions &so, const BeamOptions &bo, const TraceOptions &to,
              const SweepOptions &wo, const std::string &out)
{
    struct Plan
    {
        BuiltScene built;
        SweepConfig sweep;
        TraceConfig trace;
        BeamSchedule schedule;
        json config;
    };
    Plan plan = prepare([&] {
        Plan p;
        p.built = build_scene(so, g.seed);
        p.trace = make_trace(to);
        SweepConfig &s = p.sweep;
        s.beam = BeamType::parse(bo.beam);
        s.rx_height = wo.rx_height;
        s.rx_step = wo.step;
        s.train_speed = wo.speed;
        s.start = bo.start;
        s.end = bo.end < 0.0 ? p.built.scene.track_length() : bo.end;
        s.tx = {bo.tx_height, bo.tx_offset, bo.tx_chainage};
        if (!std::isnan(wo.tx_gain))
            s.tx_peak_gain = wo.tx_gain;
        if (!std::isnan(wo.downtilt))
            s.tx_downtilt = wo.downtilt;
        s.front_to_back = wo.front_to_back;
        s.seed = g.seed;
        s.validate();
        if (*s.end > p.built.scene.track_length() + 1e-9)
            throw std::invalid_argument("--end exceeds the track length");
        p.schedule = make_beam_schedule(bo, s.beam, s.start, *s.end);
        p.config = {{"scenario", so.scenario},
                    {"scene_params", p.built.params},
                    {"seed", g.seed},
                    {"update", bo.update},
                    {"sweep", s},
                    {"trace", p.trace}};
        return p;
    });
    const auto accel = make_accel(plan.built.scene);
    const auto series = run_sweep(plan.built.scene, accel.get(), plan.sweep, plan.schedule, plan.trace, g.jobs);
    const json manifest = write_run(out, series, plan.schedule, plan.config);
    std::size_t empty = 0;
    for (const auto &s : series.snapshots)
        empty += s.paths.empty();
    std::cout << "run " << out << ": " << series.snapshots.size() << " snapshots (" << empty << " empty), beam "
              << plan.sweep.beam.name() << ", update interval " << fmt(plan.schedule.interval) << " m\n"
              << "manifest " << checksum(read_text(fs::path(out) / "manifest.json")) << "\n";
    return 0;
}

struct LoadedRun
{
    fs::path dir;
    json manifest;
    SnapshotSeries series;
};

std::vector<LoadedRun> load_runs(const std::vector<std::string> &dirs)
{
    return prepare([&] {
        std::vector<LoadedRun> runs;
        for (const auto &d : dirs)
        {
            if (!fs::is_directory(d))
                throw std::invalid_argument("run directory not found: " + d);
            runs.push_back({d, read_manifest(d), load_series(d)});
        }
        return runs;
    });
}

/// Orders runs from the widest to the narrowest horizontal beam, omni first.
std::vector<std::size_t> beam_order(const std::vector<LoadedRun> &runs)
{
    std::vector<std::size_t> idx(runs.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return runs[a].series.sweep.beam.hpbw_h > runs[b].series.sweep.beam.hpbw_h;
    });
    return idx;
}

std::string run_label(const LoadedRun &r, std::size_t i, std::size_t n)
{
    std::string label = r.series.scene_name + "_" + r.series.sweep.beam.name();
    for (char &c : label)
        if (c == ':' || c == ',' || c == '/')
            c = '_';
    return n > 1 ? std::to_string(i) + "_" + label : label;
}

int cmd_stats(const std::vector<std::string> &dirs, const StatsOptions &opt_in, const std::string &out)
{
    auto runs = load_runs(dirs);
    const StatsOptions opt = prepare([&] {
        opt_in.validate();
        return opt_in;
    });
    const auto order = beam_order(runs);
    std::vector<StatsReport> reports;
    std::vector<std::string> beams;
    for (std::size_t k = 0; k < order.size(); ++k)
    {
        const auto &run = runs[order[k]];
        const std::string hash = run.manifest.value("config_hash", "");
        StatsReport r = compute_stats(run.series, opt);
        const fs::path dir = fs::path(out) / run_label(run, k, order.size());
        write_atomic(dir / "stats.json", stats_to_json(r, opt, hash).dump(2) + "\n");
        write_atomic(dir / "metrics.csv", stats_series_csv(r, hash));
        for (const auto &si : r.si)
            write_atomic(dir / ("ccdf_cth" + fmt(si.c_th) + ".csv"), ccdf_csv(si, hash));
        std::cout << run.dir.string() << ": " << r.scene_name << " " << r.beam;
        if (r.pl)
            std::cout << " n_PL=" << fmt(r.pl->n, 4) << " sigma_SF=" << fmt(r.pl->sigma_sf, 4);
        if (r.kf_summary)
            std::cout << " mu_K=" << fmt(r.kf_summary->mean, 4);
        if (r.ds_summary)
            std::cout << " mu_DS=" << fmt(r.ds_summary->mean, 4);
        if (r.dps_summary)
            std::cout << " mu_DPS=" << fmt(r.dps_summary->mean, 4);
        for (const auto &si : r.si)
            std::cout << " SI(" << fmt(si.c_th) << ")=" << fmt(si.mean, 4);
        std::cout << "\n";
        beams.push_back(r.beam);
        reports.push_back(std::move(r));
    }
    if (reports.size() >= 2)
    {
        const auto verdicts = trend_verdicts(reports);
        write_atomic(fs::path(out) / "trends.json", trends_to_json(verdicts, beams).dump(2) + "\n");
        for (const auto &v : verdicts)
        {
            std::cout << "trend " << v.metric << " " << v.direction << ":";
            for (double x : v.values)
                std::cout << " " << fmt(x, 5);
            std::cout << " " << (v.pass ? "PASS" : "FAIL") << "\n";
        }
    }
    return 0;
}

struct KpiOptions
{
    std::size_t bs = 2;
    double isd = 2000.0;
    double first = 0.0;
    double tx_power = 43.0;
    std::string noise;  // dBm, "-inf" for noise-free; empty uses the noise figure
    double noise_figure = 7.0;
    double bandwidth = 10e6;
    double overhead = 0.2;
    double step = 1.0;
    std::string gain = "fit";
    double frequency = 2.1e9;
    double tx_height = 22.0;
    double tx_offset = 100.0;
    std::string reference;
};

int cmd_kpi(const std::vector<std::string> &dirs, const KpiOptions &o, const std::string &out)
{
    struct Plan
    {
        Deployment deployment;
        std::vector<double> positions;
        GainModel model;
        std::optional<GainModel> reference;
        std::vector<std::string> sources;
    };
    Plan p = prepare([&] {
        Plan p;
        p.deployment = Deployment::linear(o.bs, o.isd, o.first);
        p.deployment.geometry = {o.tx_height, o.tx_offset, 0.0};
        p.deployment.tx_power = o.tx_power;
        p.deployment.noise_figure = o.noise_figure;
        p.deployment.bandwidth = o.bandwidth;
        p.deployment.overhead = o.overhead;
        if (!o.noise.empty())
            p.deployment.noise_override = o.noise == "-inf" ? -std::numeric_limits<double>::infinity() : std::stod(o.noise);
        p.deployment.validate();
        p.positions = position_grid(p.deployment.bs_chainages.front(), p.deployment.bs_chainages.back(), o.step);
        auto model_for = [&](const SnapshotSeries *series) -> GainModel {
            if (o.gain == "free-space")
                return free_space_gain(o.frequency, series ? series->sweep.rx_height : 3.1);
            if (!series)
                throw std::invalid_argument("--gain " + o.gain + " needs a run directory");
            if (o.gain == "series")
                return series_gain(*series);
            return fitted_gain(fit_path_loss(*series), series->sweep.rx_height);
        };
        if (dirs.size() > 1)
            throw std::invalid_argument("kpi takes at most one run directory; use --reference for the comparison run");
        std::optional<SnapshotSeries> main_series, ref_series;
        if (!dirs.empty())
        {
            main_series = load_runs(dirs).front().series;
            p.sources.push_back(dirs.front());
        }
        p.model = model_for(main_series ? &*main_series : nullptr);
        if (!o.reference.empty())
        {
            ref_series = load_runs({o.reference}).front().series;
            p.reference = model_for(&*ref_series);
            p.sources.push_back(o.reference);
        }
        // Evaluate once here so a missing gain is reported as a configuration problem.
        gain_matrix(p.deployment, p.positions, p.model);
        if (p.reference)
            gain_matrix(p.deployment, p.positions, *p.reference);
        return p;
    });
    const KpiTrace trace = evaluate_kpis(p.deployment, p.positions, p.model);
    std::optional<KpiTrace> ref;
    if (p.reference)
        ref = evaluate_kpis(p.deployment, p.positions, *p.reference);
    json cfg = {{"bs", o.bs},           {"isd", o.isd},           {"first", o.first},
                {"tx_power", o.tx_power}, {"noise_dbm", p.deployment.noise_power() == -std::numeric_limits<double>::infinity()
                                                            ? json("-inf")
                                                            : json(p.deployment.noise_power())},
                {"bandwidth", o.bandwidth}, {"overhead", o.overhead}, {"step", o.step},
                {"gain", o.gain},           {"frequency", o.frequency}, {"tx_height", o.tx_height},
                {"tx_offset", o.tx_offset}};
    std::vector<std::string> source_hashes;
    for (const auto &d : p.sources)
        source_hashes.push_back(read_manifest(d).value("config_hash", ""));
    cfg["source_config_hashes"] = source_hashes;
    const std::string hash = config_hash(cfg);
    write_atomic(fs::path(out) / "kpi.csv", kpi_csv(trace, p.deployment, hash));
    json summary = {{"schema", kpi_schema}, {"tool_version", tool_version}, {"config", cfg}, {"config_hash", hash}};
    auto mean = [](const std::vector<double> &v) { return compensated_sum(v) / static_cast<double>(v.size()); };
    summary["mean_sinr_db"] = mean(trace.sinr);
    summary["mean_spectral_efficiency"] = mean(trace.spectral_efficiency);
    summary["mean_throughput_mbps"] = mean(trace.throughput);
    if (p.deployment.size() >= 2)
        summary["cell_edge"] = cell_edge_json(cell_edge_report(trace, p.deployment, ref ? &*ref : nullptr));
    write_atomic(fs::path(out) / "kpi_summary.json", summary.dump(2) + "\n");
    std::cout << "kpi: " << p.deployment.size() << " BS, ISD " << fmt(o.isd) << " m, " << trace.positions.size()
              << " positions, mean SINR " << fmt(summary["mean_sinr_db"].get<double>(), 4) << " dB, mean SE "
              << fmt(summary["mean_spectral_efficiency"].get<double>(), 4) << " bps/Hz\n";
    return 0;
}

std::string heatmap_csv(const SnapshotSeries &series, const std::string &hash, const char *axis,
                        const std::function<BinnedSpectrum(const ChannelSnapshot &)> &spectrum)
{
    std::string out = provenance_line(hash);
    out += std::string("chainage_m,") + axis + ",power_db\n";
    for (const auto &s : series.snapshots)
    {
        if (s.paths.empty())
            continue;
        const BinnedSpectrum b = spectrum(s);
        for (std::size_t k = 0; k < b.power.size(); ++k)
            if (b.power[k] > 0.0)
                out += fmt(s.chainage) + "," + fmt(b.centre(k)) + "," + fmt(10.0 * std::log10(b.power[k])) + "\n";
    }
    return out;
}

int cmd_report(const std::vector<std::string> &dirs, const StatsOptions &opt_in, const std::string &out)
{
    auto runs = load_runs(dirs);
    const StatsOptions opt = prepare([&] {
        opt_in.validate();
        return opt_in;
    });
    const auto order = beam_order(runs);
    std::vector<StatsReport> reports;
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < order.size(); ++k)
    {
        const auto &run = runs[order[k]];
        const auto &series = run.series;
        const std::string hash = run.manifest.value("config_hash", "");
        const fs::path dir = fs::path(out) / run_label(run, k, order.size());
        write_atomic(dir / "pdp_heatmap.csv", heatmap_csv(series, hash, "delay_ns", [&](const ChannelSnapshot &s) {
                         return pdp(s, opt.delay_bin);
                     }));
        write_atomic(dir / "dpsd_heatmap.csv", heatmap_csv(series, hash, "doppler_hz", [&](const ChannelSnapshot &s) {
                         return doppler_spectrum(s.paths, opt.doppler_bin);
                     }));
        write_atomic(dir / "pas_arrival_heatmap.csv",
                     heatmap_csv(series, hash, "azimuth_deg", [&](const ChannelSnapshot &s) {
                         return pas(s.paths, AngleSide::Arrival, opt.azimuth_bin);
                     }));
        write_atomic(dir / "pas_departure_heatmap.csv",
                     heatmap_csv(series, hash, "azimuth_deg", [&](const ChannelSnapshot &s) {
                         return pas(s.paths, AngleSide::Departure, opt.azimuth_bin);
                     }));
        StatsReport r = compute_stats(series, opt);
        for (const auto &si : r.si)
            write_atomic(dir / ("ccdf_cth" + fmt(si.c_th) + ".csv"), ccdf_csv(si, hash));
        labels.push_back(r.scene_name + " " + r.beam);
        reports.push_back(std::move(r));
    }

    struct Row
    {
        std::string name;
        std::function<std::optional<double>(const StatsReport &)> get;
    };
    auto mean_of = [](std::optional<Summary> StatsReport::*m) {
        return [m](const StatsReport &r) -> std::optional<double> {
            return (r.*m) ? std::optional<double>((r.*m)->mean) : std::nullopt;
        };
    };
    auto std_of = [](std::optional<Summary> StatsReport::*m) {
        return [m](const StatsReport &r) -> std::optional<double> {
            return (r.*m) ? std::optional<double>((r.*m)->std) : std::nullopt;
        };
    };
    std::vector<Row> rows = {
        {"n_PL", [](const StatsReport &r) { return r.pl ? std::optional<double>(r.pl->n) : std::nullopt; }},
        {"sigma_SF [dB]", [](const StatsReport &r) { return r.pl ? std::optional<double>(r.pl->sigma_sf) : std::nullopt; }},
        {"mu_K [dB]", mean_of(&StatsReport::kf_summary)},
        {"sigma_K [dB]", std_of(&StatsReport::kf_summary)},
        {"mu_DS [ns]", mean_of(&StatsReport::ds_summary)},
        {"sigma_DS [ns]", std_of(&StatsReport::ds_summary)},
        {"mu_DPS [Hz]", mean_of(&StatsReport::dps_summary)},
        {"sigma_DPS [Hz]", std_of(&StatsReport::dps_summary)},
        {"mu_AAS [deg]", mean_of(&StatsReport::aas_summary)},
        {"sigma_AAS [deg]", std_of(&StatsReport::aas_summary)},
        {"mu_DAS [deg]", mean_of(&StatsReport::das_summary)},
        {"sigma_DAS [deg]", std_of(&StatsReport::das_summary)},
    };
    for (std::size_t i = 0; i < opt.c_th.size(); ++i)
        rows.push_back({"mean SI c_th=" + fmt(opt.c_th[i]) + " [m]", [i](const StatsReport &r) {
                            return std::optional<double>(r.si.at(i).mean);
                        }});

    std::string csv = "metric";
    std::string md = "| metric |";
    std::string rule = "|---|";
    for (const auto &l : labels)
    {
        csv += "," + l;
        md += " " + l + " |";
        rule += "---|";
    }
    csv += "\n";
    md += "\n" + rule + "\n";
    for (const auto &row : rows)
    {
        csv += row.name;
        md += "| " + row.name + " |";
        for (const auto &r : reports)
        {
            const auto v = row.get(r);
            csv += "," + fmt(v);
            md += " " + (v ? fmt(*v, 4) : std::string("n/a")) + " |";
        }
        csv += "\n";
        md += "\n";
    }
    write_atomic(fs::path(out) / "table.csv", csv);
    write_atomic(fs::path(out) / "table.md", md);
    std::cout << md;
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"railbeam: narrow-beam ray-tracing channel simulation for high-speed railway scenarios"};
    app.set_version_flag("--version", std::string(tool_version));
    app.set_config("--config", "", "TOML/INI configuration file; subcommand options go in [subcommand] sections");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--jobs,-j", g.jobs, "worker threads for tracing, 0 = all cores")->capture_default_str();
    app.add_option("--seed", g.seed, "seed for procedural clutter")->capture_default_str();

    SceneOptions scene_opt;
    BeamOptions beam_opt;
    TraceOptions trace_opt;
    SweepOptions sweep_opt;
    StatsOptions stats_opt;
    KpiOptions kpi_opt;
    std::string scene_out = "scene.json", schedule_out, sweep_out, stats_out = "stats", kpi_out = "kpi",
                report_out = "report";
    std::vector<std::string> runs;

    auto *scene = app.add_subcommand("scene", "build a scenario and export it as JSON");
    add_scene_options(scene, scene_opt);
    scene->add_option("--out,-o", scene_out, "output scene file")->capture_default_str();

    auto *schedule = app.add_subcommand("schedule", "print the beam update schedule");
    add_beam_options(schedule, beam_opt);
    schedule->add_option("--out,-o", schedule_out, "output CSV file, default stdout");

    auto *sweep = app.add_subcommand("sweep", "run a moving-train simulation into a run directory");
    add_scene_options(sweep, scene_opt);
    add_beam_options(sweep, beam_opt);
    add_trace_options(sweep, trace_opt);
    add_sweep_options(sweep, sweep_opt);
    sweep->add_option("--out,-o", sweep_out, "run directory")->required();

    auto add_stats_options = [&](CLI::App *cmd) {
        cmd->add_option("runs", runs, "run directories")->required();
        cmd->add_option("--delay-bin", stats_opt.delay_bin, "PDP bin width [ns]")->capture_default_str();
        cmd->add_option("--doppler-bin", stats_opt.doppler_bin, "DPSD bin width [Hz]")->capture_default_str();
        cmd->add_option("--azimuth-bin", stats_opt.azimuth_bin, "PAS bin width [deg]")->capture_default_str();
        cmd->add_option("--cth", stats_opt.c_th, "stationarity thresholds")->delimiter(',')->capture_default_str();
        cmd->add_option("--d0", stats_opt.d0, "path-loss reference distance [m]")->capture_default_str();
    };
    auto *stats = app.add_subcommand("stats", "channel statistics and beam trend verdicts for run directories");
    add_stats_options(stats);
    stats->add_option("--out,-o", stats_out, "output directory")->capture_default_str();

    auto *kpi = app.add_subcommand("kpi", "cell-level KPIs for a linear base-station deployment");
    kpi->add_option("runs", runs, "run directory providing the channel gains");
    kpi->add_option("--bs", kpi_opt.bs, "number of base stations")->check(CLI::PositiveNumber)->capture_default_str();
    kpi->add_option("--isd", kpi_opt.isd, "inter-site distance [m]")->capture_default_str();
    kpi->add_option("--first", kpi_opt.first, "chainage of the first base station [m]")->capture_default_str();
    kpi->add_option("--tx-power", kpi_opt.tx_power, "TX power [dBm]")->capture_default_str();
    kpi->add_option("--noise", kpi_opt.noise, "noise power [dBm] or -inf, default from the noise figure");
    kpi->add_option("--noise-figure", kpi_opt.noise_figure, "[dB]")->capture_default_str();
    kpi->add_option("--bandwidth", kpi_opt.bandwidth, "[Hz]")->capture_default_str();
    kpi->add_option("--overhead", kpi_opt.overhead, "resource overhead fraction")->capture_default_str();
    kpi->add_option("--step", kpi_opt.step, "position spacing [m]")->capture_default_str();
    kpi->add_option("--gain", kpi_opt.gain, "fit, series or free-space")
        ->check(CLI::IsMember({"fit", "series", "free-space"}))
        ->capture_default_str();
    kpi->add_option("--frequency", kpi_opt.frequency, "carrier for free-space gains [Hz]")->capture_default_str();
    kpi->add_option("--tx-height", kpi_opt.tx_height, "BS height above the track [m]")->capture_default_str();
    kpi->add_option("--tx-offset", kpi_opt.tx_offset, "BS lateral distance [m]")->capture_default_str();
    kpi->add_option("--reference", kpi_opt.reference, "run directory of a reference beam for crossover flags");
    kpi->add_option("--out,-o", kpi_out, "output directory")->capture_default_str();

    auto *report = app.add_subcommand("report", "plot data and a summary table for run directories");
    add_stats_options(report);
    report->add_option("--out,-o", report_out, "output directory")->capture_default_str();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForVersion &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return 2;
    }

    if (g.jobs == 0)
        g.jobs = std::max(1u, std::thread::hardware_concurrency());
    try
    {
        if (*scene)
            return cmd_scene(g, scene_opt, scene_out);
        if (*schedule)
            return cmd_schedule(beam_opt, schedule_out);
        if (*sweep)
            return cmd_sweep(g, scene_opt, beam_opt, trace_opt, sweep_opt, sweep_out);
        if (*stats)
            return cmd_stats(runs, stats_opt, stats_out);
        if (*kpi)
            return cmd_kpi(runs, kpi_opt, kpi_out);
        if (*report)
            return cmd_report(runs, stats_opt, report_out);
    }
    catch (const ConfigError &e)
    {
        std::cerr << "railbeam: configuration error: " << e.what() << "\n";
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "railbeam: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
