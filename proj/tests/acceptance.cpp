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

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>

using namespace railbeam;
using namespace railbeam::fixtures;

namespace
{

struct Outcome
{
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string &what)
    {
        if (!ok)
        {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

unsigned jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

Terminal omni_at(const Vec3 &p) { return {p, AntennaPattern::omni()}; }

SnapshotSeries sweep(const Scene &scene, const SweepConfig &sw, const TraceConfig &tc)
{
    auto accel = make_accel(scene);
    std::optional<double> hpbw;
    if (sw.beam.directional())
        hpbw = sw.beam.hpbw_h;
    auto sched = make_schedule(sw.start, sw.end_chainage(scene), sw.tx, hpbw);
    return run_sweep(scene, accel.get(), sw, sched, tc, jobs());
}

double max_abs_doppler(const SnapshotSeries &s)
{
    double m = 0.0;
    for (const auto &snap : s.snapshots)
        for (const auto &p : snap.paths)
            m = std::max(m, std::abs(p.doppler_hz));
    return m;
}

void beam_geometry(Outcome &o)
{
    const double c12 = coverage_distance_approx(100.0, 0.0, 12.0);
    const double c30 = coverage_distance_approx(100.0, 0.0, 30.0);
    const TxGeometry g;
    const double i12 = make_schedule(0.0, 700.0, g, 12.0).interval;
    const double i30 = make_schedule(0.0, 700.0, g, 30.0).interval;
    o.detail << "coverage " << fmt(c12, 4) << " m / " << fmt(c30, 4) << " m, auto interval " << i12 << " m / " << i30
             << " m";
    o.check(std::abs(c12 - 21.02) <= 0.01, "coverage at 12 deg");
    o.check(std::abs(c30 - 53.59) <= 0.01, "coverage at 30 deg");
    o.check(i12 == 20.0 && i30 == 50.0, "auto intervals");
}

void free_space_fidelity(Outcome &o)
{
    Scene s = build_free_space();
    auto los = trace_paths(s, nullptr, omni_at({0.0, 100.0, 0.0}), omni_at({0.0, 0.0, 0.0}), TraceConfig{});
    const double gain = los.size() == 1 ? path_power(los[0]) : 0.0;
    SweepConfig sw;
    sw.tx.chainage = 350.0;
    auto fit = fit_path_loss(sweep(s, sw, TraceConfig{}));
    o.detail << "LOS gain " << fmt(gain, 5) << " dB, n " << fmt(fit.n, 6) << ", sigma_SF " << fmt(fit.sigma_sf, 3)
             << " dB";
    o.check(los.size() == 1 && std::abs(gain + 78.9) <= 0.1, "Friis gain");
    o.check(std::abs(fit.n - 2.0) <= 0.005, "path-loss exponent");
    o.check(fit.sigma_sf <= 0.01, "shadow fading");
}

void tracer_oracle(Outcome &o)
{
    const Vec3 size{10.0, 8.0, 4.0};
    Scene s = box_room(size);
    Bvh bvh(s);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    std::size_t paths = 0, mismatches = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial)
    {
        Vec3 tx{size.x * u(rng), size.y * u(rng), size.z * u(rng)};
        Vec3 rx{size.x * u(rng), size.y * u(rng), size.z * u(rng)};
        std::vector<double> got;
        for (const auto &p : trace_paths(s, &bvh, omni_at(tx), omni_at(rx), specular_only(2)))
            got.push_back(p.length);
        std::sort(got.begin(), got.end());
        auto want = box_mirror_lengths(size, tx, rx, 2);
        if (got.size() != want.size())
        {
            ++mismatches;
            continue;
        }
        paths += got.size();
        for (std::size_t k = 0; k < got.size(); ++k)
            worst = std::max(worst, std::abs(got[k] - want[k]));
    }
    o.detail << "20 placements, " << paths << " paths, count mismatches " << mismatches << ", worst length error "
             << worst << " m";
    o.check(mismatches == 0, "path counts");
    o.check(worst <= 1e-6, "path lengths");
}

void fresnel_oracle(Outcome &o)
{
    const double f = 2.1e9;
    const double concrete =
        std::abs(fresnel_reflection(Material::builtin(MaterialKind::Concrete), 0.0, f, FieldPolarization::Parallel));
    const double metal =
        std::abs(fresnel_reflection(Material::builtin(MaterialKind::Metal), 0.0, f, FieldPolarization::Parallel));
    double worst = 0.0;
    for (MaterialKind m : {MaterialKind::Concrete, MaterialKind::Metal, MaterialKind::Marble, MaterialKind::Soil,
                           MaterialKind::Trunk, MaterialKind::Leaf})
        for (int tenth = 0; tenth <= 899; ++tenth)
            for (auto pol : {FieldPolarization::Perpendicular, FieldPolarization::Parallel})
                worst = std::max(worst, std::abs(fresnel_reflection(Material::builtin(m), deg2rad(tenth * 0.1), f, pol)));
    o.detail << "concrete " << fmt(concrete, 4) << ", metal " << fmt(metal, 6) << ", max |Gamma| " << fmt(worst, 6);
    o.check(std::abs(concrete - 0.397) <= 0.005, "concrete");
    o.check(metal >= 0.999, "metal");
    o.check(worst <= 1.0, "passivity");
}

void doppler(Outcome &o)
{
    constexpr double theory = 300.0 / 3.6 * 2.1e9 / speed_of_light;
    Scene s = build_free_space(8000.0);
    SweepConfig sw;
    sw.tx.chainage = 4000.0;
    auto series = sweep(s, sw, TraceConfig{});
    int flips = 0;
    double flip_at = 0.0;
    for (std::size_t i = 1; i < series.snapshots.size(); ++i)
    {
        double a = series.snapshots[i - 1].paths.at(0).doppler_hz, b = series.snapshots[i].paths.at(0).doppler_hz;
        if ((a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0))
        {
            ++flips;
            flip_at = series.snapshots[i].chainage;
        }
    }
    const double free_max = max_abs_doppler(series);

    Scene v = build_viaduct({}, 1);
    SweepConfig vs;
    TraceConfig tc;
    tc.max_reflection_order = 2;
    const double viaduct_max = max_abs_doppler(sweep(v, vs, tc));
    const double observed = 570.0 / theory, ours = viaduct_max / theory;
    o.detail << "free-space max " << fmt(free_max, 5) << " Hz (theory " << fmt(theory, 5) << "), " << flips
             << " sign flip at " << flip_at << " m; viaduct max " << fmt(viaduct_max, 5) << " Hz = " << fmt(ours, 4)
             << " of theory, 570 Hz = " << fmt(observed, 4);
    o.check(std::abs(free_max - 583.3) <= 0.5 && free_max <= theory * (1.0 + 1e-12), "free-space maximum");
    o.check(flips == 1 && std::abs(flip_at - 4000.0) <= 1.0, "single sign flip abeam");
    o.check(observed >= 0.95 && observed <= 1.0, "observed ceiling ratio");
    o.check(ours >= 0.95 && ours <= 1.0, "viaduct ceiling ratio");
}

double dense_correlation(const std::vector<PropagationPath> &a, const std::vector<PropagationPath> &b, double bin)
{
    auto grid = [&](const std::vector<PropagationPath> &v) {
        std::vector<double> g(4096, 0.0);
        double t0 = v.front().delay, total = 0.0;
        for (const auto &p : v)
        {
            t0 = std::min(t0, p.delay);
            total += linear_power(p);
        }
        for (const auto &p : v)
            g[static_cast<std::size_t>(std::floor((p.delay - t0) * 1e9 / bin))] += linear_power(p) / total;
        return g;
    };
    auto ga = grid(a), gb = grid(b);
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t k = 0; k < ga.size(); ++k)
    {
        ab += ga[k] * gb[k];
        aa += ga[k] * ga[k];
        bb += gb[k] * gb[k];
    }
    return ab / std::max(aa, bb);
}

void statistics_kernels(Outcome &o)
{
    const double ds = rms_delay_spread(pdp({synthetic_path(0.0, 1.0), synthetic_path(100.0, 1.0)}));
    const auto kf = k_factor({synthetic_path(0.0, 10.0), synthetic_path(50.0, 1.0)});
    const double as = rms_angular_spread(
        pas({synthetic_path(0.0, 1.0, 179.0), synthetic_path(1.0, 1.0, -179.0)}, AngleSide::Arrival));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(0.0, 2000.0), p(1e-12, 1e-6), az(-180.0, 180.0), f(-583.0, 583.0);
    std::vector<PropagationPath> paths;
    double total = 0.0;
    for (int i = 0; i < 500; ++i)
    {
        paths.push_back(synthetic_path(d(rng), p(rng), az(rng), az(rng), f(rng)));
        total += linear_power(paths.back());
    }
    double worst_rel = 0.0;
    for (const auto &spec : {pdp(paths), doppler_spectrum(paths), pas(paths, AngleSide::Arrival)})
        worst_rel = std::max(worst_rel, std::abs(spec.total() - total) / total);

    std::uniform_real_distribution<double> jitter(0.9, 1.1);
    std::vector<std::vector<PropagationPath>> snaps;
    const std::size_t n = 60, change = 23;
    SnapshotSeries series;
    series.dd = series.sweep.rx_step = 2.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        if (i < change)
            snaps.push_back({synthetic_path(0.0, jitter(rng)), synthetic_path(43.0, 0.3 * jitter(rng)),
                             synthetic_path(95.0, 0.1 * jitter(rng))});
        else
            snaps.push_back({synthetic_path(0.0, 0.2 * jitter(rng)), synthetic_path(213.0, jitter(rng)),
                             synthetic_path(357.0, 0.6 * jitter(rng))});
        ChannelSnapshot c;
        c.index = i;
        c.chainage = 2.0 * static_cast<double>(i);
        c.paths = snaps.back();
        series.snapshots.push_back(c);
    }
    std::size_t si_mismatches = 0;
    for (double c_th : {0.8, 0.9})
    {
        auto r = stationarity_interval(series, c_th);
        for (std::size_t i = 0; i < n; ++i)
        {
            std::size_t k = i + 1;
            while (k < n && dense_correlation(snaps[i], snaps[k], 10.0) >= c_th)
                ++k;
            si_mismatches += r.samples.at(i) != static_cast<double>(k - i) * 2.0;
        }
    }
    o.detail << "DS " << fmt(ds) << " ns, KF " << fmt(kf) << " dB, wrap AS " << fmt(as, 4) << " deg, binning error "
             << worst_rel << ", SI mismatches " << si_mismatches;
    o.check(ds == 50.0, "two-path delay spread");
    o.check(kf && std::abs(*kf - 10.0) <= 0.005, "K-factor");
    o.check(std::abs(as - 1.0) <= 0.1, "wrap-around angular spread");
    o.check(worst_rel <= 1e-12, "power conservation");
    o.check(si_mismatches == 0, "stationarity oracle");
}

void trend_suite(Outcome &o)
{
    o.detail << "3 scenes x 4 beams at reflection order 3, seed 1";
    TraceConfig tc;
    tc.max_reflection_order = 3;
    const std::uint64_t seed = 1;
    std::vector<Scene> scenes{build_viaduct({}, seed), build_cutting({}, seed), build_station({}, seed)};
    for (const auto &scene : scenes)
    {
        std::vector<StatsReport> reports;
        for (auto beam : {BeamType::omni(), BeamType::type_a(), BeamType::type_b(), BeamType::type_c()})
        {
            SweepConfig sw;
            sw.beam = beam;
            sw.seed = seed;
            reports.push_back(compute_stats(sweep(scene, sw, tc)));
        }
        for (const auto &v : trend_verdicts(reports))
        {
            std::printf("    %-9s %-30s %-15s %s :", scene.name.c_str(), v.metric.c_str(), v.direction.c_str(),
                        v.pass ? "PASS" : "FAIL");
            for (double x : v.values)
                std::printf(" %.4g", x);
            std::printf("\n");
            o.check(v.pass, scene.name + " " + v.metric);
        }
        std::fflush(stdout);
    }
}

void kpi(Outcome &o)
{
    Deployment d = Deployment::linear(2, 2000.0);
    d.noise_override = -std::numeric_limits<double>::infinity();
    auto t = evaluate_kpis(d, position_grid(0.0, 2000.0, 1.0), free_space_gain(2.1e9));
    const double mid = t.sinr.at(1000);
    const double se0 = spectral_efficiency(0.0);

    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> gain(-140.0, -60.0);
    std::uniform_int_distribution<int> count(2, 6);
    int violations = 0;
    for (int fixture = 0; fixture < 100; ++fixture)
    {
        const std::size_t n = static_cast<std::size_t>(count(rng));
        std::vector<std::vector<double>> g(1, std::vector<double>(n));
        for (auto &x : g[0])
            x = gain(rng);
        auto full = evaluate_kpis(Deployment::linear(n, 500.0), {0.0}, g);
        for (std::size_t drop = 0; drop < n; ++drop)
        {
            if (drop == full.serving[0])
                continue;
            std::vector<std::vector<double>> h(1);
            for (std::size_t b = 0; b < n; ++b)
                if (b != drop)
                    h[0].push_back(g[0][b]);
            violations += evaluate_kpis(Deployment::linear(n - 1, 500.0), {0.0}, h).sinr[0] < full.sinr[0] - 1e-12;
        }
    }
    o.detail << "midpoint SINR " << fmt(mid, 6) << " dB, SE(0 dB) " << fmt(se0, 6) << " bps/Hz, removal violations "
             << violations << "/100 fixtures";
    o.check(std::abs(mid) <= 0.01, "midpoint SINR");
    o.check(std::abs(se0 - 1.0) <= 5e-4, "spectral efficiency");
    o.check(violations == 0, "interferer removal");
}

void determinism(Outcome &o)
{
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "railbeam_acceptance_determinism";
    fs::remove_all(root);
    std::vector<std::string> manifests;
    for (unsigned threads : {1u, 4u, 4u})
    {
        Scene scene = build_cutting({}, 9);
        SweepConfig sw;
        sw.seed = 9;
        sw.beam = BeamType::type_b();
        sw.end = 150.0;
        sw.rx_step = 2.0;
        TraceConfig tc;
        tc.max_reflection_order = 2;
        auto accel = make_accel(scene);
        auto sched = make_schedule(sw.start, sw.end_chainage(scene), sw.tx, sw.beam.hpbw_h);
        auto series = run_sweep(scene, accel.get(), sw, sched, tc, threads);
        nlohmann::json config = {{"scene", scene_to_json(scene)}, {"sweep", sw}, {"trace", tc}};
        const fs::path dir = root / std::to_string(manifests.size());
        write_run(dir, series, sched, config);
        manifests.push_back(read_text(dir / "manifest.json"));
    }
    fs::remove_all(root);
    const bool same = manifests[0] == manifests[1] && manifests[1] == manifests[2];
    o.detail << "3 runs (jobs 1, 4, 4), manifest "
             << checksum(manifests[0]) << (same ? ", byte-identical" : ", differs");
    o.check(same, "manifest bytes");
}

} // namespace

int main()
{
    struct Criterion
    {
        int id;
        const char *name;
        double budget_s;
        std::function<void(Outcome &)> run;
    };
    const std::vector<Criterion> criteria{
        {1, "beam geometry", 1.0, beam_geometry},
        {2, "free-space fidelity", 10.0, free_space_fidelity},
        {3, "tracer oracle", 60.0, tracer_oracle},
        {4, "Fresnel oracle", 5.0, fresnel_oracle},
        {5, "Doppler", 60.0, doppler},
        {6, "statistics kernels", 10.0, statistics_kernels},
        {7, "trend suite", 1800.0, trend_suite},
        {8, "KPI", 10.0, kpi},
        {9, "determinism", 600.0, determinism},
    };
    int failed = 0;
    for (const auto &c : criteria)
    {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try
        {
            c.run(o);
        }
        catch (const std::exception &e)
        {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget_s)
        {
            o.pass = false;
            o.detail << " [over the " << c.budget_s << " s budget]";
        }
        failed += !o.pass;
        std::printf("criterion %d %-20s %s (%.2f s) %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", secs,
                    o.detail.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
