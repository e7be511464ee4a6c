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

#include "railbeam/sweep.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

namespace railbeam
{

// ---------- helpers ----------

/// Neumaier-compensated sum.
inline double compensated_sum(std::span<const double> values)
{
    double sum = 0.0, c = 0.0;
    for (double v : values)
    {
        double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            c += (sum - t) + v;
        else
            c += (v - t) + sum;
        sum = t;
    }
    return sum + c;
}

/// Linear path power |a|^2.
inline double linear_power(const PropagationPath &p) { return std::norm(p.amplitude); }

/// Power-weighted RMS spread sqrt(E[x^2] - E[x]^2) of `values`.
inline double weighted_rms_spread(std::span<const double> values, std::span<const double> weights)
{
    if (values.size() != weights.size())
        throw std::invalid_argument("weighted_rms_spread: size mismatch");
    double w = compensated_sum(weights);
    if (!(w > 0.0))
        throw std::invalid_argument("rms spread: total power is zero");
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
    {
        m1 += weights[i] * values[i];
        m2 += weights[i] * values[i] * values[i];
    }
    m1 /= w;
    m2 /= w;
    return std::sqrt(std::max(0.0, m2 - m1 * m1));
}

// ---------- large scale ----------

struct PathLossFit
{
    double pl0 = 0.0;      // dB at d0
    double n = 0.0;        // exponent
    double d0 = 1.0;       // m
    double sigma_sf = 0.0; // dB, population standard deviation of the residuals
    std::vector<double> distances; // m
    std::vector<double> path_loss; // dB
    std::vector<double> residuals; // dB, measured minus fitted

    double predict(double d) const { return pl0 + 10.0 * n * std::log10(d / d0); }
};

/// Least-squares fit of PL(d) = PL0 + 10 n log10(d / d0).
inline PathLossFit fit_path_loss(std::vector<double> distances, std::vector<double> path_loss, double d0 = 1.0)
{
    if (distances.size() != path_loss.size())
        throw std::invalid_argument("fit_path_loss: size mismatch");
    if (!(d0 > 0.0))
        throw std::invalid_argument("fit_path_loss: d0 must be positive");
    if (distances.size() < 10)
        throw std::invalid_argument("fit_path_loss: at least 10 samples are required");
    const std::size_t n = distances.size();
    double sx = 0.0, sy = 0.0;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        if (!(distances[i] > d0) || !std::isfinite(path_loss[i]))
            throw std::invalid_argument("fit_path_loss: distances must exceed d0 and path loss must be finite");
        x[i] = 10.0 * std::log10(distances[i] / d0);
        sx += x[i];
        sy += path_loss[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (path_loss[i] - my);
    }
    if (!(sxx > 0.0))
        throw std::invalid_argument("fit_path_loss: distances must not all be equal");
    PathLossFit fit;
    fit.d0 = d0;
    fit.n = sxy / sxx;
    fit.pl0 = my - fit.n * mx;
    fit.residuals.resize(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        fit.residuals[i] = path_loss[i] - (fit.pl0 + fit.n * x[i]);
        ss += fit.residuals[i] * fit.residuals[i];
    }
    fit.sigma_sf = std::sqrt(ss / n);
    fit.distances = std::move(distances);
    fit.path_loss = std::move(path_loss);
    return fit;
}

/// Path loss -10 log10(sum |a|^2) of a snapshot, +infinity when it has no paths.
inline double snapshot_path_loss(const ChannelSnapshot &s)
{
    std::vector<double> p;
    for (const auto &path : s.paths)
        p.push_back(linear_power(path));
    double total = compensated_sum(p);
    if (!(total > 0.0))
        return std::numeric_limits<double>::infinity();
    return -10.0 * std::log10(total);
}

/// Path loss fit over a sweep against the TX-RX distance; snapshots without paths are skipped.
inline PathLossFit fit_path_loss(const SnapshotSeries &series, double d0 = 1.0)
{
    std::vector<double> d, pl;
    for (const auto &s : series.snapshots)
    {
        double loss = snapshot_path_loss(s);
        if (!std::isfinite(loss))
            continue;
        d.push_back(distance(s.tx, s.rx));
        pl.push_back(loss);
    }
    if (d.empty())
        throw std::invalid_argument("fit_path_loss: every snapshot is empty");
    return fit_path_loss(std::move(d), std::move(pl), d0);
}

// ---------- small scale ----------

/// Strongest-path-to-rest power ratio in dB; empty for fewer than two paths.
inline std::optional<double> k_factor(const std::vector<PropagationPath> &paths)
{
    if (paths.size() < 2)
        return std::nullopt;
    std::vector<double> p;
    for (const auto &path : paths)
        p.push_back(linear_power(path));
    auto it = std::max_element(p.begin(), p.end());
    double strongest = *it;
    *it = 0.0;
    double rest = compensated_sum(p);
    if (!(rest > 0.0) || !(strongest > 0.0))
        return std::nullopt;
    return 10.0 * std::log10(strongest / rest);
}

inline std::optional<double> k_factor(const ChannelSnapshot &s) { return k_factor(s.paths); }

/// Power binned on a uniform grid. Bin i covers the value centre(i) +- width/2 (centred bins) or
/// [i width, (i+1) width) (floor bins).
struct BinnedSpectrum
{
    double width = 1.0;
    bool centred = true;
    std::int64_t first = 0; // index of power[0]
    std::vector<double> power;

    double centre(std::size_t k) const
    {
        double i = static_cast<double>(first + static_cast<std::int64_t>(k));
        return centred ? i * width : (i + 0.5) * width;
    }
    double total() const { return compensated_sum(power); }
};

namespace detail
{
inline BinnedSpectrum bin_values(const std::vector<std::pair<double, double>> &value_power, double width, bool centred)
{
    if (!(width > 0.0))
        throw std::invalid_argument("bin width must be positive");
    BinnedSpectrum s;
    s.width = width;
    s.centred = centred;
    if (value_power.empty())
        return s;
    std::map<std::int64_t, std::vector<double>> bins;
    for (const auto &[v, p] : value_power)
    {
        double r = v / width;
        auto idx = static_cast<std::int64_t>(centred ? std::floor(r + 0.5) : std::floor(r));
        bins[idx].push_back(p);
    }
    s.first = bins.begin()->first;
    s.power.assign(static_cast<std::size_t>(bins.rbegin()->first - s.first + 1), 0.0);
    for (const auto &[idx, ps] : bins)
        s.power[static_cast<std::size_t>(idx - s.first)] = compensated_sum(ps);
    return s;
}

inline double spectrum_spread(const BinnedSpectrum &s)
{
    std::vector<double> centres(s.power.size());
    for (std::size_t k = 0; k < s.power.size(); ++k)
        centres[k] = s.centre(k);
    return weighted_rms_spread(centres, s.power);
}
} // namespace detail

/// Power delay profile with floor bins of `bin_ns`; `excess` measures delay from the first arrival.
inline BinnedSpectrum pdp(const std::vector<PropagationPath> &paths, double bin_ns = 10.0, bool excess = false)
{
    double t0 = 0.0;
    if (excess && !paths.empty())
    {
        t0 = paths.front().delay;
        for (const auto &p : paths)
            t0 = std::min(t0, p.delay);
    }
    std::vector<std::pair<double, double>> vp;
    for (const auto &p : paths)
        vp.emplace_back((p.delay - t0) * 1e9, linear_power(p));
    return detail::bin_values(vp, bin_ns, false);
}

inline BinnedSpectrum pdp(const ChannelSnapshot &s, double bin_ns = 10.0, bool excess = false)
{
    return pdp(s.paths, bin_ns, excess);
}

/// RMS delay spread in ns from the bin centres of a PDP.
inline double rms_delay_spread(const BinnedSpectrum &pdp) { return detail::spectrum_spread(pdp); }

/// Doppler power spectrum of one snapshot with centred bins of `bin_hz`.
inline BinnedSpectrum doppler_spectrum(const std::vector<PropagationPath> &paths, double bin_hz = 5.0)
{
    std::vector<std::pair<double, double>> vp;
    for (const auto &p : paths)
        vp.emplace_back(p.doppler_hz, linear_power(p));
    return detail::bin_values(vp, bin_hz, true);
}

/// DPSD over a series: one spectrum per block of `window` consecutive snapshots.
inline std::vector<BinnedSpectrum> dpsd(const SnapshotSeries &series, std::size_t window = 1, double bin_hz = 5.0)
{
    if (window == 0)
        throw std::invalid_argument("dpsd: window must be at least 1");
    std::vector<BinnedSpectrum> out;
    for (std::size_t i = 0; i < series.snapshots.size(); i += window)
    {
        std::vector<PropagationPath> block;
        for (std::size_t j = i; j < std::min(series.snapshots.size(), i + window); ++j)
            block.insert(block.end(), series.snapshots[j].paths.begin(), series.snapshots[j].paths.end());
        out.push_back(doppler_spectrum(block, bin_hz));
    }
    return out;
}

inline double rms_doppler_spread(const BinnedSpectrum &s) { return detail::spectrum_spread(s); }

enum class AngleSide
{
    Arrival,
    Departure
};

/// Power angular spectrum over azimuth with centred bins, wrapped to (-180, 180].
inline BinnedSpectrum pas(const std::vector<PropagationPath> &paths, AngleSide side, double bin_deg = 1.0)
{
    std::vector<std::pair<double, double>> vp;
    for (const auto &p : paths)
    {
        double az = side == AngleSide::Arrival ? p.aoa.azimuth : p.aod.azimuth;
        double r = std::floor(wrap_degrees(az) / bin_deg + 0.5) * bin_deg;
        vp.emplace_back(wrap_degrees(r), linear_power(p));
    }
    return detail::bin_values(vp, bin_deg, true);
}

/*!
Circular RMS angular spread in degrees: the minimum over all shifts of the linear RMS spread of the
shifted and re-wrapped angles. The spread only changes when the wrap cut crosses an angle, so placing
the cut in the middle of every gap between circularly neighbouring angles makes the minimum exact.
*/
inline double circular_angular_spread(std::span<const double> angles_deg, std::span<const double> powers)
{
    if (angles_deg.size() != powers.size())
        throw std::invalid_argument("circular_angular_spread: size mismatch");
    if (!(compensated_sum(powers) > 0.0))
        throw std::invalid_argument("angular spread: total power is zero");
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> shifted(angles_deg.size());
    auto eval = [&](double delta) {
        for (std::size_t i = 0; i < angles_deg.size(); ++i)
            shifted[i] = wrap_degrees(angles_deg[i] + delta);
        best = std::min(best, weighted_rms_spread(shifted, powers));
    };
    std::vector<double> sorted(angles_deg.size());
    for (std::size_t i = 0; i < angles_deg.size(); ++i)
        sorted[i] = wrap_degrees(angles_deg[i]);
    std::sort(sorted.begin(), sorted.end());
    eval(0.0);
    for (std::size_t i = 0; i < sorted.size(); ++i)
    {
        const double next = i + 1 < sorted.size() ? sorted[i + 1] : sorted.front() + 360.0;
        eval(180.0 - 0.5 * (sorted[i] + next));
    }
    return best;
}

inline double rms_angular_spread(const BinnedSpectrum &pas)
{
    std::vector<double> angles(pas.power.size());
    for (std::size_t k = 0; k < pas.power.size(); ++k)
        angles[k] = pas.centre(k);
    return circular_angular_spread(angles, pas.power);
}

// ---------- stationarity ----------

/*!
PDP correlation sum P_i P_j / max(sum P_i^2, sum P_j^2) on a common grid, with each PDP first scaled to
unit total power so that only the shape of the profile is compared. 0 when either is empty.
*/
inline double pdp_correlation(const BinnedSpectrum &a, const BinnedSpectrum &b)
{
    const double ta = a.total(), tb = b.total();
    if (!(ta > 0.0) || !(tb > 0.0))
        return 0.0;
    double ea = 0.0, eb = 0.0, cross_sum = 0.0;
    for (double p : a.power)
        ea += (p / ta) * (p / ta);
    for (double p : b.power)
        eb += (p / tb) * (p / tb);
    for (std::size_t k = 0; k < a.power.size(); ++k)
    {
        std::int64_t idx = a.first + static_cast<std::int64_t>(k);
        std::int64_t kb = idx - b.first;
        if (kb >= 0 && kb < static_cast<std::int64_t>(b.power.size()))
            cross_sum += (a.power[k] / ta) * (b.power[static_cast<std::size_t>(kb)] / tb);
    }
    return std::min(1.0, cross_sum / std::max(ea, eb));
}

struct SiReport
{
    double c_th = 0.9;
    double step = 1.0;           // m
    std::vector<double> samples; // m, one per anchor snapshot
    double mean = 0.0;
    std::vector<std::pair<double, double>> ccdf; // (value, P(SI > value))
};

/// Empirical CCDF: (0, 1) followed by (v, fraction of samples strictly above v) for each distinct v.
inline std::vector<std::pair<double, double>> ccdf(std::vector<double> samples)
{
    std::vector<std::pair<double, double>> out{{0.0, 1.0}};
    if (samples.empty())
        return out;
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
    {
        if (i + 1 < samples.size() && samples[i + 1] == samples[i])
            continue;
        out.emplace_back(samples[i], static_cast<double>(samples.size() - i - 1) / n);
    }
    return out;
}

/*!
Stationarity interval per anchor snapshot i: `step` times the number of consecutive snapshots
i, i+1, ... whose PDP correlation with snapshot i stays at or above `c_th`. The anchor itself always
counts, so every sample is at least one step.
*/
inline SiReport stationarity_interval(const std::vector<BinnedSpectrum> &pdps, double c_th, double step)
{
    if (!(c_th > 0.0 && c_th < 1.0))
        throw std::invalid_argument("stationarity_interval: c_th must lie in (0, 1)");
    if (pdps.size() < 2)
        throw std::invalid_argument("stationarity_interval: at least two snapshots are required");
    if (!(step > 0.0))
        throw std::invalid_argument("stationarity_interval: step must be positive");
    SiReport r;
    r.c_th = c_th;
    r.step = step;
    for (std::size_t i = 0; i < pdps.size(); ++i)
    {
        std::size_t k = i + 1;
        while (k < pdps.size() && pdp_correlation(pdps[i], pdps[k]) >= c_th)
            ++k;
        r.samples.push_back(static_cast<double>(k - i) * step);
    }
    r.mean = compensated_sum(r.samples) / static_cast<double>(r.samples.size());
    r.ccdf = ccdf(r.samples);
    return r;
}

inline SiReport stationarity_interval(const SnapshotSeries &series, double c_th, double bin_ns = 10.0)
{
    std::vector<BinnedSpectrum> pdps;
    for (const auto &s : series.snapshots)
        pdps.push_back(pdp(s, bin_ns, true));
    return stationarity_interval(pdps, c_th, series.dd > 0.0 ? series.dd : series.sweep.rx_step);
}

// ---------- summaries ----------

struct Summary
{
    double mean = 0.0;
    double std = 0.0;         // population standard deviation
    std::size_t defined = 0;  // entries used
    std::size_t excluded = 0; // undefined entries skipped
};

inline Summary summarize(const std::vector<std::optional<double>> &values)
{
    std::vector<double> v;
    Summary s;
    for (const auto &x : values)
    {
        if (x && std::isfinite(*x))
            v.push_back(*x);
        else
            ++s.excluded;
    }
    if (v.empty())
        throw std::invalid_argument("summarize: no defined entries");
    s.defined = v.size();
    s.mean = compensated_sum(v) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v)
        ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(v.size()));
    return s;
}

inline Summary summarize(const std::vector<double> &values)
{
    return summarize(std::vector<std::optional<double>>(values.begin(), values.end()));
}

// ---------- full report ----------

struct StatsOptions
{
    double d0 = 1.0;                         // m
    double delay_bin = 10.0;                 // ns
    double doppler_bin = 5.0;                // Hz
    double azimuth_bin = 1.0;                // deg
    std::vector<double> c_th{0.8, 0.9};      // stationarity thresholds

    void validate() const
    {
        if (!(d0 > 0.0) || !(delay_bin > 0.0) || !(doppler_bin > 0.0) || !(azimuth_bin > 0.0))
            throw std::invalid_argument("StatsOptions: d0 and bin widths must be positive");
        if (c_th.empty())
            throw std::invalid_argument("StatsOptions: at least one c_th is required");
        for (double c : c_th)
            if (!(c > 0.0 && c < 1.0))
                throw std::invalid_argument("StatsOptions: c_th must lie in (0, 1)");
    }
};

struct StatsReport
{
    std::string scene_name;
    std::string beam;
    std::size_t snapshots = 0;
    std::size_t empty_snapshots = 0;
    std::optional<PathLossFit> pl;
    std::vector<double> chainage;
    std::vector<std::size_t> path_count;
    std::vector<std::optional<double>> kf, ds, dps, aas, das; // dB, ns, Hz, deg, deg
    std::optional<Summary> kf_summary, ds_summary, dps_summary, aas_summary, das_summary;
    std::vector<SiReport> si;
};

inline StatsReport compute_stats(const SnapshotSeries &series, const StatsOptions &opt = {})
{
    opt.validate();
    StatsReport r;
    r.scene_name = series.scene_name;
    r.beam = series.sweep.beam.name();
    r.snapshots = series.snapshots.size();
    for (const auto &s : series.snapshots)
    {
        r.chainage.push_back(s.chainage);
        r.path_count.push_back(s.paths.size());
        if (s.paths.empty())
        {
            ++r.empty_snapshots;
            for (auto *v : {&r.kf, &r.ds, &r.dps, &r.aas, &r.das})
                v->push_back(std::nullopt);
            continue;
        }
        r.kf.push_back(k_factor(s));
        r.ds.push_back(rms_delay_spread(pdp(s, opt.delay_bin)));
        r.dps.push_back(rms_doppler_spread(doppler_spectrum(s.paths, opt.doppler_bin)));
        r.aas.push_back(rms_angular_spread(pas(s.paths, AngleSide::Arrival, opt.azimuth_bin)));
        r.das.push_back(rms_angular_spread(pas(s.paths, AngleSide::Departure, opt.azimuth_bin)));
    }
    auto maybe = [](const std::vector<std::optional<double>> &v) -> std::optional<Summary> {
        if (std::none_of(v.begin(), v.end(), [](const auto &x) { return x.has_value(); }))
            return std::nullopt;
        return summarize(v);
    };
    r.kf_summary = maybe(r.kf);
    r.ds_summary = maybe(r.ds);
    r.dps_summary = maybe(r.dps);
    r.aas_summary = maybe(r.aas);
    r.das_summary = maybe(r.das);
    if (r.snapshots - r.empty_snapshots >= 10)
        r.pl = fit_path_loss(series, opt.d0);
    if (series.snapshots.size() >= 2)
        for (double c : opt.c_th)
            r.si.push_back(stationarity_interval(series, c, opt.delay_bin));
    return r;
}

// ---------- beamwidth trend verdicts ----------

struct TrendVerdict
{
    std::string metric;
    std::string direction; // "non-decreasing" or "non-increasing"
    std::vector<double> values;
    bool pass = false;
};

/*!
Trend checks over reports ordered from the widest to the narrowest beam: n_PL, mu_K and mean SI must
not decrease, mu_DS and mu_DPS must not increase, and within each report SI at the lowest threshold
must dominate SI at the highest threshold elementwise.
*/
inline std::vector<TrendVerdict> trend_verdicts(const std::vector<StatsReport> &ordered)
{
    std::vector<TrendVerdict> out;
    auto add = [&](std::string metric, bool increasing, auto getter) {
        TrendVerdict v{std::move(metric), increasing ? "non-decreasing" : "non-increasing", {}, true};
        for (const auto &r : ordered)
        {
            std::optional<double> x = getter(r);
            v.values.push_back(x.value_or(std::numeric_limits<double>::quiet_NaN()));
            if (!x)
                v.pass = false;
        }
        for (std::size_t i = 1; i < v.values.size(); ++i)
            if (increasing ? v.values[i] < v.values[i - 1] : v.values[i] > v.values[i - 1])
                v.pass = false;
        out.push_back(std::move(v));
    };
    auto summary_mean = [](const std::optional<Summary> &s) -> std::optional<double> {
        return s ? std::optional<double>(s->mean) : std::nullopt;
    };
    add("n_PL", true, [](const StatsReport &r) -> std::optional<double> {
        return r.pl ? std::optional<double>(r.pl->n) : std::nullopt;
    });
    add("mu_DS", false, [&](const StatsReport &r) { return summary_mean(r.ds_summary); });
    add("mu_DPS", false, [&](const StatsReport &r) { return summary_mean(r.dps_summary); });
    add("mu_K", true, [&](const StatsReport &r) { return summary_mean(r.kf_summary); });
    std::vector<double> thresholds;
    if (!ordered.empty())
        for (const auto &si : ordered.front().si)
            thresholds.push_back(si.c_th);
    for (double c : thresholds)
    {
        std::ostringstream name;
        name << "mean_SI(c_th=" << c << ")";
        add(name.str(), true, [c](const StatsReport &r) -> std::optional<double> {
            for (const auto &si : r.si)
                if (si.c_th == c)
                    return si.mean;
            return std::nullopt;
        });
    }
    TrendVerdict dom{"SI_low_vs_high_threshold", "elementwise >=", {}, true};
    for (const auto &r : ordered)
    {
        if (r.si.size() < 2)
            continue;
        auto [lo, hi] = std::minmax_element(r.si.begin(), r.si.end(),
                                            [](const SiReport &a, const SiReport &b) { return a.c_th < b.c_th; });
        bool ok = lo->samples.size() == hi->samples.size();
        for (std::size_t i = 0; ok && i < lo->samples.size(); ++i)
            ok = lo->samples[i] >= hi->samples[i];
        dom.values.push_back(ok ? 1.0 : 0.0);
        dom.pass = dom.pass && ok;
    }
    out.push_back(std::move(dom));
    return out;
}

} // namespace railbeam
