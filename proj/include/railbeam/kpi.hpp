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

#include "railbeam/channel_stats.hpp"

#include <functional>

namespace railbeam
{

/// Linear deployment of base stations beside the track, all on the same side.
struct Deployment
{
    double inter_site_distance = 2000.0;   // m
    std::vector<double> bs_chainages;      // TX foot-point chainages [m]
    TxGeometry geometry;                   // height and lateral offset shared by every BS
    double tx_power = 43.0;                // dBm
    double bandwidth = 10e6;               // Hz
    double noise_figure = 7.0;             // dB
    std::optional<double> noise_override;  // dBm, -inf for a noise-free link
    double overhead = 0.2;                 // fraction of resources lost to control and reference signals

    /// `count` sites spaced by `isd`, the first at `first` m.
    static Deployment linear(std::size_t count, double isd, double first = 0.0)
    {
        Deployment d;
        d.inter_site_distance = isd;
        for (std::size_t i = 0; i < count; ++i)
            d.bs_chainages.push_back(first + static_cast<double>(i) * isd);
        d.validate();
        return d;
    }

    std::size_t size() const { return bs_chainages.size(); }

    /// Thermal noise -174 dBm/Hz over the bandwidth plus the noise figure, unless overridden.
    double noise_power() const
    {
        if (noise_override)
            return *noise_override;
        return -174.0 + 10.0 * std::log10(bandwidth) + noise_figure;
    }

    void validate() const
    {
        if (!(inter_site_distance > 0.0))
            throw std::invalid_argument("Deployment: inter_site_distance must be positive");
        if (bs_chainages.empty())
            throw std::invalid_argument("Deployment: at least one base station is required");
        for (std::size_t i = 1; i < bs_chainages.size(); ++i)
            if (!(bs_chainages[i] > bs_chainages[i - 1]))
                throw std::invalid_argument("Deployment: base station chainages must be strictly increasing");
        if (!(geometry.height > 0.0) || !(geometry.offset > 0.0))
            throw std::invalid_argument("Deployment: TX height and offset must be positive");
        if (!(bandwidth > 0.0) || !std::isfinite(tx_power))
            throw std::invalid_argument("Deployment: bandwidth must be positive and TX power finite");
        if (!(overhead >= 0.0 && overhead < 1.0))
            throw std::invalid_argument("Deployment: overhead must lie in [0, 1)");
        if (noise_override && (std::isnan(*noise_override) || *noise_override == std::numeric_limits<double>::infinity()))
            throw std::invalid_argument("Deployment: noise override must be finite or -inf");
    }
};

/// Channel gain in dB (negative path loss, antenna gains included) from a BS to a train position.
using GainModel = std::function<double(const Deployment &, std::size_t bs, double chainage)>;

/// 3D distance between BS `bs` and a train antenna at `chainage` on a straight, level track.
inline double bs_distance(const Deployment &d, std::size_t bs, double chainage, double rx_height = 3.1)
{
    const double dx = chainage - d.bs_chainages.at(bs);
    const double dz = d.geometry.height - rx_height;
    return std::sqrt(dx * dx + d.geometry.offset * d.geometry.offset + dz * dz);
}

/// Friis free-space gain at `frequency` with isotropic antennas.
inline GainModel free_space_gain(double frequency, double rx_height = 3.1)
{
    if (!(frequency > 0.0))
        throw std::invalid_argument("free_space_gain: frequency must be positive");
    return [=](const Deployment &d, std::size_t bs, double x) {
        double r = bs_distance(d, bs, x, rx_height);
        return 20.0 * std::log10(speed_of_light / frequency / (4.0 * pi * r));
    };
}

/// Gain predicted by a fitted log-distance model; `extra_gain` adds antenna gain not in the fit.
inline GainModel fitted_gain(const PathLossFit &fit, double rx_height = 3.1, double extra_gain = 0.0)
{
    return [=](const Deployment &d, std::size_t bs, double x) {
        return extra_gain - fit.predict(bs_distance(d, bs, x, rx_height));
    };
}

/*!
Gain looked up in a simulated series, indexed by the along-track offset |x - p_b| from the BS foot
point. The series must start at its own TX foot point. Offsets outside the simulated span throw.
*/
inline GainModel series_gain(const SnapshotSeries &series)
{
    if (series.snapshots.empty())
        throw std::invalid_argument("series_gain: empty series");
    std::vector<double> offset, gain_db;
    for (const auto &s : series.snapshots)
    {
        std::vector<double> powers;
        for (const auto &path : s.paths)
            powers.push_back(std::norm(path.amplitude));
        const double p = compensated_sum(powers);
        offset.push_back(std::abs(s.chainage - series.sweep.tx.chainage));
        gain_db.push_back(p > 0.0 ? 10.0 * std::log10(p) : -std::numeric_limits<double>::infinity());
    }
    std::vector<std::size_t> order(offset.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return offset[a] < offset[b]; });
    std::vector<double> xs, gs;
    for (auto i : order)
    {
        xs.push_back(offset[i]);
        gs.push_back(gain_db[i]);
    }
    const double tol = 0.5 * (series.dd > 0.0 ? series.dd : 1.0);
    return [xs, gs, tol](const Deployment &d, std::size_t bs, double x) {
        double q = std::abs(x - d.bs_chainages.at(bs));
        if (q < xs.front() - tol || q > xs.back() + tol)
            throw std::out_of_range("series_gain: no simulated gain " + std::to_string(q) + " m from the BS");
        auto it = std::lower_bound(xs.begin(), xs.end(), q);
        if (it == xs.end())
            return gs.back();
        if (it == xs.begin() || *it == q)
            return gs[static_cast<std::size_t>(it - xs.begin())];
        std::size_t hi = static_cast<std::size_t>(it - xs.begin()), lo = hi - 1;
        if (!std::isfinite(gs[lo]) || !std::isfinite(gs[hi]))
            return q - xs[lo] < xs[hi] - q ? gs[lo] : gs[hi];
        double t = (q - xs[lo]) / (xs[hi] - xs[lo]);
        return gs[lo] + t * (gs[hi] - gs[lo]);
    };
}

struct KpiTrace
{
    std::vector<double> positions;             // chainage [m]
    std::vector<std::vector<double>> rsrp;     // [position][bs] dBm
    std::vector<std::size_t> serving;          // serving BS index
    std::vector<double> sinr;                  // dB
    std::vector<double> rsrq;                  // dB, serving over total received power plus noise
    std::vector<double> spectral_efficiency;   // bps/Hz
    std::vector<double> throughput;            // Mbps
};

inline double spectral_efficiency(double sinr_db) { return std::log2(1.0 + std::pow(10.0, sinr_db / 10.0)); }

inline double throughput_mbps(double se, double bandwidth, double overhead)
{
    return se * bandwidth * (1.0 - overhead) / 1e6;
}

/// Gains [position][bs] in dB evaluated through a gain model.
inline std::vector<std::vector<double>> gain_matrix(const Deployment &d, const std::vector<double> &positions,
                                                    const GainModel &model)
{
    std::vector<std::vector<double>> g(positions.size(), std::vector<double>(d.size()));
    for (std::size_t i = 0; i < positions.size(); ++i)
        for (std::size_t b = 0; b < d.size(); ++b)
            g[i][b] = model(d, b, positions[i]);
    return g;
}

/*!
Per-position cell KPIs. RSRP_b = P_tx + gain_b; the serving BS has the strongest RSRP (lowest index on
ties); SINR and the RSRQ-like ratio are formed in linear power.
*/
inline KpiTrace evaluate_kpis(const Deployment &d, const std::vector<double> &positions,
                              const std::vector<std::vector<double>> &gains)
{
    d.validate();
    if (gains.size() != positions.size())
        throw std::invalid_argument("evaluate_kpis: missing gains, " + std::to_string(gains.size()) + " rows for " +
                                    std::to_string(positions.size()) + " positions");
    const double noise = d.noise_power() == -std::numeric_limits<double>::infinity()
                             ? 0.0
                             : std::pow(10.0, d.noise_power() / 10.0);
    KpiTrace t;
    t.positions = positions;
    for (std::size_t i = 0; i < positions.size(); ++i)
    {
        if (gains[i].size() != d.size())
            throw std::invalid_argument("evaluate_kpis: missing gain for a base station at position " +
                                        std::to_string(positions[i]) + " m");
        std::vector<double> rsrp(d.size());
        std::size_t best = 0;
        for (std::size_t b = 0; b < d.size(); ++b)
        {
            if (std::isnan(gains[i][b]))
                throw std::invalid_argument("evaluate_kpis: missing gain for BS " + std::to_string(b));
            rsrp[b] = d.tx_power + gains[i][b];
            if (rsrp[b] > rsrp[best])
                best = b;
        }
        std::vector<double> lin(d.size());
        for (std::size_t b = 0; b < d.size(); ++b)
            lin[b] = std::pow(10.0, rsrp[b] / 10.0);
        double others = 0.0;
        for (std::size_t b = 0; b < d.size(); ++b)
            if (b != best)
                others += lin[b];
        const double total = others + lin[best];
        double sinr = 10.0 * std::log10(lin[best] / (others + noise));
        double rsrq = 10.0 * std::log10(lin[best] / (total + noise));
        double se = std::log2(1.0 + lin[best] / (others + noise));
        t.rsrp.push_back(std::move(rsrp));
        t.serving.push_back(best);
        t.sinr.push_back(sinr);
        t.rsrq.push_back(rsrq);
        t.spectral_efficiency.push_back(se);
        t.throughput.push_back(throughput_mbps(se, d.bandwidth, d.overhead));
    }
    return t;
}

inline KpiTrace evaluate_kpis(const Deployment &d, const std::vector<double> &positions, const GainModel &model)
{
    return evaluate_kpis(d, positions, gain_matrix(d, positions, model));
}

/// Positions from `start` to `end` inclusive at `step`.
inline std::vector<double> position_grid(double start, double end, double step)
{
    if (!(step > 0.0) || !(end >= start))
        throw std::invalid_argument("position_grid: need step > 0 and end >= start");
    std::vector<double> p;
    const std::size_t n = snapshot_count(start, end, step);
    for (std::size_t i = 0; i < n; ++i)
        p.push_back(start + static_cast<double>(i) * step);
    return p;
}

struct CellEdge
{
    std::size_t left = 0, right = 0; // adjacent BS indices
    std::optional<double> position;  // m, where the two RSRPs cross
    double min_sinr = 0.0;           // dB, between the two sites
    double min_sinr_position = 0.0;
    double min_rsrp = 0.0;           // dBm, serving RSRP
    double min_rsrp_position = 0.0;
};

struct CellEdgeReport
{
    std::vector<CellEdge> edges;
    std::vector<double> crossover_positions; // serving RSRP below the reference trace
};

/*!
Cell-edge summary between adjacent sites. The edge position interpolates the zero crossing of
RSRP_left - RSRP_right. With a reference trace on the same positions (for example a wide beam), every
position where the serving RSRP falls below the reference serving RSRP is flagged.
*/
inline CellEdgeReport cell_edge_report(const KpiTrace &t, const Deployment &d, const KpiTrace *reference = nullptr)
{
    if (d.size() < 2)
        throw std::invalid_argument("cell_edge_report: at least two base stations are required");
    if (reference && reference->positions != t.positions)
        throw std::invalid_argument("cell_edge_report: reference trace uses different positions");
    CellEdgeReport r;
    for (std::size_t b = 0; b + 1 < d.size(); ++b)
    {
        CellEdge e;
        e.left = b;
        e.right = b + 1;
        bool any = false;
        for (std::size_t i = 0; i < t.positions.size(); ++i)
        {
            const double x = t.positions[i];
            if (x < d.bs_chainages[b] || x > d.bs_chainages[b + 1])
                continue;
            const double serving = t.rsrp[i][t.serving[i]];
            if (!any || t.sinr[i] < e.min_sinr)
            {
                e.min_sinr = t.sinr[i];
                e.min_sinr_position = x;
            }
            if (!any || serving < e.min_rsrp)
            {
                e.min_rsrp = serving;
                e.min_rsrp_position = x;
            }
            any = true;
            if (!e.position && i + 1 < t.positions.size())
            {
                double f0 = t.rsrp[i][b] - t.rsrp[i][b + 1];
                double f1 = t.rsrp[i + 1][b] - t.rsrp[i + 1][b + 1];
                if (f0 == 0.0)
                    e.position = x;
                else if (f0 > 0.0 && f1 <= 0.0)
                    e.position = x + (t.positions[i + 1] - x) * f0 / (f0 - f1);
            }
        }
        if (any)
            r.edges.push_back(e);
    }
    if (reference)
        for (std::size_t i = 0; i < t.positions.size(); ++i)
            if (t.rsrp[i][t.serving[i]] < reference->rsrp[i][reference->serving[i]])
                r.crossover_positions.push_back(t.positions[i]);
    return r;
}

} // namespace railbeam
