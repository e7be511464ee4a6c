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

#include "railbeam/accel.hpp"
#include "railbeam/antenna.hpp"
#include "railbeam/em.hpp"
#include "railbeam/geometry.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace railbeam
{

enum class PathKind
{
    Los,
    Reflected,
    Diffracted,
    Scattered
};

inline std::string to_string(PathKind k)
{
    switch (k)
    {
    case PathKind::Los: return "los";
    case PathKind::Reflected: return "reflected";
    case PathKind::Diffracted: return "diffracted";
    case PathKind::Scattered: return "scattered";
    }
    return "unknown";
}

inline PathKind path_kind_from_string(std::string_view s)
{
    if (s == "los")
        return PathKind::Los;
    if (s == "reflected")
        return PathKind::Reflected;
    if (s == "diffracted")
        return PathKind::Diffracted;
    if (s == "scattered")
        return PathKind::Scattered;
    throw std::invalid_argument("Unknown path kind '" + std::string(s) + "'");
}

enum class DiffractionModel
{
    Utd,      // Kouyoumjian-Pathak wedge coefficient, perfectly conducting wedge
    KnifeEdge // single knife-edge loss, only when the direct path is blocked
};

struct TraceConfig
{
    double carrier_frequency = 2.1e9;            // Hz
    double bandwidth = 10e6;                     // Hz
    int max_reflection_order = 3;                //
    int max_diffraction_order = 1;               // 0 or 1
    bool enable_scattering = true;               //
    double scattering_coefficient = 0.4;         // S in [0, 1]
    double path_power_floor = 40.0;              // dB below the strongest path
    double scattering_tile_size = 4.0;           // m, longest tile edge
    DiffractionModel diffraction_model = DiffractionModel::Utd;
    std::size_t max_scattered_paths = 256;       // strongest scattered paths kept per trace
    std::size_t max_image_nodes = 4'000'000;     // guard against runaway image trees

    double wavelength() const { return speed_of_light / carrier_frequency; }
    double wavenumber() const { return 2.0 * pi / wavelength(); }

    void validate() const
    {
        if (!(carrier_frequency > 0.0) || !std::isfinite(carrier_frequency))
            throw std::invalid_argument("TraceConfig: carrier_frequency must be positive");
        if (!(bandwidth > 0.0))
            throw std::invalid_argument("TraceConfig: bandwidth must be positive");
        if (max_reflection_order < 0)
            throw std::invalid_argument("TraceConfig: max_reflection_order must be >= 0");
        if (max_diffraction_order < 0 || max_diffraction_order > 1)
            throw std::invalid_argument("TraceConfig: max_diffraction_order must be 0 or 1");
        if (!(scattering_coefficient >= 0.0 && scattering_coefficient <= 1.0))
            throw std::invalid_argument("TraceConfig: scattering_coefficient must lie in [0, 1]");
        if (!(path_power_floor > 0.0))
            throw std::invalid_argument("TraceConfig: path_power_floor must be positive");
        if (!(scattering_tile_size > 0.0))
            throw std::invalid_argument("TraceConfig: scattering_tile_size must be positive");
    }
};

struct PropagationPath
{
    PathKind kind = PathKind::Los;
    int order = 0;                   // number of specular reflections
    std::vector<Vec3> interactions;  // reflection, diffraction or scattering points, TX to RX order
    double length = 0.0;             // m
    double delay = 0.0;              // s
    cdouble amplitude{0.0, 0.0};     // complex path gain including both antenna patterns
    Angles aod;                      // departure direction at the TX
    Angles aoa;                      // direction from the RX towards the arriving wave
    double doppler_hz = 0.0;         // set by the sweep engine
};

/// 20 log10 |amplitude|, or -infinity for a zero amplitude.
inline double path_power(const PropagationPath &p)
{
    double m = std::abs(p.amplitude);
    if (m == 0.0)
        return -std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(m);
}

struct Terminal
{
    Vec3 position;
    AntennaPattern pattern;
};

/*!
Deterministic multipath search from one fixed TX position.

Construction builds a beam-traced image tree: coplanar triangles of each surface are merged into
facets, and every node holds the image source of a reflection sequence together with the part of
its facet that the parent beam actually illuminates. Reflection is single sided (only on the side
the facet normal points to). When a receiver polyline is given (the RX route of a sweep), each node
is indexed by the part of that polyline lying inside its beam, so queries on the route only test the
relevant nodes. Queries elsewhere scan the whole tree.

The object is immutable after construction and `trace` may be called concurrently.
*/
class Tracer
{
  public:
    Tracer(const Scene &scene, const Bvh *accel, const Vec3 &tx, const TraceConfig &cfg,
           const std::vector<Vec3> &receiver_route = {})
        : accel_(accel), tx_(tx), cfg_(cfg)
    {
        cfg_.validate();
        if (!tx.is_finite())
            throw std::invalid_argument("Tracer: non-finite TX position");
        if (scene.triangle_count() > 0 && accel == nullptr)
            throw std::invalid_argument("Tracer: scene has triangles but no acceleration structure");
        if (accel != nullptr && accel->triangle_count() != scene.triangle_count())
            throw std::invalid_argument("Tracer: acceleration structure does not belong to the scene");
        if (scene.bounds.valid())
        {
            bounds_ = scene.bounds;
            if (!bounds_->contains(tx, 1e-6))
                throw std::invalid_argument("Tracer: TX lies outside the scene bounds");
        }
        build_facets(scene);
        if (cfg_.max_diffraction_order > 0)
            edges_ = scene.edges;
        build_route(receiver_route);
        build_image_tree();
        if (cfg_.enable_scattering && cfg_.scattering_coefficient > 0.0)
            build_tiles(scene);
    }

    const Vec3 &tx_position() const { return tx_; }
    const TraceConfig &config() const { return cfg_; }
    std::size_t facet_count() const { return facets_.size(); }
    std::size_t image_node_count() const { return nodes_.size(); }
    std::size_t tile_count() const { return tiles_.size(); }

    /// All paths to `rx`, weaker ones beyond the power floor removed, sorted by delay.
    std::vector<PropagationPath> trace(const Vec3 &rx, const AntennaPattern &tx_pattern,
                                       const AntennaPattern &rx_pattern) const
    {
        if (!rx.is_finite())
            throw std::invalid_argument("trace: non-finite RX position");
        if (distance(rx, tx_) < 1e-9)
            throw std::invalid_argument("trace: TX and RX coincide");
        if (bounds_ && !bounds_->contains(rx, 1e-6))
            throw std::invalid_argument("trace: RX lies outside the scene bounds");

        Context ctx{rx, tx_pattern, rx_pattern};
        std::vector<PropagationPath> paths;
        if (!blocked(tx_, rx))
            paths.push_back(make_path(ctx, PathKind::Los, 0, {}, 1.0));
        trace_reflections(ctx, paths);

        double strongest = 0.0;
        for (const auto &p : paths)
            strongest = std::max(strongest, std::norm(p.amplitude));
        const double rel_floor = std::pow(10.0, -cfg_.path_power_floor / 10.0);

        if (cfg_.max_diffraction_order > 0)
            trace_diffraction(ctx, strongest * rel_floor, paths);
        for (const auto &p : paths)
            strongest = std::max(strongest, std::norm(p.amplitude));
        if (!tiles_.empty())
            trace_scattering(ctx, strongest, rel_floor, paths);

        for (const auto &p : paths)
            strongest = std::max(strongest, std::norm(p.amplitude));
        const double keep = strongest * rel_floor;
        std::erase_if(paths, [&](const PropagationPath &p) {
            double n = std::norm(p.amplitude);
            return n == 0.0 || n < keep;
        });
        std::sort(paths.begin(), paths.end(), path_order);
        return paths;
    }

    /// Deterministic path ordering: delay, then kind, order and interaction coordinates.
    static bool path_order(const PropagationPath &a, const PropagationPath &b)
    {
        if (a.delay != b.delay)
            return a.delay < b.delay;
        if (a.kind != b.kind)
            return a.kind < b.kind;
        if (a.order != b.order)
            return a.order < b.order;
        auto key = [](const Vec3 &v) { return std::tie(v.x, v.y, v.z); };
        return std::lexicographical_compare(a.interactions.begin(), a.interactions.end(), b.interactions.begin(),
                                            b.interactions.end(),
                                            [&](const Vec3 &u, const Vec3 &v) { return key(u) < key(v); });
    }

  private:
    struct Facet
    {
        Plane plane;
        Material material;
        std::vector<Triangle> triangles;
        std::vector<Vec3> hull; // convex outline in the facet plane
    };

    struct Node
    {
        Vec3 image;
        std::uint32_t facet = 0;
        std::int32_t parent = -1;
        std::int32_t depth = 1;
    };

    struct Tile
    {
        Vec3 center;
        Vec3 normal;
        double area = 0.0;
        double r1 = 0.0;     // TX to tile
        double cos_i = 0.0;  // incidence cosine at the tile
        double gamma2 = 0.0; // |reflection coefficient|^2 at normal incidence
        Angles aod;
    };

    struct Route
    {
        std::vector<Vec3> points;
        std::vector<double> chainage; // cumulative length at each point
        double bin = 1.0;
        std::vector<std::vector<std::uint32_t>> bins;
    };

    struct Context
    {
        const Vec3 &rx;
        const AntennaPattern &tx_pattern;
        const AntennaPattern &rx_pattern;
    };

    const Bvh *accel_ = nullptr;
    Vec3 tx_;
    TraceConfig cfg_;
    std::optional<Aabb> bounds_;
    std::vector<Facet> facets_;
    std::vector<Edge> edges_;
    std::vector<Node> nodes_;
    std::vector<Tile> tiles_;
    std::optional<Route> route_;

    bool blocked(const Vec3 &a, const Vec3 &b) const { return accel_ != nullptr && accel_->occluded(a, b); }

    // ---------- construction ----------

    static std::vector<Vec3> convex_hull(const std::vector<Vec3> &pts, const Plane &plane)
    {
        Vec3 u = std::abs(plane.normal.x) < 0.9 ? cross(plane.normal, {1, 0, 0}) : cross(plane.normal, {0, 1, 0});
        u = u.normalized();
        Vec3 v = cross(plane.normal, u);
        struct P2
        {
            double x, y;
            std::size_t i;
        };
        std::vector<P2> q;
        for (std::size_t i = 0; i < pts.size(); ++i)
            q.push_back({dot(pts[i] - plane.point, u), dot(pts[i] - plane.point, v), i});
        std::sort(q.begin(), q.end(), [](const P2 &a, const P2 &b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
        auto turn = [](const P2 &o, const P2 &a, const P2 &b) {
            return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
        };
        std::vector<P2> h(2 * q.size());
        std::size_t k = 0;
        for (std::size_t i = 0; i < q.size(); ++i)
        {
            while (k >= 2 && turn(h[k - 2], h[k - 1], q[i]) <= 1e-12)
                --k;
            h[k++] = q[i];
        }
        for (std::size_t i = q.size() - 1, t = k + 1; i-- > 0;)
        {
            while (k >= t && turn(h[k - 2], h[k - 1], q[i]) <= 1e-12)
                --k;
            h[k++] = q[i];
        }
        h.resize(k > 1 ? k - 1 : k);
        std::vector<Vec3> out;
        for (const auto &p : h)
            out.push_back(plane.point + u * p.x + v * p.y);
        return out;
    }

    void build_facets(const Scene &scene)
    {
        for (const auto &s : scene.surfaces)
        {
            std::size_t first = facets_.size();
            for (const auto &t : s.triangles)
            {
                Vec3 n = t.normal();
                std::size_t f = first;
                for (; f < facets_.size(); ++f)
                {
                    const Plane &p = facets_[f].plane;
                    if (dot(p.normal, n) > 1.0 - 1e-9 && std::abs(p.signed_distance(t.a)) < 1e-6)
                        break;
                }
                if (f == facets_.size())
                    facets_.push_back({Plane{t.a, n}, s.material, {}, {}});
                facets_[f].triangles.push_back(t);
            }
            for (std::size_t f = first; f < facets_.size(); ++f)
            {
                std::vector<Vec3> pts;
                for (const auto &t : facets_[f].triangles)
                    pts.insert(pts.end(), {t.a, t.b, t.c});
                facets_[f].hull = convex_hull(pts, facets_[f].plane);
            }
        }
    }

    bool in_facet(const Facet &f, const Vec3 &p) const
    {
        for (const auto &t : f.triangles)
            if (point_in_triangle(p, t, 1e-9))
                return true;
        return false;
    }

    void build_route(const std::vector<Vec3> &route)
    {
        if (route.size() < 2)
            return;
        Route r;
        r.points = route;
        r.chainage.push_back(0.0);
        for (std::size_t i = 1; i < route.size(); ++i)
            r.chainage.push_back(r.chainage.back() + distance(route[i - 1], route[i]));
        if (!(r.chainage.back() > 0.0))
            return;
        r.bin = std::max(1.0, r.chainage.back() / 4096.0);
        r.bins.resize(static_cast<std::size_t>(r.chainage.back() / r.bin) + 1);
        route_ = std::move(r);
    }

    /// Chainage interval of the route inside the half-spaces dot(x - p, n) >= 0.
    void index_node(std::uint32_t id, const std::vector<Plane> &halfspaces)
    {
        if (!route_)
            return;
        Route &r = *route_;
        for (std::size_t seg = 1; seg < r.points.size(); ++seg)
        {
            const Vec3 &a = r.points[seg - 1], &b = r.points[seg];
            double lo = 0.0, hi = 1.0;
            for (const auto &h : halfspaces)
            {
                double fa = dot(a - h.point, h.normal), fb = dot(b - h.point, h.normal);
                const double tol = 1e-7;
                if (fa < -tol && fb < -tol)
                {
                    lo = 1.0;
                    hi = 0.0;
                    break;
                }
                if (fa < -tol || fb < -tol)
                {
                    double t = (-tol - fa) / (fb - fa);
                    if (fa < fb)
                        lo = std::max(lo, t);
                    else
                        hi = std::min(hi, t);
                }
            }
            if (lo > hi)
                continue;
            double len = r.chainage[seg] - r.chainage[seg - 1];
            double c0 = r.chainage[seg - 1] + lo * len, c1 = r.chainage[seg - 1] + hi * len;
            auto b0 = static_cast<std::size_t>(std::max(0.0, (c0 - 1e-6) / r.bin));
            auto b1 = std::min(r.bins.size() - 1, static_cast<std::size_t>((c1 + 1e-6) / r.bin));
            for (std::size_t b = b0; b <= b1; ++b)
                if (r.bins[b].empty() || r.bins[b].back() != id)
                    r.bins[b].push_back(id);
        }
    }

    static std::vector<Vec3> clip(const std::vector<Vec3> &poly, const Plane &h)
    {
        std::vector<Vec3> out;
        if (poly.empty())
            return out;
        out.reserve(poly.size() + 2);
        const double tol = 1e-9;
        for (std::size_t i = 0; i < poly.size(); ++i)
        {
            const Vec3 &a = poly[i], &b = poly[(i + 1) % poly.size()];
            double da = dot(a - h.point, h.normal), db = dot(b - h.point, h.normal);
            if (da >= -tol)
                out.push_back(a);
            if ((da >= -tol) != (db >= -tol))
                out.push_back(a + (b - a) * (da / (da - db)));
        }
        return out;
    }

    static double polygon_area(const std::vector<Vec3> &poly)
    {
        Vec3 acc{};
        for (std::size_t i = 1; i + 1 < poly.size(); ++i)
            acc += cross(poly[i] - poly[0], poly[i + 1] - poly[0]);
        return 0.5 * acc.norm();
    }

    /// Side planes of the beam from `image` through the convex `poly`, oriented inward.
    static std::vector<Plane> beam_planes(const Vec3 &image, const std::vector<Vec3> &poly)
    {
        std::vector<Plane> planes;
        Vec3 c{};
        for (const auto &p : poly)
            c += p;
        c = c / static_cast<double>(poly.size());
        for (std::size_t i = 0; i < poly.size(); ++i)
        {
            Vec3 n = cross(poly[i] - image, poly[(i + 1) % poly.size()] - image);
            double len = n.norm();
            if (len < 1e-15)
                continue;
            n = n / len;
            if (dot(c - image, n) < 0.0)
                n = -n;
            planes.push_back({image, n});
        }
        return planes;
    }

    void build_image_tree()
    {
        if (cfg_.max_reflection_order == 0 || facets_.empty())
            return;
        std::vector<std::vector<Vec3>> polys, next_polys; // apertures of the current level
        std::vector<std::vector<Plane>> level_planes;
        std::size_t level_begin = 0;

        for (std::uint32_t f = 0; f < facets_.size(); ++f)
        {
            const Facet &fc = facets_[f];
            if (fc.plane.signed_distance(tx_) <= 1e-9)
                continue;
            add_node({mirror_point(tx_, fc.plane), f, -1, 1}, fc.hull, polys);
        }
        for (int depth = 2; depth <= cfg_.max_reflection_order; ++depth)
        {
            std::size_t level_end = nodes_.size();
            next_polys.clear();
            for (std::size_t n = level_begin; n < level_end; ++n)
            {
                const Node node = nodes_[n];
                const Facet &parent = facets_[node.facet];
                const auto &poly = polys[n - level_begin];
                std::vector<Plane> cut = beam_planes(node.image, poly);
                cut.push_back(parent.plane);
                for (std::uint32_t f = 0; f < facets_.size(); ++f)
                {
                    if (f == node.facet)
                        continue;
                    const Facet &fc = facets_[f];
                    double side = fc.plane.signed_distance(node.image);
                    if (side <= 1e-9)
                        continue;
                    std::vector<Vec3> ap = fc.hull;
                    for (const auto &h : cut)
                    {
                        ap = clip(ap, h);
                        if (ap.size() < 3)
                            break;
                    }
                    if (ap.size() < 3 || polygon_area(ap) < 1e-10)
                        continue;
                    add_node({mirror_point(node.image, fc.plane), f, static_cast<std::int32_t>(n), depth}, ap,
                             next_polys);
                }
            }
            polys.swap(next_polys);
            level_begin = level_end;
        }
    }

    void add_node(const Node &node, const std::vector<Vec3> &aperture, std::vector<std::vector<Vec3>> &level_polys)
    {
        if (nodes_.size() >= cfg_.max_image_nodes)
            throw std::runtime_error("Tracer: image tree exceeds max_image_nodes (" +
                                     std::to_string(cfg_.max_image_nodes) + "); lower max_reflection_order");
        auto id = static_cast<std::uint32_t>(nodes_.size());
        nodes_.push_back(node);
        if (node.depth < cfg_.max_reflection_order)
            level_polys.push_back(aperture);
        else
            level_polys.emplace_back();
        if (route_)
        {
            std::vector<Plane> hs = beam_planes(node.image, aperture);
            hs.push_back(facets_[node.facet].plane);
            index_node(id, hs);
        }
    }

    void build_tiles(const Scene &scene)
    {
        const double step = cfg_.scattering_tile_size;
        for (const auto &s : scene.surfaces)
            for (const auto &t : s.triangles)
            {
                Vec3 n = t.normal();
                if (dot(tx_ - t.a, n) <= 1e-9)
                    continue;
                double longest = std::max({distance(t.a, t.b), distance(t.b, t.c), distance(t.c, t.a)});
                int m = std::max(1, static_cast<int>(std::ceil(longest / step - 1e-9)));
                const double gamma2 = std::norm(
                    fresnel_reflection(s.material, 0.0, cfg_.carrier_frequency, FieldPolarization::Perpendicular));
                Vec3 e1 = (t.b - t.a) / m, e2 = (t.c - t.a) / m;
                double area = t.area() / (static_cast<double>(m) * m);
                auto add = [&](const Vec3 &c) {
                    Vec3 d = c - tx_;
                    double r1 = d.norm();
                    if (r1 < 1e-6)
                        return;
                    Vec3 dir = d / r1;
                    double cos_i = -dot(dir, n);
                    if (cos_i <= 0.0 || blocked(tx_, c))
                        return;
                    tiles_.push_back({c, n, area, r1, cos_i, gamma2, direction_angles(dir)});
                };
                for (int i = 0; i < m; ++i)
                    for (int j = 0; i + j < m; ++j)
                    {
                        Vec3 o = t.a + e1 * i + e2 * j;
                        add(o + (e1 + e2) / 3.0);
                        if (i + j + 1 < m)
                            add(o + (e1 * 2.0 + e2 * 2.0) / 3.0);
                    }
            }
    }

    // ---------- queries ----------

    PropagationPath make_path(const Context &ctx, PathKind kind, int order, std::vector<Vec3> pts, cdouble coeff) const
    {
        PropagationPath p;
        p.kind = kind;
        p.order = order;
        Vec3 first = pts.empty() ? ctx.rx : pts.front();
        Vec3 last = pts.empty() ? tx_ : pts.back();
        double len = 0.0;
        Vec3 prev = tx_;
        for (const auto &q : pts)
        {
            len += distance(prev, q);
            prev = q;
        }
        len += distance(prev, ctx.rx);
        p.interactions = std::move(pts);
        p.length = len;
        p.delay = len / speed_of_light;
        p.aod = direction_angles(first - tx_);
        p.aoa = direction_angles(last - ctx.rx);
        double g = gain(ctx.tx_pattern, p.aod) + gain(ctx.rx_pattern, p.aoa);
        double k = cfg_.wavenumber();
        p.amplitude = coeff * std::pow(10.0, g / 20.0) * std::exp(cdouble(0.0, -k * len));
        if (kind == PathKind::Los || kind == PathKind::Reflected)
            p.amplitude *= cfg_.wavelength() / (4.0 * pi * len);
        return p;
    }

    void trace_reflections(const Context &ctx, std::vector<PropagationPath> &paths) const
    {
        if (nodes_.empty())
            return;
        auto visit = [&](std::uint32_t id) {
            if (auto p = reflection_path(ctx, id))
                paths.push_back(std::move(*p));
        };
        if (route_)
        {
            if (auto c = route_chainage(ctx.rx))
            {
                auto b = std::min(route_->bins.size() - 1, static_cast<std::size_t>(*c / route_->bin));
                for (auto id : route_->bins[b])
                    visit(id);
                return;
            }
        }
        for (std::uint32_t id = 0; id < nodes_.size(); ++id)
            visit(id);
    }

    std::optional<double> route_chainage(const Vec3 &p) const
    {
        const Route &r = *route_;
        for (std::size_t seg = 1; seg < r.points.size(); ++seg)
        {
            Vec3 a = r.points[seg - 1], d = r.points[seg] - a;
            double len2 = d.squared_norm();
            double t = std::clamp(dot(p - a, d) / len2, 0.0, 1.0);
            if (distance(a + d * t, p) < 1e-6)
                return r.chainage[seg - 1] + t * std::sqrt(len2);
        }
        return std::nullopt;
    }

    std::optional<PropagationPath> reflection_path(const Context &ctx, std::uint32_t id) const
    {
        const Node *node = &nodes_[id];
        std::vector<Vec3> pts(static_cast<std::size_t>(node->depth));
        Vec3 target = ctx.rx;
        for (std::size_t k = pts.size(); k-- > 0;)
        {
            const Facet &f = facets_[node->facet];
            double denom = dot(target - node->image, f.plane.normal);
            if (std::abs(denom) < 1e-15)
                return std::nullopt;
            double t = dot(f.plane.point - node->image, f.plane.normal) / denom;
            if (!(t > 1e-12 && t < 1.0 - 1e-12))
                return std::nullopt;
            Vec3 q = node->image + (target - node->image) * t;
            if (!in_facet(f, q))
                return std::nullopt;
            pts[k] = q;
            target = q;
            if (node->parent >= 0)
                node = &nodes_[static_cast<std::size_t>(node->parent)];
        }
        Vec3 prev = tx_;
        for (const auto &q : pts)
        {
            if (blocked(prev, q))
                return std::nullopt;
            prev = q;
        }
        if (blocked(prev, ctx.rx))
            return std::nullopt;

        cdouble coeff = 1.0;
        const double rough = tiles_.empty() ? 1.0 : std::sqrt(1.0 - cfg_.scattering_coefficient * cfg_.scattering_coefficient);
        node = &nodes_[id];
        std::vector<const Facet *> chain(pts.size());
        for (std::size_t k = pts.size(); k-- > 0;)
        {
            chain[k] = &facets_[node->facet];
            if (node->parent >= 0)
                node = &nodes_[static_cast<std::size_t>(node->parent)];
        }
        prev = tx_;
        for (std::size_t k = 0; k < pts.size(); ++k)
        {
            Vec3 dir = (pts[k] - prev).normalized();
            coeff *= vertical_reflection(chain[k]->material, dir, chain[k]->plane.normal, cfg_.carrier_frequency) * rough;
            prev = pts[k];
        }
        int order = static_cast<int>(pts.size());
        return make_path(ctx, PathKind::Reflected, order, std::move(pts), coeff);
    }

    void trace_diffraction(const Context &ctx, double threshold, std::vector<PropagationPath> &paths) const
    {
        const double lambda = cfg_.wavelength(), k = cfg_.wavenumber();
        const bool knife = cfg_.diffraction_model == DiffractionModel::KnifeEdge;
        const bool los_blocked = knife && blocked(tx_, ctx.rx);
        if (knife && !los_blocked)
            return;
        for (const auto &e : edges_)
        {
            Vec3 axis = e.end - e.start;
            double elen = axis.norm();
            Vec3 u = axis / elen;
            double ts = dot(tx_ - e.start, u), tr = dot(ctx.rx - e.start, u);
            double rs = (tx_ - e.start - u * ts).norm(), rr = (ctx.rx - e.start - u * tr).norm();
            if (rs < 1e-9 || rr < 1e-9)
                continue;
            double t = (ts * rr + tr * rs) / (rs + rr);
            if (!(t > 1e-6 && t < elen - 1e-6))
                continue;
            Vec3 q = e.start + u * t;
            double s_in = distance(tx_, q), s_out = distance(q, ctx.rx);

            cdouble coeff;
            if (knife)
            {
                Vec3 d = ctx.rx - tx_;
                double along = std::clamp(dot(q - tx_, d) / d.squared_norm(), 0.0, 1.0);
                double h = distance(q, tx_ + d * along);
                double nu = h * std::sqrt(2.0 * (s_in + s_out) / (lambda * s_in * s_out));
                coeff = lambda / (4.0 * pi * (s_in + s_out)) * std::pow(10.0, -knife_edge_loss_db(nu) / 20.0);
            }
            else
            {
                auto wedge = utd_geometry(e, u, q, ctx.rx);
                if (!wedge)
                    continue;
                auto [n, phi_in, phi_out] = *wedge;
                double sin_b = cross(u, (q - tx_).normalized()).norm();
                if (sin_b < 1e-6)
                    continue;
                double L = s_in * s_out / (s_in + s_out) * sin_b * sin_b;
                cdouble ds = utd_wedge_coefficient(n, phi_in, phi_out, sin_b, L, k, true);
                cdouble dh = utd_wedge_coefficient(n, phi_in, phi_out, sin_b, L, k, false);
                double w = u.z * u.z; // share of the vertical field parallel to the edge
                double mag = std::sqrt(w * std::norm(ds) + (1.0 - w) * std::norm(dh));
                cdouble d = std::polar(mag, std::arg(w >= 0.5 ? ds : dh));
                coeff = lambda / (4.0 * pi) * d / std::sqrt(s_in * s_out * (s_in + s_out));
            }
            PropagationPath p = make_path(ctx, PathKind::Diffracted, 0, {q}, coeff);
            if (std::norm(p.amplitude) < threshold)
                continue;
            Vec3 lift = (e.face_normals[0] + e.face_normals[1]).normalized() * 1e-4;
            if (blocked(tx_, q + lift) || blocked(q + lift, ctx.rx))
                continue;
            paths.push_back(std::move(p));
        }
    }

    /// Wedge index n and the incidence/diffraction angles measured from face 0, or empty when either
    /// end point lies inside the wedge.
    std::optional<std::tuple<double, double, double>> utd_geometry(const Edge &e, const Vec3 &u, const Vec3 &q,
                                                                   const Vec3 &rx) const
    {
        const Vec3 &n0 = e.face_normals[0], &n1 = e.face_normals[1];
        Vec3 t0 = cross(n0, u).normalized();
        bool convex = e.interior_angle < pi;
        if ((dot(t0, n1) < 0.0) != convex)
            t0 = -t0;
        double n = (2.0 * pi - e.interior_angle) / pi;
        auto angle = [&](const Vec3 &p) {
            Vec3 v = p - q;
            v = v - u * dot(v, u);
            double a = std::atan2(dot(v, n0), dot(v, t0));
            return a < 0.0 ? a + 2.0 * pi : a;
        };
        double phi_in = angle(tx_), phi_out = angle(rx);
        double limit = n * pi;
        if (!(phi_in > 1e-9 && phi_in < limit - 1e-9 && phi_out > 1e-9 && phi_out < limit - 1e-9))
            return std::nullopt;
        return std::make_tuple(n, phi_in, phi_out);
    }

    void trace_scattering(const Context &ctx, double strongest, double rel_floor, std::vector<PropagationPath> &paths) const
    {
        const double lambda = cfg_.wavelength(), k = cfg_.wavenumber();
        const double s2 = cfg_.scattering_coefficient * cfg_.scattering_coefficient;
        const double base = (lambda / (4.0 * pi)) * (lambda / (4.0 * pi)) * s2 / pi;
        const double g_rx_max = std::pow(10.0, ctx.rx_pattern.peak_gain / 10.0);
        const double threshold = strongest * rel_floor;
        struct Candidate
        {
            double power;
            std::uint32_t tile;
            Angles aoa;
        };
        std::vector<Candidate> cand;
        for (std::uint32_t i = 0; i < tiles_.size(); ++i)
        {
            const Tile &t = tiles_[i];
            Vec3 v = ctx.rx - t.center;
            double r2sq = v.squared_norm();
            double cos_s = dot(v, t.normal);
            if (cos_s <= 0.0 || r2sq < 1e-12)
                continue;
            cos_s /= std::sqrt(r2sq);
            double p = base * t.gamma2 * t.cos_i * cos_s * t.area / (t.r1 * t.r1 * r2sq);
            if (p * g_rx_max * std::pow(10.0, ctx.tx_pattern.peak_gain / 10.0) < threshold)
                continue;
            p *= std::pow(10.0, gain(ctx.tx_pattern, t.aod) / 10.0);
            if (p * g_rx_max < threshold)
                continue;
            Angles aoa = direction_angles(t.center - ctx.rx);
            p *= std::pow(10.0, gain(ctx.rx_pattern, aoa) / 10.0);
            if (p >= threshold)
                cand.push_back({p, i, aoa});
        }
        std::sort(cand.begin(), cand.end(), [](const Candidate &a, const Candidate &b) {
            return a.power > b.power || (a.power == b.power && a.tile < b.tile);
        });
        std::size_t added = 0;
        for (const auto &c : cand)
        {
            if (added >= cfg_.max_scattered_paths || c.power < strongest * rel_floor)
                break;
            const Tile &t = tiles_[c.tile];
            if (blocked(t.center, ctx.rx))
                continue;
            PropagationPath path;
            path.kind = PathKind::Scattered;
            path.interactions = {t.center};
            path.length = t.r1 + distance(t.center, ctx.rx);
            path.delay = path.length / speed_of_light;
            path.aod = t.aod;
            path.aoa = c.aoa;
            path.amplitude = std::sqrt(c.power) * std::exp(cdouble(0.0, -k * path.length));
            paths.push_back(std::move(path));
            strongest = std::max(strongest, c.power);
            ++added;
        }
    }
};

/// One-shot trace; builds a Tracer for the TX position and queries a single RX.
inline std::vector<PropagationPath> trace_paths(const Scene &scene, const Bvh *accel, const Terminal &tx,
                                                const Terminal &rx, const TraceConfig &cfg)
{
    Tracer tracer(scene, accel, tx.position, cfg);
    return tracer.trace(rx.position, tx.pattern, rx.pattern);
}

} // namespace railbeam
