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

#include "railbeam/geometry.hpp"

#include <cstdint>
#include <random>

namespace railbeam
{

// Procedural railway scenes. The track runs along +x from chainage 0 at y = 0; the TX side is +y.
// Roadside clutter is placed by a seeded process so that (params, seed) fully determines the scene.
// Clutter dimensions and densities are not taken from any survey; they are tunable defaults.

/// Clutter kept away from a disc around the default TX site so the antenna is never buried in an object.
struct SiteClearance
{
    double x = 0.0;
    double y = 100.0;
    double radius = 15.0;
};

struct ViaductParams
{
    double length = 700.0; // scene extent along the track
    double width = 400.0;  // scene extent across the track
    double bridge_height = 19.0;
    double top_width = 13.0;
    double guardrail_height = 1.5;
    double guardrail_thickness = 0.3;
    double deck_thickness = 2.0;
    double pier_spacing = 32.0;
    int low_trees_per_side = 18;   // bushes and trees below the deck
    int tall_trees_per_side = 3;   // sparse trees reaching above the deck
    int buildings_per_side = 4;    // farms and schools
    int billboards_per_side = 3;
    SiteClearance clearance{};
};

struct CuttingParams
{
    double length = 700.0;
    double width = 400.0;
    double depth = 5.0;
    double bottom_width = 16.0;
    double top_width = 40.0;
    double bridge_width = 9.77;     // along-track width of the narrow overhead bridge
    double bridge_position = 530.0; // chainage where the overhead bridge starts
    double bridge_thickness = 1.2;
    double pole_height = 9.3;
    double pole_spacing = 50.0; // unconfirmed default
    double pole_offset = -6.5;  // lateral position of the pole line
    double tree_height_max = 10.0;
    double coppice_height_max = 3.0;
    double building_height_max = 20.0;
    int trees_per_side = 20;
    int coppice_per_side = 20;
    int buildings_per_side = 4;
    double cable_box_spacing = 40.0;
    SiteClearance clearance{};
};

struct StationParams
{
    double length = 700.0;
    double width = 300.0;
    double platform_length = 600.0;
    double platform_width = 48.0; // full width of the platform hall
    double platform_height = 1.25;
    double track_clearance = 3.0; // half-width of the track bed between the platforms
    double ceiling_height = 20.0; // above the platform surface
    double ceiling_thickness = 1.0;
    int column_rows = 2;
    int column_cols = 13;
    double column_size = 1.0;
    double sign_spacing = 75.0;
    bool station_building = true; // building between TX and track creating an NLOS stretch
    int trees_per_side = 10;
    SiteClearance clearance{};
};

namespace detail
{

inline void require(bool ok, const std::string &what)
{
    if (!ok)
        throw std::invalid_argument(what);
}

inline Edge make_edge(const Vec3 &a, const Vec3 &b, const Vec3 &n0, const Vec3 &n1, double interior, MaterialKind m)
{
    return Edge{a, b, {n0.normalized(), n1.normalized()}, interior, Material::builtin(m)};
}

/// Edges along the four top rims of an axis-aligned box.
inline void add_box_roof_edges(Scene &scene, const Vec3 &lo, const Vec3 &hi, MaterialKind m)
{
    Vec3 up{0, 0, 1};
    double z = hi.z;
    scene.edges.push_back(make_edge({lo.x, lo.y, z}, {hi.x, lo.y, z}, up, {0, -1, 0}, pi / 2, m));
    scene.edges.push_back(make_edge({lo.x, hi.y, z}, {hi.x, hi.y, z}, up, {0, 1, 0}, pi / 2, m));
    scene.edges.push_back(make_edge({lo.x, lo.y, z}, {lo.x, hi.y, z}, up, {-1, 0, 0}, pi / 2, m));
    scene.edges.push_back(make_edge({hi.x, lo.y, z}, {hi.x, hi.y, z}, up, {1, 0, 0}, pi / 2, m));
}

/// Edges along the four vertical corners of an axis-aligned box.
inline void add_box_corner_edges(Scene &scene, const Vec3 &lo, const Vec3 &hi, MaterialKind m)
{
    for (double x : {lo.x, hi.x})
        for (double y : {lo.y, hi.y})
        {
            Vec3 nx{x == lo.x ? -1.0 : 1.0, 0, 0}, ny{0, y == lo.y ? -1.0 : 1.0, 0};
            scene.edges.push_back(make_edge({x, y, lo.z}, {x, y, hi.z}, nx, ny, pi / 2, m));
        }
}

class ClutterPlacer
{
  public:
    ClutterPlacer(std::uint64_t seed, double length, SiteClearance clearance)
        : rng_(seed), length_(length), clearance_(clearance)
    {
    }

    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }

    /// Footprint centre on one side of the track with |y| in [y_min, y_max], outside the site clearance.
    Vec3 footprint(int side, double y_min, double y_max, double margin)
    {
        for (int attempt = 0; attempt < 64; ++attempt)
        {
            double x = uniform(margin, length_ - margin);
            double y = side * uniform(y_min, y_max);
            if (std::hypot(x - clearance_.x, y - clearance_.y) > clearance_.radius + margin)
                return {x, y, 0.0};
        }
        return {length_ - margin, side * y_max, 0.0};
    }

  private:
    std::mt19937_64 rng_;
    double length_;
    SiteClearance clearance_;
};

inline void add_tree(Scene &scene, const Vec3 &base, double height)
{
    double trunk_h = 0.4 * height;
    double crown_w = std::max(1.5, 0.45 * height);
    scene.surfaces.push_back(make_prism(base, 0.25, trunk_h, 6, Material::builtin(MaterialKind::Trunk), "tree_trunk"));
    Vec3 lo{base.x - crown_w / 2, base.y - crown_w / 2, base.z + trunk_h};
    Vec3 hi{base.x + crown_w / 2, base.y + crown_w / 2, base.z + height};
    scene.surfaces.push_back(make_box(lo, hi, Material::builtin(MaterialKind::Leaf), "tree_crown"));
}

inline void add_building(Scene &scene, const Vec3 &center, double sx, double sy, double height, const char *tag)
{
    Vec3 lo{center.x - sx / 2, center.y - sy / 2, center.z};
    Vec3 hi{center.x + sx / 2, center.y + sy / 2, center.z + height};
    scene.surfaces.push_back(make_box(lo, hi, Material::builtin(MaterialKind::Concrete), tag, "-z"));
    add_box_roof_edges(scene, lo, hi, MaterialKind::Concrete);
    add_box_corner_edges(scene, lo, hi, MaterialKind::Concrete);
}

inline void finish_bounds(Scene &scene, double length, double width, double z_top)
{
    scene.bounds = Aabb{};
    scene.bounds.expand(Vec3{0.0, -width / 2, 0.0});
    scene.bounds.expand(Vec3{length, width / 2, z_top});
    for (const auto &s : scene.surfaces)
        for (const auto &t : s.triangles)
            for (const auto &p : {t.a, t.b, t.c})
                scene.bounds.expand(p);
    scene.validate();
}

} // namespace detail

/// Scene without any surfaces, for free-space reference runs.
inline Scene build_free_space(double length = 700.0, double width = 400.0, double track_height = 0.0)
{
    detail::require(length > 0.0 && width > 0.0, "build_free_space: extent must be positive");
    Scene scene;
    scene.name = "free-space";
    scene.track = {{0.0, 0.0, track_height}, {length, 0.0, track_height}};
    detail::finish_bounds(scene, length, width, track_height + 60.0);
    return scene;
}

/// Elevated viaduct: concrete deck on piers, guardrails, roadside clutter mostly below the deck.
inline Scene build_viaduct(const ViaductParams &p, std::uint64_t seed)
{
    using detail::require;
    require(p.length >= 100.0 && p.width >= 100.0, "ViaductParams: extent must be at least 100 m x 100 m");
    require(p.bridge_height > 0.0, "ViaductParams.bridge_height must be positive");
    require(p.top_width > 0.0 && p.top_width < p.width / 2, "ViaductParams.top_width must be positive");
    require(p.guardrail_height >= 0.0, "ViaductParams.guardrail_height must be non-negative");
    require(p.guardrail_thickness > 0.0 && p.guardrail_thickness < p.top_width / 2,
            "ViaductParams.guardrail_thickness out of range");
    require(p.deck_thickness > 0.0 && p.deck_thickness < p.bridge_height, "ViaductParams.deck_thickness out of range");
    require(p.pier_spacing > 0.0, "ViaductParams.pier_spacing must be positive");
    require(p.low_trees_per_side >= 0 && p.tall_trees_per_side >= 0 && p.buildings_per_side >= 0 &&
                p.billboards_per_side >= 0,
            "ViaductParams: clutter counts must be non-negative");

    const auto concrete = Material::builtin(MaterialKind::Concrete);
    const auto metal = Material::builtin(MaterialKind::Metal);
    const double L = p.length, H = p.bridge_height, hw = p.top_width / 2;

    Scene scene;
    scene.name = "viaduct";
    scene.track = {{0.0, 0.0, H}, {L, 0.0, H}};

    Surface ground{{}, Material::builtin(MaterialKind::Soil), "ground"};
    add_quad(ground, {0, -p.width / 2, 0}, {L, -p.width / 2, 0}, {L, p.width / 2, 0}, {0, p.width / 2, 0});
    scene.surfaces.push_back(std::move(ground));

    Vec3 deck_lo{0, -hw, H - p.deck_thickness}, deck_hi{L, hw, H};
    scene.surfaces.push_back(make_box(deck_lo, deck_hi, concrete, "deck"));
    Vec3 up{0, 0, 1}, down{0, 0, -1}, py{0, 1, 0}, ny{0, -1, 0};
    scene.edges.push_back(detail::make_edge({0, hw, H - p.deck_thickness}, {L, hw, H - p.deck_thickness}, down, py,
                                            pi / 2, MaterialKind::Concrete));
    scene.edges.push_back(detail::make_edge({0, -hw, H - p.deck_thickness}, {L, -hw, H - p.deck_thickness}, down,
                                            ny, pi / 2, MaterialKind::Concrete));

    if (p.guardrail_height > 0.0)
    {
        const double gt = p.guardrail_thickness, gz = H + p.guardrail_height;
        scene.surfaces.push_back(make_box({0, hw - gt, H}, {L, hw, gz}, concrete, "guardrail", "-z"));
        scene.surfaces.push_back(make_box({0, -hw, H}, {L, -hw + gt, gz}, concrete, "guardrail", "-z"));
        for (double side : {1.0, -1.0})
        {
            Vec3 out = side > 0 ? py : ny;
            scene.edges.push_back(
                detail::make_edge({0, side * hw, gz}, {L, side * hw, gz}, up, out, pi / 2, MaterialKind::Concrete));
            scene.edges.push_back(detail::make_edge({0, side * (hw - gt), gz}, {L, side * (hw - gt), gz}, up, -out,
                                                    pi / 2, MaterialKind::Concrete));
        }
    }
    else
    {
        scene.edges.push_back(detail::make_edge({0, hw, H}, {L, hw, H}, up, py, pi / 2, MaterialKind::Concrete));
        scene.edges.push_back(detail::make_edge({0, -hw, H}, {L, -hw, H}, up, ny, pi / 2, MaterialKind::Concrete));
    }

    for (double x = p.pier_spacing / 2; x < L; x += p.pier_spacing)
        scene.surfaces.push_back(
            make_box({x - 1.0, -3.0, 0.0}, {x + 1.0, 3.0, H - p.deck_thickness}, concrete, "pier", "-z+z"));

    detail::ClutterPlacer place(seed, L, p.clearance);
    const double y_far = p.width / 2 - 10.0;
    for (int side : {1, -1})
    {
        for (int i = 0; i < p.buildings_per_side; ++i)
        {
            Vec3 c = place.footprint(side, 40.0, y_far - 20.0, 25.0);
            double sx = place.uniform(15.0, 40.0), sy = place.uniform(10.0, 25.0);
            detail::add_building(scene, c, sx, sy, place.uniform(4.0, 12.0), "building");
        }
        for (int i = 0; i < p.billboards_per_side; ++i)
        {
            Vec3 c = place.footprint(side, 20.0, 60.0, 10.0);
            double top = place.uniform(8.0, 15.0);
            scene.surfaces.push_back(make_prism(c, 0.3, top - 4.0, 6, metal, "billboard_pole"));
            Vec3 lo{c.x - 4.0, c.y - 0.15, top - 4.0}, hi{c.x + 4.0, c.y + 0.15, top};
            scene.surfaces.push_back(make_box(lo, hi, metal, "billboard"));
        }
        for (int i = 0; i < p.low_trees_per_side; ++i)
            detail::add_tree(scene, place.footprint(side, 10.0, y_far, 3.0), place.uniform(2.0, 0.8 * H));
        for (int i = 0; i < p.tall_trees_per_side; ++i)
            detail::add_tree(scene, place.footprint(side, 10.0, 60.0, 3.0), place.uniform(H + 1.0, H + 6.0));
    }

    detail::finish_bounds(scene, L, p.width, H + 60.0);
    return scene;
}

/// U-shaped cutting: groove with sloped concrete walls, a narrow overhead bridge, trackside poles.
inline Scene build_cutting(const CuttingParams &p, std::uint64_t seed)
{
    using detail::require;
    require(p.length >= 100.0 && p.width >= 100.0, "CuttingParams: extent must be at least 100 m x 100 m");
    require(p.depth > 0.0, "CuttingParams.depth must be positive");
    require(p.bottom_width > 0.0 && p.top_width > p.bottom_width, "CuttingParams: top_width must exceed bottom_width");
    require(p.top_width < p.width, "CuttingParams.top_width must fit inside the scene");
    require(p.bridge_width > 0.0 && p.bridge_position >= 0.0 && p.bridge_position + p.bridge_width <= p.length,
            "CuttingParams: overhead bridge must lie inside the scene");
    require(p.pole_height > 0.0 && p.pole_spacing > 0.0, "CuttingParams: pole height and spacing must be positive");
    require(std::abs(p.pole_offset) < p.bottom_width / 2, "CuttingParams.pole_offset must lie on the groove floor");
    require(p.tree_height_max > 0.0 && p.coppice_height_max > 0.0 && p.building_height_max > 0.0,
            "CuttingParams: clutter heights must be positive");
    require(p.trees_per_side >= 0 && p.coppice_per_side >= 0 && p.buildings_per_side >= 0,
            "CuttingParams: clutter counts must be non-negative");

    const auto concrete = Material::builtin(MaterialKind::Concrete);
    const auto soil = Material::builtin(MaterialKind::Soil);
    const double L = p.length, D = p.depth, bw = p.bottom_width / 2, tw = p.top_width / 2, W = p.width / 2;

    Scene scene;
    scene.name = "cutting";
    scene.track = {{0.0, 0.0, 0.0}, {L, 0.0, 0.0}};

    Surface floor{{}, soil, "groove_floor"};
    add_quad(floor, {0, -bw, 0}, {L, -bw, 0}, {L, bw, 0}, {0, bw, 0});
    scene.surfaces.push_back(std::move(floor));

    Surface walls{{}, concrete, "groove_wall"};
    add_quad(walls, {0, bw, 0}, {L, bw, 0}, {L, tw, D}, {0, tw, D});
    add_quad(walls, {0, -tw, D}, {L, -tw, D}, {L, -bw, 0}, {0, -bw, 0});
    scene.surfaces.push_back(std::move(walls));

    Surface ground{{}, soil, "ground"};
    add_quad(ground, {0, tw, D}, {L, tw, D}, {L, W, D}, {0, W, D});
    add_quad(ground, {0, -W, D}, {L, -W, D}, {L, -tw, D}, {0, -tw, D});
    scene.surfaces.push_back(std::move(ground));

    // Rim edges: ground and sloped wall meet with a solid angle of pi - slope.
    const double slope = std::atan2(D, tw - bw);
    for (double side : {1.0, -1.0})
    {
        Vec3 wall_n = Vec3{0.0, -side * D, tw - bw}.normalized();
        scene.edges.push_back(detail::make_edge({0, side * tw, D}, {L, side * tw, D}, {0, 0, 1}, wall_n, pi - slope,
                                                MaterialKind::Concrete));
    }

    const double bx0 = p.bridge_position, bx1 = p.bridge_position + p.bridge_width;
    const double span = tw + 10.0;
    scene.surfaces.push_back(
        make_box({bx0, -span, D}, {bx1, span, D + p.bridge_thickness}, concrete, "overhead_bridge"));
    for (auto [x, nx] : {std::pair{bx0, -1.0}, std::pair{bx1, 1.0}})
    {
        scene.edges.push_back(detail::make_edge({x, -tw, D}, {x, tw, D}, {0, 0, -1}, {nx, 0, 0}, pi / 2,
                                                MaterialKind::Concrete));
        scene.edges.push_back(detail::make_edge({x, -span, D + p.bridge_thickness}, {x, span, D + p.bridge_thickness},
                                                {0, 0, 1}, {nx, 0, 0}, pi / 2, MaterialKind::Concrete));
    }

    const auto metal = Material::builtin(MaterialKind::Metal);
    const int n_poles = static_cast<int>(std::floor(L / p.pole_spacing + 1e-9)) + 1;
    for (int i = 0; i < n_poles; ++i)
    {
        double x = std::min(L - 0.2, std::max(0.2, i * p.pole_spacing));
        scene.surfaces.push_back(make_box({x - 0.2, p.pole_offset - 0.2, 0.0}, {x + 0.2, p.pole_offset + 0.2, p.pole_height},
                                          metal, "pole", "-z"));
    }
    if (p.cable_box_spacing > 0.0)
    {
        const double y = -p.pole_offset > 0 ? bw - 1.0 : -(bw - 1.0);
        for (double x = p.cable_box_spacing / 2; x < L; x += p.cable_box_spacing)
            scene.surfaces.push_back(
                make_box({x - 0.5, y - 0.3, 0.0}, {x + 0.5, y + 0.3, 0.8}, concrete, "cable_box", "-z"));
    }

    detail::ClutterPlacer place(seed, L, p.clearance);
    for (int side : {1, -1})
    {
        for (int i = 0; i < p.buildings_per_side; ++i)
        {
            Vec3 c = place.footprint(side, tw + 40.0, W - 25.0, 25.0);
            c.z = D;
            double sx = place.uniform(15.0, 40.0), sy = place.uniform(10.0, 25.0);
            detail::add_building(scene, c, sx, sy, place.uniform(0.3 * p.building_height_max, p.building_height_max),
                                 "building");
        }
        for (int i = 0; i < p.trees_per_side; ++i)
        {
            Vec3 c = place.footprint(side, tw + 2.0, tw + 40.0, 3.0);
            c.z = D;
            detail::add_tree(scene, c, place.uniform(0.5 * p.tree_height_max, p.tree_height_max));
        }
        for (int i = 0; i < p.coppice_per_side; ++i)
        {
            Vec3 c = place.footprint(side, tw + 2.0, W - 10.0, 2.0);
            c.z = D;
            Vec3 lo{c.x - 1.5, c.y - 1.5, D}, hi{c.x + 1.5, c.y + 1.5, D + place.uniform(1.0, p.coppice_height_max)};
            scene.surfaces.push_back(make_box(lo, hi, Material::builtin(MaterialKind::Leaf), "coppice", "-z"));
        }
    }

    detail::finish_bounds(scene, L, p.width, 60.0);
    return scene;
}

/// Station: marble platforms either side of the track under a concrete canopy on columns, metal signs.
inline Scene build_station(const StationParams &p, std::uint64_t seed)
{
    using detail::require;
    require(p.length >= 100.0 && p.width >= 100.0, "StationParams: extent must be at least 100 m x 100 m");
    require(p.platform_length > 0.0 && p.platform_length <= p.length, "StationParams: platform must fit the scene length");
    require(p.platform_width > 2 * p.track_clearance && p.platform_width <= p.width,
            "StationParams: platform must fit the scene width");
    require(p.platform_height > 0.0 && p.ceiling_height > 0.0 && p.ceiling_thickness > 0.0,
            "StationParams: heights must be positive");
    require(p.column_rows >= 0 && p.column_cols >= 0 && p.column_size > 0.0, "StationParams: invalid column layout");
    require(p.trees_per_side >= 0, "StationParams.trees_per_side must be non-negative");

    const auto concrete = Material::builtin(MaterialKind::Concrete);
    const auto marble = Material::builtin(MaterialKind::Marble);
    const auto metal = Material::builtin(MaterialKind::Metal);
    const double L = p.length, W = p.width / 2, hw = p.platform_width / 2, tc = p.track_clearance;
    const double x0 = (L - p.platform_length) / 2, x1 = x0 + p.platform_length;
    const double ph = p.platform_height, zc = ph + p.ceiling_height;

    Scene scene;
    scene.name = "station";
    scene.track = {{0.0, 0.0, 0.0}, {L, 0.0, 0.0}};

    Surface ground{{}, Material::builtin(MaterialKind::Soil), "ground"};
    add_quad(ground, {0, -W, 0}, {L, -W, 0}, {L, W, 0}, {0, W, 0});
    scene.surfaces.push_back(std::move(ground));

    for (double side : {1.0, -1.0})
    {
        Vec3 lo{x0, side > 0 ? tc : -hw, 0.0}, hi{x1, side > 0 ? hw : -tc, ph};
        scene.surfaces.push_back(make_box(lo, hi, marble, "platform", "-z"));
        double y_edge = side * tc;
        scene.edges.push_back(detail::make_edge({x0, y_edge, ph}, {x1, y_edge, ph}, {0, 0, 1}, {0, -side, 0}, pi / 2,
                                                MaterialKind::Marble));
    }

    scene.surfaces.push_back(make_box({x0, -hw, zc}, {x1, hw, zc + p.ceiling_thickness}, concrete, "ceiling"));
    for (double side : {1.0, -1.0})
        scene.edges.push_back(detail::make_edge({x0, side * hw, zc}, {x1, side * hw, zc}, {0, 0, -1}, {0, side, 0},
                                                pi / 2, MaterialKind::Concrete));

    // Columns: rows spread across each platform, columns spread along it.
    for (int r = 0; r < p.column_rows; ++r)
    {
        double y;
        if (p.column_rows == 1)
            y = (tc + hw) / 2;
        else
        {
            int per_side = (p.column_rows + 1) / 2;
            int k = r / 2;
            double side = (r % 2 == 0) ? 1.0 : -1.0;
            y = side * (tc + (hw - tc) * (k + 1.0) / (per_side + 1.0));
        }
        for (int c = 0; c < p.column_cols; ++c)
        {
            double x = p.column_cols == 1 ? (x0 + x1) / 2 : x0 + 2.0 + (p.platform_length - 4.0) * c / (p.column_cols - 1.0);
            double s = p.column_size / 2;
            scene.surfaces.push_back(make_box({x - s, y - s, ph}, {x + s, y + s, zc}, concrete, "column", "-z+z"));
        }
    }

    if (p.sign_spacing > 0.0)
        for (double x = x0 + p.sign_spacing / 2; x < x1; x += p.sign_spacing)
            for (double side : {1.0, -1.0})
            {
                double y = side * (tc + 3.0);
                scene.surfaces.push_back(
                    make_box({x - 2.0, y - 0.1, ph + 3.0}, {x + 2.0, y + 0.1, ph + 4.2}, metal, "station_sign"));
            }

    if (p.station_building)
    {
        Vec3 c{0.2 * L, hw + 14.0, 0.0};
        detail::add_building(scene, c, 40.0, 15.0, 25.0, "station_building");
    }

    detail::ClutterPlacer place(seed, L, p.clearance);
    for (int side : {1, -1})
        for (int i = 0; i < p.trees_per_side; ++i)
        {
            Vec3 c = place.footprint(side, hw + 25.0, W - 5.0, 3.0);
            detail::add_tree(scene, c, place.uniform(4.0, 12.0));
        }

    detail::finish_bounds(scene, L, p.width, 60.0);
    return scene;
}

} // namespace railbeam
