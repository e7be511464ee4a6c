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

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace railbeam
{

constexpr double pi = 3.14159265358979323846;
constexpr double speed_of_light = 299792458.0;   // m/s
constexpr double vacuum_permittivity = 8.8541878128e-12; // F/m

inline constexpr double deg2rad(double deg) { return deg * pi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / pi; }

/// Wraps an angle in degrees to (-180, 180].
inline double wrap_degrees(double deg)
{
    double w = std::fmod(deg, 360.0);
    if (w <= -180.0)
        w += 360.0;
    else if (w > 180.0)
        w -= 360.0;
    return w;
}

// Cartesian vector in meters. Axis convention: x along track, y lateral towards the TX side, z up.
struct Vec3
{
    double x = 0.0, y = 0.0, z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr Vec3 operator+(const Vec3 &o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3 &o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3 &operator+=(const Vec3 &o)
    {
        x += o.x, y += o.y, z += o.z;
        return *this;
    }
    constexpr Vec3 &operator-=(const Vec3 &o)
    {
        x -= o.x, y -= o.y, z -= o.z;
        return *this;
    }
    constexpr bool operator==(const Vec3 &) const = default;

    constexpr double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    constexpr double squared_norm() const { return x * x + y * y + z * z; }
    Vec3 normalized() const
    {
        double n = norm();
        return n > 0.0 ? *this / n : Vec3{};
    }
    bool is_finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline constexpr Vec3 operator*(double s, const Vec3 &v) { return v * s; }
inline constexpr double dot(const Vec3 &a, const Vec3 &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline constexpr Vec3 cross(const Vec3 &a, const Vec3 &b)
{
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double distance(const Vec3 &a, const Vec3 &b) { return (a - b).norm(); }

// Azimuth (deg, from +x towards +y, in (-180, 180]) and elevation (deg, positive up) of a direction.
struct Angles
{
    double azimuth = 0.0;
    double elevation = 0.0;
};

inline Angles direction_angles(const Vec3 &dir)
{
    double n = dir.norm();
    if (n == 0.0)
        return {};
    double az = rad2deg(std::atan2(dir.y, dir.x));
    if (az <= -180.0)
        az += 360.0;
    double el = rad2deg(std::asin(std::clamp(dir.z / n, -1.0, 1.0)));
    return {az, el};
}

inline Vec3 direction_from_angles(double azimuth_deg, double elevation_deg)
{
    double az = deg2rad(azimuth_deg), el = deg2rad(elevation_deg);
    return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
}

// ---------- Materials ----------

enum class MaterialKind
{
    Concrete,
    Metal,
    Marble,
    Soil,
    Trunk,
    Leaf,
    Custom
};

struct Material
{
    MaterialKind kind = MaterialKind::Concrete;
    double relative_permittivity = 1.0; // dimensionless, > 0
    double conductivity = 0.0;          // S/m, >= 0
    std::string custom_name{};

    std::string name() const
    {
        switch (kind)
        {
        case MaterialKind::Concrete: return "Concrete";
        case MaterialKind::Metal: return "Metal";
        case MaterialKind::Marble: return "Marble";
        case MaterialKind::Soil: return "Soil";
        case MaterialKind::Trunk: return "Trunk";
        case MaterialKind::Leaf: return "Leaf";
        case MaterialKind::Custom: break;
        }
        return custom_name;
    }

    bool operator==(const Material &) const = default;

    // Built-in electromagnetic parameters (ITU-R P.2040 values used for the railway scenes).
    static Material builtin(MaterialKind kind)
    {
        switch (kind)
        {
        case MaterialKind::Concrete: return {kind, 5.31, 0.06622};
        case MaterialKind::Metal: return {kind, 1.0, 1.0e7};
        case MaterialKind::Marble: return {kind, 7.04, 0.93};
        case MaterialKind::Soil: return {kind, 13.74, 0.14};
        case MaterialKind::Trunk: return {kind, 1.99, 0.01201};
        case MaterialKind::Leaf: return {kind, 20.0, 0.39};
        case MaterialKind::Custom: break;
        }
        throw std::invalid_argument("Material::builtin: custom materials need explicit parameters");
    }

    static Material custom(std::string name, double permittivity, double conductivity)
    {
        if (!(permittivity > 0.0) || !std::isfinite(permittivity))
            throw std::invalid_argument("Material '" + name + "': relative permittivity must be positive");
        if (!(conductivity >= 0.0) || !std::isfinite(conductivity))
            throw std::invalid_argument("Material '" + name + "': conductivity must be non-negative");
        return {MaterialKind::Custom, permittivity, conductivity, std::move(name)};
    }

    static Material by_name(std::string_view name)
    {
        for (auto k : {MaterialKind::Concrete, MaterialKind::Metal, MaterialKind::Marble, MaterialKind::Soil,
                       MaterialKind::Trunk, MaterialKind::Leaf})
            if (builtin(k).name() == name)
                return builtin(k);
        throw std::invalid_argument("Unknown material '" + std::string(name) + "'");
    }
};

// ---------- Primitives ----------

struct Triangle
{
    Vec3 a, b, c;

    Vec3 normal() const { return cross(b - a, c - a).normalized(); }
    double area() const { return 0.5 * cross(b - a, c - a).norm(); }
    Vec3 centroid() const { return (a + b + c) / 3.0; }
};

struct Plane
{
    Vec3 point;
    Vec3 normal; // unit

    double signed_distance(const Vec3 &p) const { return dot(p - point, normal); }
};

/// Reflection of p across a plane with unit normal.
inline Vec3 mirror_point(const Vec3 &p, const Plane &plane)
{
    return p - plane.normal * (2.0 * plane.signed_distance(p));
}

struct Aabb
{
    Vec3 min{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity()};
    Vec3 max{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity()};

    void expand(const Vec3 &p)
    {
        min = {std::min(min.x, p.x), std::min(min.y, p.y), std::min(min.z, p.z)};
        max = {std::max(max.x, p.x), std::max(max.y, p.y), std::max(max.z, p.z)};
    }
    void expand(const Aabb &o)
    {
        expand(o.min);
        expand(o.max);
    }
    bool valid() const { return min.x <= max.x && min.y <= max.y && min.z <= max.z; }
    bool contains(const Vec3 &p, double tol = 1e-9) const
    {
        return p.x >= min.x - tol && p.y >= min.y - tol && p.z >= min.z - tol && p.x <= max.x + tol &&
               p.y <= max.y + tol && p.z <= max.z + tol;
    }
    Vec3 extent() const { return max - min; }
    Vec3 center() const { return (min + max) * 0.5; }
    double surface_area() const
    {
        Vec3 e = extent();
        return 2.0 * (e.x * e.y + e.y * e.z + e.z * e.x);
    }
    bool operator==(const Aabb &) const = default;
};

// ---------- Scene ----------

/// Triangles sharing one material. Normals follow the triangle winding and point out of the object.
struct Surface
{
    std::vector<Triangle> triangles;
    Material material;
    std::string tag; // object class, e.g. "guardrail", "pole", "tree_trunk"
};

/// Diffracting wedge. face_normals are the outward normals of the two faces meeting at the edge;
/// interior_angle is the solid (material) wedge angle in radians.
struct Edge
{
    Vec3 start, end;
    std::array<Vec3, 2> face_normals;
    double interior_angle = pi / 2.0;
    Material material = Material::builtin(MaterialKind::Concrete);
};

struct Scene
{
    std::string name;
    std::vector<Surface> surfaces;
    std::vector<Edge> edges;
    std::vector<Vec3> track; // polyline at rail-head height
    Aabb bounds;

    std::size_t triangle_count() const
    {
        std::size_t n = 0;
        for (const auto &s : surfaces)
            n += s.triangles.size();
        return n;
    }

    std::size_t count_tag(std::string_view tag) const
    {
        return static_cast<std::size_t>(
            std::count_if(surfaces.begin(), surfaces.end(), [&](const Surface &s) { return s.tag == tag; }));
    }

    double track_length() const
    {
        double len = 0.0;
        for (std::size_t i = 1; i < track.size(); ++i)
            len += distance(track[i - 1], track[i]);
        return len;
    }

    /// Point on the track polyline at the given chainage (clamped to the ends).
    Vec3 track_point(double chainage) const
    {
        if (track.empty())
            throw std::logic_error("Scene has no track");
        if (track.size() == 1 || chainage <= 0.0)
            return track.front();
        double acc = 0.0;
        for (std::size_t i = 1; i < track.size(); ++i)
        {
            double seg = distance(track[i - 1], track[i]);
            if (acc + seg >= chainage && seg > 0.0)
                return track[i - 1] + (track[i] - track[i - 1]) * ((chainage - acc) / seg);
            acc += seg;
        }
        return track.back();
    }

    /// Unit tangent of the track at the given chainage.
    Vec3 track_direction(double chainage) const
    {
        if (track.size() < 2)
            return {1.0, 0.0, 0.0};
        double acc = 0.0;
        for (std::size_t i = 1; i < track.size(); ++i)
        {
            double seg = distance(track[i - 1], track[i]);
            if (acc + seg >= chainage || i + 1 == track.size())
                return (track[i] - track[i - 1]).normalized();
            acc += seg;
        }
        return (track.back() - track[track.size() - 2]).normalized();
    }

    /// Checks the structural invariants; throws std::invalid_argument with a description.
    void validate() const
    {
        if (!bounds.valid())
            throw std::invalid_argument("Scene '" + name + "': invalid bounds");
        for (const auto &p : track)
            if (!bounds.contains(p, 1e-6))
                throw std::invalid_argument("Scene '" + name + "': track leaves the scene bounds");
        for (const auto &s : surfaces)
        {
            if (!(s.material.relative_permittivity > 0.0))
                throw std::invalid_argument("Scene '" + name + "': surface '" + s.tag + "' has undefined material");
            for (const auto &t : s.triangles)
                if (!(t.area() > 1e-9))
                    throw std::invalid_argument("Scene '" + name + "': degenerate triangle in '" + s.tag + "'");
        }
        for (const auto &e : edges)
        {
            if (distance(e.start, e.end) <= 0.0)
                throw std::invalid_argument("Scene '" + name + "': edge with coincident endpoints");
            if (!(e.interior_angle > 0.0 && e.interior_angle < 2.0 * pi))
                throw std::invalid_argument("Scene '" + name + "': wedge angle out of (0, 2pi)");
        }
    }
};

/// Intersection of a ray with a triangle (Moller-Trumbore). Returns the ray parameter or NaN.
inline double ray_triangle(const Vec3 &origin, const Vec3 &dir, const Triangle &tri)
{
    constexpr double det_eps = 1e-14;
    Vec3 e1 = tri.b - tri.a, e2 = tri.c - tri.a;
    Vec3 p = cross(dir, e2);
    double det = dot(e1, p);
    if (std::abs(det) < det_eps)
        return std::numeric_limits<double>::quiet_NaN();
    double inv = 1.0 / det;
    Vec3 s = origin - tri.a;
    double u = dot(s, p) * inv;
    if (u < 0.0 || u > 1.0)
        return std::numeric_limits<double>::quiet_NaN();
    Vec3 q = cross(s, e1);
    double v = dot(dir, q) * inv;
    if (v < 0.0 || u + v > 1.0)
        return std::numeric_limits<double>::quiet_NaN();
    return dot(e2, q) * inv;
}

/// True if p (assumed on the triangle plane) lies inside the triangle, with a small tolerance.
inline bool point_in_triangle(const Vec3 &p, const Triangle &tri, double tol = 1e-9)
{
    Vec3 n = cross(tri.b - tri.a, tri.c - tri.a);
    double n2 = n.squared_norm();
    if (n2 == 0.0)
        return false;
    double w0 = dot(cross(tri.b - tri.a, p - tri.a), n) / n2;
    double w1 = dot(cross(tri.c - tri.b, p - tri.b), n) / n2;
    double w2 = dot(cross(tri.a - tri.c, p - tri.c), n) / n2;
    return w0 >= -tol && w1 >= -tol && w2 >= -tol;
}

// ---------- Mesh helpers used by the scene builders ----------

/// Appends a planar convex quad (counter-clockwise seen from the outward side) as two triangles.
inline void add_quad(Surface &s, const Vec3 &a, const Vec3 &b, const Vec3 &c, const Vec3 &d)
{
    s.triangles.push_back({a, b, c});
    s.triangles.push_back({a, c, d});
}

/// Axis-aligned box with outward-facing triangles. Faces listed in `skip` ("-x","+x",...,"-z","+z") are omitted.
inline Surface make_box(const Vec3 &lo, const Vec3 &hi, Material material, std::string tag,
                        std::string_view skip = "")
{
    Surface s{{}, std::move(material), std::move(tag)};
    auto want = [&](std::string_view face) { return skip.find(face) == std::string_view::npos; };
    Vec3 p000{lo.x, lo.y, lo.z}, p100{hi.x, lo.y, lo.z}, p010{lo.x, hi.y, lo.z}, p110{hi.x, hi.y, lo.z};
    Vec3 p001{lo.x, lo.y, hi.z}, p101{hi.x, lo.y, hi.z}, p011{lo.x, hi.y, hi.z}, p111{hi.x, hi.y, hi.z};
    if (want("-x"))
        add_quad(s, p000, p001, p011, p010);
    if (want("+x"))
        add_quad(s, p100, p110, p111, p101);
    if (want("-y"))
        add_quad(s, p000, p100, p101, p001);
    if (want("+y"))
        add_quad(s, p010, p011, p111, p110);
    if (want("-z"))
        add_quad(s, p000, p010, p110, p100);
    if (want("+z"))
        add_quad(s, p001, p101, p111, p011);
    return s;
}

/// Vertical faceted cylinder (prism) with outward side faces and a top cap.
inline Surface make_prism(const Vec3 &base_center, double radius, double height, int sides, Material material,
                          std::string tag)
{
    Surface s{{}, std::move(material), std::move(tag)};
    std::vector<Vec3> ring;
    for (int i = 0; i < sides; ++i)
    {
        double a = 2.0 * pi * i / sides;
        ring.push_back(base_center + Vec3{radius * std::cos(a), radius * std::sin(a), 0.0});
    }
    Vec3 up{0.0, 0.0, height};
    for (int i = 0; i < sides; ++i)
    {
        const Vec3 &p = ring[i];
        const Vec3 &q = ring[(i + 1) % sides];
        add_quad(s, p, q, q + up, p + up);
    }
    Vec3 top = base_center + up;
    for (int i = 0; i < sides; ++i)
        s.triangles.push_back({top, ring[i] + up, ring[(i + 1) % sides] + up});
    return s;
}

} // namespace railbeam
