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
#include <optional>

namespace railbeam
{

/// Minimum hit distance; suppresses self-intersection right after an interaction.
constexpr double ray_epsilon = 1e-6;

struct Hit
{
    Vec3 point;
    std::size_t triangle_id = 0; // global id: surfaces in order, triangles in order
    double distance = 0.0;
};

/*!
Bounding volume hierarchy over all scene triangles.

Built with a binned surface-area heuristic. Queries return exactly the nearest hit a brute-force loop
over every triangle would return (same triangle id, ties broken by the smaller id). The structure is
immutable after construction and can be shared between threads.
*/
class Bvh
{
  public:
    struct Node
    {
        Aabb box;
        std::uint32_t first = 0; // leaf: first primitive index; inner: right child
        std::uint32_t count = 0; // leaf primitive count, 0 for inner nodes
    };

    explicit Bvh(const Scene &scene)
    {
        for (std::size_t s = 0; s < scene.surfaces.size(); ++s)
            for (const auto &t : scene.surfaces[s].triangles)
            {
                triangles_.push_back(t);
                surface_of_.push_back(s);
            }
        if (triangles_.empty())
            throw std::invalid_argument("build_accel: scene '" + scene.name + "' has no triangles");
        order_.resize(triangles_.size());
        for (std::size_t i = 0; i < order_.size(); ++i)
            order_[i] = static_cast<std::uint32_t>(i);
        std::vector<Aabb> boxes(triangles_.size());
        std::vector<Vec3> centers(triangles_.size());
        for (std::size_t i = 0; i < triangles_.size(); ++i)
        {
            boxes[i].expand(triangles_[i].a);
            boxes[i].expand(triangles_[i].b);
            boxes[i].expand(triangles_[i].c);
            centers[i] = boxes[i].center();
        }
        nodes_.reserve(2 * triangles_.size());
        nodes_.push_back({});
        build(0, 0, static_cast<std::uint32_t>(triangles_.size()), boxes, centers);
    }

    std::size_t triangle_count() const { return triangles_.size(); }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t leaf_count() const
    {
        return static_cast<std::size_t>(
            std::count_if(nodes_.begin(), nodes_.end(), [](const Node &n) { return n.count > 0; }));
    }
    const Triangle &triangle(std::size_t id) const { return triangles_[id]; }
    std::size_t surface_of(std::size_t id) const { return surface_of_[id]; }

    /// Nearest hit with distance in (ray_epsilon, t_max]. Direction must be unit length.
    std::optional<Hit> intersect(const Vec3 &origin, const Vec3 &direction, double t_max) const
    {
        if (!origin.is_finite() || !direction.is_finite() || std::isnan(t_max))
            throw std::invalid_argument("intersect: non-finite ray");
        if (std::abs(direction.norm() - 1.0) > 1e-9)
            throw std::invalid_argument("intersect: direction is not normalized");
        double best = t_max;
        std::size_t best_id = std::numeric_limits<std::size_t>::max();
        traverse(origin, direction, best, [&](std::size_t id, double t) {
            if (t > ray_epsilon && (t < best || (t == best && id < best_id)))
            {
                best = t;
                best_id = id;
            }
        });
        if (best_id == std::numeric_limits<std::size_t>::max())
            return std::nullopt;
        return Hit{origin + direction * best, best_id, best};
    }

    /// True if anything lies strictly between a and b (end points excluded by ray_epsilon).
    bool occluded(const Vec3 &a, const Vec3 &b) const
    {
        Vec3 d = b - a;
        double len = d.norm();
        if (len <= 2.0 * ray_epsilon)
            return false;
        Vec3 dir = d / len;
        double limit = len - ray_epsilon;
        bool blocked = false;
        double t_cut = limit;
        traverse(a, dir, t_cut, [&](std::size_t, double t) {
            if (t > ray_epsilon && t < limit)
            {
                blocked = true;
                t_cut = -1.0; // terminates traversal
            }
        });
        return blocked;
    }

  private:
    std::vector<Triangle> triangles_;
    std::vector<std::size_t> surface_of_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;

    static constexpr std::uint32_t leaf_size = 4;
    static constexpr int bin_count = 16;

    void build(std::size_t node_index, std::uint32_t first, std::uint32_t count, const std::vector<Aabb> &boxes,
               const std::vector<Vec3> &centers)
    {
        Aabb box, cbox;
        for (std::uint32_t i = first; i < first + count; ++i)
        {
            box.expand(boxes[order_[i]]);
            cbox.expand(centers[order_[i]]);
        }
        nodes_[node_index].box = box;
        if (count <= leaf_size)
        {
            make_leaf(node_index, first, count);
            return;
        }

        // Binned SAH split along each axis
        double best_cost = std::numeric_limits<double>::infinity();
        int best_axis = -1, best_split = 0;
        Vec3 ext = cbox.extent();
        for (int axis = 0; axis < 3; ++axis)
        {
            if (ext[axis] <= 0.0)
                continue;
            std::array<Aabb, bin_count> bin_box{};
            std::array<std::uint32_t, bin_count> bin_n{};
            double scale = bin_count / ext[axis];
            for (std::uint32_t i = first; i < first + count; ++i)
            {
                int b = std::min(bin_count - 1, static_cast<int>((centers[order_[i]][axis] - cbox.min[axis]) * scale));
                bin_box[b].expand(boxes[order_[i]]);
                ++bin_n[b];
            }
            std::array<double, bin_count> right_area{};
            std::array<std::uint32_t, bin_count> right_n{};
            Aabb acc;
            std::uint32_t n = 0;
            for (int b = bin_count - 1; b > 0; --b)
            {
                acc.expand(bin_box[b]);
                n += bin_n[b];
                right_area[b] = acc.valid() ? acc.surface_area() : 0.0;
                right_n[b] = n;
            }
            acc = Aabb{};
            n = 0;
            for (int b = 0; b < bin_count - 1; ++b)
            {
                acc.expand(bin_box[b]);
                n += bin_n[b];
                if (n == 0 || right_n[b + 1] == 0)
                    continue;
                double cost = n * acc.surface_area() + right_n[b + 1] * right_area[b + 1];
                if (cost < best_cost)
                {
                    best_cost = cost;
                    best_axis = axis;
                    best_split = b;
                }
            }
        }

        std::uint32_t mid = first;
        if (best_axis >= 0)
        {
            double scale = bin_count / ext[best_axis];
            auto it = std::partition(order_.begin() + first, order_.begin() + first + count, [&](std::uint32_t id) {
                int b = std::min(bin_count - 1, static_cast<int>((centers[id][best_axis] - cbox.min[best_axis]) * scale));
                return b <= best_split;
            });
            mid = static_cast<std::uint32_t>(it - order_.begin());
        }
        if (mid == first || mid == first + count)
        {
            // All centroids coincide: split by index
            if (count <= 4 * leaf_size)
            {
                make_leaf(node_index, first, count);
                return;
            }
            mid = first + count / 2;
        }

        std::size_t left = nodes_.size();
        nodes_.push_back({});
        nodes_.push_back({});
        nodes_[node_index].first = static_cast<std::uint32_t>(left + 1);
        nodes_[node_index].count = 0;
        build(left, first, mid - first, boxes, centers);
        build(left + 1, mid, first + count - mid, boxes, centers);
    }

    void make_leaf(std::size_t node_index, std::uint32_t first, std::uint32_t count)
    {
        nodes_[node_index].first = first;
        nodes_[node_index].count = count;
    }

    static bool slab_test(const Aabb &box, const Vec3 &origin, const Vec3 &inv_dir, double t_max)
    {
        double t0 = 0.0, t1 = t_max;
        for (int axis = 0; axis < 3; ++axis)
        {
            double ta = (box.min[axis] - origin[axis]) * inv_dir[axis];
            double tb = (box.max[axis] - origin[axis]) * inv_dir[axis];
            if (std::isnan(ta) || std::isnan(tb))
            {
                // Ray parallel to the slab and exactly on its boundary plane
                if (origin[axis] < box.min[axis] || origin[axis] > box.max[axis])
                    return false;
                continue;
            }
            if (ta > tb)
                std::swap(ta, tb);
            t0 = std::max(t0, ta);
            t1 = std::min(t1, tb * (1.0 + 4e-16) + 1e-12);
            if (t0 > t1)
                return false;
        }
        return true;
    }

    template <typename Visitor>
    void traverse(const Vec3 &origin, const Vec3 &dir, const double &t_limit, Visitor &&visit) const
    {
        Vec3 inv{1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z};
        std::uint32_t stack[128];
        int sp = 0;
        stack[sp++] = 0;
        while (sp > 0)
        {
            const Node &node = nodes_[stack[--sp]];
            if (t_limit < 0.0)
                return;
            if (!slab_test(node.box, origin, inv, t_limit))
                continue;
            if (node.count > 0)
            {
                for (std::uint32_t i = node.first; i < node.first + node.count; ++i)
                {
                    std::uint32_t id = order_[i];
                    double t = ray_triangle(origin, dir, triangles_[id]);
                    if (!std::isnan(t))
                        visit(id, t);
                }
            }
            else
            {
                stack[sp++] = node.first - 1; // left child
                stack[sp++] = node.first;     // right child
            }
        }
    }
};

/// Builds the acceleration structure; throws std::invalid_argument for a scene without triangles.
inline Bvh build_accel(const Scene &scene) { return Bvh(scene); }

} // namespace railbeam
