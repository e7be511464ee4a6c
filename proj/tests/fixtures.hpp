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

#include "railbeam/railbeam.hpp"

#include <algorithm>
#include <optional>
#include <vector>

namespace railbeam::fixtures
{

/// Closed concrete room [0, size] with all faces pointing inwards.
inline Scene box_room(const Vec3 &size, MaterialKind material = MaterialKind::Concrete)
{
    Scene scene;
    scene.name = "box_room";
    Surface s = make_box({0.0, 0.0, 0.0}, size, Material::builtin(material), "wall");
    for (auto &t : s.triangles)
        std::swap(t.b, t.c);
    scene.surfaces.push_back(std::move(s));
    scene.bounds = Aabb{{0.0, 0.0, 0.0}, size};
    return scene;
}

inline TraceConfig specular_only(int order)
{
    TraceConfig cfg;
    cfg.max_reflection_order = order;
    cfg.max_diffraction_order = 0;
    cfg.enable_scattering = false;
    cfg.path_power_floor = 300.0;
    return cfg;
}

/*!
Brute-force mirror enumeration inside an axis-aligned box: every wall sequence without immediate
repeats up to `order`, kept only when each reflection point lies on its wall in the right order.
Returns the sorted path lengths.
*/
inline std::vector<double> box_mirror_lengths(const Vec3 &size, const Vec3 &tx, const Vec3 &rx, int order)
{
    struct Wall
    {
        int axis;
        double value;
    };
    std::vector<Wall> walls;
    for (int axis = 0; axis < 3; ++axis)
    {
        walls.push_back({axis, 0.0});
        walls.push_back({axis, axis == 0 ? size.x : axis == 1 ? size.y : size.z});
    }
    auto coord = [](const Vec3 &v, int axis) -> double { return axis == 0 ? v.x : axis == 1 ? v.y : v.z; };
    auto mirror = [&](Vec3 p, const Wall &w) {
        double c = 2.0 * w.value - coord(p, w.axis);
        (w.axis == 0 ? p.x : w.axis == 1 ? p.y : p.z) = c;
        return p;
    };

    std::vector<double> lengths{distance(tx, rx)};
    std::vector<int> seq;
    auto visit = [&](auto &&self) -> void {
        if (!seq.empty())
        {
            std::vector<Vec3> images{tx};
            for (int w : seq)
                images.push_back(mirror(images.back(), walls[w]));
            Vec3 target = rx;
            bool valid = true;
            for (std::size_t k = seq.size(); k-- > 0 && valid;)
            {
                const Wall &w = walls[seq[k]];
                const Vec3 img = images[k + 1];
                double a = coord(target, w.axis) - w.value, b = coord(img, w.axis) - w.value;
                if (a * b >= 0.0)
                {
                    valid = false;
                    break;
                }
                const Vec3 hit = target + (img - target) * (a / (a - b));
                for (int ax = 0; ax < 3; ++ax)
                    if (ax != w.axis && (coord(hit, ax) < -1e-12 || coord(hit, ax) > coord(size, ax) + 1e-12))
                        valid = false;
                target = hit;
            }
            if (valid)
                lengths.push_back(distance(images.back(), rx));
        }
        if (static_cast<int>(seq.size()) == order)
            return;
        for (int w = 0; w < 6; ++w)
        {
            if (!seq.empty() && seq.back() == w)
                continue;
            seq.push_back(w);
            self(self);
            seq.pop_back();
        }
    };
    visit(visit);
    std::sort(lengths.begin(), lengths.end());
    return lengths;
}

inline PropagationPath synthetic_path(double delay_ns, double power_linear, double aoa_az = 0.0, double aod_az = 0.0,
                                      double doppler = 0.0)
{
    PropagationPath p;
    p.kind = PathKind::Reflected;
    p.delay = delay_ns * 1e-9;
    p.length = p.delay * speed_of_light;
    p.amplitude = {std::sqrt(power_linear), 0.0};
    p.aoa = {aoa_az, 0.0};
    p.aod = {aod_az, 0.0};
    p.doppler_hz = doppler;
    return p;
}

} // namespace railbeam::fixtures
