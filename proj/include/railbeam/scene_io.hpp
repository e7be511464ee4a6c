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

#include <json.hpp>

#include <map>

namespace railbeam
{

constexpr const char *scene_schema = "railbeam.scene/1";

inline nlohmann::json to_json(const Vec3 &v) { return nlohmann::json::array({v.x, v.y, v.z}); }

inline Vec3 vec3_from_json(const nlohmann::json &j)
{
    return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

/*!
Scene export. Layout:

    { "schema": "railbeam.scene/1", "name": ..., "bounds": {"min": [x,y,z], "max": [x,y,z]},
      "materials": [{"name", "relative_permittivity", "conductivity"}],
      "surfaces": [{"tag", "material", "triangles": [[ax,ay,az, bx,by,bz, cx,cy,cz], ...]}],
      "edges": [{"start", "end", "face_normals": [n0, n1], "interior_angle", "material"}],
      "track": [[x,y,z], ...] }
*/
inline nlohmann::json scene_to_json(const Scene &scene)
{
    using nlohmann::json;
    std::map<std::string, Material> materials;
    json surfaces = json::array();
    for (const auto &s : scene.surfaces)
    {
        materials.emplace(s.material.name(), s.material);
        json tris = json::array();
        for (const auto &t : s.triangles)
            tris.push_back({t.a.x, t.a.y, t.a.z, t.b.x, t.b.y, t.b.z, t.c.x, t.c.y, t.c.z});
        surfaces.push_back({{"tag", s.tag}, {"material", s.material.name()}, {"triangles", std::move(tris)}});
    }
    json edges = json::array();
    for (const auto &e : scene.edges)
    {
        materials.emplace(e.material.name(), e.material);
        edges.push_back({{"start", to_json(e.start)},
                         {"end", to_json(e.end)},
                         {"face_normals", {to_json(e.face_normals[0]), to_json(e.face_normals[1])}},
                         {"interior_angle", e.interior_angle},
                         {"material", e.material.name()}});
    }
    json mats = json::array();
    for (const auto &[name, m] : materials)
        mats.push_back({{"name", name}, {"relative_permittivity", m.relative_permittivity}, {"conductivity", m.conductivity}});
    json track = json::array();
    for (const auto &p : scene.track)
        track.push_back(to_json(p));
    return {{"schema", scene_schema},
            {"name", scene.name},
            {"bounds", {{"min", to_json(scene.bounds.min)}, {"max", to_json(scene.bounds.max)}}},
            {"materials", std::move(mats)},
            {"surfaces", std::move(surfaces)},
            {"edges", std::move(edges)},
            {"track", std::move(track)}};
}

inline Scene scene_from_json(const nlohmann::json &j)
{
    if (j.value("schema", "") != scene_schema)
        throw std::invalid_argument("scene_from_json: unsupported schema");
    std::map<std::string, Material> materials;
    for (const auto &m : j.at("materials"))
    {
        auto name = m.at("name").get<std::string>();
        double eps = m.at("relative_permittivity").get<double>(), sigma = m.at("conductivity").get<double>();
        Material mat;
        try
        {
            mat = Material::by_name(name);
        }
        catch (const std::invalid_argument &)
        {
            mat = Material::custom(name, eps, sigma);
        }
        mat.relative_permittivity = eps;
        mat.conductivity = sigma;
        materials[name] = mat;
    }
    auto material = [&](const nlohmann::json &name) {
        auto it = materials.find(name.get<std::string>());
        if (it == materials.end())
            throw std::invalid_argument("scene_from_json: undefined material " + name.dump());
        return it->second;
    };
    Scene scene;
    scene.name = j.at("name").get<std::string>();
    scene.bounds.min = vec3_from_json(j.at("bounds").at("min"));
    scene.bounds.max = vec3_from_json(j.at("bounds").at("max"));
    for (const auto &s : j.at("surfaces"))
    {
        Surface surf{{}, material(s.at("material")), s.at("tag").get<std::string>()};
        for (const auto &t : s.at("triangles"))
        {
            auto v = t.get<std::vector<double>>();
            if (v.size() != 9)
                throw std::invalid_argument("scene_from_json: triangle needs 9 coordinates");
            surf.triangles.push_back({{v[0], v[1], v[2]}, {v[3], v[4], v[5]}, {v[6], v[7], v[8]}});
        }
        scene.surfaces.push_back(std::move(surf));
    }
    for (const auto &e : j.at("edges"))
        scene.edges.push_back(Edge{vec3_from_json(e.at("start")),
                                   vec3_from_json(e.at("end")),
                                   {vec3_from_json(e.at("face_normals").at(0)), vec3_from_json(e.at("face_normals").at(1))},
                                   e.at("interior_angle").get<double>(),
                                   material(e.at("material"))});
    for (const auto &p : j.at("track"))
        scene.track.push_back(vec3_from_json(p));
    scene.validate();
    return scene;
}

/// Triangle count per material name.
inline std::map<std::string, std::size_t> material_census(const Scene &scene)
{
    std::map<std::string, std::size_t> census;
    for (const auto &s : scene.surfaces)
        census[s.material.name()] += s.triangles.size();
    return census;
}

} // namespace railbeam
