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

#include <complex>

namespace railbeam
{

using cdouble = std::complex<double>;

// ---------- Reflection ----------

enum class FieldPolarization
{
    Perpendicular, // TE: E normal to the plane of incidence
    Parallel       // TM: E in the plane of incidence
};

/// Complex relative permittivity eps_r - j sigma / (2 pi f eps0).
inline cdouble complex_permittivity(const Material &m, double frequency)
{
    return {m.relative_permittivity, -m.conductivity / (2.0 * pi * frequency * vacuum_permittivity)};
}

/// Fresnel reflection coefficient of a half-space for an incidence angle measured from the surface normal.
inline cdouble fresnel_reflection(const Material &m, double incidence_angle, double frequency, FieldPolarization pol)
{
    if (!(incidence_angle >= 0.0 && incidence_angle < pi / 2))
        throw std::invalid_argument("fresnel_reflection: incidence angle must lie in [0, pi/2)");
    const cdouble eps = complex_permittivity(m, frequency);
    const double c = std::cos(incidence_angle), s = std::sin(incidence_angle);
    const cdouble root = std::sqrt(eps - s * s);
    if (pol == FieldPolarization::Perpendicular)
        return (c - root) / (c + root);
    return (eps * c - root) / (eps * c + root);
}

/*!
Reflection coefficient seen by a vertically polarized wave travelling along `dir` that hits a surface
with unit normal `normal`. The field is split into its parts perpendicular and parallel to the plane
of incidence; the magnitude is the power-weighted combination of both Fresnel coefficients and the
phase follows the dominant part.
*/
inline cdouble vertical_reflection(const Material &m, const Vec3 &dir, const Vec3 &normal, double frequency)
{
    const double cos_i = std::min(1.0, std::abs(dot(dir, normal)));
    const double theta = std::min(std::acos(cos_i), pi / 2 - 1e-9);
    double w = 1.0; // share of the field perpendicular to the plane of incidence
    Vec3 te = cross(dir, normal);
    Vec3 e = Vec3{0, 0, 1} - dir * dir.z;
    if (te.squared_norm() > 1e-24 && e.squared_norm() > 1e-24)
        w = std::pow(dot(e.normalized(), te.normalized()), 2);
    const cdouble g_te = fresnel_reflection(m, theta, frequency, FieldPolarization::Perpendicular);
    const cdouble g_tm = fresnel_reflection(m, theta, frequency, FieldPolarization::Parallel);
    const double mag = std::sqrt(w * std::norm(g_te) + (1.0 - w) * std::norm(g_tm));
    return std::polar(mag, std::arg(w >= 0.5 ? g_te : g_tm));
}

// ---------- Fresnel integrals and the UTD transition function ----------

/// Fresnel integrals C(x) = int_0^x cos(pi t^2 / 2) dt and S(x) = int_0^x sin(pi t^2 / 2) dt.
inline std::pair<double, double> fresnel_integrals(double x)
{
    constexpr double eps = 1e-16, fpmin = 1e-300, xmin = 1.5;
    constexpr int max_iter = 200;
    const double ax = std::abs(x);
    double c = 0.0, s = 0.0;
    if (ax < std::sqrt(fpmin))
    {
        c = ax;
    }
    else if (ax <= xmin)
    {
        // Power series, alternating between the C and S sums
        double sum = 0.0, sums = 0.0, sumc = ax, sign = 1.0, term = ax;
        const double fact = pi / 2 * ax * ax;
        bool odd = true;
        int n = 3;
        for (int k = 1; k <= max_iter; ++k)
        {
            term *= fact / k;
            sum += sign * term / n;
            double test = std::abs(sum) * eps;
            if (odd)
            {
                sign = -sign;
                sums = sum;
                sum = sumc;
            }
            else
            {
                sumc = sum;
                sum = sums;
            }
            if (term < test)
                break;
            odd = !odd;
            n += 2;
        }
        s = sums;
        c = sumc;
    }
    else
    {
        // Continued fraction (modified Lentz) for the complementary error function
        const double pix2 = pi * ax * ax;
        cdouble b(1.0, -pix2);
        cdouble cc = 1.0 / fpmin;
        cdouble d = 1.0 / b, h = d;
        int n = -1;
        for (int k = 2; k <= max_iter; ++k)
        {
            n += 2;
            double a = -n * (n + 1.0);
            b += 4.0;
            d = 1.0 / (a * d + b);
            cc = b + a / cc;
            cdouble del = cc * d;
            h *= del;
            if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < eps)
                break;
        }
        h *= cdouble(ax, -ax);
        cdouble cs = cdouble(0.5, 0.5) * (1.0 - cdouble(std::cos(0.5 * pix2), std::sin(0.5 * pix2)) * h);
        c = cs.real();
        s = cs.imag();
    }
    if (x < 0.0)
        return {-c, -s};
    return {c, s};
}

/// UTD transition function F(X) = 2j sqrt(X) e^{jX} int_{sqrt(X)}^inf e^{-j t^2} dt, X >= 0.
inline cdouble utd_transition(double X)
{
    if (X <= 0.0)
        return 0.0;
    if (X > 50.0)
    {
        const double i1 = 1.0 / X;
        return {1.0 - 0.75 * i1 * i1 + 105.0 / 16.0 * i1 * i1 * i1 * i1, 0.5 * i1 - 15.0 / 8.0 * i1 * i1 * i1};
    }
    const double u = std::sqrt(X);
    auto [c, s] = fresnel_integrals(u * std::sqrt(2.0 / pi));
    const cdouble tail = std::sqrt(pi / 2) * cdouble(0.5 - c, -(0.5 - s));
    return cdouble(0.0, 2.0) * u * std::exp(cdouble(0.0, X)) * tail;
}

/*!
Keller-Kouyoumjian-Pathak UTD coefficient of a perfectly conducting wedge.

n        : exterior wedge angle divided by pi
phi_in   : incidence angle from the 0-face [rad]
phi_out  : diffraction angle from the 0-face [rad]
sin_beta0: sine of the angle between the incident ray and the edge
L        : distance parameter [m]
k        : wavenumber [1/m]
soft     : true for the Dirichlet (E parallel to the edge) coefficient
*/
inline cdouble utd_wedge_coefficient(double n, double phi_in, double phi_out, double sin_beta0, double L, double k,
                                     bool soft)
{
    auto term = [&](double beta, double sign) {
        // cot((pi + sign*beta) / 2n) * F(k L a^sign(beta))
        double arg = (pi + sign * beta) / (2.0 * n);
        if (std::abs(std::sin(arg)) < 1e-10)
        {
            beta += 1e-8;
            arg = (pi + sign * beta) / (2.0 * n);
        }
        double N = std::round((beta + sign * pi) / (2.0 * pi * n));
        double cosv = std::cos((2.0 * pi * n * N - beta) / 2.0);
        double a = 2.0 * cosv * cosv;
        return std::cos(arg) / std::sin(arg) * utd_transition(k * L * a);
    };
    const double bm = phi_out - phi_in, bp = phi_out + phi_in;
    cdouble incident = term(bm, 1.0) + term(bm, -1.0);
    cdouble reflected = term(bp, 1.0) + term(bp, -1.0);
    cdouble pre = -std::exp(cdouble(0.0, -pi / 4)) / (2.0 * n * std::sqrt(2.0 * pi * k) * sin_beta0);
    return pre * (soft ? incident - reflected : incident + reflected);
}

/// Single knife-edge diffraction loss J(nu) in dB.
inline double knife_edge_loss_db(double nu)
{
    if (nu <= -0.78)
        return 0.0;
    return 6.9 + 20.0 * std::log10(std::sqrt((nu - 0.1) * (nu - 0.1) + 1.0) + nu - 0.1);
}

} // namespace railbeam
