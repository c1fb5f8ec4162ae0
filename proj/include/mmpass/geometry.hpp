// SPDX-License-Identifier: Apache-2.0
//
// mmpass: multi-mode pinching-antenna channel simulator and optimizer
// Copyright (C) 2026 The mmpass authors
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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mmpass {

using cdouble = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Mat3 = Eigen::Matrix3d;

constexpr double pi = std::numbers::pi;

struct domain_error : std::domain_error
{
    using std::domain_error::domain_error;
};

// Pitch delta rotates about y, roll xi about x.
struct Orientation
{
    double pitch = 0.0;
    double roll = 0.0;
};

struct SphericalCoords
{
    double r = 0.0;
    double theta = 0.0;
    double phi = 0.0;
};

// Unit vectors in GCS.
struct SphericalBasis
{
    Vec3 upsilon;
    Vec3 vartheta;
    Vec3 varphi;
};

inline Mat3 rotation_x(double t)
{
    const double c = std::cos(t), s = std::sin(t);
    Mat3 R;
    R << 1.0, 0.0, 0.0,
        0.0, c, -s,
        0.0, s, c;
    return R;
}

inline Mat3 rotation_y(double t)
{
    const double c = std::cos(t), s = std::sin(t);
    Mat3 R;
    R << c, 0.0, s,
        0.0, 1.0, 0.0,
        -s, 0.0, c;
    return R;
}

// LCS -> GCS rotation, R_x(xi) R_y(delta).
inline Mat3 frame_rotation(const Orientation &o)
{
    return rotation_x(o.roll) * rotation_y(o.pitch);
}

inline Vec3 gcs_to_lcs(const Vec3 &p, const Vec3 &center, const Orientation &o)
{
    return rotation_y(o.pitch).transpose() * (rotation_x(o.roll).transpose() * (p - center));
}

inline Vec3 lcs_to_gcs(const Vec3 &p_local, const Vec3 &center, const Orientation &o)
{
    return rotation_x(o.roll) * (rotation_y(o.pitch) * p_local) + center;
}

// Points closer than this (relative) to the polar axis are treated as poles, phi := 0.
constexpr double pole_tolerance = 1e-9;

inline SphericalCoords lcs_to_spherical(const Vec3 &p)
{
    const double r = p.norm();
    if (!(r > 0.0) || !std::isfinite(r))
        throw domain_error("lcs_to_spherical: zero-length or non-finite vector");
    SphericalCoords s;
    s.r = r;
    s.theta = std::acos(std::clamp(p.z() / r, -1.0, 1.0));
    const double rho = std::hypot(p.x(), p.y());
    s.phi = (rho <= pole_tolerance * r) ? 0.0 : std::atan2(p.y(), p.x());
    if (rho <= pole_tolerance * r)
        s.theta = p.z() > 0.0 ? 0.0 : pi;
    return s;
}

inline Vec3 spherical_to_lcs(const SphericalCoords &s)
{
    const double st = std::sin(s.theta);
    return s.r * Vec3(st * std::cos(s.phi), st * std::sin(s.phi), std::cos(s.theta));
}

// Local basis rows (upsilon, vartheta, varphi) rotated into GCS.
inline SphericalBasis spherical_basis(double theta, double phi, const Orientation &frame)
{
    const double ct = std::cos(theta), st = std::sin(theta);
    const double cp = std::cos(phi), sp = std::sin(phi);
    const Mat3 R = frame_rotation(frame);
    SphericalBasis b;
    b.upsilon = R * Vec3(st * cp, st * sp, ct);
    b.vartheta = R * Vec3(ct * cp, ct * sp, -st);
    b.varphi = R * Vec3(-sp, cp, 0.0);
    return b;
}

// Translation does not act on direction vectors; kept for signature parity.
inline SphericalBasis spherical_basis(double theta, double phi, const Orientation &frame, const Vec3 &)
{
    return spherical_basis(theta, phi, frame);
}

} // namespace mmpass
