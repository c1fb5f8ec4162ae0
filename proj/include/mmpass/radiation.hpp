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

#include "diagnostics.hpp"
#include "geometry.hpp"
#include "waveguide.hpp"

namespace mmpass {

/*
 Aperture radiation of a single PA port.

 The port radiates along -z of its local frame. Pattern angles (theta, phi) are
 taken in the aperture frame, obtained from the port LCS by a half turn about x:
 (x, y, z) -> (x, -y, -z). Boresight is theta = 0 there.

 A port's pitch tilts its boresight towards +x, so the port LCS is built with
 R_y(-pitch); see port_frame().
*/

inline Orientation port_frame(const Orientation &o) { return {-o.pitch, o.roll}; }

inline double sinc_removable(double x)
{
    if (std::abs(x) < 1e-6)
        return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

// cos(pi t / 2) / (1 - t^2), equal to pi/4 at |t| = 1.
inline double cosine_taper(double t)
{
    const double e = 1.0 - std::abs(t);
    if (std::abs(e) < 1e-6)
        return (pi / 2.0) / (2.0 - e) * (1.0 - pi * pi * e * e / 24.0);
    return std::cos(pi * t / 2.0) / (1.0 - t * t);
}

inline double pattern_factor(int q, double theta, double phi, double a, double b, double lambda)
{
    const double st = std::sin(theta);
    const double u = st * std::cos(phi), v = st * std::sin(phi);
    if (q == 1)
        return sinc_removable(b * pi / lambda * u) * cosine_taper(2.0 * a / lambda * v);
    if (q == 2)
        return sinc_removable(a * pi / lambda * v) * cosine_taper(2.0 * b / lambda * u);
    throw std::invalid_argument("pattern_factor: q must be 1 or 2");
}

struct PolarizationVector
{
    double theta_component = 0.0;
    double phi_component = 0.0;
    SphericalBasis basis;

    double norm() const { return std::hypot(theta_component, phi_component); }
    Vec3 gcs() const { return theta_component * basis.vartheta + phi_component * basis.varphi; }
};

inline PolarizationVector polarization_vector(int q, double theta, double phi, double beta, double k_free)
{
    const double r = beta / k_free;
    const double ct = std::cos(theta), cp = std::cos(phi), sp = std::sin(phi);
    PolarizationVector p;
    if (q == 1) {
        p.theta_component = (1.0 + r * ct) * cp;
        p.phi_component = (r + ct) * sp;
    } else if (q == 2) {
        p.theta_component = (1.0 + r * ct) * sp;
        p.phi_component = (r + ct) * cp;
    } else {
        throw std::invalid_argument("polarization_vector: q must be 1 or 2");
    }
    return p;
}

// Observation seen from a port: aperture-frame angles and GCS basis.
struct PortView
{
    SphericalCoords sph;
    SphericalBasis basis;
    Vec3 local; // port LCS coordinates
};

inline Vec3 lcs_to_aperture(const Vec3 &p) { return Vec3(p.x(), -p.y(), -p.z()); }

inline PortView port_view(const Vec3 &center, const Orientation &o, const Vec3 &obs)
{
    PortView v;
    const Orientation f = port_frame(o);
    v.local = gcs_to_lcs(obs, center, f);
    v.sph = lcs_to_spherical(lcs_to_aperture(v.local));
    const double ct = std::cos(v.sph.theta), st = std::sin(v.sph.theta);
    const double cp = std::cos(v.sph.phi), sp = std::sin(v.sph.phi);
    const Mat3 R = frame_rotation(f);
    v.basis.upsilon = R * lcs_to_aperture(Vec3(st * cp, st * sp, ct));
    v.basis.vartheta = R * lcs_to_aperture(Vec3(ct * cp, ct * sp, -st));
    v.basis.varphi = R * lcs_to_aperture(Vec3(-sp, cp, 0.0));
    return v;
}

struct FieldSample
{
    cdouble e_theta = 0.0;
    cdouble e_phi = 0.0;
    Vec3 position = Vec3::Zero();
    SphericalBasis basis;
    double theta = 0.0, phi = 0.0, r = 0.0;

    double norm() const { return std::sqrt(std::norm(e_theta) + std::norm(e_phi)); }
    CVec3 gcs() const
    {
        return e_theta * basis.vartheta.cast<cdouble>() + e_phi * basis.varphi.cast<cdouble>();
    }
};

// A PA port: mode q radiating from the PA at distance x along waveguide wg.
struct PortSpec
{
    ModeSpec mode;
    WaveguideSpec wg;
    double x = 0.0; // position along the guide measured from the feed
    Vec3 center = Vec3::Zero();
    Orientation orientation;
};

inline double far_field_distance(const WaveguideSpec &wg, double lambda)
{
    const double ds = std::max(wg.a, wg.b);
    return 10.0 * ds * ds / lambda;
}

inline FieldSample radiated_field(const PortSpec &port, const MediumConstants &med, cdouble s, const Vec3 &obs,
                                  double alpha_a)
{
    const PortView v = port_view(port.center, port.orientation, obs);
    const double r = v.sph.r;
    if (r < far_field_distance(port.wg, med.lambda0))
        warn("radiated_field: observation at " + std::to_string(r) + " m is inside the far-field threshold");
    const double k = med.k_free();
    const ModeSpec &m = port.mode;
    const int q = m.q;
    const double amp = k * port.wg.a * port.wg.b * med.omega * med.mu /
                       (2.0 * m.cutoff * m.cutoff * pi * std::sqrt(double(port.wg.num_pas)) * r) *
                       std::exp(-0.5 * (port.wg.alpha_w * port.x + alpha_a * r));
    const cdouble phase = cdouble(0.0, 1.0) * std::exp(cdouble(0.0, -(m.beta * port.x + k * r)));
    const double S = pattern_factor(q, v.sph.theta, v.sph.phi, port.wg.a, port.wg.b, med.lambda0);
    const PolarizationVector psi = polarization_vector(q, v.sph.theta, v.sph.phi, m.beta, k);
    const cdouble c = amp * phase * s * S;
    FieldSample f;
    f.e_theta = c * psi.theta_component;
    f.e_phi = c * psi.phi_component;
    f.position = obs;
    f.basis = v.basis;
    f.theta = v.sph.theta;
    f.phi = v.sph.phi;
    f.r = r;
    return f;
}

// Excitation-free PA-to-user gain; guided phase lives in h_wg_to_pa.
inline cdouble h_pa_to_user(const PortSpec &port, const MediumConstants &med, const Vec3 &user, double alpha_a)
{
    const PortView v = port_view(port.center, port.orientation, user);
    const double r = v.sph.r;
    if (r < far_field_distance(port.wg, med.lambda0))
        warn("h_pa_to_user: user at " + std::to_string(r) + " m is inside the far-field threshold");
    const double k = med.k_free();
    const ModeSpec &m = port.mode;
    const double S = pattern_factor(m.q, v.sph.theta, v.sph.phi, port.wg.a, port.wg.b, med.lambda0);
    const double psi = polarization_vector(m.q, v.sph.theta, v.sph.phi, m.beta, k).norm();
    const double mag = port.wg.a * port.wg.b * med.omega * med.mu / (med.lambda0 * m.cutoff * m.cutoff * r) * S * psi /
                       modal_pattern_norm_center(m, port.wg, med) * std::exp(-0.5 * alpha_a * r);
    return mag * std::exp(cdouble(0.0, -k * r));
}

struct IntensityGrid
{
    std::vector<double> xs, ys;
    Eigen::MatrixXd db; // rows follow ys, columns follow xs
};

// Incoherent sum of |E|^2 over ports on the plane z = z0, normalized to the grid maximum.
inline IntensityGrid intensity_map(const std::vector<PortSpec> &ports, const MediumConstants &med, double alpha_a,
                                   double x0, double x1, int nx, double y0, double y1, int ny, double z0 = 0.0)
{
    if (nx < 2 || ny < 2)
        throw std::invalid_argument("intensity_map: need at least 2 points per axis");
    IntensityGrid g;
    g.xs.resize(nx);
    g.ys.resize(ny);
    for (int i = 0; i < nx; ++i)
        g.xs[i] = x0 + (x1 - x0) * i / double(nx - 1);
    for (int j = 0; j < ny; ++j)
        g.ys[j] = y0 + (y1 - y0) * j / double(ny - 1);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(ny, nx);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const Vec3 obs(g.xs[i], g.ys[j], z0);
            double acc = 0.0;
            for (const auto &port : ports) {
                const double n = radiated_field(port, med, 1.0, obs, alpha_a).norm();
                acc += n * n;
            }
            p(j, i) = acc;
        }
    const double pmax = p.maxCoeff();
    g.db = (p.array() / pmax).log10() * 10.0;
    return g;
}

} // namespace mmpass
