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

#include "geometry.hpp"

#include <vector>

namespace mmpass {

constexpr double speed_of_light = 299792458.0;
constexpr double mu0 = 1.25663706212e-6;
constexpr double eps0 = 8.8541878128e-12;

inline double db_per_m_to_np(double db) { return db * std::log(10.0) / 10.0; }
inline double dbw_to_watt(double dbw) { return std::pow(10.0, dbw / 10.0); }
inline double watt_to_dbw(double w) { return 10.0 * std::log10(w); }

struct MediumConstants
{
    double frequency = 100e9;
    double lambda0 = speed_of_light / 100e9;
    double n_core = 2.0;
    double mu = mu0;
    double eps = eps0;
    double omega = 2.0 * pi * 100e9;

    double k_free() const { return 2.0 * pi / lambda0; }
    double k_guided() const { return n_core * k_free(); }
};

inline MediumConstants make_medium(double frequency, double n_core)
{
    if (!(frequency > 0.0))
        throw std::invalid_argument("frequency must be positive");
    if (!(n_core >= 1.0))
        throw std::invalid_argument("n_core must be >= 1");
    MediumConstants m;
    m.frequency = frequency;
    m.lambda0 = speed_of_light / frequency;
    m.n_core = n_core;
    m.omega = 2.0 * pi * frequency;
    return m;
}

// Waveguide m runs along +x from feed_point; cross section a (along y) by b (along z).
struct WaveguideSpec
{
    double a = 3e-3;
    double b = 2e-3;
    Vec3 feed_point = Vec3(0.0, 0.0, 3.0);
    double length = 10.0;
    double alpha_w = 0.0; // Np/m
    double kappa = 1.0;   // 1/m
    int num_pas = 1;
};

struct ModeSpec
{
    int u = 1, v = 0;
    int q = 1;
    double cutoff = 0.0; // varrho_q
    double beta = 0.0;   // beta_q
    double guided = 0.0; // varrho inside the core
};

inline ModeSpec mode_spec(int u, int v, const WaveguideSpec &wg, const MediumConstants &med)
{
    if (u < 0 || v < 0 || (u == 0 && v == 0))
        throw std::invalid_argument("mode_spec: (u,v) must be nonnegative and not both zero");
    ModeSpec m;
    m.u = u;
    m.v = v;
    m.q = (u == 1 && v == 0) ? 1 : (u == 0 && v == 1) ? 2 : 0;
    const double ku = u * pi / wg.a, kv = v * pi / wg.b;
    m.cutoff = std::sqrt(ku * ku + kv * kv);
    m.guided = med.k_guided();
    if (m.guided <= m.cutoff)
        throw domain_error("mode TE" + std::to_string(u) + std::to_string(v) + " is evanescent at " +
                           std::to_string(med.frequency) + " Hz");
    m.beta = std::sqrt(m.guided * m.guided - m.cutoff * m.cutoff);
    return m;
}

// q = 1 -> TE10, q = 2 -> TE01.
inline ModeSpec mode_spec(int q, const WaveguideSpec &wg, const MediumConstants &med)
{
    if (q == 1)
        return mode_spec(1, 0, wg, med);
    if (q == 2)
        return mode_spec(0, 1, wg, med);
    throw std::invalid_argument("mode index q must be 1 or 2");
}

// Transverse pattern without attenuation and guided phase (excitation s = 1).
inline CVec3 modal_pattern(const ModeSpec &mode, const WaveguideSpec &wg, const MediumConstants &med,
                           double dy, double dz)
{
    const double ty = mode.u * pi / wg.a * (dy + wg.a / 2.0);
    const double tz = mode.v * pi / wg.b * (dz + wg.b / 2.0);
    const cdouble pre = cdouble(0.0, med.omega * med.mu * pi / (mode.cutoff * mode.cutoff));
    const double ej = (double(mode.v) / wg.b) * std::cos(ty) * std::sin(tz);
    const double ek = (double(mode.u) / wg.a) * std::sin(ty) * std::cos(tz);
    return CVec3(0.0, pre * ej, pre * ek);
}

inline CVec3 modal_field(const ModeSpec &mode, const WaveguideSpec &wg, const MediumConstants &med,
                         const Vec3 &point, cdouble s)
{
    const double x = point.x() - wg.feed_point.x();
    const double dy = point.y() - wg.feed_point.y();
    const double dz = point.z() - wg.feed_point.z();
    const double eps = 1e-12;
    if (std::abs(dy) > wg.a / 2.0 + eps || std::abs(dz) > wg.b / 2.0 + eps)
        throw domain_error("modal_field: point outside the waveguide cross section");
    if (x < -eps || x > wg.length + eps)
        throw domain_error("modal_field: point outside the waveguide length");
    const cdouble prop = std::sqrt(std::exp(-wg.alpha_w * x)) * std::exp(cdouble(0.0, -mode.beta * x));
    return modal_pattern(mode, wg, med, dy, dz) * (s * prop);
}

// |calligraphic E| at the cross-section center.
inline double modal_pattern_norm_center(const ModeSpec &mode, const WaveguideSpec &wg, const MediumConstants &med)
{
    return modal_pattern(mode, wg, med, 0.0, 0.0).norm();
}

inline double coupling_length(int n, int N, double kappa)
{
    if (n < 1 || n > N)
        throw std::invalid_argument("coupling_length: n must be in [1, N]");
    if (!(kappa > 0.0))
        throw std::invalid_argument("coupling_length: kappa must be positive");
    return std::asin(std::sqrt(1.0 / double(N + 1 - n))) / kappa;
}

// Fraction of the input power extracted by PA n under the cascade, lossless guide.
inline double coupled_power_fraction(int n, int N, double kappa)
{
    double residual = 1.0;
    for (int i = 1; i < n; ++i) {
        const double s = std::sin(kappa * coupling_length(i, N, kappa));
        residual *= 1.0 - s * s;
    }
    const double s = std::sin(kappa * coupling_length(n, N, kappa));
    return residual * s * s;
}

inline cdouble h_wg_to_pa(const ModeSpec &mode, double alpha_w, int N, double x)
{
    return std::sqrt(std::exp(-alpha_w * x) / double(N)) * std::exp(cdouble(0.0, -mode.beta * x));
}

inline cdouble h_wg_to_pa(const ModeSpec &mode, const WaveguideSpec &wg, double x_pa)
{
    return h_wg_to_pa(mode, wg.alpha_w, wg.num_pas, x_pa - wg.feed_point.x());
}

// pa_x measured from each feed. Row (m, n, q) -> m*N*Q + n*Q + q (zero based), column (m, q) -> m*Q + q.
inline Eigen::MatrixXcd assemble_H_wp(const std::vector<WaveguideSpec> &wgs, const std::vector<std::vector<double>> &pa_x,
                                      const std::vector<ModeSpec> &modes)
{
    const int M = int(wgs.size());
    const int Q = int(modes.size());
    const int N = M > 0 ? int(pa_x[0].size()) : 0;
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(Q * M * N, Q * M);
    for (int m = 0; m < M; ++m)
        for (int n = 0; n < N; ++n)
            for (int q = 0; q < Q; ++q)
                H(m * N * Q + n * Q + q, m * Q + q) = h_wg_to_pa(modes[q], wgs[m].alpha_w, wgs[m].num_pas, pa_x[m][n]);
    return H;
}

} // namespace mmpass
