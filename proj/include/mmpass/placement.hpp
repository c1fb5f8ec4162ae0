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

#include "polarization.hpp"

#include <array>
#include <functional>
#include <vector>

namespace mmpass {

// Single waveguide link budget used by the placement rules.
struct LinkModel
{
    MediumConstants med;
    WaveguideSpec wg;
    double alpha_a = 0.0;    // Np/m
    double gain_scale = 1.0; // amplitude calibration, see bench config
};

inline Orientation optimal_orientation(const Vec3 &pa, const Vec3 &user)
{
    const Vec3 d = user - pa;
    if (d.norm() == 0.0)
        throw domain_error("optimal_orientation: user coincides with the PA");
    if (!(d.z() < 0.0))
        throw domain_error("optimal_orientation: user must be strictly below the PA");
    Orientation o;
    o.pitch = std::atan(d.x() / std::hypot(d.y(), d.z()));
    o.roll = std::atan(-d.y() / d.z());
    return o;
}

inline PortSpec make_port(const LinkModel &L, int q, double x, const Orientation &o)
{
    PortSpec p;
    p.wg = L.wg;
    p.mode = mode_spec(q, L.wg, L.med);
    p.x = x;
    p.center = L.wg.feed_point + Vec3(x, 0.0, 0.0);
    p.orientation = o;
    return p;
}

// End-to-end coefficient of port q (1 or 2) at x, pointed at the user, with a matched receiver.
inline cdouble matched_channel(const LinkModel &L, int q, double x, const Vec3 &user)
{
    const Vec3 c = L.wg.feed_point + Vec3(x, 0.0, 0.0);
    const PortSpec p = make_port(L, q, x, optimal_orientation(c, user));
    return L.gain_scale * h_pa_to_user(p, L.med, user, L.alpha_a) * h_wg_to_pa(p.mode, L.wg, c.x());
}

inline double matched_gain(const LinkModel &L, int q, double x, const Vec3 &user)
{
    return std::norm(matched_channel(L, q, x, user));
}

// User position in guide coordinates: (distance along the guide, transverse radius).
inline std::array<double, 2> guide_coords(const Vec3 &user, const WaveguideSpec &wg)
{
    const Vec3 d = user - wg.feed_point;
    return {d.x(), std::hypot(d.y(), d.z())};
}

struct PositionSolution
{
    double x_star = 0.0;
    double d_star = 0.0;
};

inline PositionSolution optimal_position(const Vec3 &user, const WaveguideSpec &wg, double alpha_w, double alpha_a)
{
    const auto [xu, rho] = guide_coords(user, wg);
    PositionSolution s;
    s.d_star = alpha_w * rho * rho / (2.0 + alpha_a * rho);
    const double hi = std::max(0.0, std::min(xu, wg.length));
    s.x_star = std::clamp(xu - s.d_star, 0.0, hi);
    return s;
}

// d ln|H|^2 / dx_pa for a matched, boresight-aligned port.
inline double gain_log_derivative(double x_pa, const Vec3 &user, const WaveguideSpec &wg, double alpha_w, double alpha_a)
{
    const auto [xu, rho] = guide_coords(user, wg);
    const double d = xu - x_pa;
    const double r2 = d * d + rho * rho;
    return -alpha_w + alpha_a * d / std::sqrt(r2) + 2.0 * d / r2;
}

struct PowerSplit
{
    double w1_sq = 0.5;
    double w2_sq = 0.5;
};

// g1, g2 are |h1|^2, |h2|^2.
inline PowerSplit two_user_power_split(double g1, double g2, double s1, double s2, double P)
{
    if (!(g1 > 0.0) || !(g2 > 0.0))
        throw domain_error("two_user_power_split: channel gains must be positive");
    double w1 = 0.5 + s2 / (2.0 * P * g2) - s1 / (2.0 * P * g1);
    w1 = std::clamp(w1, 0.0, 1.0);
    return {w1, 1.0 - w1};
}

// Two-user shared-PA sum rate without the 1/2 prefactor.
inline double pair_sum_rate(double g1, double g2, const PowerSplit &w, double s1, double s2, double P)
{
    return std::log2(1.0 + P * w.w1_sq * g1 / s1) + std::log2(1.0 + P * w.w2_sq * g2 / s2);
}

inline double golden_section_max(const std::function<double(double)> &f, double lo, double hi, double tol = 1e-9)
{
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

struct TwoUserSolution
{
    double x_star = 0.0;
    PowerSplit split;
    std::array<double, 2> x_single{0.0, 0.0}; // x_q^*
    std::array<Orientation, 2> orientation;
    std::array<JonesVector, 2> rx; // user-side basis of the serving port
    std::array<double, 2> gain{0.0, 0.0};
    double sum_rate = 0.0; // pair sum rate at x_star
    double taylor_x = 0.0; // closed-form x* before any fallback
    bool fallback = false;
};

struct TwoUserInputs
{
    Vec3 user1, user2;
    double P = 10.0;
    double sigma1 = 1e-3;
    double sigma2 = 1e-3;
    bool warn_close = true; // warn when the users are under 1 m apart
};

inline double pair_rate_at(const LinkModel &L, const TwoUserInputs &in, double x, PowerSplit *split = nullptr)
{
    const double g1 = matched_gain(L, 1, x, in.user1);
    const double g2 = matched_gain(L, 2, x, in.user2);
    const PowerSplit w = two_user_power_split(g1, g2, in.sigma1, in.sigma2, in.P);
    if (split)
        *split = w;
    return pair_sum_rate(g1, g2, w, in.sigma1, in.sigma2, in.P);
}

// user1 is served by TE10 (q = 1), user2 by TE01 (q = 2).
inline TwoUserSolution two_user_shared_position(const LinkModel &L, const TwoUserInputs &in)
{
    const double sep = (in.user1 - in.user2).norm();
    if (sep == 0.0)
        throw domain_error("two_user_shared_position: users coincide");
    if (sep < 1.0 && in.warn_close)
        warn("two_user_shared_position: users are " + std::to_string(sep) + " m apart, below the 1 m separation guideline");

    TwoUserSolution s;
    const std::array<Vec3, 2> u{in.user1, in.user2};
    const std::array<double, 2> sig{in.sigma1, in.sigma2};
    for (int q = 0; q < 2; ++q)
        s.x_single[q] = optimal_position(u[q], L.wg, L.wg.alpha_w, L.alpha_a).x_star;

    std::array<double, 2> R1{}, R2{};
    for (int q = 0; q < 2; ++q) {
        const int qq = 1 - q;
        const double xq = s.x_single[q];
        const double gq = matched_gain(L, q + 1, xq, u[q]);
        const double gqq = matched_gain(L, qq + 1, xq, u[qq]);
        PowerSplit w = q == 0 ? two_user_power_split(gq, gqq, sig[0], sig[1], in.P)
                              : two_user_power_split(gqq, gq, sig[0], sig[1], in.P);
        const double wq = q == 0 ? w.w1_sq : w.w2_sq;
        const double dl = gain_log_derivative(xq, u[qq], L.wg, L.wg.alpha_w, L.alpha_a);
        R1[q] = -sig[qq] / (2.0 * std::log(2.0)) * (dl / gqq) / (sig[q] / gq + in.P * wq);
        R2[q] = -std::log(2.0) * R1[q] * R1[q] - R1[q] * dl;
    }
    const double lo = std::min(s.x_single[0], s.x_single[1]);
    const double hi = std::max(s.x_single[0], s.x_single[1]);
    const double curv = R2[0] + R2[1];
    double x = lo;
    if (hi - lo > 0.0 && curv != 0.0)
        x = (R2[0] * s.x_single[0] + R2[1] * s.x_single[1] - (R1[0] + R1[1])) / curv;
    x = std::clamp(x, lo, hi);
    s.taylor_x = x;

    const auto f = [&](double xx) { return pair_rate_at(L, in, xx); };
    const double r_taylor = f(x);
    if (hi > lo && (!(curv < 0.0) || (r_taylor < f(lo) && r_taylor < f(hi)))) {
        s.fallback = true;
        x = golden_section_max(f, lo, hi);
    }
    s.x_star = x;
    s.sum_rate = pair_rate_at(L, in, x, &s.split);
    const Vec3 c = L.wg.feed_point + Vec3(x, 0.0, 0.0);
    for (int q = 0; q < 2; ++q) {
        s.orientation[q] = optimal_orientation(c, u[q]);
        s.gain[q] = matched_gain(L, q + 1, x, u[q]);
        const PortSpec p = make_port(L, q + 1, x, s.orientation[q]);
        const PortView v = port_view(p.center, p.orientation, u[q]);
        s.rx[q] = port_to_user_basis(optimal_rx_polarization(q + 1, v.sph.theta, v.sph.phi, p.mode.beta, L.med.k_free()));
    }
    return s;
}

// Per-x profile for the shared PA: multi-mode pair rate and single-mode TDMA.
struct ProfilePoint
{
    double x = 0.0;
    double mm = 0.0;
    double sm_tdma = 0.0;
};

// TDMA: each user alone on TE10 with full power for half the time, same log convention as mm.
inline std::vector<ProfilePoint> sum_rate_profile(const LinkModel &L, const TwoUserInputs &in, const std::vector<double> &xs)
{
    std::vector<ProfilePoint> out;
    out.reserve(xs.size());
    for (double x : xs) {
        if (x < 0.0 || x > L.wg.length)
            throw std::invalid_argument("sum_rate_profile: grid point outside [0, D_x]");
        ProfilePoint p;
        p.x = x;
        p.mm = pair_rate_at(L, in, x);
        const double r1 = std::log2(1.0 + in.P * matched_gain(L, 1, x, in.user1) / in.sigma1);
        const double r2 = std::log2(1.0 + in.P * matched_gain(L, 1, x, in.user2) / in.sigma2);
        p.sm_tdma = 0.5 * (r1 + r2);
        out.push_back(p);
    }
    return out;
}

} // namespace mmpass
