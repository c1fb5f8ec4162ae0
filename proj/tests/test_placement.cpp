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


#include "mmpass/placement.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace mmpass;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

LinkModel link(double alpha_w = 0.018421, double alpha_a = 0.011513, double y = 0.0)
{
    LinkModel L;
    L.med = make_medium(100e9, 2.0);
    L.wg.feed_point = Vec3(0.0, y, 3.0);
    L.wg.length = 10.0;
    L.wg.alpha_w = alpha_w;
    L.alpha_a = alpha_a;
    L.gain_scale = 447000.0;
    return L;
}

TwoUserInputs pair(double x1, double x2, double y = 0.0, double P = 10.0)
{
    TwoUserInputs in;
    in.user1 = Vec3(x1, y, 0.0);
    in.user2 = Vec3(x2, y, 0.0);
    in.P = P;
    in.sigma1 = in.sigma2 = dbw_to_watt(-26.0);
    return in;
}

} // namespace

TEST_CASE("optimal orientation", "[placement]")
{
    auto o = optimal_orientation(Vec3(5, 0, 3), Vec3(5, 0, 0));
    CHECK(o.pitch == 0.0);
    CHECK(o.roll == 0.0);
    o = optimal_orientation(Vec3(5, 0, 3), Vec3(5.5, 0, 0));
    CHECK_THAT(o.pitch, WithinAbs(std::atan(0.5 / 3.0), 1e-15));
    CHECK_THAT(o.pitch, WithinAbs(0.1651, 1e-4));
    CHECK_THAT(o.roll, WithinAbs(0.0, 1e-15));
    o = optimal_orientation(Vec3(0, 0, 3), Vec3(0, -3.0 * std::tan(0.3), 0));
    CHECK_THAT(o.roll, WithinAbs(-0.3, 1e-15));
    CHECK_THROWS_AS(optimal_orientation(Vec3(0, 0, 3), Vec3(1, 0, 4)), domain_error);
    CHECK_THROWS_AS(optimal_orientation(Vec3(0, 0, 3), Vec3(0, 0, 3)), domain_error);
}

TEST_CASE("closed-form orientation beats a local grid", "[placement]")
{
    const LinkModel L = link();
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> ux(0.0, 10.0), uy(-3.0, 3.0);
    const double step = 0.25 * pi / 180.0;
    for (int t = 0; t < 6; ++t) {
        const int q = 1 + t % 2;
        const Vec3 user(ux(rng), uy(rng), 0.0);
        PortSpec p = make_port(L, q, ux(rng), {});
        const Orientation o = optimal_orientation(p.center, user);
        p.orientation = o;
        const double best = std::norm(h_pa_to_user(p, L.med, user, L.alpha_a));
        for (int i = -20; i <= 20; ++i)
            for (int j = -20; j <= 20; ++j) {
                p.orientation = {o.pitch + i * step, o.roll + j * step};
                CHECK(std::norm(h_pa_to_user(p, L.med, user, L.alpha_a)) <= best * (1.0 + 1e-12));
            }
    }
}

TEST_CASE("optimal position", "[placement]")
{
    const LinkModel L = link();
    CHECK(optimal_position(Vec3(4, 0, 0), L.wg, 0.0, L.alpha_a).d_star == 0.0);
    const auto s = optimal_position(Vec3(5, 0, 0), L.wg, 0.018421, 0.011513);
    CHECK_THAT(s.d_star, WithinAbs(0.0815, 5e-5));
    CHECK_THAT(s.x_star, WithinAbs(5.0 - s.d_star, 1e-15));
    const auto near = optimal_position(Vec3(0.01, 0, 0), L.wg, 0.018421, 0.011513);
    CHECK(near.x_star >= 0.0);
    CHECK(near.x_star <= 0.01);
}

TEST_CASE("gain log-derivative", "[placement]")
{
    const LinkModel L = link();
    const Vec3 u(6.0, 1.0, 0.0);
    const double xs = optimal_position(u, L.wg, L.wg.alpha_w, L.alpha_a).x_star;
    // closed form is first order in d / rho: the exact stationary point lies within 1 mm
    CHECK(gain_log_derivative(xs - 1e-3, u, L.wg, L.wg.alpha_w, L.alpha_a) > 0.0);
    CHECK(gain_log_derivative(xs + 1e-3, u, L.wg, L.wg.alpha_w, L.alpha_a) < 0.0);
    CHECK_THAT(gain_log_derivative(6.0, u, L.wg, L.wg.alpha_w, L.alpha_a), WithinAbs(-L.wg.alpha_w, 1e-15));

    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> ux(0.1, 9.9), uy(-3.0, 3.0);
    for (int i = 0; i < 50; ++i) {
        const Vec3 user(ux(rng), uy(rng), 0.0);
        const double x = ux(rng), h = 1e-6;
        const double an = gain_log_derivative(x, user, L.wg, L.wg.alpha_w, L.alpha_a);
        const double fd = (std::log(matched_gain(L, 1, x + h, user)) - std::log(matched_gain(L, 1, x - h, user))) / (2 * h);
        CHECK(std::abs(an - fd) <= 1e-6 * std::max(std::abs(an), 1e-3));
    }
}

TEST_CASE("two-user power split", "[placement]")
{
    auto w = two_user_power_split(0.3, 0.3, 0.01, 0.01, 10.0);
    CHECK_THAT(w.w1_sq, WithinAbs(0.5, 1e-15));
    w = two_user_power_split(0.3, 1e12, 0.01, 0.01, 10.0);
    CHECK_THAT(w.w1_sq, WithinAbs(0.5 - 0.01 / (2.0 * 10.0 * 0.3), 1e-12));
    CHECK_THROWS_AS(two_user_power_split(0.0, 0.3, 0.01, 0.01, 10.0), domain_error);

    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> ug(1e-4, 1e-1);
    for (int t = 0; t < 20; ++t) {
        const double g1 = ug(rng), g2 = ug(rng), s = 0.0025, P = 10.0;
        const PowerSplit cf = two_user_power_split(g1, g2, s, s, P);
        double best = -1.0, bw = 0.0;
        for (int i = 0; i <= 10000; ++i) {
            const double a = i * 1e-4;
            const double r = pair_sum_rate(g1, g2, {a, 1.0 - a}, s, s, P);
            if (r > best) {
                best = r;
                bw = a;
            }
        }
        CHECK_THAT(cf.w1_sq, WithinAbs(bw, 1e-3));
        CHECK_THAT(cf.w1_sq + cf.w2_sq, WithinAbs(1.0, 1e-15));
    }
}

TEST_CASE("shared position against a grid", "[placement]")
{
    const LinkModel L = link(0.018421, 0.011513, 3.0);
    std::mt19937_64 rng(24);
    std::uniform_real_distribution<double> ux(0.0, 10.0), uy(0.0, 6.0);
    for (int t = 0; t < 10; ++t) {
        TwoUserInputs in = pair(0, 0);
        do {
            in.user1 = Vec3(ux(rng), uy(rng), 0.0);
            in.user2 = Vec3(ux(rng), uy(rng), 0.0);
        } while ((in.user1 - in.user2).norm() < 1.5);
        const TwoUserSolution s = two_user_shared_position(L, in);
        double bx = 0.0, br = -1.0;
        for (int i = 0; i <= 10000; ++i) {
            const double r = pair_rate_at(L, in, i * 1e-3);
            if (r > br) {
                br = r;
                bx = i * 1e-3;
            }
        }
        CHECK_THAT(s.x_star, WithinAbs(bx, 0.05));
        CHECK(s.sum_rate >= br * (1.0 - 5e-3));
        CHECK(s.x_star >= std::min(s.x_single[0], s.x_single[1]));
        CHECK(s.x_star <= std::max(s.x_single[0], s.x_single[1]));
        CHECK_THAT(s.split.w1_sq + s.split.w2_sq, WithinAbs(1.0, 1e-15));
    }
}

TEST_CASE("symmetric lossless pair tends to the midpoint at high SNR", "[placement]")
{
    const LinkModel L = link(0.0, 0.011513);
    const TwoUserSolution s = two_user_shared_position(L, pair(3.5, 6.5, 1.0, 1e6));
    CHECK_THAT(s.x_star, WithinAbs(5.0, 1e-6));
}

TEST_CASE("two-user input checks", "[placement]")
{
    const LinkModel L = link();
    CHECK_THROWS_AS(two_user_shared_position(L, pair(5.0, 5.0)), domain_error);
    int seen = 0;
    const WarningSink saved = warning_sink();
    warning_sink() = [&](const std::string &) { ++seen; };
    two_user_shared_position(L, pair(5.0, 5.5));
    TwoUserInputs quiet = pair(5.0, 5.5);
    quiet.warn_close = false;
    two_user_shared_position(L, quiet);
    warning_sink() = saved;
    CHECK(seen == 1);
}

TEST_CASE("sum-rate profiles", "[placement]")
{
    const LinkModel L = link();
    std::vector<double> xs;
    for (int i = 0; i <= 1000; ++i)
        xs.push_back(i * 0.01);
    double peak[2] = {0.0, 0.0};
    const std::pair<double, double> geo[2] = {{4.5, 5.5}, {3.0, 7.0}};
    for (int g = 0; g < 2; ++g) {
        const TwoUserInputs in = pair(geo[g].first, geo[g].second);
        const auto prof = sum_rate_profile(L, in, xs);
        for (const auto &p : prof) {
            CHECK(p.mm >= p.sm_tdma);
            peak[g] = std::max(peak[g], p.mm);
        }
        // unimodal between the single-user optima
        const double lo = optimal_position(in.user1, L.wg, L.wg.alpha_w, L.alpha_a).x_star;
        const double hi = optimal_position(in.user2, L.wg, L.wg.alpha_w, L.alpha_a).x_star;
        int changes = 0, last = 0;
        for (size_t i = 1; i < prof.size(); ++i) {
            if (prof[i - 1].x < lo || prof[i].x > hi)
                continue;
            const double d = prof[i].mm - prof[i - 1].mm;
            const int sgn = d > 0 ? 1 : d < 0 ? -1 : 0;
            if (sgn != 0 && last != 0 && sgn != last)
                ++changes;
            if (sgn != 0)
                last = sgn;
        }
        CHECK(changes <= 1);
    }
    CHECK(peak[0] > peak[1]);
    CHECK_THROWS_AS(sum_rate_profile(L, pair(4.5, 5.5), {11.0}), std::invalid_argument);
}
