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


#include "mmpass/polarization.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace mmpass;
using Catch::Matchers::WithinAbs;

namespace {

const MediumConstants med = make_medium(100e9, 2.0);

FieldSample field_with(cdouble et, cdouble ep)
{
    FieldSample f;
    f.e_theta = et;
    f.e_phi = ep;
    f.basis = spherical_basis(0.3, 0.2, {});
    return f;
}

PortSpec random_port(std::mt19937_64 &rng, int q)
{
    std::uniform_real_distribution<double> ux(0.5, 9.5), ua(-0.6, 0.6);
    PortSpec p;
    p.wg.feed_point = Vec3(0, 3, 3);
    p.mode = mode_spec(q, p.wg, med);
    p.x = ux(rng);
    p.center = p.wg.feed_point + Vec3(p.x, 0, 0);
    p.orientation = {ua(rng), ua(rng)};
    return p;
}

} // namespace

TEST_CASE("incident Jones vector", "[polarization]")
{
    auto j = incident_jones(field_with(2.0, 0.0));
    CHECK_THAT(std::abs(j.c_theta - 1.0), WithinAbs(0.0, 1e-15));
    CHECK(std::abs(j.c_phi) == 0.0);
    j = incident_jones(field_with(1.0, 1.0));
    CHECK_THAT(j.c_theta.real(), WithinAbs(1.0 / std::sqrt(2.0), 1e-15));
    CHECK_THAT(j.c_phi.real(), WithinAbs(-1.0 / std::sqrt(2.0), 1e-15));
    CHECK_THROWS_AS(incident_jones(field_with(0.0, 0.0)), domain_error);

    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    for (int i = 0; i < 1000; ++i) {
        j = incident_jones(field_with({n(rng), n(rng)}, {n(rng), n(rng)}));
        CHECK_THAT(j.norm(), WithinAbs(1.0, 1e-14));
    }
}

TEST_CASE("matching efficiency", "[polarization]")
{
    const JonesVector a{0.6, 0.8};
    CHECK_THAT(matching_efficiency(a, a), WithinAbs(1.0, 1e-15));
    CHECK_THAT(matching_efficiency(a, JonesVector{-0.8, 0.6}), WithinAbs(0.0, 1e-15));
    CHECK_THAT(matching_efficiency(JonesVector{1.0, 0.0}, JonesVector{std::cos(pi / 6.0), std::sin(pi / 6.0)}),
               WithinAbs(std::cos(pi / 6.0), 1e-15));

    std::mt19937_64 rng(2);
    std::normal_distribution<double> n;
    for (int i = 0; i < 1000; ++i) {
        const auto r = normalized({{n(rng), n(rng)}, {n(rng), n(rng)}});
        const auto c = normalized({{n(rng), n(rng)}, {n(rng), n(rng)}});
        const double e = matching_efficiency(r, c);
        CHECK(e >= 0.0);
        CHECK(e <= 1.0 + 1e-15);
    }
}

TEST_CASE("optimal receive polarization", "[polarization]")
{
    const auto te10 = mode_spec(1, WaveguideSpec{}, med);
    for (double phi : {0.0, 0.7, 2.5}) {
        const auto j = optimal_rx_polarization(1, 0.0, phi, te10.beta, med.k_free());
        CHECK_THAT(j.c_theta.real(), WithinAbs(std::cos(phi), 1e-14));
        CHECK_THAT(j.c_phi.real(), WithinAbs(std::sin(phi), 1e-14));
    }

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ux(0.0, 10.0), uy(0.0, 6.0);
    for (int i = 0; i < 100; ++i) {
        const int q = 1 + i % 2;
        const PortSpec p = random_port(rng, q);
        const FieldSample f = radiated_field(p, med, 1.0, Vec3(ux(rng), uy(rng), 0.0), 0.0);
        const JonesVector opt = port_to_user_basis(optimal_rx_polarization(q, f.theta, f.phi, p.mode.beta, med.k_free()));
        const JonesVector inc = incident_jones(f);
        const double best = matching_efficiency(opt, inc);
        CHECK_THAT(best, WithinAbs(1.0, 1e-9));
        // perturbations lose
        const double a0 = std::atan2(opt.c_phi.real(), opt.c_theta.real());
        for (int k = 1; k < 3600; ++k) {
            const double a = a0 + 2.0 * pi * k / 3600.0;
            if (k == 1800)
                continue; // antipodal codeword, same antenna
            CHECK(matching_efficiency(JonesVector{std::cos(a), std::sin(a)}, inc) < best);
        }
        // the physical antenna sees the same efficiency
        CHECK_THAT(matching_efficiency(rx_direction(opt, f.basis), f), WithinAbs(1.0, 1e-9));
    }
}

TEST_CASE("discrete receive polarization", "[polarization]")
{
    const int S = 18;
    const JonesVector hit{std::cos(2.0 * pi * 3 / S), std::sin(2.0 * pi * 3 / S)};
    CHECK_THAT(matching_efficiency(discrete_rx_polarization(hit, S), hit), WithinAbs(1.0, 1e-15));
    const double mid = 2.0 * pi * 3.5 / S;
    const JonesVector bis{std::cos(mid), std::sin(mid)};
    CHECK_THAT(matching_efficiency(discrete_rx_polarization(bis, S), bis), WithinAbs(std::cos(pi / S), 1e-12));

    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> ua(0.0, 2.0 * pi);
    for (int i = 0; i < 200; ++i) {
        const double g = ua(rng);
        const JonesVector lin{std::cos(g), std::sin(g)};
        CHECK(matching_efficiency(discrete_rx_polarization(lin, S), lin) >= std::cos(pi / S) - 1e-12);
        CHECK_THAT(matching_efficiency(discrete_rx_polarization(lin, 100000), lin), WithinAbs(1.0, 1e-6));
    }
    CHECK_THROWS_AS(discrete_rx_polarization(hit, 1), std::invalid_argument);
}

TEST_CASE("physical antenna efficiency is bounded", "[polarization]")
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> ux(0.0, 10.0), uy(0.0, 6.0), u(-1.0, 1.0);
    for (int i = 0; i < 300; ++i) {
        const PortSpec p = random_port(rng, 1 + i % 2);
        const FieldSample f = radiated_field(p, med, 1.0, Vec3(ux(rng), uy(rng), 0.0), 0.0);
        const Vec3 a(u(rng), u(rng), u(rng));
        const double e = matching_efficiency(Vec3(a.normalized()), f);
        CHECK(e >= 0.0);
        CHECK(e <= 1.0);
    }
}
