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

#include <vector>

namespace mmpass {

// Full system description. Waveguide m hosts N PAs, each with Q co-located ports.
struct Scenario
{
    MediumConstants med;
    std::vector<WaveguideSpec> waveguides;
    int N = 1;
    int Q = 2;
    std::vector<std::vector<double>> pa_x;                            // [m][n], measured from the feed
    std::vector<std::vector<std::vector<Orientation>>> port_orient;   // [m][n][q]
    std::vector<Vec3> users;
    double alpha_a = 0.0; // Np/m
    double P = 10.0;      // W
    double sigma2 = 1e-3; // W
    double gain_scale = 1.0; // amplitude calibration applied to every PA-to-user gain

    int M() const { return int(waveguides.size()); }
    int K() const { return int(users.size()); }
    int num_pas() const { return M() * N; }

    ModeSpec mode(int q) const { return mode_spec(q + 1, waveguides.at(0), med); }

    Vec3 pa_center(int m, int n) const
    {
        const auto &wg = waveguides.at(m);
        return wg.feed_point + Vec3(pa_x.at(m).at(n), 0.0, 0.0);
    }

    // q is zero based.
    PortSpec port(int m, int n, int q) const
    {
        PortSpec p;
        p.wg = waveguides.at(m);
        p.mode = mode_spec(q + 1, p.wg, med);
        p.x = pa_x.at(m).at(n);
        p.center = pa_center(m, n);
        p.orientation = port_orient.at(m).at(n).at(q);
        return p;
    }

    void resize_pas()
    {
        pa_x.assign(M(), std::vector<double>(N, 0.0));
        port_orient.assign(M(), std::vector<std::vector<Orientation>>(N, std::vector<Orientation>(Q)));
    }
};

// Zero-based flat port index (m, n, q) -> m N Q + n Q + q.
inline int port_index(int m, int n, int q, int N, int Q) { return m * N * Q + n * Q + q; }

// One-based column index (m-1)NQ + (n-1)Q + q.
inline int column_index(int m, int n, int q, int N, int Q) { return (m - 1) * N * Q + (n - 1) * Q + q; }

} // namespace mmpass
