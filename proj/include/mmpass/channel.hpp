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

#include "scenario.hpp"

#include <cstdio>
#include <ostream>

namespace mmpass {

struct ChannelMatrix
{
    Eigen::MatrixXcd H_wp;   // QMN x QM
    Eigen::MatrixXcd H_pu;   // K x QMN
    Eigen::MatrixXd Lambda;  // K x QMN
    Eigen::MatrixXcd H;      // K x QM
};

struct RateReport
{
    std::vector<double> per_user_sinr;
    std::vector<double> per_user_rate;
    double sum_rate = 0.0;
};

inline Eigen::MatrixXcd assemble_H_wp(const Scenario &sc)
{
    std::vector<ModeSpec> modes;
    for (int q = 0; q < sc.Q; ++q)
        modes.push_back(sc.mode(q));
    return assemble_H_wp(sc.waveguides, sc.pa_x, modes);
}

// rx[k] is user k's linear antenna direction in GCS.
inline ChannelMatrix assemble(const Scenario &sc, const std::vector<Vec3> &rx)
{
    if (int(rx.size()) != sc.K())
        throw std::invalid_argument("assemble: one receive antenna per user required");
    const int M = sc.M(), N = sc.N, Q = sc.Q, K = sc.K();
    ChannelMatrix c;
    c.H_wp = assemble_H_wp(sc);
    c.H_pu = Eigen::MatrixXcd::Zero(K, Q * M * N);
    c.Lambda = Eigen::MatrixXd::Zero(K, Q * M * N);
    for (int m = 0; m < M; ++m)
        for (int n = 0; n < N; ++n)
            for (int q = 0; q < Q; ++q) {
                const PortSpec port = sc.port(m, n, q);
                const int col = port_index(m, n, q, N, Q);
                for (int k = 0; k < K; ++k) {
                    c.H_pu(k, col) = sc.gain_scale * h_pa_to_user(port, sc.med, sc.users[k], sc.alpha_a);
                    const FieldSample f = radiated_field(port, sc.med, 1.0, sc.users[k], sc.alpha_a);
                    c.Lambda(k, col) = f.norm() > 0.0 ? matching_efficiency(rx[k], f) : 0.0;
                }
            }
    c.H = (c.Lambda.cast<cdouble>().array() * c.H_pu.array()).matrix() * c.H_wp;
    return c;
}

inline double user_sinr(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &W, int k, double P, double sigma2)
{
    if (!(sigma2 > 0.0))
        throw domain_error("noise power must be positive");
    const Eigen::RowVectorXcd g = H.row(k) * W;
    double interf = 0.0;
    for (int i = 0; i < W.cols(); ++i)
        if (i != k)
            interf += std::norm(g(i));
    return P * std::norm(g(k)) / (P * interf + sigma2);
}

// 1/2 log2(1 + SINR).
inline double user_rate(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &W, int k, double P, double sigma2)
{
    return 0.5 * std::log2(1.0 + user_sinr(H, W, k, P, sigma2));
}

inline RateReport rate_report(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &W, double P, double sigma2)
{
    RateReport r;
    for (int k = 0; k < H.rows(); ++k) {
        const double s = user_sinr(H, W, k, P, sigma2);
        r.per_user_sinr.push_back(s);
        r.per_user_rate.push_back(0.5 * std::log2(1.0 + s));
        r.sum_rate += r.per_user_rate.back();
    }
    return r;
}

inline double sum_rate(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &W, double P, double sigma2)
{
    return rate_report(H, W, P, sigma2).sum_rate;
}

inline void write_matrix_csv(std::ostream &os, const Eigen::MatrixXcd &A)
{
    os << "row,col,re,im\n";
    char buf[128];
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g\n", i + 1, j + 1, A(i, j).real(), A(i, j).imag());
            os << buf;
        }
}

} // namespace mmpass
