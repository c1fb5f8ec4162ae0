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

#include "radiation.hpp"

namespace mmpass {

// Components along (vartheta_k, varphi_k) of the user-side spherical basis, where
// vartheta_k = vartheta and varphi_k = -varphi of the radiating port's ray basis.
struct JonesVector
{
    cdouble c_theta = 1.0;
    cdouble c_phi = 0.0;

    double norm() const { return std::sqrt(std::norm(c_theta) + std::norm(c_phi)); }
};

inline JonesVector normalized(const JonesVector &j)
{
    const double n = j.norm();
    if (!(n > 0.0))
        throw domain_error("cannot normalize a zero Jones vector");
    return {j.c_theta / n, j.c_phi / n};
}

inline JonesVector incident_jones(const FieldSample &f)
{
    const double n = f.norm();
    if (!(n > 0.0))
        throw domain_error("incident_jones: zero field");
    return {f.e_theta / n, -f.e_phi / n};
}

// |n_r^T n_i|, transpose product without conjugation.
inline double matching_efficiency(const JonesVector &rx, const JonesVector &inc)
{
    return std::abs(rx.c_theta * inc.c_theta + rx.c_phi * inc.c_phi);
}

// Components along the port-side (vartheta, varphi) basis.
inline JonesVector optimal_rx_polarization(int q, double theta, double phi, double beta, double k_free)
{
    const PolarizationVector p = polarization_vector(q, theta, phi, beta, k_free);
    return normalized({p.theta_component, p.phi_component});
}

// Port-side (vartheta, varphi) components to the user-side basis.
inline JonesVector port_to_user_basis(const JonesVector &j) { return {j.c_theta, -j.c_phi}; }

inline JonesVector discrete_rx_polarization(const JonesVector &incident, int codebook_size)
{
    if (codebook_size < 2)
        throw std::invalid_argument("discrete_rx_polarization: codebook_size must be >= 2");
    JonesVector best;
    double best_eta = -1.0;
    for (int i = 0; i < codebook_size; ++i) {
        const double a = 2.0 * pi * i / codebook_size;
        const JonesVector c{std::cos(a), std::sin(a)};
        const double eta = matching_efficiency(c, incident);
        if (eta > best_eta + 1e-15) {
            best_eta = eta;
            best = c;
        }
    }
    return best;
}

// Physical linear antenna direction (GCS) of a real user-side Jones vector.
inline Vec3 rx_direction(const JonesVector &j, const SphericalBasis &b)
{
    return j.c_theta.real() * b.vartheta - j.c_phi.real() * b.varphi;
}

// Matching efficiency of a physical linear antenna against a radiated field.
inline double matching_efficiency(const Vec3 &antenna, const FieldSample &f)
{
    const JonesVector rx{antenna.dot(f.basis.vartheta), -antenna.dot(f.basis.varphi)};
    return std::min(1.0, matching_efficiency(rx, incident_jones(f)));
}

} // namespace mmpass
