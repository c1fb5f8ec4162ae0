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

#include "channel.hpp"
#include "placement.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <limits>
#include <numeric>
#include <string>

namespace mmpass {

// ---- Grouping ----

struct UserGrouping
{
    std::vector<std::vector<int>> groups; // zero-based user indices
    double cost = 0.0;                    // sum of pairwise squared xy distances
    int singleton = -1;                   // group index of the odd user, if any

    int J() const { return int(groups.size()); }
};

inline double pair_cost(const Vec3 &a, const Vec3 &b)
{
    const double dx = a.x() - b.x(), dy = a.y() - b.y();
    return dx * dx + dy * dy;
}

inline double grouping_cost(const std::vector<Vec3> &users, const std::vector<std::vector<int>> &groups)
{
    double c = 0.0;
    for (const auto &g : groups)
        for (size_t i = 0; i < g.size(); ++i)
            for (size_t j = i + 1; j < g.size(); ++j)
                c += pair_cost(users[g[i]], users[g[j]]);
    return c;
}

namespace detail {

// Exhaustive minimum-cost perfect pairing; with an odd count one element stays single.
inline void best_pairing(const std::vector<Vec3> &users, std::vector<int> rest, std::vector<std::vector<int>> &cur,
                         double cost, double &best_cost, std::vector<std::vector<int>> &best)
{
    if (cost >= best_cost)
        return;
    if (rest.empty()) {
        best_cost = cost;
        best = cur;
        return;
    }
    const int a = rest.front();
    std::vector<int> tail(rest.begin() + 1, rest.end());
    if (rest.size() % 2 == 1) {
        cur.push_back({a});
        best_pairing(users, tail, cur, cost, best_cost, best);
        cur.pop_back();
    }
    for (size_t i = 0; i < tail.size(); ++i) {
        std::vector<int> r2 = tail;
        const int b = r2[i];
        r2.erase(r2.begin() + long(i));
        if (rest.size() % 2 == 1 && r2.size() % 2 == 0)
            continue; // the single slot must be used exactly once
        cur.push_back({a, b});
        best_pairing(users, r2, cur, cost + pair_cost(users[a], users[b]), best_cost, best);
        cur.pop_back();
    }
}

} // namespace detail

inline std::vector<std::vector<int>> exhaustive_pairing(const std::vector<Vec3> &users, const std::vector<int> &idx)
{
    std::vector<std::vector<int>> cur, best;
    double best_cost = std::numeric_limits<double>::infinity();
    detail::best_pairing(users, idx, cur, 0.0, best_cost, best);
    return best;
}

inline UserGrouping group_users(const std::vector<Vec3> &users, const std::vector<double> &waveguide_ys, int Q = 2)
{
    const int K = int(users.size());
    if (Q != 1 && Q != 2)
        throw std::invalid_argument("group_users: Q must be 1 or 2");
    if (waveguide_ys.empty())
        throw std::invalid_argument("group_users: no waveguides");
    UserGrouping g;
    if (Q == 1) {
        if (K < 1)
            throw std::invalid_argument("group_users: need at least one user");
        std::vector<std::vector<int>> clusters(waveguide_ys.size());
        for (int k = 0; k < K; ++k) {
            size_t best = 0;
            for (size_t m = 1; m < waveguide_ys.size(); ++m)
                if (std::abs(users[k].y() - waveguide_ys[m]) < std::abs(users[k].y() - waveguide_ys[best]))
                    best = m;
            clusters[best].push_back(k);
        }
        for (auto &c : clusters) {
            std::stable_sort(c.begin(), c.end(), [&](int a, int b) { return users[a].x() < users[b].x(); });
            for (int k : c)
                g.groups.push_back({k});
        }
        return g;
    }
    if (K < 2)
        throw std::invalid_argument("group_users: need K >= 2");

    std::vector<std::vector<int>> clusters(waveguide_ys.size());
    for (int k = 0; k < K; ++k) {
        size_t best = 0;
        for (size_t m = 1; m < waveguide_ys.size(); ++m)
            if (std::abs(users[k].y() - waveguide_ys[m]) < std::abs(users[k].y() - waveguide_ys[best]))
                best = m;
        clusters[best].push_back(k);
    }
    std::vector<int> residual;
    for (auto &c : clusters) {
        std::stable_sort(c.begin(), c.end(), [&](int a, int b) { return users[a].x() < users[b].x(); });
        size_t i = 0;
        for (; i + 1 < c.size(); i += 2)
            g.groups.push_back({c[i], c[i + 1]});
        if (i < c.size())
            residual.push_back(c[i]);
    }
    if (residual.size() > 12)
        warn("group_users: residual set of " + std::to_string(residual.size()) + " users, exhaustive pairing is slow");
    for (auto &p : exhaustive_pairing(users, residual))
        g.groups.push_back(p);
    for (int j = 0; j < g.J(); ++j)
        if (g.groups[j].size() == 1)
            g.singleton = j;
    g.cost = grouping_cost(users, g.groups);
    return g;
}

// ---- Per-group placement with interference ----

// One PA serving one group. users[q] is served by mode q (TE10, TE01); -1 when unused.
struct GroupPlan
{
    int pa = -1;
    int group = -1;
    std::array<int, 2> users{-1, -1};
    double x = 0.0; // from the feed
    PowerSplit split{1.0, 0.0};
    double rate = 0.0; // pair sum rate, no 1/2 prefactor
    std::array<Orientation, 2> orientation;
};

inline int pa_waveguide(const Scenario &sc, int pa) { return pa / sc.N; }

inline LinkModel link_model(const Scenario &sc, int m)
{
    LinkModel L;
    L.med = sc.med;
    L.wg = sc.waveguides.at(m);
    L.alpha_a = sc.alpha_a;
    L.gain_scale = sc.gain_scale;
    return L;
}

// Received power gain |h|^2 at user from port q of a planned PA (receiver assumed matched).
inline double plan_cross_gain(const Scenario &sc, const GroupPlan &p, int q, const Vec3 &user)
{
    const LinkModel L = link_model(sc, pa_waveguide(sc, p.pa));
    const PortSpec port = make_port(L, q + 1, p.x, p.orientation[q]);
    return std::norm(L.gain_scale * h_pa_to_user(port, L.med, user, L.alpha_a) * h_wg_to_pa(port.mode, L.wg, port.center.x()));
}

// Interference power at user k from all plans except the one at index skip.
inline double plan_interference(const Scenario &sc, const std::vector<GroupPlan> &plans, int k, int skip_pa)
{
    double n = 0.0;
    for (const auto &p : plans) {
        if (p.pa == skip_pa)
            continue;
        const double w[2] = {p.split.w1_sq, p.split.w2_sq};
        for (int q = 0; q < 2; ++q)
            if (p.users[q] >= 0 && w[q] > 0.0)
                n += sc.P * w[q] * plan_cross_gain(sc, p, q, sc.users[k]);
    }
    return n;
}

// Best placement of PA pa for a group under the interference of the other plans.
inline GroupPlan plan_group(const Scenario &sc, int pa, int group, const std::vector<int> &members,
                            const std::vector<GroupPlan> &others)
{
    const int m = pa_waveguide(sc, pa);
    const LinkModel L = link_model(sc, m);
    const Vec3 feed = L.wg.feed_point;
    GroupPlan g;
    g.pa = pa;
    g.group = group;
    if (members.size() == 1 || sc.Q == 1) {
        if (members.size() != 1)
            throw std::invalid_argument("plan_group: single-mode groups hold one user");
        const int k = members[0];
        const Vec3 &u = sc.users[k];
        const double s = sc.sigma2 + plan_interference(sc, others, k, pa);
        g.users = {k, -1};
        g.x = optimal_position(u, L.wg, L.wg.alpha_w, L.alpha_a).x_star;
        g.split = {1.0, 0.0};
        g.rate = std::log2(1.0 + sc.P * matched_gain(L, 1, g.x, u) / s);
        const Vec3 c = feed + Vec3(g.x, 0.0, 0.0);
        g.orientation = {optimal_orientation(c, u), optimal_orientation(c, u)};
        return g;
    }
    if (members.size() != 2)
        throw std::invalid_argument("plan_group: groups hold one or two users");
    bool first = true;
    for (int order = 0; order < 2; ++order) {
        const int k1 = members[order], k2 = members[1 - order];
        TwoUserInputs in;
        in.user1 = sc.users[k1];
        in.user2 = sc.users[k2];
        in.P = sc.P;
        in.sigma1 = sc.sigma2 + plan_interference(sc, others, k1, pa);
        in.sigma2 = sc.sigma2 + plan_interference(sc, others, k2, pa);
        in.warn_close = false; // grouping already prefers distant pairs
        const TwoUserSolution s = two_user_shared_position(L, in);
        if (first || s.sum_rate > g.rate) {
            g.users = {k1, k2};
            g.x = s.x_star;
            g.split = s.split;
            g.rate = s.sum_rate;
            g.orientation = s.orientation;
            first = false;
        }
    }
    return g;
}

// Entry (i, j): rate of PA i serving group j given the currently active plans.
inline Eigen::MatrixXd pairwise_rate_table(const Scenario &sc, const UserGrouping &grouping,
                                           const std::vector<GroupPlan> &active = {})
{
    const int I = sc.num_pas(), J = grouping.J();
    Eigen::MatrixXd R(I, J);
    for (int i = 0; i < I; ++i)
        for (int j = 0; j < J; ++j) {
            std::vector<GroupPlan> others;
            for (const auto &p : active)
                if (p.pa != i)
                    others.push_back(p);
            R(i, j) = plan_group(sc, i, j, grouping.groups[j], others).rate;
        }
    return R;
}

// ---- Assignment ----

// Maximum-weight assignment. Returns row -> column, -1 for rows matched to dummy columns.
inline std::vector<int> hungarian_assign(const Eigen::MatrixXd &table)
{
    const int R = int(table.rows()), C = int(table.cols());
    if (!table.allFinite())
        throw std::invalid_argument("hungarian_assign: table must be finite");
    const int n = std::max(R, C);
    std::vector<int> out(R, -1);
    if (n == 0)
        return out;
    // min-cost on the padded square matrix, 1-based potentials
    const double big = table.size() ? table.maxCoeff() : 0.0;
    auto cost = [&](int i, int j) { return (i < R && j < C) ? big - table(i, j) : big; };
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j)
                if (!used[j]) {
                    const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if (cur < minv[j]) {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if (minv[j] < delta) {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            for (int j = 0; j <= n; ++j)
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    for (int j = 1; j <= n; ++j)
        if (p[j] - 1 < R && j - 1 < C)
            out[p[j] - 1] = j - 1;
    return out;
}

inline Eigen::MatrixXi assignment_matrix(const std::vector<GroupPlan> &plans, int num_pas, int J)
{
    Eigen::MatrixXi X = Eigen::MatrixXi::Zero(num_pas, J);
    for (const auto &p : plans)
        X(p.pa, p.group) = 1;
    return X;
}

// Re-plan every active PA against the interference of the others (positions of others held fixed).
inline std::vector<GroupPlan> evaluate_plans(const Scenario &sc, const UserGrouping &grouping,
                                             const std::vector<GroupPlan> &plans)
{
    std::vector<GroupPlan> out;
    out.reserve(plans.size());
    for (size_t a = 0; a < plans.size(); ++a) {
        std::vector<GroupPlan> others;
        for (size_t b = 0; b < plans.size(); ++b)
            if (b != a)
                others.push_back(plans[b]);
        out.push_back(plan_group(sc, plans[a].pa, plans[a].group, grouping.groups[plans[a].group], others));
    }
    return out;
}

inline double total_rate(const std::vector<GroupPlan> &plans)
{
    double t = 0.0;
    for (const auto &p : plans)
        t += p.rate;
    return t;
}

// Marginal gain of adding (pa, group) to plans: exact objective increment.
inline double marginal_gain(const Scenario &sc, const UserGrouping &grouping, const std::vector<GroupPlan> &plans,
                            int pa, int group, std::vector<GroupPlan> *tentative = nullptr)
{
    std::vector<GroupPlan> t = plans;
    t.push_back(plan_group(sc, pa, group, grouping.groups[group], plans));
    t = evaluate_plans(sc, grouping, t);
    const double d = total_rate(t) - total_rate(evaluate_plans(sc, grouping, plans));
    if (tentative)
        *tentative = std::move(t);
    return d;
}

inline std::vector<GroupPlan> greedy_fill(const Scenario &sc, const UserGrouping &grouping, std::vector<GroupPlan> plans,
                                          std::vector<int> leftover)
{
    std::sort(leftover.begin(), leftover.end());
    while (!leftover.empty()) {
        double best = -std::numeric_limits<double>::infinity();
        size_t bi = 0;
        int bj = 0;
        std::vector<GroupPlan> best_plans;
        for (size_t li = 0; li < leftover.size(); ++li)
            for (int j = 0; j < grouping.J(); ++j) {
                std::vector<GroupPlan> t;
                const double d = marginal_gain(sc, grouping, plans, leftover[li], j, &t);
                if (d > best) {
                    best = d;
                    bi = li;
                    bj = j;
                    best_plans = std::move(t);
                }
            }
        (void)bj;
        plans = std::move(best_plans);
        leftover.erase(leftover.begin() + long(bi));
    }
    return plans;
}

// Grouping -> Hungarian -> greedy fill. Requires MN >= J.
inline std::vector<GroupPlan> assign_pas(const Scenario &sc, const UserGrouping &grouping)
{
    const int I = sc.num_pas(), J = grouping.J();
    if (I < J)
        throw std::invalid_argument("assign_pas: fewer PAs than groups, split into time slots first");
    const Eigen::MatrixXd R = pairwise_rate_table(sc, grouping);
    const std::vector<int> a = hungarian_assign(R);
    std::vector<GroupPlan> plans;
    std::vector<int> leftover;
    for (int i = 0; i < I; ++i) {
        if (a[i] >= 0)
            plans.push_back(plan_group(sc, i, a[i], grouping.groups[a[i]], {}));
        else
            leftover.push_back(i);
    }
    plans = evaluate_plans(sc, grouping, plans);
    return greedy_fill(sc, grouping, plans, leftover);
}

// ---- FP precoding ----

// Warm start of G. best runs both and keeps the higher final sum rate.
enum class FpInit { matched_filter, rzf, best };

struct FpOptions
{
    FpInit init = FpInit::matched_filter;
    double tol = 1e-6;
    int max_iter = 200;
    double trace_tol = 1e-10;
};

struct PrecoderFactorization
{
    Eigen::MatrixXcd G;  // QM x MN
    Eigen::MatrixXcd Wp; // MN x K
    Eigen::MatrixXcd W;  // QM x K
    Eigen::VectorXd c1;
    Eigen::VectorXcd c2;
    double chi = 0.0;
    std::vector<double> trace;     // sum rate at start and after every iteration
    std::vector<double> objective; // FP objective after each auxiliary update, nats
    std::vector<double> tightness; // |L - sum ln(1 + SINR)| after each auxiliary update
    int iterations = 0;
    bool converged = false;
};

inline double power_trace(const Eigen::MatrixXcd &G, const Eigen::MatrixXcd &Wp)
{
    const Eigen::MatrixXcd W = G * Wp;
    return (W * W.adjoint()).trace().real();
}

// FP objective in nats for given G and auxiliaries.
inline double fp_objective(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &G, const Eigen::MatrixXcd &Wp,
                           const Eigen::VectorXd &c1, const Eigen::VectorXcd &c2, double P, double sigma2)
{
    const Eigen::MatrixXcd T = H * G * Wp;
    const double sp = std::sqrt(P);
    double L = 0.0;
    for (int k = 0; k < T.rows(); ++k) {
        const double tot = sigma2 + P * T.row(k).squaredNorm();
        L += (1.0 + c1(k)) * (2.0 * std::real(c2(k) * sp * T(k, k)) - std::norm(c2(k)) * tot);
        L += std::log1p(c1(k)) - c1(k);
    }
    return L;
}

// c2 is taken as the conjugate of the displayed ratio so that c2 * h G w is real at the optimum.
inline void fp_aux_update(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &G, const Eigen::MatrixXcd &Wp, double P,
                          double sigma2, Eigen::VectorXd &c1, Eigen::VectorXcd &c2)
{
    const Eigen::MatrixXcd T = H * G * Wp;
    const int K = int(T.rows());
    c1.resize(K);
    c2.resize(K);
    for (int k = 0; k < K; ++k) {
        const double tot = sigma2 + P * T.row(k).squaredNorm();
        const double sig = P * std::norm(T(k, k));
        c1(k) = sig / (tot - sig);
        c2(k) = std::sqrt(P) * std::conj(T(k, k)) / tot;
    }
}

namespace detail {

struct KktSystem
{
    Eigen::VectorXd d;   // eigenvalues of sum mu_k h_k^H h_k
    Eigen::MatrixXcd U;  // eigenvectors
    Eigen::MatrixXcd M1; // U^H C B^+
    Eigen::VectorXd e;   // diag(M1 B M1^H)

    double trace(double chi) const
    {
        double t = 0.0;
        for (int i = 0; i < d.size(); ++i) {
            const double den = d(i) + chi;
            if (den <= 0.0) {
                if (e(i) > 1e-300)
                    return std::numeric_limits<double>::infinity();
                continue;
            }
            t += e(i) / (den * den);
        }
        return t;
    }

    Eigen::MatrixXcd G(double chi) const
    {
        Eigen::VectorXcd s(d.size());
        for (int i = 0; i < d.size(); ++i) {
            const double den = d(i) + chi;
            s(i) = den > 0.0 ? 1.0 / den : 0.0;
        }
        return U * s.asDiagonal() * M1;
    }
};

inline KktSystem kkt_system(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &Wp, const Eigen::VectorXd &c1,
                            const Eigen::VectorXcd &c2, double P)
{
    const int K = int(H.rows()), QM = int(H.cols());
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(QM, QM);
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(QM, Wp.rows());
    for (int k = 0; k < K; ++k) {
        const double mu = P * (1.0 + c1(k)) * std::norm(c2(k));
        A += mu * H.row(k).adjoint() * H.row(k);
        C += std::sqrt(P) * (1.0 + c1(k)) * std::conj(c2(k)) * H.row(k).adjoint() * Wp.col(k).adjoint();
    }
    const Eigen::MatrixXcd B = Wp * Wp.adjoint();
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(B);
    const Eigen::MatrixXcd Bp = cod.pseudoInverse();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A);
    KktSystem s;
    s.U = es.eigenvectors();
    s.d = es.eigenvalues();
    const double dmax = s.d.cwiseAbs().maxCoeff();
    for (int i = 0; i < s.d.size(); ++i)
        if (s.d(i) < 1e-12 * dmax)
            s.d(i) = 0.0;
    s.M1 = s.U.adjoint() * C * Bp;
    s.e = (s.M1 * B * s.M1.adjoint()).diagonal().real();
    return s;
}

} // namespace detail

inline double fp_trace_at(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &Wp, const Eigen::VectorXd &c1,
                          const Eigen::VectorXcd &c2, double P, double chi)
{
    return detail::kkt_system(H, Wp, c1, c2, P).trace(chi);
}

// G from the KKT condition; chi = 0 when the unconstrained optimum is feasible, else bisection.
inline Eigen::MatrixXcd fp_solve_G(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &Wp, const Eigen::VectorXd &c1,
                                   const Eigen::VectorXcd &c2, double P, double trace_tol, double *chi_out = nullptr)
{
    const detail::KktSystem s = detail::kkt_system(H, Wp, c1, c2, P);
    double chi = 0.0;
    if (s.trace(0.0) > 1.0) {
        double lo = 0.0, hi = 1.0;
        int doublings = 0;
        while (s.trace(hi) > 1.0) {
            lo = hi;
            hi *= 2.0;
            if (++doublings > 200)
                throw std::runtime_error("fp_solve_G: chi bracket not found after 200 doublings");
        }
        for (int it = 0; it < 400; ++it) {
            const double t = s.trace(hi);
            if (t <= 1.0 && 1.0 - t <= trace_tol)
                break;
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi)
                break;
            if (s.trace(mid) > 1.0)
                lo = mid;
            else
                hi = mid;
        }
        chi = hi;
    }
    if (chi_out)
        *chi_out = chi;
    return s.G(chi);
}

// Matched-filter warm start: column i follows the strongest user served by PA i.
inline Eigen::MatrixXcd fp_initial_G(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &Wp)
{
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(H.cols(), Wp.rows());
    for (int i = 0; i < Wp.rows(); ++i) {
        int best = -1;
        double bn = 0.0;
        for (int k = 0; k < Wp.cols(); ++k)
            if (std::abs(Wp(i, k)) > 0.0 && H.row(k).squaredNorm() > bn) {
                bn = H.row(k).squaredNorm();
                best = k;
            }
        if (best >= 0)
            G.col(i) = H.row(best).adjoint();
    }
    const double t = power_trace(G, Wp);
    if (t > 0.0)
        G /= std::sqrt(t);
    return G;
}

// Regularized zero-forcing target H^H (H H^H + K sigma2/P I)^-1 pulled back through W_p.
inline Eigen::MatrixXcd fp_rzf_G(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &Wp, double P, double sigma2)
{
    const int K = int(H.rows());
    const Eigen::MatrixXcd R = H * H.adjoint() + (K * sigma2 / P) * Eigen::MatrixXcd::Identity(K, K);
    const Eigen::MatrixXcd W0 = H.adjoint() * R.ldlt().solve(Eigen::MatrixXcd::Identity(K, K));
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(Wp);
    Eigen::MatrixXcd G = W0 * cod.pseudoInverse();
    const double t = power_trace(G, Wp);
    if (t > 0.0)
        G /= std::sqrt(t);
    return G;
}

inline PrecoderFactorization fp_precoding(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &Wp, double P, double sigma2,
                                          const FpOptions &opt = {});

inline PrecoderFactorization fp_run(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &Wp, double P, double sigma2,
                                    const FpOptions &opt, Eigen::MatrixXcd G0)
{
    PrecoderFactorization f;
    f.Wp = Wp;
    f.G = std::move(G0);
    f.W = f.G * Wp;
    double rate = sum_rate(H, f.W, P, sigma2);
    f.trace.push_back(rate);
    for (int it = 0; it < opt.max_iter; ++it) {
        fp_aux_update(H, f.G, Wp, P, sigma2, f.c1, f.c2);
        const double L = fp_objective(H, f.G, Wp, f.c1, f.c2, P, sigma2);
        f.objective.push_back(L);
        f.tightness.push_back(std::abs(L - 2.0 * std::log(2.0) * rate));
        f.G = fp_solve_G(H, Wp, f.c1, f.c2, P, opt.trace_tol, &f.chi);
        f.W = f.G * Wp;
        const double next = sum_rate(H, f.W, P, sigma2);
        f.trace.push_back(next);
        f.iterations = it + 1;
        const double delta = next - rate;
        rate = next;
        if (std::abs(delta) < opt.tol) {
            f.converged = true;
            break;
        }
    }
    return f;
}

inline PrecoderFactorization fp_precoding(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &Wp, double P, double sigma2,
                                          const FpOptions &opt)
{
    if (!(sigma2 > 0.0))
        throw domain_error("noise power must be positive");
    if (H.rows() != Wp.cols())
        throw std::invalid_argument("fp_precoding: H rows must match W_p columns");
    if (opt.init == FpInit::matched_filter)
        return fp_run(H, Wp, P, sigma2, opt, fp_initial_G(H, Wp));
    if (opt.init == FpInit::rzf)
        return fp_run(H, Wp, P, sigma2, opt, fp_rzf_G(H, Wp, P, sigma2));
    PrecoderFactorization a = fp_run(H, Wp, P, sigma2, opt, fp_initial_G(H, Wp));
    PrecoderFactorization b = fp_run(H, Wp, P, sigma2, opt, fp_rzf_G(H, Wp, P, sigma2));
    return b.trace.back() > a.trace.back() ? b : a;
}

// ---- Full pipeline ----

enum class Scheme { PA_MM, PI_MM, PA_SM, PI_SM, DP_MM };

inline std::string scheme_name(Scheme s)
{
    switch (s) {
    case Scheme::PA_MM: return "PA-MM";
    case Scheme::PI_MM: return "PI-MM";
    case Scheme::PA_SM: return "PA-SM";
    case Scheme::PI_SM: return "PI-SM";
    case Scheme::DP_MM: return "DP-MM";
    }
    return "?";
}

inline Scheme parse_scheme(const std::string &s)
{
    for (Scheme c : {Scheme::PA_MM, Scheme::PI_MM, Scheme::PA_SM, Scheme::PI_SM, Scheme::DP_MM})
        if (scheme_name(c) == s)
            return c;
    throw std::invalid_argument("unknown scheme '" + s + "' (PA-MM, PI-MM, PA-SM, PI-SM, DP-MM)");
}

inline bool is_multi_mode(Scheme s) { return s == Scheme::PA_MM || s == Scheme::PI_MM || s == Scheme::DP_MM; }

constexpr int discrete_codebook_size = 18;

// Fixed receive direction of the polarization-ignorant schemes (GCS).
inline Vec3 fixed_rx_direction() { return Vec3(1.0, 0.0, 0.0); }

struct SlotSolution
{
    Scenario scenario;          // users of this slot only
    std::vector<int> user_ids;  // slot user -> global user
    UserGrouping grouping;
    std::vector<GroupPlan> plans;
    std::vector<Vec3> rx;
    ChannelMatrix channel;
    PrecoderFactorization precoder;
    RateReport report;
};

struct MultiuserSolution
{
    Scheme scheme = Scheme::PA_MM;
    std::vector<SlotSolution> slots;
    std::vector<double> per_user_rate; // time-shared, bits/s/Hz
    double sum_rate = 0.0;
    std::vector<double> trace; // time-shared sum rate per FP iteration
};

inline std::vector<double> waveguide_ys(const Scenario &sc)
{
    std::vector<double> ys;
    for (const auto &w : sc.waveguides)
        ys.push_back(w.feed_point.y());
    return ys;
}

// Row layout of W_p. pa: one row per PA (two nonzeros for a pair). port: one row per PA port
// (m, n, q), so each user of a pair gets its own column of G.
enum class PrecoderRows { pa, port };

struct MultiuserOptions
{
    FpOptions fp;
    PrecoderRows rows = PrecoderRows::port;
    int rx_rounds = 10; // alternations of FP and receive-polarization updates
};

// Builds the physical scenario (positions, orientations) from plans and returns W_p.
inline Eigen::MatrixXcd realize_plans(Scenario &sc, const std::vector<GroupPlan> &plans,
                                      PrecoderRows rows = PrecoderRows::port)
{
    sc.resize_pas();
    const int I = sc.num_pas();
    std::vector<const GroupPlan *> by_pa(I, nullptr);
    for (const auto &p : plans)
        by_pa[p.pa] = &p;
    const double spacing = sc.med.lambda0 / 2.0;
    for (int i = 0; i < I; ++i) {
        const int m = i / sc.N, n = i % sc.N;
        const auto &wg = sc.waveguides[m];
        double x = by_pa[i] ? by_pa[i]->x : wg.length * (n + 0.5) / sc.N;
        // keep PAs on one guide at least half a wavelength apart
        for (int guard = 0; guard < 4 * sc.N; ++guard) {
            bool clash = false;
            for (int o = 0; o < n; ++o)
                if (std::abs(sc.pa_x[m][o] - x) < spacing) {
                    clash = true;
                    x = sc.pa_x[m][o] + spacing;
                }
            if (!clash)
                break;
        }
        sc.pa_x[m][n] = std::clamp(x, 0.0, wg.length);
        const Vec3 c = sc.pa_center(m, n);
        for (int q = 0; q < sc.Q; ++q) {
            int k = -1;
            if (by_pa[i])
                k = by_pa[i]->users[q] >= 0 ? by_pa[i]->users[q] : by_pa[i]->users[0];
            sc.port_orient[m][n][q] = k >= 0 ? optimal_orientation(c, sc.users[k]) : Orientation{};
        }
    }
    const int per = rows == PrecoderRows::port ? sc.Q : 1;
    Eigen::MatrixXcd Wp = Eigen::MatrixXcd::Zero(I * per, sc.K());
    for (const auto &p : plans) {
        // local split of the interference-free pair at the realized position
        PowerSplit sp{1.0, 0.0};
        if (p.users[0] >= 0 && p.users[1] >= 0) {
            const LinkModel L = link_model(sc, p.pa / sc.N);
            const double x = sc.pa_x[p.pa / sc.N][p.pa % sc.N];
            sp = two_user_power_split(matched_gain(L, 1, x, sc.users[p.users[0]]),
                                      matched_gain(L, 2, x, sc.users[p.users[1]]), sc.sigma2, sc.sigma2, sc.P);
        }
        const double w[2] = {sp.w1_sq, sp.w2_sq};
        for (int q = 0; q < sc.Q; ++q)
            if (p.users[q] >= 0)
                Wp(p.pa * per + (per > 1 ? q : 0), p.users[q]) = std::sqrt(w[q]);
    }
    return Wp;
}

// Receive antenna of each user, tuned to its serving port (lowest PA index when served twice).
inline std::vector<Vec3> receive_antennas(const Scenario &sc, const std::vector<GroupPlan> &plans, Scheme scheme)
{
    std::vector<Vec3> rx(sc.K(), fixed_rx_direction());
    std::vector<char> done(sc.K(), 0);
    std::vector<const GroupPlan *> sorted;
    for (const auto &p : plans)
        sorted.push_back(&p);
    std::sort(sorted.begin(), sorted.end(), [](auto *a, auto *b) { return a->pa < b->pa; });
    for (const GroupPlan *p : sorted)
        for (int q = 0; q < sc.Q; ++q) {
            const int k = p->users[q];
            if (k < 0 || done[k])
                continue;
            done[k] = 1;
            if (scheme == Scheme::PI_MM || scheme == Scheme::PI_SM)
                continue;
            const PortSpec port = sc.port(p->pa / sc.N, p->pa % sc.N, q);
            const FieldSample f = radiated_field(port, sc.med, 1.0, sc.users[k], sc.alpha_a);
            JonesVector j;
            if (scheme == Scheme::DP_MM)
                j = discrete_rx_polarization(incident_jones(f), discrete_codebook_size);
            else
                j = port_to_user_basis(optimal_rx_polarization(q + 1, f.theta, f.phi, port.mode.beta, sc.med.k_free()));
            rx[k] = rx_direction(j, f.basis);
        }
    return rx;
}

// Per-link fields and gains; a user's row of H follows from its receive antenna alone.
struct ReceiveModel
{
    std::vector<std::vector<FieldSample>> field; // [k][port]
    Eigen::MatrixXcd H_pu, H_wp;
    std::vector<SphericalBasis> basis; // serving-port basis at each user

    Eigen::RowVectorXcd row(int k, const Vec3 &rx) const
    {
        Eigen::RowVectorXcd h = Eigen::RowVectorXcd::Zero(H_wp.cols());
        for (int c = 0; c < H_pu.cols(); ++c) {
            const FieldSample &f = field[k][c];
            const double eta = f.norm() > 0.0 ? matching_efficiency(rx, f) : 0.0;
            h += eta * H_pu(k, c) * H_wp.row(c);
        }
        return h;
    }
};

inline ReceiveModel receive_model(const Scenario &sc, const ChannelMatrix &ch, const std::vector<GroupPlan> &plans)
{
    ReceiveModel r;
    r.H_pu = ch.H_pu;
    r.H_wp = ch.H_wp;
    r.field.assign(sc.K(), {});
    r.basis.assign(sc.K(), SphericalBasis{});
    std::vector<int> serving(sc.K(), -1);
    for (const auto &p : plans)
        for (int q = 0; q < sc.Q; ++q)
            if (p.users[q] >= 0) {
                const int col = port_index(p.pa / sc.N, p.pa % sc.N, q, sc.N, sc.Q);
                if (serving[p.users[q]] < 0 || col < serving[p.users[q]])
                    serving[p.users[q]] = col;
            }
    for (int k = 0; k < sc.K(); ++k) {
        for (int m = 0; m < sc.M(); ++m)
            for (int n = 0; n < sc.N; ++n)
                for (int q = 0; q < sc.Q; ++q)
                    r.field[k].push_back(radiated_field(sc.port(m, n, q), sc.med, 1.0, sc.users[k], sc.alpha_a));
        r.basis[k] = r.field[k][std::max(serving[k], 0)].basis;
    }
    return r;
}

inline double user_sinr_row(const Eigen::RowVectorXcd &h, const Eigen::MatrixXcd &W, int k, double P, double sigma2)
{
    const Eigen::RowVectorXcd g = h * W;
    double interf = 0.0;
    for (int i = 0; i < W.cols(); ++i)
        if (i != k)
            interf += std::norm(g(i));
    return P * std::norm(g(k)) / (P * interf + sigma2);
}

// Receive-polarization update for fixed W: each user maximizes its own SINR, which leaves
// every other user's SINR unchanged. Continuous angle for PA schemes, codebook for DP.
inline bool update_receivers(const ReceiveModel &model, const Eigen::MatrixXcd &W, double P, double sigma2, Scheme scheme,
                             std::vector<Vec3> &rx)
{
    if (scheme == Scheme::PI_MM || scheme == Scheme::PI_SM)
        return false;
    bool changed = false;
    for (size_t k = 0; k < rx.size(); ++k) {
        const int kk = int(k);
        const SphericalBasis &b = model.basis[k];
        auto dir = [&](double psi) { return rx_direction({std::cos(psi), std::sin(psi)}, b); };
        auto sinr = [&](double psi) { return user_sinr_row(model.row(kk, dir(psi)), W, kk, P, sigma2); };
        const double current = user_sinr_row(model.row(kk, rx[k]), W, kk, P, sigma2);
        double best_psi = 0.0, best = -1.0;
        if (scheme == Scheme::DP_MM) {
            for (int i = 0; i < discrete_codebook_size; ++i) {
                const double psi = 2.0 * pi * i / discrete_codebook_size;
                const double v = sinr(psi);
                if (v > best + 1e-15) {
                    best = v;
                    best_psi = psi;
                }
            }
        } else {
            const int grid = 180;
            for (int i = 0; i < grid; ++i) {
                const double psi = pi * i / grid;
                const double v = sinr(psi);
                if (v > best) {
                    best = v;
                    best_psi = psi;
                }
            }
            const double h = pi / grid;
            best_psi = golden_section_max(sinr, best_psi - h, best_psi + h, 1e-10);
            best = sinr(best_psi);
        }
        if (best > current * (1.0 + 1e-12)) {
            rx[k] = dir(best_psi);
            changed = true;
        }
    }
    return changed;
}

inline SlotSolution solve_slot(const Scenario &base, const std::vector<int> &user_ids, const std::vector<std::vector<int>> &groups,
                               Scheme scheme, const MultiuserOptions &opt)
{
    SlotSolution s;
    s.user_ids = user_ids;
    s.scenario = base;
    s.scenario.Q = is_multi_mode(scheme) ? 2 : 1;
    s.scenario.users.clear();
    std::vector<int> local(base.K(), -1);
    for (size_t i = 0; i < user_ids.size(); ++i) {
        local[user_ids[i]] = int(i);
        s.scenario.users.push_back(base.users[user_ids[i]]);
    }
    for (const auto &g : groups) {
        std::vector<int> lg;
        for (int k : g)
            lg.push_back(local[k]);
        s.grouping.groups.push_back(lg);
    }
    for (int j = 0; j < s.grouping.J(); ++j)
        if (s.grouping.groups[j].size() == 1 && s.scenario.Q == 2)
            s.grouping.singleton = j;
    s.grouping.cost = grouping_cost(s.scenario.users, s.grouping.groups);
    s.plans = assign_pas(s.scenario, s.grouping);
    const Eigen::MatrixXcd Wp = realize_plans(s.scenario, s.plans, opt.rows);
    s.rx = receive_antennas(s.scenario, s.plans, scheme);
    s.channel = assemble(s.scenario, s.rx);
    const double P = s.scenario.P, s2 = s.scenario.sigma2;
    s.precoder = fp_precoding(s.channel.H, Wp, P, s2, opt.fp);
    if (opt.rx_rounds > 0 && scheme != Scheme::PI_MM && scheme != Scheme::PI_SM) {
        const ReceiveModel model = receive_model(s.scenario, s.channel, s.plans);
        for (int round = 0; round < opt.rx_rounds; ++round) {
            const double before = s.precoder.trace.back();
            if (!update_receivers(model, s.precoder.W, P, s2, scheme, s.rx))
                break;
            s.channel = assemble(s.scenario, s.rx);
            PrecoderFactorization next = fp_run(s.channel.H, Wp, P, s2, opt.fp, s.precoder.G);
            // keep one trace across rounds; the first entry of a round repeats the receiver update
            next.trace.insert(next.trace.begin(), s.precoder.trace.begin(), s.precoder.trace.end());
            next.objective.insert(next.objective.begin(), s.precoder.objective.begin(), s.precoder.objective.end());
            next.tightness.insert(next.tightness.begin(), s.precoder.tightness.begin(), s.precoder.tightness.end());
            next.iterations += s.precoder.iterations;
            s.precoder = std::move(next);
            if (s.precoder.trace.back() - before < opt.fp.tol)
                break;
        }
    }
    s.report = rate_report(s.channel.H, s.precoder.W, P, s2);
    return s;
}

inline MultiuserSolution optimize_scenario(const Scenario &sc, Scheme scheme, const MultiuserOptions &opt = {})
{
    if (sc.K() < 1)
        throw std::invalid_argument("optimize_scenario: no users");
    if (sc.M() < 1 || sc.N < 1)
        throw std::invalid_argument("optimize_scenario: need at least one waveguide and one PA");
    const int Q = is_multi_mode(scheme) ? 2 : 1;
    UserGrouping g = (Q == 2 && sc.K() >= 2) ? group_users(sc.users, waveguide_ys(sc), 2)
                                             : group_users(sc.users, waveguide_ys(sc), 1);
    const int I = sc.num_pas();
    const int slots = (g.J() + I - 1) / I;
    MultiuserSolution out;
    out.scheme = scheme;
    out.per_user_rate.assign(sc.K(), 0.0);
    // round-robin groups over slots
    for (int t = 0; t < slots; ++t) {
        std::vector<std::vector<int>> groups;
        std::vector<int> ids;
        for (int j = t; j < g.J(); j += slots) {
            groups.push_back(g.groups[j]);
            for (int k : g.groups[j])
                ids.push_back(k);
        }
        std::sort(ids.begin(), ids.end());
        out.slots.push_back(solve_slot(sc, ids, groups, scheme, opt));
    }
    size_t len = 0;
    for (const auto &s : out.slots)
        len = std::max(len, s.precoder.trace.size());
    out.trace.assign(len, 0.0);
    for (const auto &s : out.slots) {
        for (size_t i = 0; i < s.user_ids.size(); ++i)
            out.per_user_rate[s.user_ids[i]] += s.report.per_user_rate[i] / slots;
        for (size_t it = 0; it < len; ++it)
            out.trace[it] += s.precoder.trace[std::min(it, s.precoder.trace.size() - 1)] / slots;
    }
    for (double r : out.per_user_rate)
        out.sum_rate += r;
    return out;
}

} // namespace mmpass
