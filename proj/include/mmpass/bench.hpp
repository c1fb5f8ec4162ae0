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

#include "multiuser.hpp"

#include <atomic>
#include <cinttypes>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <mutex>
#include <thread>

namespace mmpass {

/*
 Experiment configuration. INI-style text:

   [section]
   key = value      # comments start with # or ;

 Sections and keys are listed in README.md. An empty file gives the defaults below.
*/

struct ScenarioConfig
{
    // [region]
    double dx = 10.0, dy = 6.0, dz = 3.0;
    // [system]
    int M = 4, N = 3, Q = 2, K = 24;
    // [waveguide]
    double frequency = 100e9;
    double a = 3e-3, b = 2e-3;
    double n_core = 2.0;
    double alpha_w_db = 0.08; // dB/m as given
    double kappa = 1.0;
    // [channel]
    double alpha_a_db = 0.05;
    double power_w = 10.0;
    double sigma2_dbw = -26.0;
    std::string gain_calibration = "reference";
    // [users]
    std::string placement = "uniform";
    std::vector<Vec3> positions;
    // [run]
    std::uint64_t seed = 1;
    std::vector<Scheme> schemes{Scheme::PA_MM, Scheme::DP_MM, Scheme::PI_MM, Scheme::PA_SM, Scheme::PI_SM};
    int trials = 20;
    std::vector<double> powers_dbw{0.0, 5.0, 10.0, 15.0, 20.0};
    double outage_threshold = 1.0;
    int outage_trials = 10000;
    std::vector<double> outage_powers_dbw;  // empty: -12 .. 6 dB in 1 dB steps
    std::vector<double> outage_alpha_a_db;  // empty: {alpha_a_db, 3 alpha_a_db}
    int field_nx = 201, field_ny = 121;
    double field_port_angle = pi / 4.0;
    std::vector<int> m_grid{1, 2, 3, 4};
    std::vector<int> n_grid{1, 2, 3, 4};
    std::vector<int> k_grid{4, 8, 12, 16, 20, 24};
    // [fp]
    MultiuserOptions solver;

    // derived at load
    double alpha_w = 0.0;  // Np/m
    double alpha_a = 0.0;  // Np/m
    double sigma2 = 0.0;   // W
    double gain_scale = 1.0;
};

struct config_error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string &s, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

inline std::string field_name(const std::string &sec, const std::string &key) { return "[" + sec + "] " + key; }

inline double parse_double(const std::string &sec, const std::string &key, const std::string &v)
{
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size() || !std::isfinite(d))
            throw std::invalid_argument("");
        return d;
    } catch (const std::exception &) {
        throw config_error("config: " + field_name(sec, key) + ": expected a number, got '" + v + "'");
    }
}

inline long long parse_int(const std::string &sec, const std::string &key, const std::string &v)
{
    try {
        size_t pos = 0;
        const long long d = std::stoll(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument("");
        return d;
    } catch (const std::exception &) {
        throw config_error("config: " + field_name(sec, key) + ": expected an integer, got '" + v + "'");
    }
}

inline double positive(const std::string &sec, const std::string &key, double v)
{
    if (!(v > 0.0))
        throw config_error("config: " + field_name(sec, key) + ": must be positive");
    return v;
}

inline double nonnegative(const std::string &sec, const std::string &key, double v)
{
    if (!(v >= 0.0))
        throw config_error("config: " + field_name(sec, key) + ": must be nonnegative");
    return v;
}

inline int positive_int(const std::string &sec, const std::string &key, const std::string &v)
{
    const long long i = parse_int(sec, key, v);
    if (i < 1 || i > 1000000)
        throw config_error("config: " + field_name(sec, key) + ": must be a positive integer");
    return int(i);
}

template <class F>
auto parse_list(const std::string &sec, const std::string &key, const std::string &v, F f)
{
    std::vector<decltype(f(std::string()))> out;
    for (const auto &item : split(v, ','))
        out.push_back(f(item));
    if (out.empty())
        throw config_error("config: " + field_name(sec, key) + ": empty list");
    return out;
}

} // namespace detail

// |H|^2 of the reference link (PA (5,0,3), user (5.5,0,0), TE10, one PA) before calibration.
inline double reference_link_gain(const ScenarioConfig &c)
{
    LinkModel L;
    L.med = make_medium(c.frequency, c.n_core);
    L.wg.a = c.a;
    L.wg.b = c.b;
    L.wg.feed_point = Vec3(0.0, 0.0, 3.0);
    L.wg.length = std::max(c.dx, 5.0);
    L.wg.alpha_w = c.alpha_w;
    L.wg.kappa = c.kappa;
    L.wg.num_pas = 1;
    L.alpha_a = c.alpha_a;
    L.gain_scale = 1.0;
    return matched_gain(L, 1, 5.0, Vec3(5.5, 0.0, 0.0));
}

constexpr double reference_gain_target = 0.6;

// Applies unit conversions and cross-field checks.
inline void finalize_config(ScenarioConfig &c)
{
    c.alpha_w = db_per_m_to_np(c.alpha_w_db);
    c.alpha_a = db_per_m_to_np(c.alpha_a_db);
    c.sigma2 = dbw_to_watt(c.sigma2_dbw);
    if (c.Q != 1 && c.Q != 2)
        throw config_error("config: [system] Q: only Q = 1 or Q = 2 are supported, got " + std::to_string(c.Q));
    if (c.Q == 1)
        for (Scheme s : c.schemes)
            if (is_multi_mode(s))
                throw config_error("config: [run] schemes: " + scheme_name(s) + " needs Q = 2");
    if (c.placement == "explicit") {
        if (c.positions.empty())
            throw config_error("config: [users] positions: required when placement = explicit");
        c.K = int(c.positions.size());
        for (const auto &p : c.positions)
            if (!(p.z() < c.dz))
                throw config_error("config: [users] positions: users must be below the waveguides (z < dz)");
    } else if (c.placement != "uniform") {
        throw config_error("config: [users] placement: expected 'uniform' or 'explicit', got '" + c.placement + "'");
    }
    // evanescent modes are a configuration error
    WaveguideSpec wg;
    wg.a = c.a;
    wg.b = c.b;
    const MediumConstants med = make_medium(c.frequency, c.n_core);
    for (int q = 1; q <= c.Q; ++q) {
        try {
            mode_spec(q, wg, med);
        } catch (const domain_error &e) {
            throw config_error(std::string("config: [waveguide] frequency: ") + e.what());
        }
    }
    const std::string &g = c.gain_calibration;
    if (g == "reference")
        c.gain_scale = std::sqrt(reference_gain_target / reference_link_gain(c));
    else if (g == "none")
        c.gain_scale = 1.0;
    else
        c.gain_scale = std::pow(10.0, detail::parse_double("channel", "gain_calibration", g) / 20.0);
}

inline ScenarioConfig parse_config(const std::string &text)
{
    using namespace detail;
    ScenarioConfig c;
    std::istringstream in(text);
    std::string line, sec;
    int lineno = 0;
    bool power_w_set = false, power_dbw_set = false;
    while (std::getline(in, line)) {
        ++lineno;
        // '#' comments anywhere, ';' only at line start (it separates positions)
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (!line.empty() && line.front() == ';')
            continue;
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw config_error("config: line " + std::to_string(lineno) + ": malformed section header");
            sec = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config: line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string v = trim(line.substr(eq + 1));
        auto num = [&] { return parse_double(sec, key, v); };
        auto pos = [&] { return positive(sec, key, num()); };
        auto cnt = [&] { return positive_int(sec, key, v); };
        auto unknown = [&] { throw config_error("config: unknown field " + field_name(sec, key)); };
        if (sec == "region") {
            if (key == "dx") c.dx = pos();
            else if (key == "dy") c.dy = pos();
            else if (key == "dz") c.dz = pos();
            else unknown();
        } else if (sec == "system") {
            if (key == "M") c.M = cnt();
            else if (key == "N") c.N = cnt();
            else if (key == "Q") c.Q = cnt();
            else if (key == "K") c.K = cnt();
            else unknown();
        } else if (sec == "waveguide") {
            if (key == "frequency") c.frequency = pos();
            else if (key == "a") c.a = pos();
            else if (key == "b") c.b = pos();
            else if (key == "n_core") {
                c.n_core = num();
                if (!(c.n_core >= 1.0))
                    throw config_error("config: " + field_name(sec, key) + ": must be >= 1");
            }
            else if (key == "alpha_w_db") c.alpha_w_db = nonnegative(sec, key, num());
            else if (key == "kappa") c.kappa = pos();
            else unknown();
        } else if (sec == "channel") {
            if (key == "alpha_a_db") c.alpha_a_db = nonnegative(sec, key, num());
            else if (key == "power_w") { c.power_w = pos(); power_w_set = true; }
            else if (key == "power_dbw") { c.power_w = dbw_to_watt(num()); power_dbw_set = true; }
            else if (key == "sigma2_dbw") c.sigma2_dbw = num();
            else if (key == "gain_calibration") c.gain_calibration = v;
            else unknown();
        } else if (sec == "users") {
            if (key == "placement") c.placement = v;
            else if (key == "positions") {
                c.positions.clear();
                for (const auto &p : split(v, ';')) {
                    const auto xyz = split(p, ',');
                    if (xyz.size() != 3)
                        throw config_error("config: " + field_name(sec, key) + ": each position needs x, y, z");
                    c.positions.emplace_back(parse_double(sec, key, xyz[0]), parse_double(sec, key, xyz[1]),
                                             parse_double(sec, key, xyz[2]));
                }
            }
            else unknown();
        } else if (sec == "run") {
            if (key == "seed") {
                const long long s = parse_int(sec, key, v);
                if (s < 0)
                    throw config_error("config: " + field_name(sec, key) + ": must be nonnegative");
                c.seed = std::uint64_t(s);
            }
            else if (key == "schemes") {
                try {
                    c.schemes = parse_list(sec, key, v, [](const std::string &s) { return parse_scheme(s); });
                } catch (const std::invalid_argument &e) {
                    throw config_error("config: " + field_name(sec, key) + ": " + e.what());
                }
            }
            else if (key == "trials") c.trials = cnt();
            else if (key == "powers_dbw") c.powers_dbw = parse_list(sec, key, v, [&](const std::string &s) { return parse_double(sec, key, s); });
            else if (key == "outage_threshold") c.outage_threshold = nonnegative(sec, key, num());
            else if (key == "outage_trials") c.outage_trials = cnt();
            else if (key == "outage_powers_dbw") c.outage_powers_dbw = parse_list(sec, key, v, [&](const std::string &s) { return parse_double(sec, key, s); });
            else if (key == "outage_alpha_a_db") c.outage_alpha_a_db = parse_list(sec, key, v, [&](const std::string &s) { return nonnegative(sec, key, parse_double(sec, key, s)); });
            else if (key == "field_nx") c.field_nx = cnt();
            else if (key == "field_ny") c.field_ny = cnt();
            else if (key == "field_port_angle") c.field_port_angle = num();
            else if (key == "m_grid") c.m_grid = parse_list(sec, key, v, [&](const std::string &s) { return positive_int(sec, key, s); });
            else if (key == "n_grid") c.n_grid = parse_list(sec, key, v, [&](const std::string &s) { return positive_int(sec, key, s); });
            else if (key == "k_grid") c.k_grid = parse_list(sec, key, v, [&](const std::string &s) { return positive_int(sec, key, s); });
            else unknown();
        } else if (sec == "fp") {
            if (key == "tol") c.solver.fp.tol = pos();
            else if (key == "max_iter") c.solver.fp.max_iter = cnt();
            else if (key == "rx_rounds") c.solver.rx_rounds = int(parse_int(sec, key, v));
            else if (key == "init") {
                if (v == "matched_filter") c.solver.fp.init = FpInit::matched_filter;
                else if (v == "rzf") c.solver.fp.init = FpInit::rzf;
                else if (v == "best") c.solver.fp.init = FpInit::best;
                else throw config_error("config: " + field_name(sec, key) + ": expected matched_filter, rzf or best");
            }
            else if (key == "precoder_rows") {
                if (v == "port") c.solver.rows = PrecoderRows::port;
                else if (v == "pa") c.solver.rows = PrecoderRows::pa;
                else throw config_error("config: " + field_name(sec, key) + ": expected port or pa");
            }
            else unknown();
        } else {
            throw config_error("config: unknown section [" + sec + "] (key " + key + ")");
        }
    }
    if (power_w_set && power_dbw_set)
        throw config_error("config: [channel] power_dbw: give either power_w or power_dbw, not both");
    finalize_config(c);
    return c;
}

inline ScenarioConfig load_config(const std::string &path)
{
    std::ifstream f(path);
    if (!f)
        throw config_error("config: cannot read '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

// Canonical text of every effective setting; hashed into experiment headers.
inline std::string canonical_config(const ScenarioConfig &c)
{
    std::ostringstream o;
    o.precision(17);
    o << "region " << c.dx << ' ' << c.dy << ' ' << c.dz << '\n';
    o << "system " << c.M << ' ' << c.N << ' ' << c.Q << ' ' << c.K << '\n';
    o << "waveguide " << c.frequency << ' ' << c.a << ' ' << c.b << ' ' << c.n_core << ' ' << c.alpha_w_db << ' ' << c.kappa << '\n';
    o << "channel " << c.alpha_a_db << ' ' << c.power_w << ' ' << c.sigma2_dbw << ' ' << c.gain_calibration << '\n';
    o << "users " << c.placement;
    for (const auto &p : c.positions)
        o << ' ' << p.x() << ',' << p.y() << ',' << p.z();
    o << "\nrun " << c.trials << ' ' << c.outage_threshold << ' ' << c.outage_trials << ' ' << c.field_nx << ' ' << c.field_ny
      << ' ' << c.field_port_angle;
    for (Scheme s : c.schemes)
        o << ' ' << scheme_name(s);
    for (double p : c.powers_dbw)
        o << " p" << p;
    for (double p : c.outage_powers_dbw)
        o << " op" << p;
    for (double p : c.outage_alpha_a_db)
        o << " oa" << p;
    for (int m : c.m_grid)
        o << " m" << m;
    for (int n : c.n_grid)
        o << " n" << n;
    for (int k : c.k_grid)
        o << " k" << k;
    o << "\nfp " << c.solver.fp.tol << ' ' << c.solver.fp.max_iter << ' ' << int(c.solver.fp.init) << ' '
      << int(c.solver.rows) << ' ' << c.solver.rx_rounds << '\n';
    return o.str();
}

// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string &s)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string config_hash(const ScenarioConfig &c)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a(canonical_config(c)));
    return buf;
}

// Independent stream per (seed, trial).
inline std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial)
{
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(trial), std::uint32_t(trial >> 32),
                      0x6d6d7061u};
    return std::mt19937_64(seq);
}

// Uniform in [0, dx) x [0, dy) at z = 0, from 53-bit draws so results do not depend on the library's distributions.
inline double unit_draw(std::mt19937_64 &rng) { return double(rng() >> 11) * 0x1.0p-53; }

inline std::vector<Vec3> draw_users(const ScenarioConfig &c, int K, std::mt19937_64 &rng)
{
    if (c.placement == "explicit")
        return c.positions;
    std::vector<Vec3> u;
    u.reserve(K);
    for (int k = 0; k < K; ++k) {
        const double x = c.dx * unit_draw(rng);
        const double y = c.dy * unit_draw(rng);
        u.emplace_back(x, y, 0.0);
    }
    return u;
}

inline WaveguideSpec make_waveguide(const ScenarioConfig &c, double y, int N)
{
    WaveguideSpec w;
    w.a = c.a;
    w.b = c.b;
    w.feed_point = Vec3(0.0, y, c.dz);
    w.length = c.dx;
    w.alpha_w = c.alpha_w;
    w.kappa = c.kappa;
    w.num_pas = N;
    return w;
}

// Waveguide m at y = (m + 1/2) dy / M, height dz, fed at x = 0.
inline Scenario build_scenario(const ScenarioConfig &c, const std::vector<Vec3> &users, int M, int N, double P)
{
    Scenario sc;
    sc.med = make_medium(c.frequency, c.n_core);
    sc.N = N;
    sc.Q = c.Q;
    for (int m = 0; m < M; ++m)
        sc.waveguides.push_back(make_waveguide(c, (m + 0.5) * c.dy / M, N));
    sc.users = users;
    sc.alpha_a = c.alpha_a;
    sc.P = P;
    sc.sigma2 = c.sigma2;
    sc.gain_scale = c.gain_scale;
    sc.resize_pas();
    return sc;
}

inline LinkModel single_link(const ScenarioConfig &c, double y)
{
    LinkModel L;
    L.med = make_medium(c.frequency, c.n_core);
    L.wg = make_waveguide(c, y, 1);
    L.alpha_a = c.alpha_a;
    L.gain_scale = c.gain_scale;
    return L;
}

// Runs f(i) for i in [0, n) on a worker pool. Callers write into per-index slots, so results do not depend on scheduling.
inline void parallel_for(int n, const std::function<void(int)> &f, unsigned workers = 0)
{
    if (workers == 0)
        workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, unsigned(std::max(n, 1)));
    if (workers <= 1) {
        for (int i = 0; i < n; ++i)
            f(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i; (i = next++) < n;) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err)
                        err = std::current_exception();
                }
            }
        });
    for (auto &t : pool)
        t.join();
    if (err)
        std::rethrow_exception(err);
}

// ---- Results and CSV ----

struct ExperimentResult
{
    std::string id;
    std::uint64_t seed = 0;
    std::string hash;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

inline std::string fmt_rate(double v)
{
    char b[64];
    std::snprintf(b, sizeof b, "%.6f", v == 0.0 ? 0.0 : v);
    return b;
}

inline std::string fmt_db(double v)
{
    char b[64];
    std::snprintf(b, sizeof b, "%.4f", v == 0.0 ? 0.0 : v);
    return b;
}

inline std::string fmt_real(double v)
{
    char b[64];
    std::snprintf(b, sizeof b, "%.6g", v == 0.0 ? 0.0 : v);
    return b;
}

inline ExperimentResult make_result(const std::string &id, const ScenarioConfig &c, std::vector<std::string> cols)
{
    ExperimentResult r;
    r.id = id;
    r.seed = c.seed;
    r.hash = config_hash(c);
    r.columns = std::move(cols);
    return r;
}

// One metadata comment line, one header line, then data rows.
inline void write_csv(std::ostream &os, const ExperimentResult &r)
{
    os << "# experiment=" << r.id << " config_hash=" << r.hash << " seed=" << r.seed << '\n';
    for (size_t i = 0; i < r.columns.size(); ++i)
        os << (i ? "," : "") << r.columns[i];
    os << '\n';
    for (const auto &row : r.rows) {
        for (size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << row[i];
        os << '\n';
    }
}

// ---- Experiments ----

// Mean sum rate per (scheme, power) over trials.
inline ExperimentResult run_rate_vs_power(const ScenarioConfig &c, const std::vector<double> &powers_dbw,
                                          const std::vector<Scheme> &schemes)
{
    ExperimentResult r = make_result("rate-vs-power", c, {"scheme", "power_dbw", "sum_rate"});
    const size_t S = schemes.size(), NP = powers_dbw.size();
    std::vector<double> per(size_t(c.trials) * S * NP, 0.0);
    parallel_for(c.trials, [&](int t) {
        auto rng = trial_rng(c.seed, std::uint64_t(t));
        const auto users = draw_users(c, c.K, rng);
        for (size_t p = 0; p < NP; ++p) {
            const Scenario sc = build_scenario(c, users, c.M, c.N, dbw_to_watt(powers_dbw[p]));
            for (size_t s = 0; s < S; ++s)
                per[(size_t(t) * S + s) * NP + p] = optimize_scenario(sc, schemes[s], c.solver).sum_rate;
        }
    });
    for (size_t s = 0; s < S; ++s)
        for (size_t p = 0; p < NP; ++p) {
            double acc = 0.0;
            for (int t = 0; t < c.trials; ++t)
                acc += per[(size_t(t) * S + s) * NP + p];
            r.rows.push_back({scheme_name(schemes[s]), fmt_db(powers_dbw[p]), fmt_rate(acc / c.trials)});
        }
    return r;
}

struct PairRates
{
    std::array<double, 2> mm{0.0, 0.0};  // per-user rates, users a and b
    std::array<double, 2> sm{0.0, 0.0};  // single-mode TDMA
};

// Two users on one PA: multi-mode (better of the two mode orders) vs single-mode TDMA.
inline PairRates two_user_rates(const LinkModel &L, const Vec3 &a, const Vec3 &b, double P, double sigma2)
{
    PairRates out;
    double best = -1.0;
    for (int order = 0; order < 2; ++order) {
        TwoUserInputs in;
        in.user1 = order ? b : a;
        in.user2 = order ? a : b;
        in.P = P;
        in.sigma1 = in.sigma2 = sigma2;
        in.warn_close = false;
        const TwoUserSolution s = two_user_shared_position(L, in);
        if (s.sum_rate > best) {
            best = s.sum_rate;
            const double r1 = 0.5 * std::log2(1.0 + P * s.split.w1_sq * s.gain[0] / sigma2);
            const double r2 = 0.5 * std::log2(1.0 + P * s.split.w2_sq * s.gain[1] / sigma2);
            out.mm = order ? std::array<double, 2>{r2, r1} : std::array<double, 2>{r1, r2};
        }
    }
    // TDMA: TE10 only, each user alone at full power half of the time, PA at the best shared position
    TwoUserInputs in;
    in.user1 = a;
    in.user2 = b;
    in.P = P;
    in.sigma1 = in.sigma2 = sigma2;
    const double xa = optimal_position(a, L.wg, L.wg.alpha_w, L.alpha_a).x_star;
    const double xb = optimal_position(b, L.wg, L.wg.alpha_w, L.alpha_a).x_star;
    const double lo = std::min(xa, xb), hi = std::max(xa, xb);
    auto tdma = [&](double x) {
        return std::log2(1.0 + P * matched_gain(L, 1, x, a) / sigma2) + std::log2(1.0 + P * matched_gain(L, 1, x, b) / sigma2);
    };
    const double x = hi > lo ? golden_section_max(tdma, lo, hi) : lo;
    out.sm = {0.25 * std::log2(1.0 + P * matched_gain(L, 1, x, a) / sigma2),
              0.25 * std::log2(1.0 + P * matched_gain(L, 1, x, b) / sigma2)};
    return out;
}

inline std::vector<double> default_outage_powers()
{
    std::vector<double> p;
    for (int i = -12; i <= 6; ++i)
        p.push_back(double(i));
    return p;
}

struct OutageCurve
{
    double alpha_a_db = 0.0;
    std::vector<double> powers_dbw;
    std::vector<double> mm, sm;
};

// Two users uniform in the region, one waveguide along y = dy / 2 with a single PA.
inline std::vector<OutageCurve> outage_curves(const ScenarioConfig &c, const std::vector<double> &powers_dbw, double threshold,
                                              int trials, const std::vector<double> &alphas_db)
{
    if (trials < 100)
        throw std::invalid_argument("run_outage: trials must be >= 100");
    std::vector<OutageCurve> out;
    for (double adb : alphas_db) {
        ScenarioConfig cc = c;
        cc.alpha_a_db = adb;
        finalize_config(cc);
        cc.gain_scale = c.gain_scale; // calibration stays with the nominal absorption
        const LinkModel L = single_link(cc, c.dy / 2.0);
        OutageCurve curve;
        curve.alpha_a_db = adb;
        curve.powers_dbw = powers_dbw;
        const size_t NP = powers_dbw.size();
        std::vector<char> mm_out(size_t(trials) * NP, 0), sm_out(size_t(trials) * NP, 0);
        parallel_for(trials, [&](int t) {
            auto rng = trial_rng(c.seed, std::uint64_t(t));
            // always uniform placement, explicit user lists do not apply here
            Vec3 a, b;
            do {
                a = Vec3(c.dx * unit_draw(rng), c.dy * unit_draw(rng), 0.0);
                b = Vec3(c.dx * unit_draw(rng), c.dy * unit_draw(rng), 0.0);
            } while ((a - b).norm() == 0.0);
            for (size_t p = 0; p < NP; ++p) {
                const PairRates r = two_user_rates(L, a, b, dbw_to_watt(powers_dbw[p]), c.sigma2);
                mm_out[size_t(t) * NP + p] = std::min(r.mm[0], r.mm[1]) < threshold;
                sm_out[size_t(t) * NP + p] = std::min(r.sm[0], r.sm[1]) < threshold;
            }
        });
        for (size_t p = 0; p < NP; ++p) {
            long om = 0, os = 0;
            for (int t = 0; t < trials; ++t) {
                om += mm_out[size_t(t) * NP + p];
                os += sm_out[size_t(t) * NP + p];
            }
            curve.mm.push_back(double(om) / trials);
            curve.sm.push_back(double(os) / trials);
        }
        out.push_back(std::move(curve));
    }
    return out;
}

inline ExperimentResult run_outage(const ScenarioConfig &c, const std::vector<double> &powers_dbw, double threshold, int trials)
{
    std::vector<double> alphas = c.outage_alpha_a_db;
    if (alphas.empty())
        alphas = {c.alpha_a_db, 3.0 * c.alpha_a_db};
    ExperimentResult r = make_result("outage", c, {"alpha_a_db", "power_dbw", "scheme", "outage"});
    for (const auto &curve : outage_curves(c, powers_dbw, threshold, trials, alphas))
        for (size_t p = 0; p < curve.powers_dbw.size(); ++p) {
            r.rows.push_back({fmt_db(curve.alpha_a_db), fmt_db(curve.powers_dbw[p]), "MM", fmt_rate(curve.mm[p])});
            r.rows.push_back({fmt_db(curve.alpha_a_db), fmt_db(curve.powers_dbw[p]), "SM-TDMA", fmt_rate(curve.sm[p])});
        }
    return r;
}

// Power (dBW) where an outage curve first drops to the target, linear in dB; NaN if never.
inline double power_at_outage(const std::vector<double> &powers_dbw, const std::vector<double> &outage, double target)
{
    for (size_t i = 0; i < outage.size(); ++i)
        if (outage[i] <= target) {
            if (i == 0)
                return powers_dbw[0];
            const double f = (outage[i - 1] - target) / (outage[i - 1] - outage[i]);
            return powers_dbw[i - 1] + f * (powers_dbw[i] - powers_dbw[i - 1]);
        }
    return std::numeric_limits<double>::quiet_NaN();
}

inline ExperimentResult run_convergence(const ScenarioConfig &c, const std::vector<Scheme> &schemes)
{
    ExperimentResult r = make_result("convergence", c, {"iteration", "sum_rate", "scheme"});
    auto rng = trial_rng(c.seed, 0);
    const auto users = draw_users(c, c.K, rng);
    const Scenario sc = build_scenario(c, users, c.M, c.N, c.power_w);
    for (Scheme s : schemes) {
        const MultiuserSolution sol = optimize_scenario(sc, s, c.solver);
        for (size_t i = 0; i < sol.trace.size(); ++i)
            r.rows.push_back({std::to_string(i), fmt_rate(sol.trace[i]), scheme_name(s)});
    }
    return r;
}

// Dual-mode PA above the region center; TE10 port pitched +angle, TE01 port -angle.
inline std::vector<PortSpec> field_map_ports(const ScenarioConfig &c)
{
    LinkModel L = single_link(c, c.dy / 2.0);
    std::vector<PortSpec> ports;
    ports.push_back(make_port(L, 1, c.dx / 2.0, Orientation{c.field_port_angle, 0.0}));
    ports.push_back(make_port(L, 2, c.dx / 2.0, Orientation{-c.field_port_angle, 0.0}));
    return ports;
}

inline IntensityGrid field_map_grid(const ScenarioConfig &c, int nx, int ny)
{
    return intensity_map(field_map_ports(c), make_medium(c.frequency, c.n_core), c.alpha_a, 0.0, c.dx, nx, 0.0, c.dy, ny, 0.0);
}

inline ExperimentResult run_field_map(const ScenarioConfig &c, int nx, int ny)
{
    ExperimentResult r = make_result("field-map", c, {"x", "y", "value_db"});
    const IntensityGrid g = field_map_grid(c, nx, ny);
    for (int j = 0; j < int(g.ys.size()); ++j)
        for (int i = 0; i < int(g.xs.size()); ++i)
            r.rows.push_back({fmt_real(g.xs[i]), fmt_real(g.ys[j]), fmt_db(g.db(j, i))});
    return r;
}

struct LobeMetrics
{
    int lobes = 0;
    std::vector<double> peak_x;     // lobe peaks along the cut
    std::vector<double> beamwidth;  // -3 dB width in x of each of the two strongest lobes
    double sidelobe_db = std::numeric_limits<double>::infinity(); // strongest lobe minus strongest other (non-main) lobe
};

// Analysis of a 1-D cut (dB values on increasing xs): local maxima, -3 dB widths, first-sidelobe level.
inline LobeMetrics lobe_metrics(const std::vector<double> &xs, const std::vector<double> &db, int main_lobes = 2)
{
    LobeMetrics m;
    const int n = int(xs.size());
    std::vector<int> peaks;
    for (int i = 0; i < n; ++i) {
        const bool left = i == 0 || db[i] > db[i - 1];
        const bool right = i == n - 1 || db[i] >= db[i + 1];
        if (left && right)
            peaks.push_back(i);
    }
    std::sort(peaks.begin(), peaks.end(), [&](int a, int b) { return db[a] > db[b]; });
    m.lobes = int(peaks.size());
    for (int k = 0; k < int(peaks.size()) && k < main_lobes; ++k) {
        const int p = peaks[k];
        const double half = db[p] - 3.0;
        int l = p, r = p;
        while (l > 0 && db[l - 1] >= half)
            --l;
        while (r < n - 1 && db[r + 1] >= half)
            ++r;
        auto cross = [&](int in, int out) {
            if (in == out)
                return xs[in];
            const double f = (db[in] - half) / (db[in] - db[out]);
            return xs[in] + f * (xs[out] - xs[in]);
        };
        const double xl = l > 0 ? cross(l, l - 1) : xs[0];
        const double xr = r < n - 1 ? cross(r, r + 1) : xs[n - 1];
        m.peak_x.push_back(xs[p]);
        m.beamwidth.push_back(xr - xl);
    }
    if (int(peaks.size()) > main_lobes)
        m.sidelobe_db = db[peaks[0]] - db[peaks[main_lobes]];
    return m;
}

// Per-scheme sum rate averaged over trials at the nominal power.
inline std::vector<double> mean_sum_rates(const ScenarioConfig &c, int K, int M, int N, const std::vector<Scheme> &schemes)
{
    const size_t S = schemes.size();
    std::vector<double> per(size_t(c.trials) * S, 0.0);
    parallel_for(c.trials, [&](int t) {
        auto rng = trial_rng(c.seed, std::uint64_t(t));
        const Scenario sc = build_scenario(c, draw_users(c, K, rng), M, N, c.power_w);
        for (size_t s = 0; s < S; ++s)
            per[size_t(t) * S + s] = optimize_scenario(sc, schemes[s], c.solver).sum_rate;
    });
    std::vector<double> acc(S, 0.0);
    for (size_t s = 0; s < S; ++s) {
        for (int t = 0; t < c.trials; ++t)
            acc[s] += per[size_t(t) * S + s];
        acc[s] /= c.trials;
    }
    return acc;
}

inline ExperimentResult run_scaling(const ScenarioConfig &c, const std::vector<int> &m_grid, const std::vector<int> &n_grid,
                                    const std::vector<int> &k_grid, const std::vector<Scheme> &schemes)
{
    ExperimentResult r = make_result("scaling", c, {"sweep", "M", "N", "K", "scheme", "sum_rate"});
    for (int M : m_grid)
        for (int N : n_grid) {
            const std::vector<double> acc = mean_sum_rates(c, c.K, M, N, schemes);
            for (size_t s = 0; s < schemes.size(); ++s)
                r.rows.push_back({"MN", std::to_string(M), std::to_string(N), std::to_string(c.K), scheme_name(schemes[s]),
                                  fmt_rate(acc[s])});
        }
    for (int K : k_grid) {
        const std::vector<double> acc = mean_sum_rates(c, K, c.M, c.N, schemes);
        for (size_t s = 0; s < schemes.size(); ++s)
            r.rows.push_back({"K", std::to_string(c.M), std::to_string(c.N), std::to_string(K), scheme_name(schemes[s]),
                              fmt_rate(acc[s])});
    }
    return r;
}

// Shared-PA sum-rate profiles for the narrow (4.5, 5.5) and wide (3, 7) pairs on the waveguide axis.
inline ExperimentResult run_profile(const ScenarioConfig &c, double step = 0.01)
{
    ExperimentResult r = make_result("profile", c, {"pair", "x", "sum_rate", "scheme"});
    const LinkModel L = single_link(c, 0.0);
    std::vector<double> xs;
    for (int i = 0; i * step <= c.dx + 1e-12; ++i)
        xs.push_back(std::min(i * step, c.dx));
    const std::pair<const char *, std::pair<double, double>> pairs[] = {{"narrow", {4.5, 5.5}}, {"wide", {3.0, 7.0}}};
    for (const auto &[name, xy] : pairs) {
        TwoUserInputs in;
        in.user1 = Vec3(xy.first, 0.0, 0.0);
        in.user2 = Vec3(xy.second, 0.0, 0.0);
        in.P = c.power_w;
        in.sigma1 = in.sigma2 = c.sigma2;
        for (const auto &p : sum_rate_profile(L, in, xs)) {
            r.rows.push_back({name, fmt_real(p.x), fmt_rate(p.mm), "MM"});
            r.rows.push_back({name, fmt_real(p.x), fmt_rate(p.sm_tdma), "SM-TDMA"});
        }
    }
    return r;
}

} // namespace mmpass
