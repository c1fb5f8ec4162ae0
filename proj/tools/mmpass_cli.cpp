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


// Command-line driver for the experiments and the check suites.

#include "mmpass/checks.hpp"
#include "mmpass/mmpass.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <optional>

namespace {

struct CommonArgs
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::vector<std::string> schemes;
    std::optional<int> trials;
};

void add_common(CLI::App *cmd, CommonArgs &a)
{
    cmd->add_option("--config", a.config, "INI config file (defaults when omitted)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", a.seed, "RNG seed (overrides [run] seed)");
    cmd->add_option("--out-dir", a.out_dir, "output directory (else $MMPASS_OUT_DIR, else .)");
    cmd->add_option("--scheme", a.schemes, "scheme, repeatable: PA-MM DP-MM PI-MM PA-SM PI-SM");
    cmd->add_option("--trials", a.trials, "Monte Carlo trials (overrides the config)")->check(CLI::PositiveNumber);
}

mmpass::ScenarioConfig resolve(const CommonArgs &a, bool outage)
{
    mmpass::ScenarioConfig c = a.config.empty() ? mmpass::parse_config("") : mmpass::load_config(a.config);
    if (a.seed)
        c.seed = *a.seed;
    if (a.trials) {
        if (outage)
            c.outage_trials = *a.trials;
        else
            c.trials = *a.trials;
    }
    if (!a.schemes.empty()) {
        c.schemes.clear();
        for (const auto &s : a.schemes) {
            try {
                c.schemes.push_back(mmpass::parse_scheme(s));
            } catch (const std::invalid_argument &e) {
                throw mmpass::config_error(std::string("--scheme: ") + e.what());
            }
        }
    }
    mmpass::finalize_config(c);
    return c;
}

std::filesystem::path out_dir(const CommonArgs &a)
{
    if (!a.out_dir.empty())
        return a.out_dir;
    if (const char *env = std::getenv("MMPASS_OUT_DIR"); env && *env)
        return env;
    return ".";
}

void emit(const CommonArgs &a, const mmpass::ExperimentResult &r)
{
    const auto dir = out_dir(a);
    std::filesystem::create_directories(dir);
    const auto path = dir / (r.id + ".csv");
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot write " + path.string());
    mmpass::write_csv(f, r);
    if (!f)
        throw std::runtime_error("write failed for " + path.string());
    std::cout << "wrote " << path.string() << " (" << r.rows.size() << " rows, config " << r.hash << ", seed " << r.seed
              << ")\n";
}

int report(const std::vector<mmpass::checks::CheckResult> &rs)
{
    int failed = 0;
    for (const auto &r : rs) {
        mmpass::checks::print_result(std::cout, r);
        failed += !r.passed;
    }
    std::cout << rs.size() - failed << "/" << rs.size() << " checks passed\n";
    return failed ? 1 : 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"mmpass: multi-mode pinching-antenna channel simulator and optimizer"};
    app.require_subcommand(1);

    CommonArgs a;
    std::vector<double> powers;
    double threshold = -1.0;
    int nx = 0, ny = 0;
    double step = 0.01;

    auto *rvp = app.add_subcommand("rate-vs-power", "mean sum rate per scheme over a power grid");
    add_common(rvp, a);
    rvp->add_option("--powers", powers, "power grid in dBW (overrides [run] powers_dbw)");
    auto *out = app.add_subcommand("outage", "two-user outage, multi-mode vs single-mode TDMA");
    add_common(out, a);
    out->add_option("--powers", powers, "power grid in dBW");
    out->add_option("--threshold", threshold, "rate threshold in bit/s/Hz")->check(CLI::NonNegativeNumber);
    auto *conv = app.add_subcommand("convergence", "per-iteration sum-rate traces");
    add_common(conv, a);
    auto *fmap = app.add_subcommand("field-map", "dual-mode radiated intensity on the ground plane");
    add_common(fmap, a);
    fmap->add_option("--nx", nx, "grid points along x")->check(CLI::Range(2, 100000));
    fmap->add_option("--ny", ny, "grid points along y")->check(CLI::Range(2, 100000));
    auto *scal = app.add_subcommand("scaling", "sum rate versus M, N and K");
    add_common(scal, a);
    auto *prof = app.add_subcommand("profile", "shared-PA sum rate versus PA position for two user pairs");
    add_common(prof, a);
    prof->add_option("--step", step, "x grid step in m")->check(CLI::PositiveNumber);
    auto *val = app.add_subcommand("validate", "run the property suite");
    add_common(val, a);
    auto *orc = app.add_subcommand("oracle", "run the brute-force cross-checks");
    add_common(orc, a);

    CLI11_PARSE(app, argc, argv);

    try {
        if (rvp->parsed()) {
            const auto c = resolve(a, false);
            emit(a, mmpass::run_rate_vs_power(c, powers.empty() ? c.powers_dbw : powers, c.schemes));
        } else if (out->parsed()) {
            auto c = resolve(a, true);
            if (threshold >= 0.0)
                c.outage_threshold = threshold;
            if (!powers.empty())
                c.outage_powers_dbw = powers;
            const auto grid = c.outage_powers_dbw.empty() ? mmpass::default_outage_powers() : c.outage_powers_dbw;
            emit(a, mmpass::run_outage(c, grid, c.outage_threshold, c.outage_trials));
        } else if (conv->parsed()) {
            const auto c = resolve(a, false);
            emit(a, mmpass::run_convergence(c, c.schemes));
        } else if (fmap->parsed()) {
            const auto c = resolve(a, false);
            emit(a, mmpass::run_field_map(c, nx ? nx : c.field_nx, ny ? ny : c.field_ny));
        } else if (scal->parsed()) {
            const auto c = resolve(a, false);
            emit(a, mmpass::run_scaling(c, c.m_grid, c.n_grid, c.k_grid, c.schemes));
        } else if (prof->parsed()) {
            const auto c = resolve(a, false);
            emit(a, mmpass::run_profile(c, step));
        } else if (val->parsed()) {
            return report(mmpass::checks::property_suite(resolve(a, false)));
        } else if (orc->parsed()) {
            return report(mmpass::checks::oracle_suite(resolve(a, false)));
        }
    } catch (const mmpass::config_error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
