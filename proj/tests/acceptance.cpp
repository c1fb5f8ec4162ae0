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


// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: mmpass_acceptance [config.ini]

#include "mmpass/checks.hpp"

#include <functional>
#include <iostream>

int main(int argc, char **argv)
{
    using namespace mmpass;
    ScenarioConfig c;
    try {
        c = argc > 1 ? load_config(argv[1]) : parse_config("");
    } catch (const std::exception &e) {
        std::cerr << "config: " << e.what() << '\n';
        return 2;
    }
    const std::vector<std::function<checks::CheckResult(const ScenarioConfig &)>> criteria{
        checks::orientation_oracle,
        checks::position_oracle,
        checks::gradient_check,
        checks::shared_position_oracle,
        checks::fp_properties,
        checks::hungarian_oracle,
        checks::polarization_properties,
        [](const ScenarioConfig &cc) { return checks::scheme_ordering(cc); },
        checks::profile_check,
        [](const ScenarioConfig &cc) { return checks::outage_check(cc); },
        checks::field_map_check,
    };
    int failed = 0;
    for (const auto &run : criteria) {
        const checks::CheckResult r = run(c);
        checks::print_result(std::cout, r);
        std::cout.flush();
        failed += !r.passed;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
    return failed ? 1 : 0;
}
