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

#include <atomic>
#include <functional>
#include <iostream>
#include <string>

namespace mmpass {

// Runtime warnings go through a replaceable sink. Default prints to stderr.
using WarningSink = std::function<void(const std::string &)>;

inline WarningSink &warning_sink()
{
    static WarningSink sink = [](const std::string &msg) { std::cerr << "mmpass warning: " << msg << '\n'; };
    return sink;
}

inline std::atomic<long> &warning_count()
{
    static std::atomic<long> n{0};
    return n;
}

inline void warn(const std::string &msg)
{
    ++warning_count();
    if (warning_sink())
        warning_sink()(msg);
}

} // namespace mmpass
