// SPDX-License-Identifier: Apache-2.0
//
// isac-est: sensing-aided channel parameter estimation for mmWave ISAC
// Copyright (C) 2026 isac-est contributors
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

#ifndef ISAC_CONFIG_HPP
#define ISAC_CONFIG_HPP

#include "isac/channel.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace isac
{
    enum class Method
    {
        ProposedOmp,
        ConventionalOmp,
        Esprit,
        SageJoint,
        SageComm,
        SageSens,
    };

    inline constexpr Method all_methods[] = {Method::ProposedOmp, Method::ConventionalOmp, Method::Esprit,
                                             Method::SageJoint,   Method::SageComm,        Method::SageSens};

    const char *to_string(Method m) noexcept;
    // Throws Config on an unknown tag.
    Method parse_method(std::string_view tag);
    bool is_coarse(Method m) noexcept;

    struct ExperimentConfig
    {
        ArrayConfig array;
        std::vector<double> snr_grid_db;
        std::vector<int> n_subcarriers_list{10, 20};
        int trials = 1000;
        std::uint64_t seed = 1;
        std::vector<Method> methods{std::begin(all_methods), std::end(all_methods)};
        int k_paths = 2;
        std::optional<int> lobe_radius_override;
        int sage_outer_iters = 100;
        double sage_step_angle = 1e-3;
        double sage_step_gain = 1e-2;
        // Weight of the comm residual when choosing the joint-mode initial AOAs.
        double sage_init_comm_weight = 0.5;

        // Scene sampling. Unset min_separation means 2(a+1)+1 diagonal steps, a the lobe radius.
        std::optional<int> min_separation;
        double los_power_ratio = 10.0;
        double angle_sector = 0.75;

        // Optional explicit scene used by estimate/refine/crlb instead of a sampled one.
        std::vector<PathParams> sensing_paths;
        std::vector<PathParams> comm_paths;
        // crlb only: pick the sensing noise so both subsystems carry equal AOA information.
        bool crlb_balance = false;

        ExperimentConfig();

        // Throws Config naming the offending key.
        void validate() const;
    };

    // Ordered key -> values store. Repeated keys in a file append; overrides replace.
    class ConfigEntries
    {
    public:
        void append(const std::string &key, const std::string &value);
        void replace(const std::string &key, const std::string &value);
        const std::vector<std::pair<std::string, std::vector<std::string>>> &items() const { return items_; }

    private:
        std::vector<std::pair<std::string, std::vector<std::string>>> items_;
    };

    // `key = value` lines, '#' comments, blank lines ignored.
    ConfigEntries parse_entries(std::string_view text);

    // "key=value"
    std::pair<std::string, std::string> split_override(std::string_view kv);

    ExperimentConfig build_config(const ConfigEntries &entries);
    ExperimentConfig parse_config(std::string_view text);

    // Canonical `key = value` lines of the effective configuration.
    std::vector<std::string> effective_lines(const ExperimentConfig &cfg);

    // effective_lines, each prefixed with "# " and LF-terminated.
    std::string echo_header(const ExperimentConfig &cfg);

    // %.9g
    std::string format_real(double v);

    constexpr double deg_to_rad(double deg) { return deg * pi / 180.0; }
    constexpr double rad_to_deg(double rad) { return rad * 180.0 / pi; }
}

#endif
