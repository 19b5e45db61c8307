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

#include "isac/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace isac
{
    namespace
    {
        [[noreturn]] void config_error(const std::string &key, const std::string &msg)
        {
            fail(ErrorKind::Config, "config key '" + key + "': " + msg);
        }

        std::string trim(std::string_view s)
        {
            const auto b = s.find_first_not_of(" \t\r\n");
            if (b == std::string_view::npos)
                return {};
            const auto e = s.find_last_not_of(" \t\r\n");
            return std::string(s.substr(b, e - b + 1));
        }

        std::vector<std::string> split_items(std::string_view s)
        {
            std::vector<std::string> out;
            std::string cur;
            for (char c : s)
            {
                if (c == ',' || c == ' ' || c == '\t')
                {
                    if (!cur.empty())
                        out.push_back(cur);
                    cur.clear();
                }
                else
                    cur.push_back(c);
            }
            if (!cur.empty())
                out.push_back(cur);
            return out;
        }

        double to_real(const std::string &key, const std::string &s)
        {
            double v = 0.0;
            const auto *end = s.data() + s.size();
            const auto res = std::from_chars(s.data(), end, v);
            if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v))
                config_error(key, "'" + s + "' is not a number");
            return v;
        }

        long long to_integer(const std::string &key, const std::string &s)
        {
            long long v = 0;
            const auto *end = s.data() + s.size();
            const auto res = std::from_chars(s.data(), end, v);
            if (res.ec != std::errc() || res.ptr != end)
                config_error(key, "'" + s + "' is not an integer");
            return v;
        }

        // Items of every value, with start:step:stop ranges expanded.
        std::vector<double> real_list(const std::string &key, const std::vector<std::string> &values)
        {
            std::vector<double> out;
            for (const auto &v : values)
                for (const auto &item : split_items(v))
                {
                    const auto c1 = item.find(':');
                    if (c1 == std::string::npos)
                    {
                        out.push_back(to_real(key, item));
                        continue;
                    }
                    const auto c2 = item.find(':', c1 + 1);
                    if (c2 == std::string::npos)
                        config_error(key, "range must be start:step:stop");
                    const double a = to_real(key, item.substr(0, c1));
                    const double step = to_real(key, item.substr(c1 + 1, c2 - c1 - 1));
                    const double b = to_real(key, item.substr(c2 + 1));
                    if (!(step > 0.0) || b < a)
                        config_error(key, "range needs a positive step and stop >= start");
                    const auto count = static_cast<long long>(std::floor((b - a) / step + 1e-9));
                    for (long long i = 0; i <= count; ++i)
                        out.push_back(a + step * static_cast<double>(i));
                }
            return out;
        }

        std::string last(const std::string &key, const std::vector<std::string> &values)
        {
            if (values.empty())
                config_error(key, "missing value");
            return trim(values.back());
        }

        int positive_int(const std::string &key, const std::vector<std::string> &values)
        {
            const long long v = to_integer(key, last(key, values));
            if (v < 1 || v > 1'000'000'000)
                config_error(key, "must be a positive integer");
            return static_cast<int>(v);
        }

        bool to_bool(const std::string &key, const std::string &s)
        {
            if (s == "true" || s == "1" || s == "yes" || s == "on")
                return true;
            if (s == "false" || s == "0" || s == "no" || s == "off")
                return false;
            config_error(key, "'" + s + "' is not a boolean");
        }

        PathParams parse_path(const std::string &key, const std::string &value, bool sensing)
        {
            const auto items = split_items(value);
            if (items.size() != 3 && items.size() != 4)
                config_error(key, "expected 'gain_re, gain_im, aoa_deg[, aod_deg]'");
            PathParams p;
            p.gain = Complex(to_real(key, items[0]), to_real(key, items[1]));
            p.aoa = deg_to_rad(to_real(key, items[2]));
            p.aod = items.size() == 4 ? deg_to_rad(to_real(key, items[3])) : p.aoa;
            if (std::abs(p.aoa) > pi / 2.0 || std::abs(p.aod) > pi / 2.0)
                config_error(key, "angles must lie in [-90, 90) degrees");
            if (sensing && std::abs(p.aoa - p.aod) > 1e-12)
                config_error(key, "sensing paths need aoa == aod");
            return p;
        }

        std::string path_line(const PathParams &p, bool sensing)
        {
            std::string s = format_real(p.gain.real()) + ", " + format_real(p.gain.imag()) + ", " +
                            format_real(rad_to_deg(p.aoa));
            if (!sensing)
                s += ", " + format_real(rad_to_deg(p.aod));
            return s;
        }

        template <typename T, typename F>
        std::string join(const std::vector<T> &v, F f)
        {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i)
            {
                if (i)
                    s += ", ";
                s += f(v[i]);
            }
            return s;
        }
    }

    const char *to_string(Method m) noexcept
    {
        switch (m)
        {
        case Method::ProposedOmp: return "proposed_omp";
        case Method::ConventionalOmp: return "conventional_omp";
        case Method::Esprit: return "esprit";
        case Method::SageJoint: return "sage_joint";
        case Method::SageComm: return "sage_comm";
        case Method::SageSens: return "sage_sens";
        }
        return "?";
    }

    Method parse_method(std::string_view tag)
    {
        for (Method m : all_methods)
            if (tag == to_string(m))
                return m;
        fail(ErrorKind::Config, "config key 'methods': unknown method '" + std::string(tag) + "'");
    }

    bool is_coarse(Method m) noexcept
    {
        return m == Method::ProposedOmp || m == Method::ConventionalOmp || m == Method::Esprit;
    }

    ExperimentConfig::ExperimentConfig()
    {
        for (int s = -20; s <= 10; s += 2)
            snr_grid_db.push_back(static_cast<double>(s));
    }

    void ExperimentConfig::validate() const
    {
        try
        {
            array.validate();
        }
        catch (const Error &e)
        {
            fail(ErrorKind::Config, std::string("config keys 'n_tx/n_rx/g_tx/g_rx': ") + e.what());
        }
        if (snr_grid_db.empty())
            config_error("snr_db", "list must not be empty");
        if (n_subcarriers_list.empty())
            config_error("n_subcarriers", "list must not be empty");
        for (int n : n_subcarriers_list)
            if (n < 1)
                config_error("n_subcarriers", "entries must be positive");
        if (trials < 1)
            config_error("trials", "must be >= 1");
        if (methods.empty())
            config_error("methods", "list must not be empty");
        if (k_paths < 1)
            config_error("k_paths", "must be >= 1");
        if (lobe_radius_override && *lobe_radius_override < 0)
            config_error("lobe_radius_override", "must be >= 0");
        if (sage_outer_iters < 1)
            config_error("sage_outer_iters", "must be >= 1");
        if (!(sage_step_angle > 0.0))
            config_error("sage_step_angle", "must be positive");
        if (!(sage_step_gain > 0.0))
            config_error("sage_step_gain", "must be positive");
        if (!(sage_init_comm_weight >= 0.0))
            config_error("sage_init_comm_weight", "must be >= 0");
        if (min_separation && *min_separation < 1)
            config_error("min_separation", "must be >= 1");
        if (!(los_power_ratio > 0.0))
            config_error("los_power_ratio", "must be positive");
        if (!(angle_sector > 0.0) || angle_sector > 1.0)
            config_error("angle_sector", "must lie in (0, 1]");
        if (!sensing_paths.empty() && !comm_paths.empty() && sensing_paths.size() != comm_paths.size())
            config_error("comm_path", "needs as many entries as sensing_path");
    }

    void ConfigEntries::append(const std::string &key, const std::string &value)
    {
        for (auto &[k, v] : items_)
            if (k == key)
            {
                v.push_back(value);
                return;
            }
        items_.push_back({key, {value}});
    }

    void ConfigEntries::replace(const std::string &key, const std::string &value)
    {
        for (auto &[k, v] : items_)
            if (k == key)
            {
                v.assign(1, value);
                return;
            }
        items_.push_back({key, {value}});
    }

    ConfigEntries parse_entries(std::string_view text)
    {
        ConfigEntries entries;
        std::istringstream in{std::string(text)};
        std::string line;
        int lineno = 0;
        while (std::getline(in, line))
        {
            ++lineno;
            if (const auto hash = line.find('#'); hash != std::string::npos)
                line.erase(hash);
            const std::string t = trim(line);
            if (t.empty())
                continue;
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                fail(ErrorKind::Config, "config line " + std::to_string(lineno) + ": expected 'key = value'");
            const std::string key = trim(std::string_view(t).substr(0, eq));
            if (key.empty())
                fail(ErrorKind::Config, "config line " + std::to_string(lineno) + ": empty key");
            entries.append(key, trim(std::string_view(t).substr(eq + 1)));
        }
        return entries;
    }

    std::pair<std::string, std::string> split_override(std::string_view kv)
    {
        const auto eq = kv.find('=');
        if (eq == std::string_view::npos)
            fail(ErrorKind::Config, "override '" + std::string(kv) + "' must look like key=value");
        std::string key = trim(kv.substr(0, eq));
        if (key.empty())
            fail(ErrorKind::Config, "override '" + std::string(kv) + "' has an empty key");
        return {key, trim(kv.substr(eq + 1))};
    }

    ExperimentConfig build_config(const ConfigEntries &entries)
    {
        ExperimentConfig cfg;
        for (const auto &[key, values] : entries.items())
        {
            if (key == "n_tx")
                cfg.array.n_tx = positive_int(key, values);
            else if (key == "n_rx")
                cfg.array.n_rx = positive_int(key, values);
            else if (key == "g_tx")
                cfg.array.g_tx = positive_int(key, values);
            else if (key == "g_rx")
                cfg.array.g_rx = positive_int(key, values);
            else if (key == "snr_db")
                cfg.snr_grid_db = real_list(key, values);
            else if (key == "n_subcarriers")
            {
                cfg.n_subcarriers_list.clear();
                for (double v : real_list(key, values))
                {
                    if (v != std::floor(v) || v < 1 || v > 1e6)
                        config_error(key, "entries must be positive integers");
                    cfg.n_subcarriers_list.push_back(static_cast<int>(v));
                }
            }
            else if (key == "trials")
                cfg.trials = positive_int(key, values);
            else if (key == "seed")
            {
                const std::string s = last(key, values);
                std::uint64_t v = 0;
                const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
                if (res.ec != std::errc() || res.ptr != s.data() + s.size())
                    config_error(key, "'" + s + "' is not an unsigned 64-bit integer");
                cfg.seed = v;
            }
            else if (key == "methods")
            {
                cfg.methods.clear();
                for (const auto &v : values)
                    for (const auto &item : split_items(v))
                    {
                        const Method m = parse_method(item);
                        if (std::find(cfg.methods.begin(), cfg.methods.end(), m) == cfg.methods.end())
                            cfg.methods.push_back(m);
                    }
                std::sort(cfg.methods.begin(), cfg.methods.end());
            }
            else if (key == "k_paths")
                cfg.k_paths = positive_int(key, values);
            else if (key == "lobe_radius_override")
            {
                const std::string s = last(key, values);
                if (s == "none" || s.empty())
                    cfg.lobe_radius_override.reset();
                else
                {
                    const long long v = to_integer(key, s);
                    if (v < 0 || v > 1'000'000)
                        config_error(key, "must be a nonnegative integer");
                    cfg.lobe_radius_override = static_cast<int>(v);
                }
            }
            else if (key == "sage_outer_iters")
                cfg.sage_outer_iters = positive_int(key, values);
            else if (key == "sage_step_angle")
                cfg.sage_step_angle = to_real(key, last(key, values));
            else if (key == "sage_step_gain")
                cfg.sage_step_gain = to_real(key, last(key, values));
            else if (key == "sage_init_comm_weight")
                cfg.sage_init_comm_weight = to_real(key, last(key, values));
            else if (key == "min_separation")
            {
                const std::string s = last(key, values);
                if (s == "auto" || s.empty())
                    cfg.min_separation.reset();
                else
                {
                    const long long v = to_integer(key, s);
                    if (v < 1 || v > 1'000'000)
                        config_error(key, "must be a positive integer or 'auto'");
                    cfg.min_separation = static_cast<int>(v);
                }
            }
            else if (key == "los_power_ratio")
                cfg.los_power_ratio = to_real(key, last(key, values));
            else if (key == "angle_sector")
                cfg.angle_sector = to_real(key, last(key, values));
            else if (key == "sensing_path")
            {
                cfg.sensing_paths.clear();
                for (const auto &v : values)
                    cfg.sensing_paths.push_back(parse_path(key, v, true));
            }
            else if (key == "comm_path")
            {
                cfg.comm_paths.clear();
                for (const auto &v : values)
                    cfg.comm_paths.push_back(parse_path(key, v, false));
            }
            else if (key == "crlb_balance")
                cfg.crlb_balance = to_bool(key, last(key, values));
            else
                fail(ErrorKind::Config, "config key '" + key + "': unknown key");
        }
        cfg.validate();
        return cfg;
    }

    ExperimentConfig parse_config(std::string_view text)
    {
        return build_config(parse_entries(text));
    }

    std::string format_real(double v)
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.9g", v);
        return buf;
    }

    std::vector<std::string> effective_lines(const ExperimentConfig &cfg)
    {
        std::vector<std::string> out;
        out.push_back("n_tx = " + std::to_string(cfg.array.n_tx));
        out.push_back("n_rx = " + std::to_string(cfg.array.n_rx));
        out.push_back("g_tx = " + std::to_string(cfg.array.g_tx));
        out.push_back("g_rx = " + std::to_string(cfg.array.g_rx));
        out.push_back("snr_db = " + join(cfg.snr_grid_db, format_real));
        out.push_back("n_subcarriers = " + join(cfg.n_subcarriers_list, [](int n) { return std::to_string(n); }));
        out.push_back("trials = " + std::to_string(cfg.trials));
        out.push_back("seed = " + std::to_string(cfg.seed));
        out.push_back("methods = " + join(cfg.methods, [](Method m) { return std::string(to_string(m)); }));
        out.push_back("k_paths = " + std::to_string(cfg.k_paths));
        out.push_back("lobe_radius_override = " +
                      (cfg.lobe_radius_override ? std::to_string(*cfg.lobe_radius_override) : std::string("none")));
        out.push_back("sage_outer_iters = " + std::to_string(cfg.sage_outer_iters));
        out.push_back("sage_step_angle = " + format_real(cfg.sage_step_angle));
        out.push_back("sage_step_gain = " + format_real(cfg.sage_step_gain));
        out.push_back("sage_init_comm_weight = " + format_real(cfg.sage_init_comm_weight));
        out.push_back("min_separation = " +
                      (cfg.min_separation ? std::to_string(*cfg.min_separation) : std::string("auto")));
        out.push_back("los_power_ratio = " + format_real(cfg.los_power_ratio));
        out.push_back("angle_sector = " + format_real(cfg.angle_sector));
        for (const auto &p : cfg.sensing_paths)
            out.push_back("sensing_path = " + path_line(p, true));
        for (const auto &p : cfg.comm_paths)
            out.push_back("comm_path = " + path_line(p, false));
        if (cfg.crlb_balance)
            out.push_back("crlb_balance = true");
        return out;
    }

    std::string echo_header(const ExperimentConfig &cfg)
    {
        std::string s;
        for (const auto &l : effective_lines(cfg))
            s += "# " + l + "\n";
        return s;
    }
}
