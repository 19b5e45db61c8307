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

#include "isac/isac.h"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace
{
    int exit_code(isac_status s)
    {
        switch (s)
        {
        case ISAC_OK: return 0;
        case ISAC_ERR_CONFIG:
        case ISAC_ERR_INVALID_ARGUMENT: return 2;
        case ISAC_ERR_NUMERICAL: return 3;
        default: return 1;
        }
    }

    int report(isac_status s)
    {
        std::cerr << "isac: " << isac_last_error() << "\n";
        return exit_code(s);
    }

    bool write_output(const std::string &path, const isac_buffer *buf)
    {
        if (path.empty() || path == "-")
        {
            std::fwrite(isac_buffer_data(buf), 1, isac_buffer_size(buf), stdout);
            return std::fflush(stdout) == 0;
        }
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(isac_buffer_data(buf), static_cast<std::streamsize>(isac_buffer_size(buf)));
        return static_cast<bool>(out);
    }

    struct ConfigHandle
    {
        isac_config *p = nullptr;
        ~ConfigHandle() { isac_config_destroy(p); }
    };

    struct BufferHandle
    {
        isac_buffer *p = nullptr;
        ~BufferHandle() { isac_buffer_destroy(p); }
    };
}

int main(int argc, char **argv)
{
    CLI::App app{"Sensing-aided channel parameter estimation for mmWave ISAC"};
    app.set_version_flag("--version", std::string(isac_version()));

    std::string verb;
    std::string config_path;
    std::string out_path;
    std::vector<std::string> overrides;
    unsigned threads = 0;
    std::optional<std::uint64_t> seed;

    app.add_option("verb", verb, "sweep | estimate | refine | crlb | selftest")
        ->required()
        ->check(CLI::IsMember({"sweep", "estimate", "refine", "crlb", "selftest"}));
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--out", out_path, "output file (stdout when omitted)");
    app.add_option("--override", overrides, "key=value, applied after the file; repeatable");
    app.add_option("--threads", threads, "worker threads for sweep (0 = all cores)");
    app.add_option("--seed", seed, "master seed, same as --override seed=N");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    BufferHandle buf;
    isac_status s = ISAC_OK;

    if (verb == "selftest")
    {
        int all_passed = 0;
        s = isac_run_selftest(&buf.p, &all_passed);
        if (s != ISAC_OK)
            return report(s);
        if (!write_output(out_path, buf.p))
        {
            std::cerr << "isac: cannot write '" << out_path << "'\n";
            return 1;
        }
        return all_passed ? 0 : 1;
    }

    ConfigHandle cfg;
    if ((s = isac_config_create(&cfg.p)) != ISAC_OK)
        return report(s);
    if (!config_path.empty() && (s = isac_config_load_file(cfg.p, config_path.c_str())) != ISAC_OK)
        return report(s);
    for (const auto &kv : overrides)
        if ((s = isac_config_override(cfg.p, kv.c_str())) != ISAC_OK)
            return report(s);
    if (seed && (s = isac_config_set(cfg.p, "seed", std::to_string(*seed).c_str())) != ISAC_OK)
        return report(s);

    if (verb == "sweep")
        s = isac_run_sweep(cfg.p, threads, &buf.p);
    else if (verb == "estimate")
        s = isac_run_estimate(cfg.p, &buf.p);
    else if (verb == "refine")
        s = isac_run_refine(cfg.p, &buf.p);
    else
        s = isac_run_crlb(cfg.p, &buf.p);
    if (s != ISAC_OK)
        return report(s);

    if (!write_output(out_path, buf.p))
    {
        std::cerr << "isac: cannot write '" << out_path << "'\n";
        return 1;
    }
    return 0;
}
