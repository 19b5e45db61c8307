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

#include "isac/array_model.hpp"
#include "isac/beamspace.hpp"
#include "isac/config.hpp"
#include "isac/harness.hpp"
#include "isac/reports.hpp"
#include "isac/sparse.hpp"

#include <fstream>
#include <new>
#include <sstream>

struct isac_config
{
    isac::ConfigEntries entries;
};

struct isac_buffer
{
    std::string text;
};

namespace
{
    thread_local std::string last_error;

    isac_status status_of(isac::ErrorKind kind)
    {
        switch (kind)
        {
        case isac::ErrorKind::InvalidArgument: return ISAC_ERR_INVALID_ARGUMENT;
        case isac::ErrorKind::Config:
        case isac::ErrorKind::InvalidScene: return ISAC_ERR_CONFIG;
        default: return ISAC_ERR_NUMERICAL;
        }
    }

    template <typename F>
    isac_status guarded(F &&f)
    {
        try
        {
            f();
            last_error.clear();
            return ISAC_OK;
        }
        catch (const isac::Error &e)
        {
            last_error = e.what();
            return status_of(e.kind());
        }
        catch (const std::bad_alloc &)
        {
            last_error = "out of memory";
            return ISAC_ERR_INTERNAL;
        }
        catch (const std::exception &e)
        {
            last_error = e.what();
            return ISAC_ERR_INTERNAL;
        }
        catch (...)
        {
            last_error = "unknown failure";
            return ISAC_ERR_INTERNAL;
        }
    }

    void need(const void *p, const char *what)
    {
        if (!p)
            isac::fail(isac::ErrorKind::InvalidArgument, std::string(what) + " must not be NULL");
    }

    // Parses `text` into a copy so a bad file leaves the config untouched.
    void merge(isac_config *cfg, const std::string &text)
    {
        isac::ConfigEntries merged = cfg->entries;
        const isac::ConfigEntries parsed = isac::parse_entries(text);
        for (const auto &[key, values] : parsed.items())
            for (const auto &v : values)
                merged.append(key, v);
        isac::build_config(merged);
        cfg->entries = std::move(merged);
    }

    void emit(isac_buffer **out, std::string text)
    {
        need(out, "out");
        *out = new isac_buffer{std::move(text)};
    }
}

extern "C" {

const char *isac_version(void)
{
    return "0.1.0";
}

const char *isac_last_error(void)
{
    return last_error.c_str();
}

isac_status isac_config_create(isac_config **out)
{
    return guarded([&] {
        need(out, "out");
        *out = new isac_config{};
    });
}

void isac_config_destroy(isac_config *cfg)
{
    delete cfg;
}

isac_status isac_config_load_file(isac_config *cfg, const char *path)
{
    return guarded([&] {
        need(cfg, "cfg");
        need(path, "path");
        std::ifstream in(path, std::ios::binary);
        if (!in)
            isac::fail(isac::ErrorKind::Config, std::string("cannot read config file '") + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        merge(cfg, ss.str());
    });
}

isac_status isac_config_parse(isac_config *cfg, const char *text)
{
    return guarded([&] {
        need(cfg, "cfg");
        need(text, "text");
        merge(cfg, text);
    });
}

isac_status isac_config_set(isac_config *cfg, const char *key, const char *value)
{
    return guarded([&] {
        need(cfg, "cfg");
        need(key, "key");
        need(value, "value");
        isac::ConfigEntries next = cfg->entries;
        next.replace(key, value);
        isac::build_config(next);
        cfg->entries = std::move(next);
    });
}

isac_status isac_config_override(isac_config *cfg, const char *key_value)
{
    return guarded([&] {
        need(cfg, "cfg");
        need(key_value, "key_value");
        const auto [key, value] = isac::split_override(key_value);
        isac::ConfigEntries next = cfg->entries;
        next.replace(key, value);
        isac::build_config(next);
        cfg->entries = std::move(next);
    });
}

isac_status isac_config_dump(const isac_config *cfg, isac_buffer **out)
{
    return guarded([&] {
        need(cfg, "cfg");
        emit(out, isac::echo_header(isac::build_config(cfg->entries)));
    });
}

const char *isac_buffer_data(const isac_buffer *buf)
{
    return buf ? buf->text.c_str() : "";
}

size_t isac_buffer_size(const isac_buffer *buf)
{
    return buf ? buf->text.size() : 0;
}

void isac_buffer_destroy(isac_buffer *buf)
{
    delete buf;
}

isac_status isac_run_sweep(const isac_config *cfg, unsigned threads, isac_buffer **out)
{
    return guarded([&] {
        need(cfg, "cfg");
        need(out, "out");
        const auto c = isac::build_config(cfg->entries);
        emit(out, isac::format_csv(isac::run_sweep(c, threads), c));
    });
}

isac_status isac_run_estimate(const isac_config *cfg, isac_buffer **out)
{
    return guarded([&] {
        need(cfg, "cfg");
        need(out, "out");
        emit(out, isac::estimate_report(isac::build_config(cfg->entries)));
    });
}

isac_status isac_run_refine(const isac_config *cfg, isac_buffer **out)
{
    return guarded([&] {
        need(cfg, "cfg");
        need(out, "out");
        emit(out, isac::refine_report(isac::build_config(cfg->entries)));
    });
}

isac_status isac_run_crlb(const isac_config *cfg, isac_buffer **out)
{
    return guarded([&] {
        need(cfg, "cfg");
        need(out, "out");
        emit(out, isac::crlb_report(isac::build_config(cfg->entries)));
    });
}

isac_status isac_run_selftest(isac_buffer **out, int *all_passed)
{
    return guarded([&] {
        need(out, "out");
        need(all_passed, "all_passed");
        const auto checks = isac::run_selftest();
        bool ok = true;
        for (const auto &c : checks)
            ok = ok && c.passed;
        emit(out, isac::format_selftest(checks));
        *all_passed = ok ? 1 : 0;
    });
}

isac_status isac_steering(double theta, int m, double *out)
{
    return guarded([&] {
        need(out, "out");
        const isac::CVec a = isac::steering(theta, m);
        for (int k = 0; k < m; ++k)
        {
            out[2 * k] = a[k].real();
            out[2 * k + 1] = a[k].imag();
        }
    });
}

isac_status isac_lobe_radius(int g_rx, int *out)
{
    return guarded([&] {
        need(out, "out");
        *out = isac::lobe_radius(g_rx);
    });
}

isac_status isac_diag_index_set(int g_rx, int g_tx, int *out, size_t capacity, size_t *count)
{
    return guarded([&] {
        need(count, "count");
        if (capacity > 0)
            need(out, "out");
        const auto j = isac::diag_index_set(g_rx, g_tx);
        *count = j.size();
        for (size_t i = 0; i < j.size() && i < capacity; ++i)
            out[i] = j[i];
    });
}

isac_status isac_srp(const int *outcomes, size_t n, double *out)
{
    return guarded([&] {
        need(out, "out");
        if (n > 0)
            need(outcomes, "outcomes");
        std::vector<bool> v(n);
        for (size_t i = 0; i < n; ++i)
            v[i] = outcomes[i] != 0;
        *out = isac::srp(v);
    });
}

isac_status isac_rmse(const double *estimates, const double *truths, size_t n, double *out)
{
    return guarded([&] {
        need(out, "out");
        if (n > 0)
        {
            need(estimates, "estimates");
            need(truths, "truths");
        }
        *out = isac::rmse(std::span<const double>(estimates, n), std::span<const double>(truths, n));
    });
}

}
