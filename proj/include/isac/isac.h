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

/* C interface to the isac-est library. All functions return an isac_status;
 * on failure isac_last_error() describes the problem for the calling thread. */

#ifndef ISAC_ISAC_H
#define ISAC_ISAC_H

#include <stddef.h>

#if defined(_WIN32)
#if defined(ISAC_BUILDING_LIBRARY)
#define ISAC_API __declspec(dllexport)
#else
#define ISAC_API __declspec(dllimport)
#endif
#else
#define ISAC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum isac_status
{
    ISAC_OK = 0,
    ISAC_ERR_INVALID_ARGUMENT = 1,
    ISAC_ERR_CONFIG = 2,
    ISAC_ERR_NUMERICAL = 3,
    ISAC_ERR_INTERNAL = 4
} isac_status;

typedef struct isac_config isac_config;
typedef struct isac_buffer isac_buffer;

ISAC_API const char *isac_version(void);

/* Message of the last failed call on this thread; "" if none. */
ISAC_API const char *isac_last_error(void);

/* A fresh configuration holding the defaults. */
ISAC_API isac_status isac_config_create(isac_config **out);
ISAC_API void isac_config_destroy(isac_config *cfg);

/* Appends the `key = value` lines of a file or string. Nothing changes on failure. */
ISAC_API isac_status isac_config_load_file(isac_config *cfg, const char *path);
ISAC_API isac_status isac_config_parse(isac_config *cfg, const char *text);

/* Replaces every earlier value of `key`. */
ISAC_API isac_status isac_config_set(isac_config *cfg, const char *key, const char *value);
/* "key=value" form of isac_config_set. */
ISAC_API isac_status isac_config_override(isac_config *cfg, const char *key_value);

/* Effective configuration as "# key = value" lines. */
ISAC_API isac_status isac_config_dump(const isac_config *cfg, isac_buffer **out);

/* Output text owned by a buffer. */
ISAC_API const char *isac_buffer_data(const isac_buffer *buf);
ISAC_API size_t isac_buffer_size(const isac_buffer *buf);
ISAC_API void isac_buffer_destroy(isac_buffer *buf);

/* threads == 0 uses every hardware thread. The CSV does not depend on it. */
ISAC_API isac_status isac_run_sweep(const isac_config *cfg, unsigned threads, isac_buffer **out);
ISAC_API isac_status isac_run_estimate(const isac_config *cfg, isac_buffer **out);
ISAC_API isac_status isac_run_refine(const isac_config *cfg, isac_buffer **out);
ISAC_API isac_status isac_run_crlb(const isac_config *cfg, isac_buffer **out);

/* *all_passed is 1 iff every invariant check passed. */
ISAC_API isac_status isac_run_selftest(isac_buffer **out, int *all_passed);

/* Interleaved re/im pairs, 2*m doubles. */
ISAC_API isac_status isac_steering(double theta, int m, double *out);
ISAC_API isac_status isac_lobe_radius(int g_rx, int *out);
/* Writes up to `capacity` 1-based atoms; *count receives the full size. */
ISAC_API isac_status isac_diag_index_set(int g_rx, int g_tx, int *out, size_t capacity, size_t *count);
ISAC_API isac_status isac_srp(const int *outcomes, size_t n, double *out);
ISAC_API isac_status isac_rmse(const double *estimates, const double *truths, size_t n, double *out);

#ifdef __cplusplus
}
#endif

#endif
