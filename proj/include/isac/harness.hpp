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

#ifndef ISAC_HARNESS_HPP
#define ISAC_HARNESS_HPP

#include "isac/beamspace.hpp"
#include "isac/config.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>

namespace isac
{
    enum class Metric
    {
        Srp,
        RmseAoa,
    };

    const char *to_string(Metric m) noexcept;

    struct MetricRecord
    {
        double snr_db = 0.0;
        int n_subcarriers = 0;
        Method method = Method::ProposedOmp;
        Metric metric = Metric::Srp;
        double value = 0.0;
        int trials = 0;
        std::uint64_t seed = 0;
    };

    // Throws InvalidArgument on an empty list.
    double srp(const std::vector<bool> &outcomes);

    // sqrt(mean((est - truth)^2)); throws InvalidArgument on empty or mismatched input.
    double rmse(std::span<const double> estimates, std::span<const double> truths);

    // Reorders `estimates` to minimize the summed squared error against `truths`.
    // With fewer estimates than truths, each truth takes its nearest estimate.
    std::vector<double> pair_nearest(std::span<const double> estimates, std::span<const double> truths);

    struct SceneSampling
    {
        // Angles are drawn with |sin(theta)| <= sector.
        double sector = 0.75;
        // In diagonal grid steps.
        int min_separation = 3;
        // LOS (first path) power relative to each NLOS path.
        double los_power = 10.0;
    };

    // Sensing angles on the receive grid; comm AODs drawn off-grid.
    ChannelScene sample_on_grid_scene(const BeamspaceSystem &sys, int k_paths, int n_subcarriers, Rng &rng,
                                      const SceneSampling &s = {});
    ChannelScene sample_off_grid_scene(const BeamspaceSystem &sys, int k_paths, int n_subcarriers, Rng &rng,
                                       const SceneSampling &s = {});

    // Sampling parameters of `cfg`, with the automatic separation resolved.
    SceneSampling sampling_of(const ExperimentConfig &cfg);

    // Nearest atoms of the sensing paths.
    std::vector<AtomIndex> true_support(const ChannelScene &scene, const BeamspaceSystem &sys);

    // Order-independent per-trial seed.
    std::uint64_t trial_seed(std::uint64_t seed, std::size_t snr_index, std::size_t n_index, std::size_t trial);

    struct TrialOutcome
    {
        static constexpr std::size_t n_methods = std::size(all_methods);
        std::array<bool, n_methods> success{};
        // Summed squared AOA error and the number of paths it covers.
        std::array<double, n_methods> sq_err{};
        std::array<int, n_methods> count{};
    };

    // One Monte Carlo scene evaluated by every method in cfg.methods.
    TrialOutcome run_trial(const ExperimentConfig &cfg, const BeamspaceSystem &sys, double snr_db,
                           int n_subcarriers, std::uint64_t seed);

    // threads == 0 picks the hardware concurrency. Output does not depend on the thread count.
    std::vector<MetricRecord> run_sweep(const ExperimentConfig &cfg, unsigned threads = 1);

    std::string format_csv(const std::vector<MetricRecord> &records, const ExperimentConfig &cfg);
}

#endif
