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

#ifndef ISAC_CHANNEL_HPP
#define ISAC_CHANNEL_HPP

#include "isac/array_model.hpp"

namespace isac
{
    // One propagation path. `gain` is alpha_k for sensing paths and beta_k for
    // uplink communication paths.
    struct PathParams
    {
        Complex gain{0.0, 0.0};
        double aoa = 0.0;
        double aod = 0.0;
    };

    struct ChannelScene
    {
        std::vector<PathParams> sensing_paths;
        std::vector<PathParams> comm_paths;
        bool shared_aoa = true;
        int n_subcarriers = 1;
        double noise_var_sensing = 0.0;
        double noise_var_comm = 0.0;

        // Throws InvalidScene on a broken aoa==aod or shared-AOA tie.
        void validate() const;
    };

    // Per-subcarrier pilots. F[n] defaults to the identity.
    struct PilotSet
    {
        CVecList sensing_pilots;
        std::vector<CMat> comm_beamformers;
        CVecList comm_pilots;

        int size() const { return static_cast<int>(sensing_pilots.size()); }

        // F[n] x[n]
        CVec comm_excitation(int n) const;
        CVecList comm_excitations() const;
    };

    // Unit-modulus QPSK pilots for both subsystems, F[n] = I.
    PilotSet make_pilots(const ArrayConfig &cfg, int n_subcarriers, Rng &rng);

    // Sum of gain * a(aoa, N_r) * a(aod, N_t)^H. Sensing paths must have aoa == aod.
    CMat synth_sensing_channel(const std::vector<PathParams> &paths, const ArrayConfig &cfg);
    CMat synth_comm_channel(const std::vector<PathParams> &paths, const ArrayConfig &cfg);

    // Circularly-symmetric complex Gaussian vector, i.i.d. entries of variance `var`.
    CVec complex_noise(int n, double var, Rng &rng);

    // y_s = H_s s + n_s
    CVec gen_echo(const CMat &h_s, const CVec &pilot, double noise_var, Rng &rng);

    // y_c = H_c F x + n_c
    CVec gen_uplink(const CMat &h_c, const CMat &f, const CVec &x, double noise_var, Rng &rng);

    double snr_to_noise_var(double snr_db, double signal_power);

    // Average per-entry power over all subcarriers.
    double mean_power(const CVecList &signals);

    struct Observation
    {
        CVecList y_s;
        CVecList y_c;
    };

    // Noiseless received signals for every subcarrier (frequency-flat channel).
    Observation noiseless_observation(const ChannelScene &scene, const ArrayConfig &cfg,
                                      const PilotSet &pilots);

    // Sets the scene noise variances from `snr_db` against the empirical
    // per-antenna power of the noiseless signal of each subsystem.
    void calibrate_noise(ChannelScene &scene, const Observation &clean, double snr_db);

    // Adds noise with the scene's variances; the sensing stream is drawn first.
    Observation add_noise(const Observation &clean, const ChannelScene &scene, Rng &rng);
}

#endif
