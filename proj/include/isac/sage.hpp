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

#ifndef ISAC_SAGE_HPP
#define ISAC_SAGE_HPP

#include "isac/beamspace.hpp"

#include <map>
#include <string_view>

namespace isac
{
    enum class SageMode
    {
        Joint,
        CommOnly,
        SensOnly,
    };

    SageMode parse_sage_mode(std::string_view tag);
    const char *to_string(SageMode m) noexcept;

    // The six per-path parameter roles, in M-step sweep order.
    enum class ParamKind
    {
        SensGain,
        CommGain,
        CommAod,
        CommAoa,
        SensAod,
        SensAoa,
    };

    const char *to_string(ParamKind k) noexcept;
    bool is_angle(ParamKind k) noexcept;
    // True when the kind may be optimized in `mode`.
    bool kind_valid(ParamKind k, SageMode mode) noexcept;

    struct PathEstimate
    {
        Complex sens_gain{0.0, 0.0};
        Complex comm_gain{0.0, 0.0};
        double comm_aod = 0.0;
        double comm_aoa = 0.0;
        double sens_aod = 0.0;
        double sens_aoa = 0.0;

        double get(ParamKind k) const;
        Complex get_complex(ParamKind k) const;
        void set(ParamKind k, Complex v);
    };

    struct ParamSet
    {
        std::vector<PathEstimate> paths;

        int size() const { return static_cast<int>(paths.size()); }

        // Copies sens_aoa into comm_aoa and sens_aod for every path.
        void tie_shared();
        bool shared_tie_holds(double tol = 0.0) const;
    };

    struct SageConfig
    {
        int outer_iters = 100;
        std::map<ParamKind, double> step_sizes;
        double convergence_tol = 1e-10;
        SageMode mode = SageMode::Joint;

        // gamma = 1e-3 for angles and 1e-2 for gain components.
        static SageConfig defaults(SageMode mode);
        static SageConfig with_steps(SageMode mode, double step_angle, double step_gain);

        double step(ParamKind k) const;
        void validate() const;
    };

    // Observed signals and the per-subcarrier transmit excitations v[n]
    // (s[n] for sensing, F[n] x[n] for communication), stored column-wise.
    struct SageData
    {
        ArrayConfig cfg;
        CMat y_c;   // N_r x N
        CMat y_s;   // N_r x N
        CMat v_c;   // N_t x N
        CMat v_s;   // N_t x N

        static SageData make(const ArrayConfig &cfg, const CVecList &y_c, const CVecList &y_s,
                             const CVecList &comm_excitation, const CVecList &sens_excitation);

        int n_subcarriers() const { return static_cast<int>(y_c.cols()); }
    };

    // Noiseless contribution of one path, N_r x N.
    CMat sensing_path_response(const PathEstimate &p, const SageData &data);
    CMat comm_path_response(const PathEstimate &p, const SageData &data);

    // Omega_s h_s(params) and Omega_c h_c(params) summed over paths, N_r x N.
    CMat sensing_model(const ParamSet &params, const SageData &data);
    CMat comm_model(const ParamSet &params, const SageData &data);

    // ||y_c + y_s - Omega_c h_c - Omega_s h_s||^2 summed over subcarriers.
    double cost_joint(const ParamSet &params, const SageData &data);
    double cost_comm(const ParamSet &params, const SageData &data);
    double cost_sens(const ParamSet &params, const SageData &data);
    double cost_for_mode(const ParamSet &params, const SageData &data, SageMode mode);

    // Analytic partial derivative of the cost assigned to `kind` under `mode`.
    // Angles return a real value (imaginary part zero); complex gains return
    // dQ/dRe + j dQ/dIm. In joint mode every AOA-like kind refers to the single
    // shared angle and differentiates the joint cost through all its appearances.
    Complex grad_param(const ParamSet &params, int k, ParamKind kind, const SageData &data, SageMode mode);

    struct CostSample
    {
        int iteration = 0;
        SageMode mode = SageMode::Joint;
        double cost = 0.0;
    };

    struct SageResult
    {
        ParamSet params;
        std::vector<CostSample> trace;
        int iterations = 0;
        bool converged = false;
        // Five consecutive outer iterations failed to lower the cost; `params` is the best iterate.
        bool diverged = false;
    };

    SageResult sage_refine(const ParamSet &init, const SageData &data, const SageConfig &cfg);

    // Least-squares path gains for the current angles.
    void fit_sensing_gains(ParamSet &params, const SageData &data);
    void fit_comm_gains(ParamSet &params, const SageData &data);

    // Builds an initial ParamSet from coarse estimates. Comm AODs are re-picked on the
    // transmit grid for the initial AOAs. In joint mode the shared AOAs are the K-subset
    // of the pooled sensing and comm AOAs minimizing Q_s/||y_s||^2 + w * Q_c/||y_c||^2,
    // w = comm_weight. Gains start at their LS values.
    ParamSet init_from_coarse(const std::vector<AnglePair> &sensing, const std::vector<AnglePair> &comm,
                              const SageData &data, SageMode mode, double comm_weight = 0.5);

    // Reported AOA of path k under `mode`.
    double reported_aoa(const PathEstimate &p, SageMode mode);

    double clamp_angle(double theta);
}

#endif
