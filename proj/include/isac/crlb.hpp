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

#ifndef ISAC_CRLB_HPP
#define ISAC_CRLB_HPP

#include "isac/sage.hpp"

#include <string>
#include <string_view>

namespace isac
{
    enum class FisherSubsystem
    {
        Comm,
        Sens,
        Shared,
    };

    const char *to_string(FisherSubsystem s) noexcept;
    FisherSubsystem parse_fisher_subsystem(std::string_view tag);

    // Everything the deterministic means depend on besides the path parameters.
    struct FisherProblem
    {
        ArrayConfig cfg;
        CMat v_c;   // N_t x N, F[n] x[n]
        CMat v_s;   // N_t x N, s[n]
        double noise_var_comm = 1.0;
        double noise_var_sens = 1.0;

        static FisherProblem make(const ChannelScene &scene, const PilotSet &pilots, const ArrayConfig &cfg);
    };

    // Real coordinates per path:
    //   comm:   Re b, Im b, comm AOD, AOA
    //   sens:   Re a, Im a, AOA (= AOD)
    //   shared: Re a, Im a, Re b, Im b, comm AOD, AOA
    struct FisherResult
    {
        RMat fim;
        FisherSubsystem subsystem = FisherSubsystem::Shared;
        // Column of the AOA coordinate of each path.
        std::vector<int> aoa_index;
        // [fim^-1]_{aoa,aoa}, nuisance parameters accounted for.
        std::vector<double> crlb_aoa;
        // 1 / fim_{aoa,aoa}, the AOA-only bound.
        std::vector<double> crlb_aoa_theta_only;
    };

    // FIM_pq = (2/sigma^2) Re{ dmu/deta_p^H dmu/deta_q }, summed over subcarriers.
    // For Shared, the comm and sensing FIMs are added on the tied parametrization.
    // Throws SingularInformation (naming the subsystem) if the FIM cannot be inverted.
    FisherResult fisher_info(const FisherProblem &problem, const ParamSet &params, FisherSubsystem subsystem);

    // Unnormalized FIM without the inversion step; used for additivity checks.
    RMat fisher_matrix(const FisherProblem &problem, const ParamSet &params, FisherSubsystem subsystem);

    struct CrlbBounds
    {
        double shared = 0.0;
        double comm = 0.0;
        double sens = 0.0;
        double shared_theta_only = 0.0;
        double comm_theta_only = 0.0;
        double sens_theta_only = 0.0;
    };

    std::vector<CrlbBounds> crlb_compare(const FisherProblem &problem, const ParamSet &params);

    // Sensing noise variance that makes the summed AOA-only sensing information
    // equal the communication one (exactly symmetric for a single path).
    double balanced_sensing_noise(const FisherProblem &problem, const ParamSet &params);

    // Evaluation point taken from the true scene (shared AOA read from the sensing paths).
    ParamSet params_from_scene(const ChannelScene &scene);
}

#endif
