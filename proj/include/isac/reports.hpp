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

#ifndef ISAC_REPORTS_HPP
#define ISAC_REPORTS_HPP

#include "isac/config.hpp"
#include "isac/harness.hpp"

#include <string>

namespace isac
{
    // The single scene used by estimate/refine/crlb: the configured paths when given,
    // otherwise one scene sampled from the seed.
    struct SceneSetup
    {
        BeamspaceSystem sys;
        ChannelScene scene;
        PilotSet pilots;
        Observation clean;
        bool sampled = false;
    };

    SceneSetup prepare_scene(const ExperimentConfig &cfg, bool on_grid);

    // Coarse support and angles for one scene; `#` config lines followed by a JSON object.
    std::string estimate_report(const ExperimentConfig &cfg);

    // Refined parameters as `# param,...` lines plus the iteration,mode,cost trace.
    std::string refine_report(const ExperimentConfig &cfg);

    // snr_db,subsystem,path,crlb_rad2,crlb_nuisance_rad2
    std::string crlb_report(const ExperimentConfig &cfg);

    struct SelftestCheck
    {
        std::string name;
        bool passed = false;
        std::string detail;
    };

    std::vector<SelftestCheck> run_selftest();
    std::string format_selftest(const std::vector<SelftestCheck> &checks);
}

#endif
