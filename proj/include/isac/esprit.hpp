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

#ifndef ISAC_ESPRIT_HPP
#define ISAC_ESPRIT_HPP

#include "isac/types.hpp"

namespace isac
{
    // N_r x N matrix whose columns are the per-subcarrier echoes.
    struct SnapshotMatrix
    {
        CMat y;
    };

    SnapshotMatrix build_snapshots(const CVecList &echoes);

    // R = Y Y^H / N.
    CMat sample_covariance(const SnapshotMatrix &snapshots);

    // Least-squares ESPRIT on the receive ULA. Returns k angles in [-pi/2, pi/2), ascending.
    std::vector<double> esprit_aoa(const SnapshotMatrix &snapshots, int k);
}

#endif
