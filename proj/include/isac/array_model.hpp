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

#ifndef ISAC_ARRAY_MODEL_HPP
#define ISAC_ARRAY_MODEL_HPP

#include "isac/types.hpp"

namespace isac
{
    // Antenna counts and angle-grid sizes. Transmit side is the UE (or BS
    // transmitter for sensing), receive side is the BS array.
    struct ArrayConfig
    {
        int n_tx = 16;
        int n_rx = 16;
        int g_tx = 32;
        int g_rx = 32;

        void validate() const;
    };

    // ULA response with half-wavelength spacing: element k is exp(-j*pi*k*sin(theta)).
    CVec steering(double theta, int m);

    // d/dtheta of steering(theta, m).
    CVec steering_derivative(double theta, int m);
}

#endif
