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

#include "isac/array_model.hpp"

#include <cmath>

namespace isac
{
    const char *to_string(ErrorKind kind) noexcept
    {
        switch (kind)
        {
        case ErrorKind::InvalidArgument: return "invalid argument";
        case ErrorKind::InvalidScene: return "invalid scene";
        case ErrorKind::SingularSystem: return "singular system";
        case ErrorKind::DegenerateWeights: return "degenerate weights";
        case ErrorKind::SubspaceDeficient: return "subspace deficient";
        case ErrorKind::SingularInformation: return "singular information";
        case ErrorKind::Config: return "config error";
        case ErrorKind::Numerical: return "numerical failure";
        }
        return "unknown error";
    }

    void ArrayConfig::validate() const
    {
        require(n_tx >= 1 && n_rx >= 1 && g_tx >= 1 && g_rx >= 1,
                "array sizes must be positive");
        require(g_tx >= n_tx, "g_tx must be >= n_tx");
        require(g_rx >= n_rx, "g_rx must be >= n_rx");
    }

    CVec steering(double theta, int m)
    {
        require(m >= 1, "steering: element count must be positive");
        const double s = std::sin(theta);
        CVec a(m);
        for (int k = 0; k < m; ++k)
            a(k) = std::polar(1.0, -pi * k * s);
        return a;
    }

    CVec steering_derivative(double theta, int m)
    {
        require(m >= 1, "steering_derivative: element count must be positive");
        const double s = std::sin(theta);
        const double c = std::cos(theta);
        CVec d(m);
        for (int k = 0; k < m; ++k)
            d(k) = Complex(0.0, -pi * k * c) * std::polar(1.0, -pi * k * s);
        return d;
    }
}
