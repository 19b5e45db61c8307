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

#ifndef ISAC_TYPES_HPP
#define ISAC_TYPES_HPP

#include <Eigen/Dense>

#include <complex>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace isac
{
    using Complex = std::complex<double>;
    using CVec = Eigen::VectorXcd;
    using CMat = Eigen::MatrixXcd;
    using RVec = Eigen::VectorXd;
    using RMat = Eigen::MatrixXd;

    // Every stochastic routine takes one of these explicitly; there is no global RNG.
    using Rng = std::mt19937_64;

    // One entry per subcarrier.
    using CVecList = std::vector<CVec>;

    enum class ErrorKind
    {
        InvalidArgument,
        InvalidScene,
        SingularSystem,
        DegenerateWeights,
        SubspaceDeficient,
        SingularInformation,
        Config,
        Numerical,
    };

    const char *to_string(ErrorKind kind) noexcept;

    class Error : public std::runtime_error
    {
    public:
        Error(ErrorKind kind, const std::string &what)
            : std::runtime_error(what), kind_(kind) {}

        ErrorKind kind() const noexcept { return kind_; }

    private:
        ErrorKind kind_;
    };

    [[noreturn]] inline void fail(ErrorKind kind, const std::string &msg)
    {
        throw Error(kind, msg);
    }

    inline void require(bool cond, const std::string &msg)
    {
        if (!cond)
            fail(ErrorKind::InvalidArgument, msg);
    }

    constexpr double pi = 3.14159265358979323846;
}

#endif
