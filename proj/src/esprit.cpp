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

#include "isac/esprit.hpp"

#include <algorithm>
#include <cmath>

namespace isac
{
    SnapshotMatrix build_snapshots(const CVecList &echoes)
    {
        require(!echoes.empty(), "build_snapshots: no echoes");
        const auto rows = echoes.front().size();
        SnapshotMatrix s{CMat(rows, static_cast<Eigen::Index>(echoes.size()))};
        for (std::size_t n = 0; n < echoes.size(); ++n)
        {
            require(echoes[n].size() == rows, "build_snapshots: ragged echo vectors");
            s.y.col(static_cast<Eigen::Index>(n)) = echoes[n];
        }
        return s;
    }

    CMat sample_covariance(const SnapshotMatrix &snapshots)
    {
        const auto n = snapshots.y.cols();
        require(n >= 1, "sample_covariance: no snapshots");
        CMat r = snapshots.y * snapshots.y.adjoint() / static_cast<double>(n);
        // Symmetrize away rounding so the eigensolver sees an exactly Hermitian matrix.
        return 0.5 * (r + r.adjoint()).eval();
    }

    std::vector<double> esprit_aoa(const SnapshotMatrix &snapshots, int k)
    {
        const auto m = snapshots.y.rows();
        const auto n = snapshots.y.cols();
        require(k >= 1, "esprit: path count must be positive");
        require(n >= k, "esprit: need at least k snapshots");
        require(m >= k + 1, "esprit: need at least k+1 receive antennas");

        Eigen::SelfAdjointEigenSolver<CMat> eig(sample_covariance(snapshots));
        if (eig.info() != Eigen::Success)
            fail(ErrorKind::Numerical, "esprit: covariance eigendecomposition failed");
        // Eigenvalues ascend; the signal subspace is the last k columns.
        const RVec &lambda = eig.eigenvalues();
        const double top = lambda(m - 1);
        if (!(top > 0.0) || lambda(m - k) <= 1e-12 * top)
            fail(ErrorKind::SubspaceDeficient, "esprit: signal subspace has rank below k");

        const CMat es = eig.eigenvectors().rightCols(k);
        const CMat upper = es.topRows(m - 1);
        const CMat lower = es.bottomRows(m - 1);
        const CMat psi = upper.colPivHouseholderQr().solve(lower);

        Eigen::ComplexEigenSolver<CMat> rot(psi, false);
        if (rot.info() != Eigen::Success)
            fail(ErrorKind::Numerical, "esprit: rotation eigendecomposition failed");

        std::vector<double> angles;
        angles.reserve(k);
        for (int i = 0; i < k; ++i)
        {
            // a[k+1] / a[k] = exp(-j pi sin(theta))
            const double s = std::clamp(-std::arg(rot.eigenvalues()(i)) / pi, -1.0, 1.0);
            double theta = std::asin(s);
            if (theta >= pi / 2.0)
                theta = -pi / 2.0;
            angles.push_back(theta);
        }
        std::sort(angles.begin(), angles.end());
        return angles;
    }
}
