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

#ifndef ISAC_SPARSE_HPP
#define ISAC_SPARSE_HPP

#include "isac/beamspace.hpp"

#include <map>
#include <optional>

namespace isac
{
    struct OmpConfig
    {
        int sparsity = 2;
        double tolerance = 0.0;
        std::optional<int> lobe_radius_override;

        void validate() const;
    };

    struct SparseEstimate
    {
        // Sorted, 1-based atom indices.
        std::vector<AtomIndex> support;
        // Aligned with `support`.
        std::vector<double> weights;
        // Per subcarrier, aligned with `support`.
        CVecList coefficients;
        // One selected atom per iteration, in selection order.
        std::vector<AtomIndex> center_atoms;
        // max_n ||r[n]||_2 at exit.
        double residual_norm = 0.0;
        // sqrt(sum_n ||r[n]||^2) before the first and after every iteration.
        std::vector<double> residual_trace;
    };

    struct CorrelationResult
    {
        AtomIndex best = 0;
        std::map<AtomIndex, double> values;
    };

    // c(m) = sum_n |<r[n], Omega_m[n]>| / ||Omega_m||, the norm taken over the stacked subcarriers
    // (a zero atom scores 0). Ties go to the smallest index.
    CorrelationResult correlate_atoms(const CVecList &residuals, const OperatorList &omegas,
                                      std::span<const AtomIndex> candidates);

    // Main-lobe radius floor(G_r / (4 pi)).
    int lobe_radius(int g_rx);

    // Diagonal atoms m_max + k (G_r + 1), k = -a..a, clipped to the diagonal set.
    std::vector<AtomIndex> neighborhood(AtomIndex m_max, int a, int g_rx, int g_tx);

    // w(m) = c(m) / sum c. Throws DegenerateWeights when every correlation is zero.
    std::vector<double> neighborhood_weights(std::span<const double> correlations);

    // h[n] = (diag(w) A^H A)^{-1} diag(w) A^H y[n] with A = omegas_i[n].
    // Throws SingularSystem when the weighted normal matrix is rank deficient.
    CVecList weighted_ls(const std::vector<CMat> &omegas_i, std::span<const double> w, const CVecList &y);

    // Same system with a ridge of 1e-10 * |trace| added to the normal matrix.
    CVecList weighted_ls_ridge(const std::vector<CMat> &omegas_i, std::span<const double> w, const CVecList &y);

    // (A^H A)^{-1} A^H y[n] per subcarrier via pivoted QR.
    CVecList plain_ls(const std::vector<CMat> &omegas_i, const CVecList &y);

    // Diagonal-constrained OMP with main-lobe neighborhoods for the sensing channel.
    SparseEstimate proposed_omp(const CVecList &y_s, const OperatorList &omegas, const OmpConfig &cfg,
                                const BeamspaceSystem &sys);

    // Single-atom OMP over every atom. Subcarriers are stacked into one
    // measurement that shares a single coefficient vector (flat channel).
    SparseEstimate conventional_omp(const CVecList &y, const OperatorList &omegas, const OmpConfig &cfg);

    // Joint-support OMP across subcarriers: selection by the summed magnitude
    // of per-subcarrier correlations, then one LS with coefficients shared across subcarriers.
    SparseEstimate dcs_somp(const CVecList &y_c, const OperatorList &omegas, const OmpConfig &cfg);

    // Grid angles of the center atoms, sorted by aoa.
    std::vector<AnglePair> coarse_angles(const SparseEstimate &est, const BeamspaceSystem &sys);
}

#endif
