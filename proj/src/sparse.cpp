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

#include "isac/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace isac
{
    namespace
    {
        double max_norm(const CVecList &r)
        {
            double m = 0.0;
            for (const auto &v : r)
                m = std::max(m, v.norm());
            return m;
        }

        double stacked_norm(const CVecList &r)
        {
            double sq = 0.0;
            for (const auto &v : r)
                sq += v.squaredNorm();
            return std::sqrt(sq);
        }

        void check_operators(const CVecList &y, const OperatorList &omegas)
        {
            require(!y.empty(), "sparse recovery: no measurements");
            require(y.size() == omegas.size(), "sparse recovery: one operator per subcarrier required");
            for (std::size_t n = 0; n < y.size(); ++n)
                require(y[n].size() == omegas[n].rows(), "sparse recovery: measurement length mismatch");
            for (const auto &o : omegas)
                require(o.cols() == omegas.front().cols(), "sparse recovery: operators disagree in size");
        }

        std::vector<CMat> restrict_operators(const OperatorList &omegas, std::span<const AtomIndex> atoms)
        {
            std::vector<CMat> out;
            out.reserve(omegas.size());
            for (const auto &o : omegas)
                out.push_back(o.columns(atoms));
            return out;
        }

        CVecList residuals(const CVecList &y, const std::vector<CMat> &omegas_i, const CVecList &h)
        {
            CVecList r(y.size());
            for (std::size_t n = 0; n < y.size(); ++n)
                r[n] = y[n] - omegas_i[n] * h[n];
            return r;
        }

        RVec inverse_or_zero(const RVec &v)
        {
            RVec inv(v.size());
            for (Eigen::Index j = 0; j < v.size(); ++j)
                inv[j] = v[j] > 0.0 ? 1.0 / v[j] : 0.0;
            return inv;
        }

        // Norm of atom (i, j) stacked over subcarriers, as a function of j: u_i is unit norm,
        // so it is sqrt(sum_n |t_j[n]|^2).
        RVec stacked_atom_norms(const OperatorList &omegas)
        {
            RVec sq = RVec::Zero(omegas.front().tx_coefficients().size());
            for (const auto &o : omegas)
                sq += o.tx_coefficients().cwiseAbs2();
            return sq.cwiseSqrt();
        }

        // Sum over subcarriers of |<r[n], Omega_m[n]>| on the G_r x G_t grid, divided by the
        // stacked atom norm.
        RMat incoherent_grid(const CVecList &r, const OperatorList &omegas)
        {
            RMat acc = RMat::Zero(omegas.front().g_rx(), omegas.front().tx_coefficients().size());
            for (std::size_t n = 0; n < r.size(); ++n)
                acc += omegas[n].adjoint_grid(r[n]).cwiseAbs();
            return acc * inverse_or_zero(stacked_atom_norms(omegas)).asDiagonal();
        }

        CVecList solve_normal(const std::vector<CMat> &omegas_i, std::span<const double> w,
                              const CVecList &y, bool ridge)
        {
            require(!omegas_i.empty() && omegas_i.size() == y.size(), "weighted_ls: subcarrier count mismatch");
            const auto cols = omegas_i.front().cols();
            require(static_cast<Eigen::Index>(w.size()) == cols, "weighted_ls: weight count must equal support size");
            const RVec wv = Eigen::Map<const RVec>(w.data(), cols);
            CVecList h(y.size());
            for (std::size_t n = 0; n < y.size(); ++n)
            {
                const CMat &a = omegas_i[n];
                require(a.cols() == cols && a.rows() == y[n].size(), "weighted_ls: dimension mismatch");
                const CMat gram = a.adjoint() * a;
                CMat lhs = wv.asDiagonal() * gram;
                const CVec rhs = wv.asDiagonal() * (a.adjoint() * y[n]);
                if (ridge)
                {
                    const double lambda = 1e-10 * std::max(std::abs(gram.trace()), 1e-300);
                    lhs.diagonal().array() += lambda;
                }
                // Row equilibration leaves the solution unchanged; without it, atoms sitting on a
                // kernel zero (weight ~1e-17) make the system look rank deficient.
                CVec b = rhs;
                for (Eigen::Index k = 0; k < cols; ++k)
                {
                    const double scale = lhs.row(k).cwiseAbs().maxCoeff();
                    if (scale > 0.0)
                    {
                        lhs.row(k) /= scale;
                        b[k] /= scale;
                    }
                }
                Eigen::FullPivLU<CMat> lu(lhs);
                if (!ridge && lu.rank() < cols)
                    fail(ErrorKind::SingularSystem, "weighted_ls: normal matrix is rank deficient");
                h[n] = lu.solve(b);
            }
            return h;
        }

        // One coefficient vector shared by all subcarriers; updates the residuals.
        CVec stacked_ls(const CVecList &y, const OperatorList &omegas, const std::vector<AtomIndex> &support,
                        CVecList &r, const char *who)
        {
            const Eigen::Index rows = omegas.front().rows();
            const auto n_sub = static_cast<Eigen::Index>(y.size());
            CVec y_stack(n_sub * rows);
            CMat a_stack(n_sub * rows, static_cast<Eigen::Index>(support.size()));
            for (Eigen::Index n = 0; n < n_sub; ++n)
            {
                y_stack.segment(n * rows, rows) = y[static_cast<std::size_t>(n)];
                a_stack.middleRows(n * rows, rows) = omegas[static_cast<std::size_t>(n)].columns(support);
            }
            Eigen::ColPivHouseholderQR<CMat> qr(a_stack);
            if (qr.rank() < a_stack.cols())
                fail(ErrorKind::SingularSystem, std::string(who) + ": stacked operator is rank deficient");
            const CVec h = qr.solve(y_stack);
            const CVec res = y_stack - a_stack * h;
            for (Eigen::Index n = 0; n < n_sub; ++n)
                r[static_cast<std::size_t>(n)] = res.segment(n * rows, rows);
            return h;
        }

        void insert_sorted(std::vector<AtomIndex> &v, AtomIndex m)
        {
            auto it = std::lower_bound(v.begin(), v.end(), m);
            if (it == v.end() || *it != m)
                v.insert(it, m);
        }

        bool contains(const std::vector<AtomIndex> &sorted, AtomIndex m)
        {
            return std::binary_search(sorted.begin(), sorted.end(), m);
        }
    }

    void OmpConfig::validate() const
    {
        require(sparsity >= 1, "omp: sparsity must be >= 1");
        require(tolerance >= 0.0, "omp: tolerance must be >= 0");
        require(!lobe_radius_override || *lobe_radius_override >= 0, "omp: lobe radius override must be >= 0");
    }

    CorrelationResult correlate_atoms(const CVecList &residuals, const OperatorList &omegas,
                                      std::span<const AtomIndex> candidates)
    {
        require(!candidates.empty(), "correlate_atoms: empty candidate set");
        check_operators(residuals, omegas);
        const RMat grid = incoherent_grid(residuals, omegas);
        const int g_rx = omegas.front().g_rx();
        CorrelationResult out;
        double best = -1.0;
        for (AtomIndex m : candidates)
        {
            require(m >= 1 && m <= omegas.front().cols(), "correlate_atoms: candidate out of range");
            const double c = grid((m - 1) % g_rx, (m - 1) / g_rx);
            out.values[m] = c;
        }
        // Walk in increasing index order so the first maximum wins ties.
        for (const auto &[m, c] : out.values)
            if (c > best)
            {
                best = c;
                out.best = m;
            }
        return out;
    }

    int lobe_radius(int g_rx)
    {
        require(g_rx >= 1, "lobe_radius: g_rx must be positive");
        return static_cast<int>(std::floor(g_rx / (4.0 * pi)));
    }

    std::vector<AtomIndex> neighborhood(AtomIndex m_max, int a, int g_rx, int g_tx)
    {
        require(a >= 0, "neighborhood: radius must be nonnegative");
        const int diag = std::min(g_rx, g_tx);
        const int i = (m_max - 1) % g_rx;
        const int j = (m_max - 1) / g_rx;
        if (m_max < 1 || m_max > g_rx * g_tx || i != j)
            fail(ErrorKind::InvalidArgument, "neighborhood: center atom " + std::to_string(m_max) + " is off the diagonal");
        std::vector<AtomIndex> out;
        for (int k = -a; k <= a; ++k)
        {
            const int d = i + k;
            if (d >= 0 && d < diag)
                out.push_back(m_max + k * (g_rx + 1));
        }
        return out;
    }

    std::vector<double> neighborhood_weights(std::span<const double> correlations)
    {
        require(!correlations.empty(), "neighborhood_weights: empty input");
        double total = 0.0;
        for (double c : correlations)
        {
            require(c >= 0.0, "neighborhood_weights: correlations must be nonnegative");
            total += c;
        }
        if (!(total > 0.0))
            fail(ErrorKind::DegenerateWeights, "neighborhood_weights: all correlations are zero");
        std::vector<double> w(correlations.size());
        for (std::size_t k = 0; k < w.size(); ++k)
            w[k] = correlations[k] / total;
        return w;
    }

    CVecList weighted_ls(const std::vector<CMat> &omegas_i, std::span<const double> w, const CVecList &y)
    {
        return solve_normal(omegas_i, w, y, false);
    }

    CVecList weighted_ls_ridge(const std::vector<CMat> &omegas_i, std::span<const double> w, const CVecList &y)
    {
        return solve_normal(omegas_i, w, y, true);
    }

    CVecList plain_ls(const std::vector<CMat> &omegas_i, const CVecList &y)
    {
        require(!omegas_i.empty() && omegas_i.size() == y.size(), "plain_ls: subcarrier count mismatch");
        CVecList h(y.size());
        for (std::size_t n = 0; n < y.size(); ++n)
        {
            Eigen::ColPivHouseholderQR<CMat> qr(omegas_i[n]);
            if (qr.rank() < omegas_i[n].cols())
                fail(ErrorKind::SingularSystem, "plain_ls: operator restricted to support is rank deficient");
            h[n] = qr.solve(y[n]);
        }
        return h;
    }

    SparseEstimate proposed_omp(const CVecList &y_s, const OperatorList &omegas, const OmpConfig &cfg,
                                const BeamspaceSystem &sys)
    {
        cfg.validate();
        check_operators(y_s, omegas);
        require(omegas.front().cols() == sys.atom_count(), "proposed_omp: operator does not match the system");
        const int g_rx = sys.cfg.g_rx;
        const int g_tx = sys.cfg.g_tx;
        const int radius = cfg.lobe_radius_override.value_or(lobe_radius(g_rx));
        const std::vector<AtomIndex> diag = diag_index_set(g_rx, g_tx);

        SparseEstimate est;
        std::map<AtomIndex, double> weight_of;
        CVecList r = y_s;
        est.residual_trace.push_back(stacked_norm(r));

        for (int t = 0; t < cfg.sparsity && max_norm(r) >= cfg.tolerance; ++t)
        {
            const CorrelationResult corr = correlate_atoms(r, omegas, diag);

            // Highest-correlated diagonal atom that is not already supported.
            AtomIndex center = 0;
            double best = -1.0;
            for (const auto &[m, c] : corr.values)
                if (!contains(est.support, m) && c > best)
                {
                    best = c;
                    center = m;
                }
            if (center == 0)
                break;

            const std::vector<AtomIndex> lobe = neighborhood(center, radius, g_rx, g_tx);
            std::vector<double> c_lobe;
            c_lobe.reserve(lobe.size());
            for (AtomIndex m : lobe)
                c_lobe.push_back(corr.values.at(m));
            std::vector<double> w;
            try
            {
                w = neighborhood_weights(c_lobe);
            }
            catch (const Error &e)
            {
                if (e.kind() != ErrorKind::DegenerateWeights)
                    throw;
                w.assign(lobe.size(), 1.0 / static_cast<double>(lobe.size()));
            }
            for (std::size_t k = 0; k < lobe.size(); ++k)
            {
                weight_of[lobe[k]] = w[k];
                insert_sorted(est.support, lobe[k]);
            }
            est.center_atoms.push_back(center);

            std::vector<double> w_support;
            w_support.reserve(est.support.size());
            for (AtomIndex m : est.support)
                w_support.push_back(weight_of.at(m));

            const auto omegas_i = restrict_operators(omegas, est.support);
            try
            {
                est.coefficients = weighted_ls(omegas_i, w_support, y_s);
            }
            catch (const Error &e)
            {
                if (e.kind() != ErrorKind::SingularSystem)
                    throw;
                est.coefficients = weighted_ls_ridge(omegas_i, w_support, y_s);
            }
            r = residuals(y_s, omegas_i, est.coefficients);
            est.residual_trace.push_back(stacked_norm(r));
        }

        for (AtomIndex m : est.support)
            est.weights.push_back(weight_of.at(m));
        est.residual_norm = max_norm(r);
        return est;
    }

    SparseEstimate conventional_omp(const CVecList &y, const OperatorList &omegas, const OmpConfig &cfg)
    {
        cfg.validate();
        check_operators(y, omegas);
        const int g_rx = omegas.front().g_rx();
        const int atoms = omegas.front().cols();
        const auto n_sub = static_cast<Eigen::Index>(y.size());

        SparseEstimate est;
        CVecList r = y;
        CVec h;
        est.residual_trace.push_back(stacked_norm(r));

        for (int t = 0; t < cfg.sparsity && t < atoms && max_norm(r) >= cfg.tolerance; ++t)
        {
            CMat coherent = CMat::Zero(g_rx, omegas.front().tx_coefficients().size());
            for (Eigen::Index n = 0; n < n_sub; ++n)
                coherent += omegas[n].adjoint_grid(r[n]);
            const RMat score = coherent.cwiseAbs() * inverse_or_zero(stacked_atom_norms(omegas)).asDiagonal();
            AtomIndex pick = 0;
            double best = -1.0;
            for (AtomIndex m = 1; m <= atoms; ++m)
            {
                if (contains(est.support, m))
                    continue;
                const double c = score((m - 1) % g_rx, (m - 1) / g_rx);
                if (c > best)
                {
                    best = c;
                    pick = m;
                }
            }
            insert_sorted(est.support, pick);
            est.center_atoms.push_back(pick);

            h = stacked_ls(y, omegas, est.support, r, "conventional_omp");
            est.residual_trace.push_back(stacked_norm(r));
        }

        est.weights.assign(est.support.size(), 1.0);
        est.coefficients.assign(y.size(), h);
        est.residual_norm = max_norm(r);
        return est;
    }

    SparseEstimate dcs_somp(const CVecList &y_c, const OperatorList &omegas, const OmpConfig &cfg)
    {
        cfg.validate();
        check_operators(y_c, omegas);
        const int g_rx = omegas.front().g_rx();
        const int atoms = omegas.front().cols();

        SparseEstimate est;
        CVecList r = y_c;
        CVec h;
        est.residual_trace.push_back(stacked_norm(r));

        for (int t = 0; t < cfg.sparsity && t < atoms && max_norm(r) >= cfg.tolerance; ++t)
        {
            const RMat grid = incoherent_grid(r, omegas);
            AtomIndex pick = 0;
            double best = -1.0;
            for (AtomIndex m = 1; m <= atoms; ++m)
            {
                if (contains(est.support, m))
                    continue;
                const double c = grid((m - 1) % g_rx, (m - 1) / g_rx);
                if (c > best)
                {
                    best = c;
                    pick = m;
                }
            }
            insert_sorted(est.support, pick);
            est.center_atoms.push_back(pick);

            // The channel is flat across subcarriers, so the coefficients are shared;
            // a per-subcarrier fit cannot separate atoms with a common receive index.
            h = stacked_ls(y_c, omegas, est.support, r, "dcs_somp");
            est.residual_trace.push_back(stacked_norm(r));
        }

        est.weights.assign(est.support.size(), 1.0);
        est.coefficients.assign(y_c.size(), h);
        est.residual_norm = max_norm(r);
        return est;
    }

    std::vector<AnglePair> coarse_angles(const SparseEstimate &est, const BeamspaceSystem &sys)
    {
        require(!est.center_atoms.empty(), "coarse_angles: estimate has no center atoms");
        std::vector<AnglePair> out;
        out.reserve(est.center_atoms.size());
        for (AtomIndex m : est.center_atoms)
            out.push_back(atom_to_angles(m, sys));
        std::stable_sort(out.begin(), out.end(), [](const AnglePair &a, const AnglePair &b) { return a.aoa < b.aoa; });
        return out;
    }
}
