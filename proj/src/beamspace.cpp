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

#include "isac/beamspace.hpp"

#include <cmath>

namespace isac
{
    Dictionary build_dictionary(int m, int g)
    {
        require(m >= 1, "build_dictionary: m must be positive");
        require(g >= m, "build_dictionary: grid size must be >= element count");
        Dictionary d;
        d.atoms.resize(m, g);
        d.grid.resize(g);
        const double norm = 1.0 / std::sqrt(static_cast<double>(m));
        for (int i = 0; i < g; ++i)
        {
            const double s = -1.0 + 2.0 * i / g;
            d.grid[i] = std::asin(s);
            // Build from the sine directly so grid phases are exact.
            for (int k = 0; k < m; ++k)
                d.atoms(k, i) = norm * std::polar(1.0, -pi * k * s);
        }
        return d;
    }

    double BeamspaceSystem::frame_scale() const
    {
        return (static_cast<double>(cfg.n_rx) * cfg.n_tx) / (static_cast<double>(cfg.g_rx) * cfg.g_tx);
    }

    BeamspaceSystem make_beamspace(const ArrayConfig &cfg)
    {
        cfg.validate();
        auto tx = build_dictionary(cfg.n_tx, cfg.g_tx);
        auto rx = build_dictionary(cfg.n_rx, cfg.g_rx);
        return BeamspaceSystem{cfg, std::move(tx.atoms), std::move(rx.atoms),
                               std::move(tx.grid), std::move(rx.grid)};
    }

    Subsystem parse_subsystem(std::string_view tag)
    {
        if (tag == "sensing" || tag == "sens")
            return Subsystem::Sensing;
        if (tag == "communication" || tag == "comm")
            return Subsystem::Communication;
        fail(ErrorKind::InvalidArgument, "unknown subsystem tag '" + std::string(tag) + "'");
    }

    const char *to_string(Subsystem s) noexcept
    {
        return s == Subsystem::Sensing ? "sensing" : "communication";
    }

    MeasurementOperator::MeasurementOperator(const BeamspaceSystem &sys, const CVec &excitation,
                                             Subsystem subsystem)
        : u_rx_(sys.u_rx), subsystem_(subsystem)
    {
        require(excitation.size() == sys.u_tx.rows(), "measurement: excitation length must equal n_tx");
        tx_ = sys.u_tx.adjoint() * excitation;
    }

    CVec MeasurementOperator::column(AtomIndex m) const
    {
        require(m >= 1 && m <= cols(), "measurement column out of range");
        const int i = (m - 1) % g_rx();
        const int j = (m - 1) / g_rx();
        return tx_(j) * u_rx_.col(i);
    }

    CMat MeasurementOperator::columns(std::span<const AtomIndex> atoms) const
    {
        CMat out(rows(), static_cast<Eigen::Index>(atoms.size()));
        for (std::size_t c = 0; c < atoms.size(); ++c)
            out.col(static_cast<Eigen::Index>(c)) = column(atoms[c]);
        return out;
    }

    CVec MeasurementOperator::apply(const CVec &h) const
    {
        require(h.size() == cols(), "measurement apply: coefficient length mismatch");
        // Omega h = U_rx * reshape(h, G_r, G_t) * tx
        const Eigen::Map<const CMat> hm(h.data(), g_rx(), tx_.size());
        return u_rx_ * (hm * tx_);
    }

    CMat MeasurementOperator::adjoint_grid(const CVec &r) const
    {
        require(r.size() == rows(), "measurement adjoint: residual length mismatch");
        const CVec rx = u_rx_.adjoint() * r;
        return rx * tx_.adjoint();
    }

    CMat MeasurementOperator::dense() const
    {
        CMat out(rows(), cols());
        for (Eigen::Index j = 0; j < tx_.size(); ++j)
            out.middleCols(j * g_rx(), g_rx()) = tx_(j) * u_rx_;
        return out;
    }

    MeasurementOperator build_measurement(const BeamspaceSystem &sys, const PilotSet &pilots,
                                          Subsystem subsystem, int n)
    {
        require(n >= 0 && n < pilots.size(), "build_measurement: subcarrier index out of range");
        const CVec v = subsystem == Subsystem::Sensing ? pilots.sensing_pilots[n] : pilots.comm_excitation(n);
        return MeasurementOperator(sys, v, subsystem);
    }

    OperatorList build_measurements(const BeamspaceSystem &sys, const PilotSet &pilots,
                                    Subsystem subsystem, int n_subcarriers)
    {
        OperatorList ops;
        ops.reserve(n_subcarriers);
        for (int n = 0; n < n_subcarriers; ++n)
            ops.push_back(build_measurement(sys, pilots, subsystem, n));
        return ops;
    }

    std::vector<AtomIndex> diag_index_set(int g_rx, int g_tx)
    {
        require(g_rx >= 1 && g_tx >= 1, "diag_index_set: grid sizes must be positive");
        std::vector<AtomIndex> j;
        const int count = std::min(g_rx, g_tx);
        j.reserve(count);
        for (int i = 1; i <= count; ++i)
            j.push_back(i + g_rx * (i - 1));
        return j;
    }

    AnglePair atom_to_angles(AtomIndex m, const BeamspaceSystem &sys)
    {
        require(m >= 1 && m <= sys.atom_count(), "atom_to_angles: atom index out of range");
        const int i = (m - 1) % sys.cfg.g_rx;
        const int j = (m - 1) / sys.cfg.g_rx;
        return {sys.grid_rx[i], sys.grid_tx[j]};
    }

    int nearest_grid_index(double theta, const std::vector<double> &grid)
    {
        require(!grid.empty(), "nearest_grid_index: empty grid");
        const double s = std::sin(theta);
        int best = 0;
        double best_d = 1e300;
        for (int i = 0; i < static_cast<int>(grid.size()); ++i)
        {
            double d = std::abs(s - std::sin(grid[i]));
            d = std::min(d, 2.0 - d);
            if (d < best_d - 1e-15)
            {
                best_d = d;
                best = i;
            }
        }
        return best;
    }

    AtomIndex nearest_atom(double aoa, double aod, const BeamspaceSystem &sys)
    {
        const int i = nearest_grid_index(aoa, sys.grid_rx);
        const int j = nearest_grid_index(aod, sys.grid_tx);
        return i + sys.cfg.g_rx * j + 1;
    }

    CVec beamspace_channel(const CMat &h, const BeamspaceSystem &sys)
    {
        require(h.rows() == sys.u_rx.rows() && h.cols() == sys.u_tx.rows(),
                "beamspace_channel: channel shape mismatch");
        const CMat b = sys.frame_scale() * (sys.u_rx.adjoint() * h * sys.u_tx);
        return Eigen::Map<const CVec>(b.data(), b.size());
    }
}
