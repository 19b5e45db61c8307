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

#ifndef ISAC_BEAMSPACE_HPP
#define ISAC_BEAMSPACE_HPP

#include "isac/channel.hpp"

#include <span>
#include <string_view>

namespace isac
{
    // m x g oversampled DFT dictionary. Grid is uniform in the sine domain:
    // sin(grid[i]) = -1 + 2i/g for i = 0..g-1, column i = steering(grid[i], m)/sqrt(m).
    struct Dictionary
    {
        CMat atoms;
        std::vector<double> grid;
    };

    Dictionary build_dictionary(int m, int g);

    struct BeamspaceSystem
    {
        ArrayConfig cfg;
        CMat u_tx;
        CMat u_rx;
        std::vector<double> grid_tx;
        std::vector<double> grid_rx;

        int atom_count() const { return cfg.g_tx * cfg.g_rx; }

        // U U^H = (G/M) I for the sine-uniform grid, so exact synthesis from
        // beamspace coefficients needs this factor. Equals 1 when G == M.
        double frame_scale() const;
    };

    BeamspaceSystem make_beamspace(const ArrayConfig &cfg);

    enum class Subsystem
    {
        Sensing,
        Communication,
    };

    Subsystem parse_subsystem(std::string_view tag);
    const char *to_string(Subsystem s) noexcept;

    // Atom indices are 1-based and column-major with the receive index fastest:
    // m = i + G_r (j - 1), i the AOA grid index and j the AOD grid index.
    using AtomIndex = int;

    // Omega[n] = (U_tx^H v[n])^T kron U_rx with v[n] = s[n] (sensing) or
    // F[n] x[n] (communication). Held in factored form; `dense()` materializes it.
    class MeasurementOperator
    {
    public:
        MeasurementOperator(const BeamspaceSystem &sys, const CVec &excitation, Subsystem subsystem);

        Subsystem subsystem() const { return subsystem_; }
        int rows() const { return static_cast<int>(u_rx_.rows()); }
        int cols() const { return static_cast<int>(u_rx_.cols() * tx_.size()); }
        int g_rx() const { return static_cast<int>(u_rx_.cols()); }

        // U_tx^H v
        const CVec &tx_coefficients() const { return tx_; }

        CVec column(AtomIndex m) const;
        CMat columns(std::span<const AtomIndex> atoms) const;

        // Omega h
        CVec apply(const CVec &h) const;

        // Omega^H r reshaped to G_r x G_t; entry (i, j) belongs to atom i + G_r j + 1.
        CMat adjoint_grid(const CVec &r) const;

        CMat dense() const;

    private:
        CMat u_rx_;
        CVec tx_;
        Subsystem subsystem_;
    };

    using OperatorList = std::vector<MeasurementOperator>;

    MeasurementOperator build_measurement(const BeamspaceSystem &sys, const PilotSet &pilots,
                                          Subsystem subsystem, int n);
    OperatorList build_measurements(const BeamspaceSystem &sys, const PilotSet &pilots,
                                    Subsystem subsystem, int n_subcarriers);

    // Diagonal atoms (AOA index == AOD index), increasing.
    std::vector<AtomIndex> diag_index_set(int g_rx, int g_tx);

    struct AnglePair
    {
        double aoa = 0.0;
        double aod = 0.0;
    };

    AnglePair atom_to_angles(AtomIndex m, const BeamspaceSystem &sys);

    // 0-based index of the grid point closest in the sine domain (circular,
    // since sin = -1 and sin = 1 alias for a half-wavelength ULA).
    int nearest_grid_index(double theta, const std::vector<double> &grid);

    AtomIndex nearest_atom(double aoa, double aod, const BeamspaceSystem &sys);

    // h = c vec(U_rx^H H U_tx) with c = frame_scale(), so that Omega h == H v exactly.
    CVec beamspace_channel(const CMat &h, const BeamspaceSystem &sys);
}

#endif
