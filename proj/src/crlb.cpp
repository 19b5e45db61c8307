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

#include "isac/crlb.hpp"

#include <cmath>

namespace isac
{
    namespace
    {
        constexpr int comm_coords = 4;
        constexpr int sens_coords = 3;
        constexpr int shared_coords = 6;

        CVec flatten(const CMat &m)
        {
            return Eigen::Map<const CVec>(m.data(), m.size());
        }

        // Columns: Re b, Im b, comm AOD, AOA.
        CMat comm_jacobian(const PathEstimate &p, double aoa, const FisherProblem &pr)
        {
            const int nr = pr.cfg.n_rx, nt = pr.cfg.n_tx;
            const CVec a_r = steering(aoa, nr);
            const CVec d_r = steering_derivative(aoa, nr);
            const CMat q = steering(p.comm_aod, nt).adjoint() * pr.v_c;
            const CMat dq = steering_derivative(p.comm_aod, nt).adjoint() * pr.v_c;
            const CMat unit = a_r * q;
            CMat j(unit.size(), comm_coords);
            j.col(0) = flatten(unit);
            j.col(1) = Complex(0.0, 1.0) * j.col(0);
            j.col(2) = flatten(p.comm_gain * a_r * dq);
            j.col(3) = flatten(p.comm_gain * d_r * q);
            return j;
        }

        // Columns: Re a, Im a, AOA (tied to AOD).
        CMat sens_jacobian(const PathEstimate &p, double aoa, const FisherProblem &pr)
        {
            const int nr = pr.cfg.n_rx, nt = pr.cfg.n_tx;
            const CVec a_r = steering(aoa, nr);
            const CVec d_r = steering_derivative(aoa, nr);
            const CMat q = steering(aoa, nt).adjoint() * pr.v_s;
            const CMat dq = steering_derivative(aoa, nt).adjoint() * pr.v_s;
            const CMat unit = a_r * q;
            CMat j(unit.size(), sens_coords);
            j.col(0) = flatten(unit);
            j.col(1) = Complex(0.0, 1.0) * j.col(0);
            j.col(2) = flatten(p.sens_gain * (d_r * q + a_r * dq));
            return j;
        }

        RMat gram(const CMat &j, double noise_var)
        {
            return (2.0 / noise_var) * (j.adjoint() * j).real();
        }

        void check_problem(const FisherProblem &pr, const ParamSet &params)
        {
            require(params.size() >= 1, "fisher_info: need at least one path");
            if (!(pr.noise_var_comm > 0.0) || !(pr.noise_var_sens > 0.0))
                fail(ErrorKind::InvalidArgument, "fisher_info: noise variances must be positive");
            require(pr.v_c.rows() == pr.cfg.n_tx && pr.v_s.rows() == pr.cfg.n_tx && pr.v_c.cols() >= 1 &&
                        pr.v_c.cols() == pr.v_s.cols(),
                    "fisher_info: excitation shape mismatch");
        }
    }

    const char *to_string(FisherSubsystem s) noexcept
    {
        switch (s)
        {
        case FisherSubsystem::Comm: return "comm";
        case FisherSubsystem::Sens: return "sens";
        case FisherSubsystem::Shared: return "shared";
        }
        return "?";
    }

    FisherSubsystem parse_fisher_subsystem(std::string_view tag)
    {
        if (tag == "comm")
            return FisherSubsystem::Comm;
        if (tag == "sens")
            return FisherSubsystem::Sens;
        if (tag == "shared")
            return FisherSubsystem::Shared;
        fail(ErrorKind::InvalidArgument, "unknown Fisher subsystem '" + std::string(tag) + "'");
    }

    FisherProblem FisherProblem::make(const ChannelScene &scene, const PilotSet &pilots, const ArrayConfig &cfg)
    {
        cfg.validate();
        require(pilots.size() >= scene.n_subcarriers, "fisher problem: not enough pilots");
        FisherProblem pr{cfg, CMat(cfg.n_tx, scene.n_subcarriers), CMat(cfg.n_tx, scene.n_subcarriers),
                         scene.noise_var_comm, scene.noise_var_sensing};
        for (int n = 0; n < scene.n_subcarriers; ++n)
        {
            pr.v_c.col(n) = pilots.comm_excitation(n);
            pr.v_s.col(n) = pilots.sensing_pilots[n];
        }
        return pr;
    }

    RMat fisher_matrix(const FisherProblem &pr, const ParamSet &params, FisherSubsystem subsystem)
    {
        check_problem(pr, params);
        const int k = params.size();
        switch (subsystem)
        {
        case FisherSubsystem::Comm:
        {
            CMat j(pr.cfg.n_rx * pr.v_c.cols(), comm_coords * k);
            for (int l = 0; l < k; ++l)
                j.middleCols(comm_coords * l, comm_coords) = comm_jacobian(params.paths[l], params.paths[l].comm_aoa, pr);
            return gram(j, pr.noise_var_comm);
        }
        case FisherSubsystem::Sens:
        {
            CMat j(pr.cfg.n_rx * pr.v_s.cols(), sens_coords * k);
            for (int l = 0; l < k; ++l)
                j.middleCols(sens_coords * l, sens_coords) = sens_jacobian(params.paths[l], params.paths[l].sens_aoa, pr);
            return gram(j, pr.noise_var_sens);
        }
        case FisherSubsystem::Shared:
        {
            // Embed both Jacobians on Re a, Im a, Re b, Im b, comm AOD, AOA.
            const auto rows = pr.cfg.n_rx * pr.v_c.cols();
            CMat jc = CMat::Zero(rows, shared_coords * k);
            CMat js = CMat::Zero(rows, shared_coords * k);
            for (int l = 0; l < k; ++l)
            {
                const auto &p = params.paths[l];
                const CMat c = comm_jacobian(p, p.sens_aoa, pr);
                const CMat s = sens_jacobian(p, p.sens_aoa, pr);
                const int b = shared_coords * l;
                js.col(b + 0) = s.col(0);
                js.col(b + 1) = s.col(1);
                js.col(b + 5) = s.col(2);
                jc.col(b + 2) = c.col(0);
                jc.col(b + 3) = c.col(1);
                jc.col(b + 4) = c.col(2);
                jc.col(b + 5) = c.col(3);
            }
            return gram(jc, pr.noise_var_comm) + gram(js, pr.noise_var_sens);
        }
        }
        return {};
    }

    FisherResult fisher_info(const FisherProblem &pr, const ParamSet &params, FisherSubsystem subsystem)
    {
        FisherResult out;
        out.subsystem = subsystem;
        out.fim = fisher_matrix(pr, params, subsystem);
        const int stride = subsystem == FisherSubsystem::Comm ? comm_coords
                           : subsystem == FisherSubsystem::Sens ? sens_coords
                                                                : shared_coords;
        for (int l = 0; l < params.size(); ++l)
            out.aoa_index.push_back(stride * l + stride - 1);

        Eigen::SelfAdjointEigenSolver<RMat> eig(out.fim);
        const double top = eig.eigenvalues().maxCoeff();
        const double bottom = eig.eigenvalues().minCoeff();
        if (eig.info() != Eigen::Success || !(top > 0.0) || bottom <= 1e-12 * top)
            fail(ErrorKind::SingularInformation,
                 std::string("fisher_info: singular information matrix for subsystem ") + to_string(subsystem));

        const RMat inv = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
                         eig.eigenvectors().transpose();
        for (int idx : out.aoa_index)
        {
            out.crlb_aoa.push_back(inv(idx, idx));
            out.crlb_aoa_theta_only.push_back(1.0 / out.fim(idx, idx));
        }
        return out;
    }

    std::vector<CrlbBounds> crlb_compare(const FisherProblem &problem, const ParamSet &params)
    {
        const FisherResult shared = fisher_info(problem, params, FisherSubsystem::Shared);
        const FisherResult comm = fisher_info(problem, params, FisherSubsystem::Comm);
        const FisherResult sens = fisher_info(problem, params, FisherSubsystem::Sens);
        std::vector<CrlbBounds> out(params.size());
        for (int l = 0; l < params.size(); ++l)
        {
            out[l].shared = shared.crlb_aoa[l];
            out[l].comm = comm.crlb_aoa[l];
            out[l].sens = sens.crlb_aoa[l];
            out[l].shared_theta_only = shared.crlb_aoa_theta_only[l];
            out[l].comm_theta_only = comm.crlb_aoa_theta_only[l];
            out[l].sens_theta_only = sens.crlb_aoa_theta_only[l];
        }
        return out;
    }

    double balanced_sensing_noise(const FisherProblem &problem, const ParamSet &params)
    {
        FisherProblem unit = problem;
        unit.noise_var_comm = problem.noise_var_comm;
        unit.noise_var_sens = 1.0;
        const RMat fc = fisher_matrix(unit, params, FisherSubsystem::Comm);
        const RMat fs = fisher_matrix(unit, params, FisherSubsystem::Sens);
        double ic = 0.0, is = 0.0;
        for (int l = 0; l < params.size(); ++l)
        {
            ic += fc(comm_coords * l + comm_coords - 1, comm_coords * l + comm_coords - 1);
            is += fs(sens_coords * l + sens_coords - 1, sens_coords * l + sens_coords - 1);
        }
        if (!(ic > 0.0) || !(is > 0.0))
            fail(ErrorKind::SingularInformation, "balanced_sensing_noise: zero AOA information");
        // is scales as 1/sigma_s^2.
        return is / ic;
    }

    ParamSet params_from_scene(const ChannelScene &scene)
    {
        ParamSet ps;
        const std::size_t k = std::max(scene.sensing_paths.size(), scene.comm_paths.size());
        for (std::size_t l = 0; l < k; ++l)
        {
            PathEstimate p;
            if (l < scene.sensing_paths.size())
            {
                p.sens_gain = scene.sensing_paths[l].gain;
                p.sens_aoa = scene.sensing_paths[l].aoa;
                p.sens_aod = scene.sensing_paths[l].aod;
            }
            if (l < scene.comm_paths.size())
            {
                p.comm_gain = scene.comm_paths[l].gain;
                p.comm_aoa = scene.comm_paths[l].aoa;
                p.comm_aod = scene.comm_paths[l].aod;
            }
            ps.paths.push_back(p);
        }
        return ps;
    }
}
