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

#include "doctest.h"

#include "isac/crlb.hpp"
#include "isac/harness.hpp"

#include <cmath>

using namespace isac;

namespace
{
    struct Setup
    {
        FisherProblem prob;
        ParamSet params;
    };

    Setup make_setup(std::uint64_t seed, int k, int n, double snr_db)
    {
        const ArrayConfig cfg{16, 16, 32, 32};
        const BeamspaceSystem sys = make_beamspace(cfg);
        Rng rng(seed);
        ChannelScene scene = sample_off_grid_scene(sys, k, n, rng, SceneSampling{0.75, 7, 10.0});
        const PilotSet pilots = make_pilots(cfg, n, rng);
        calibrate_noise(scene, noiseless_observation(scene, cfg, pilots), snr_db);
        return {FisherProblem::make(scene, pilots, cfg), params_from_scene(scene)};
    }

    // Stacked noiseless comm and sensing means as a function of the shared coordinates
    // (Re a, Im a, Re b, Im b, comm AOD, AOA) per path.
    CVec shared_mean(const Setup &s, const RVec &x, bool comm)
    {
        const int nr = s.prob.cfg.n_rx, nt = s.prob.cfg.n_tx;
        const auto n = s.prob.v_c.cols();
        CMat mu = CMat::Zero(nr, n);
        for (int l = 0; l < s.params.size(); ++l)
        {
            const RVec c = x.segment(6 * l, 6);
            const CVec ar = steering(c[5], nr);
            if (comm)
                mu += Complex(c[2], c[3]) * ar * (steering(c[4], nt).adjoint() * s.prob.v_c);
            else
                mu += Complex(c[0], c[1]) * ar * (steering(c[5], nt).adjoint() * s.prob.v_s);
        }
        return Eigen::Map<const CVec>(mu.data(), mu.size());
    }

    RMat numeric_shared_fim(const Setup &s)
    {
        const int k = s.params.size();
        RVec x(6 * k);
        for (int l = 0; l < k; ++l)
        {
            const auto &p = s.params.paths[l];
            x.segment(6 * l, 6) << p.sens_gain.real(), p.sens_gain.imag(), p.comm_gain.real(), p.comm_gain.imag(),
                p.comm_aod, p.sens_aoa;
        }
        RMat fim = RMat::Zero(6 * k, 6 * k);
        for (bool comm : {true, false})
        {
            CMat j(shared_mean(s, x, comm).size(), 6 * k);
            for (int c = 0; c < 6 * k; ++c)
            {
                const double h = 1e-6;
                RVec up = x, dn = x;
                up[c] += h;
                dn[c] -= h;
                j.col(c) = (shared_mean(s, up, comm) - shared_mean(s, dn, comm)) / (2 * h);
            }
            const double var = comm ? s.prob.noise_var_comm : s.prob.noise_var_sens;
            fim += (2.0 / var) * (j.adjoint() * j).real();
        }
        return fim;
    }
}

TEST_CASE("shared FIM matches a finite-difference Jacobian")
{
    for (std::uint64_t seed : {1u, 2u, 3u})
    {
        const Setup s = make_setup(seed, 2, 3, 0.0);
        const RMat an = fisher_matrix(s.prob, s.params, FisherSubsystem::Shared);
        const RMat num = numeric_shared_fim(s);
        CHECK((an - num).norm() / an.norm() < 1e-6);
    }
}

TEST_CASE("shared FIM is the sum of the embedded standalone FIMs")
{
    const Setup s = make_setup(4, 1, 4, 3.0);
    const RMat sh = fisher_matrix(s.prob, s.params, FisherSubsystem::Shared);
    const RMat c = fisher_matrix(s.prob, s.params, FisherSubsystem::Comm);
    const RMat se = fisher_matrix(s.prob, s.params, FisherSubsystem::Sens);
    // comm: Re b, Im b, AOD, AOA -> shared 2, 3, 4, 5; sens: Re a, Im a, AOA -> 0, 1, 5.
    RMat embed = RMat::Zero(6, 6);
    const int ci[] = {2, 3, 4, 5};
    const int si[] = {0, 1, 5};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            embed(ci[i], ci[j]) += c(i, j);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            embed(si[i], si[j]) += se(i, j);
    CHECK((sh - embed).norm() < 1e-10 * sh.norm());
}

TEST_CASE("shared bound never exceeds either standalone bound")
{
    for (std::uint64_t seed = 100; seed < 200; ++seed)
    {
        const Setup s = make_setup(seed, 2, 4, -5.0 + static_cast<double>(seed % 15));
        for (const auto &b : crlb_compare(s.prob, s.params))
        {
            CHECK(b.shared <= std::min(b.comm, b.sens) * (1 + 1e-12));
            CHECK(b.shared_theta_only <= std::min(b.comm_theta_only, b.sens_theta_only) * (1 + 1e-12));
        }
    }
}

TEST_CASE("symmetric subsystems halve the AOA bound")
{
    Setup s = make_setup(7, 1, 5, 0.0);
    s.prob.noise_var_sens = balanced_sensing_noise(s.prob, s.params);
    const auto b = crlb_compare(s.prob, s.params).at(0);
    CHECK(b.comm_theta_only == doctest::Approx(b.sens_theta_only).epsilon(1e-12));
    CHECK(b.shared_theta_only == doctest::Approx(b.comm_theta_only / 2).epsilon(1e-12));
}

TEST_CASE("an uninformative comm link leaves the sensing bound")
{
    Setup s = make_setup(8, 2, 4, 5.0);
    const double base = s.prob.noise_var_comm;
    double prev_gap = 1e300;
    for (double scale : {1.0, 1e2, 1e4, 1e6})
    {
        s.prob.noise_var_comm = base * scale;
        const auto b = crlb_compare(s.prob, s.params).at(0);
        const double gap = std::abs(b.shared - b.sens) / b.sens;
        CHECK(gap <= prev_gap);
        prev_gap = gap;
    }
    CHECK(prev_gap < 1e-4);
}

TEST_CASE("zero noise and singular geometry are rejected")
{
    Setup s = make_setup(9, 2, 4, 0.0);
    FisherProblem z = s.prob;
    z.noise_var_sens = 0.0;
    CHECK_THROWS_AS(fisher_info(z, s.params, FisherSubsystem::Sens), Error);

    ParamSet dup = s.params;
    dup.paths[1] = dup.paths[0];
    try
    {
        fisher_info(s.prob, dup, FisherSubsystem::Sens);
        FAIL("expected an error");
    }
    catch (const Error &e)
    {
        CHECK(e.kind() == ErrorKind::SingularInformation);
        CHECK(std::string(e.what()).find("sens") != std::string::npos);
    }
}

TEST_CASE("subsystem tags")
{
    CHECK(parse_fisher_subsystem("shared") == FisherSubsystem::Shared);
    CHECK(std::string(to_string(FisherSubsystem::Comm)) == "comm");
    CHECK_THROWS_AS(parse_fisher_subsystem("both"), Error);
}
