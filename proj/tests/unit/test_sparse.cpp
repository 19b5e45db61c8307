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

#include "isac/harness.hpp"
#include "isac/sparse.hpp"

#include <algorithm>
#include <cmath>

using namespace isac;

namespace
{
    struct Fixture
    {
        ArrayConfig cfg;
        BeamspaceSystem sys = make_beamspace(cfg);
    };

    // Dense-matrix correlation for every atom, normalized by the stacked column norm.
    std::vector<double> brute_correlation(const CVecList &r, const OperatorList &omegas)
    {
        const auto cols = static_cast<std::size_t>(omegas.front().cols());
        std::vector<double> c(cols, 0.0), sq(cols, 0.0);
        for (std::size_t n = 0; n < r.size(); ++n)
        {
            const CMat d = omegas[n].dense();
            for (Eigen::Index m = 0; m < d.cols(); ++m)
            {
                c[static_cast<std::size_t>(m)] += std::abs(d.col(m).dot(r[n]));
                sq[static_cast<std::size_t>(m)] += d.col(m).squaredNorm();
            }
        }
        for (std::size_t m = 0; m < cols; ++m)
            c[m] /= std::sqrt(sq[m]);
        return c;
    }

    // Diagonal atom whose one-column LS fit leaves the least residual energy.
    AtomIndex exhaustive_single(const CVecList &y, const OperatorList &omegas, int g)
    {
        AtomIndex best = 0;
        double best_e = 1e300;
        for (AtomIndex m : diag_index_set(g, g))
        {
            double e = 0.0;
            for (std::size_t n = 0; n < y.size(); ++n)
            {
                const CVec col = omegas[n].column(m);
                const Complex h = col.dot(y[n]) / col.squaredNorm();
                e += (y[n] - h * col).squaredNorm();
            }
            if (e < best_e)
            {
                best_e = e;
                best = m;
            }
        }
        return best;
    }

    CVecList observe(const Fixture &f, const std::vector<PathParams> &paths, const PilotSet &p, Subsystem s)
    {
        CVecList y;
        const CMat h = s == Subsystem::Sensing ? synth_sensing_channel(paths, f.cfg) : synth_comm_channel(paths, f.cfg);
        for (int n = 0; n < p.size(); ++n)
            y.push_back(h * (s == Subsystem::Sensing ? p.sensing_pilots[n] : p.comm_excitation(n)));
        return y;
    }
}

TEST_CASE("lobe radius")
{
    CHECK(lobe_radius(32) == 2);
    CHECK(lobe_radius(12) == 0);
    CHECK(lobe_radius(126) == 10);
    CHECK_THROWS_AS(lobe_radius(0), Error);
}

TEST_CASE("diagonal neighborhoods")
{
    CHECK(neighborhood(67, 2, 32, 32) == std::vector<AtomIndex>{1, 34, 67, 100, 133});
    CHECK(neighborhood(67, 0, 32, 32) == std::vector<AtomIndex>{67});
    CHECK(neighborhood(1, 2, 32, 32) == std::vector<AtomIndex>{1, 34, 67});
    CHECK(neighborhood(1024, 2, 32, 32) == std::vector<AtomIndex>{958, 991, 1024});
    CHECK_THROWS_AS(neighborhood(2, 2, 32, 32), Error);
}

TEST_CASE("neighborhood weights")
{
    const std::vector<double> c{1.0, 2.0, 1.0};
    const auto w = neighborhood_weights(c);
    CHECK(w[0] == doctest::Approx(0.25));
    CHECK(w[1] == doctest::Approx(0.5));
    CHECK(w[2] == doctest::Approx(0.25));
    const std::vector<double> u{3.0, 3.0, 3.0, 3.0};
    for (double x : neighborhood_weights(u))
        CHECK(x == doctest::Approx(0.25));
    const std::vector<double> z{0.0, 0.0};
    try
    {
        neighborhood_weights(z);
        FAIL("expected an error");
    }
    catch (const Error &e)
    {
        CHECK(e.kind() == ErrorKind::DegenerateWeights);
    }
}

TEST_CASE("correlation agrees with a brute-force dense computation")
{
    Fixture f;
    Rng rng(31);
    const PilotSet p = make_pilots(f.cfg, 3, rng);
    const auto omegas = build_measurements(f.sys, p, Subsystem::Sensing, 3);
    const CVecList r{CVec::Random(16), CVec::Random(16), CVec::Random(16)};
    std::vector<AtomIndex> all(1024);
    for (int m = 0; m < 1024; ++m)
        all[static_cast<std::size_t>(m)] = m + 1;
    const auto corr = correlate_atoms(r, omegas, all);
    const auto oracle = brute_correlation(r, omegas);
    const auto best = std::max_element(oracle.begin(), oracle.end()) - oracle.begin() + 1;
    CHECK(corr.best == best);
    for (int m = 1; m <= 1024; m += 17)
        CHECK(corr.values.at(m) == doctest::Approx(oracle[static_cast<std::size_t>(m - 1)]).epsilon(1e-10));
}

TEST_CASE("correlation peaks at the atom that generated the residual")
{
    Fixture f;
    Rng rng(32);
    const PilotSet p = make_pilots(f.cfg, 2, rng);
    const auto omegas = build_measurements(f.sys, p, Subsystem::Sensing, 2);
    const auto diag = diag_index_set(32, 32);
    for (AtomIndex m0 : {1, 100, 529, 1024})
    {
        const CVecList r{omegas[0].column(m0), omegas[1].column(m0)};
        CHECK(correlate_atoms(r, omegas, diag).best == m0);
    }
    const CVecList zero{CVec::Zero(16), CVec::Zero(16)};
    const std::vector<AtomIndex> cand{100, 34, 67};
    const auto z = correlate_atoms(zero, omegas, cand);
    CHECK(z.best == 34);
    for (const auto &kv : z.values)
        CHECK(kv.second == 0.0);
    CHECK_THROWS_AS(correlate_atoms(zero, omegas, std::vector<AtomIndex>{}), Error);
}

TEST_CASE("weighted LS on orthonormal columns is a projection")
{
    Rng rng(33);
    const CMat q = CMat::Random(12, 4).householderQr().householderQ() * CMat::Identity(12, 4);
    const CVecList y{CVec::Random(12)};
    const std::vector<double> w(4, 0.25);
    const auto h = weighted_ls({q}, w, y);
    CHECK((h[0] - q.adjoint() * y[0]).norm() < 1e-12);
}

TEST_CASE("weighted LS equals plain LS for positive weights")
{
    Rng rng(34);
    std::uniform_real_distribution<double> uw(0.01, 1.0);
    for (int trial = 0; trial < 50; ++trial)
    {
        const CMat a = CMat::Random(16, 5);
        const CVecList y{CVec::Random(16), CVec::Random(16)};
        std::vector<double> w(5);
        for (auto &x : w)
            x = uw(rng);
        const auto wl = weighted_ls({a, a}, w, y);
        const auto pl = plain_ls({a, a}, y);
        for (std::size_t n = 0; n < 2; ++n)
            CHECK((wl[n] - pl[n]).norm() < 1e-10);
    }
}

TEST_CASE("weighted LS fits a spanned measurement exactly and rejects rank deficiency")
{
    const CMat a = CMat::Random(10, 3);
    const CVec h0 = CVec::Random(3);
    const auto h = weighted_ls({a}, std::vector<double>{0.2, 0.5, 0.3}, {a * h0});
    CHECK((a * h[0] - a * h0).norm() < 1e-12);

    CMat b = a;
    b.col(2) = b.col(1);
    try
    {
        weighted_ls({b}, std::vector<double>{0.2, 0.5, 0.3}, {a * h0});
        FAIL("expected an error");
    }
    catch (const Error &e)
    {
        CHECK(e.kind() == ErrorKind::SingularSystem);
    }
    CHECK_NOTHROW(weighted_ls_ridge({b}, std::vector<double>{0.2, 0.5, 0.3}, {a * h0}));
}

TEST_CASE("proposed OMP recovers a single on-grid path exactly")
{
    Fixture f;
    Rng rng(35);
    const PilotSet p = make_pilots(f.cfg, 4, rng);
    const auto omegas = build_measurements(f.sys, p, Subsystem::Sensing, 4);
    for (int i : {3, 10, 16, 25})
    {
        const double t = f.sys.grid_rx[static_cast<std::size_t>(i)];
        const CVecList y = observe(f, {{Complex(0.8, -0.6), t, t}}, p, Subsystem::Sensing);
        OmpConfig omp;
        omp.sparsity = 1;
        const auto est = proposed_omp(y, omegas, omp, f.sys);
        REQUIRE(est.center_atoms.size() == 1);
        CHECK(est.center_atoms[0] == exhaustive_single(y, omegas, 32));
        CHECK(est.center_atoms[0] == i + 32 * i + 1);
        CHECK(est.residual_norm < 1e-8);
        const auto ang = coarse_angles(est, f.sys);
        CHECK(ang[0].aoa == t);
    }
}

TEST_CASE("proposed OMP recovers two well-separated noiseless paths")
{
    Fixture f;
    Rng rng(36);
    SceneSampling s;
    s.min_separation = 2 * (lobe_radius(32) + 1) + 1;
    int hits = 0;
    for (int t = 0; t < 100; ++t)
    {
        const ChannelScene scene = sample_on_grid_scene(f.sys, 2, 3, rng, s);
        const PilotSet p = make_pilots(f.cfg, 3, rng);
        const auto omegas = build_measurements(f.sys, p, Subsystem::Sensing, 3);
        const auto y = observe(f, scene.sensing_paths, p, Subsystem::Sensing);
        auto est = proposed_omp(y, omegas, OmpConfig{}, f.sys);
        auto c = est.center_atoms;
        std::sort(c.begin(), c.end());
        hits += c == true_support(scene, f.sys);
        for (std::size_t i = 1; i < est.residual_trace.size(); ++i)
            CHECK(est.residual_trace[i] <= est.residual_trace[i - 1] * (1 + 1e-12));
    }
    CHECK(hits == 100);
}

TEST_CASE("support weights and coefficients are aligned")
{
    Fixture f;
    Rng rng(37);
    const ChannelScene scene = sample_on_grid_scene(f.sys, 2, 2, rng, SceneSampling{0.75, 7, 10.0});
    const PilotSet p = make_pilots(f.cfg, 2, rng);
    const auto omegas = build_measurements(f.sys, p, Subsystem::Sensing, 2);
    const auto est = proposed_omp(observe(f, scene.sensing_paths, p, Subsystem::Sensing), omegas, OmpConfig{}, f.sys);
    CHECK(std::is_sorted(est.support.begin(), est.support.end()));
    CHECK(est.weights.size() == est.support.size());
    for (const auto &h : est.coefficients)
        CHECK(h.size() == static_cast<Eigen::Index>(est.support.size()));
    const auto diag = diag_index_set(32, 32);
    for (AtomIndex m : est.support)
        CHECK(std::find(diag.begin(), diag.end(), m) != diag.end());
}

TEST_CASE("conventional OMP finds an on-grid atom and leaks for an off-grid path")
{
    Fixture f;
    Rng rng(38);
    const PilotSet p = make_pilots(f.cfg, 16, rng);
    const auto omegas = build_measurements(f.sys, p, Subsystem::Sensing, 16);
    OmpConfig one;
    one.sparsity = 1;
    const double t = f.sys.grid_rx[20];
    const auto y = observe(f, {{Complex(1, 0), t, t}}, p, Subsystem::Sensing);
    const auto est = conventional_omp(y, omegas, one);
    CHECK(est.center_atoms == std::vector<AtomIndex>{20 + 32 * 20 + 1});
    CHECK(est.residual_norm < 1e-8);

    // Half a cell between grid points 20 and 21.
    const double off = std::asin((std::sin(f.sys.grid_rx[20]) + std::sin(f.sys.grid_rx[21])) / 2);
    const auto yo = observe(f, {{Complex(1, 0), off, off}}, p, Subsystem::Sensing);
    OmpConfig four;
    four.sparsity = 4;
    const auto leak = conventional_omp(yo, omegas, four);
    CHECK(leak.residual_trace[1] > 0.1 * leak.residual_trace[0]);
    for (AtomIndex m : leak.center_atoms)
    {
        const int i = (m - 1) % 32;
        const int j = (m - 1) / 32;
        CHECK(std::abs(i - 20.5) < 3.0);
        CHECK(std::abs(j - 20.5) < 3.0);
    }
    for (std::size_t i = 1; i < leak.residual_trace.size(); ++i)
        CHECK(leak.residual_trace[i] <= leak.residual_trace[i - 1] * (1 + 1e-12));
}

TEST_CASE("DCS-SOMP coincides with conventional OMP on one subcarrier")
{
    Fixture f;
    Rng rng(39);
    for (int t = 0; t < 10; ++t)
    {
        const ChannelScene scene = sample_off_grid_scene(f.sys, 2, 1, rng);
        const PilotSet p = make_pilots(f.cfg, 1, rng);
        const auto omegas = build_measurements(f.sys, p, Subsystem::Communication, 1);
        CVecList y = observe(f, scene.comm_paths, p, Subsystem::Communication);
        y[0] += complex_noise(16, 0.01, rng);
        const auto a = dcs_somp(y, omegas, OmpConfig{});
        const auto b = conventional_omp(y, omegas, OmpConfig{});
        CHECK(a.center_atoms == b.center_atoms);
        CHECK(a.residual_norm == doctest::Approx(b.residual_norm).epsilon(1e-9));
    }
}

TEST_CASE("DCS-SOMP recovers noiseless on-grid comm paths")
{
    Fixture f;
    Rng rng(40);
    const PilotSet p = make_pilots(f.cfg, 8, rng);
    const auto omegas = build_measurements(f.sys, p, Subsystem::Communication, 8);
    const std::vector<PathParams> paths{{Complex(2.0, 1.0), f.sys.grid_rx[8], f.sys.grid_tx[12]},
                                        {Complex(-0.5, 0.7), f.sys.grid_rx[22], f.sys.grid_tx[5]}};
    const auto est = dcs_somp(observe(f, paths, p, Subsystem::Communication), omegas, OmpConfig{});
    auto c = est.center_atoms;
    std::sort(c.begin(), c.end());
    CHECK(c == std::vector<AtomIndex>{22 + 32 * 5 + 1, 8 + 32 * 12 + 1});
    CHECK(est.residual_norm < 1e-8);
}

TEST_CASE("coarse angles quantize off-grid paths to half a cell on one subcarrier")
{
    Fixture f;
    Rng rng(41);
    const PilotSet p = make_pilots(f.cfg, 1, rng);
    const auto omegas = build_measurements(f.sys, p, Subsystem::Sensing, 1);
    std::uniform_real_distribution<double> us(-0.7, 0.7);
    OmpConfig one;
    one.sparsity = 1;
    for (int t = 0; t < 200; ++t)
    {
        const double th = std::asin(us(rng));
        const auto est = proposed_omp(observe(f, {{Complex(1, 0), th, th}}, p, Subsystem::Sensing), omegas, one, f.sys);
        const auto ang = coarse_angles(est, f.sys);
        CHECK(std::abs(std::sin(ang[0].aoa) - std::sin(th)) <= 1.0 / 32 + 1e-12);
    }
    SparseEstimate e;
    e.center_atoms = {67};
    const auto ang = coarse_angles(e, f.sys);
    CHECK(ang[0].aoa == f.sys.grid_rx[2]);
    CHECK(ang[0].aod == f.sys.grid_tx[2]);
}

TEST_CASE("coarse angles stay within one cell of off-grid paths on several subcarriers")
{
    Fixture f;
    Rng rng(42);
    const PilotSet p = make_pilots(f.cfg, 10, rng);
    const auto omegas = build_measurements(f.sys, p, Subsystem::Sensing, 10);
    std::uniform_real_distribution<double> us(-0.7, 0.7);
    OmpConfig one;
    one.sparsity = 1;
    for (int t = 0; t < 200; ++t)
    {
        const double th = std::asin(us(rng));
        const auto est = proposed_omp(observe(f, {{Complex(1, 0), th, th}}, p, Subsystem::Sensing), omegas, one, f.sys);
        const auto ang = coarse_angles(est, f.sys);
        CHECK(std::abs(std::sin(ang[0].aoa) - std::sin(th)) <= 2.0 / 32 + 1e-12);
    }
}
