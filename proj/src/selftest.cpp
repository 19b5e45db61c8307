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

#include "isac/reports.hpp"

#include "isac/crlb.hpp"
#include "isac/esprit.hpp"
#include "isac/sage.hpp"
#include "isac/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace isac
{
    namespace
    {
        struct Probe
        {
            std::string name;
            std::function<std::string()> body;   // empty string on success
        };

        std::string fmt(const char *what, double v)
        {
            std::ostringstream os;
            os << what << " " << v;
            return os.str();
        }

        std::string check_steering()
        {
            Rng rng(11);
            std::uniform_real_distribution<double> ud(-1.5, 1.5);
            double worst = 0.0;
            for (int i = 0; i < 100; ++i)
            {
                const double t = ud(rng);
                const double h = 1e-6;
                const CVec fd = (steering(t + h, 16) - steering(t - h, 16)) / (2.0 * h);
                const CVec an = steering_derivative(t, 16);
                worst = std::max(worst, (fd - an).norm() / an.norm());
                if ((steering(-t, 16) - steering(t, 16).conjugate()).norm() > 1e-12)
                    return "steering(-t) != conj(steering(t))";
            }
            return worst < 1e-6 ? "" : fmt("derivative relative error", worst);
        }

        std::string check_dictionary()
        {
            const BeamspaceSystem sys = make_beamspace(ArrayConfig{});
            const CMat gram = sys.u_rx * sys.u_rx.adjoint();
            const double ratio = static_cast<double>(sys.cfg.g_rx) / sys.cfg.n_rx;
            const double err = (gram - ratio * CMat::Identity(sys.cfg.n_rx, sys.cfg.n_rx)).norm();
            for (int j = 0; j < sys.u_tx.cols(); ++j)
                if (std::abs(sys.u_tx.col(j).norm() - 1.0) > 1e-12)
                    return "dictionary column norm != 1";
            return err < 1e-10 ? "" : fmt("frame identity error", err);
        }

        std::string check_vectorization()
        {
            const ArrayConfig cfg;
            const BeamspaceSystem sys = make_beamspace(cfg);
            Rng rng(12);
            double worst = 0.0;
            for (int t = 0; t < 5; ++t)
            {
                const ChannelScene scene = sample_off_grid_scene(sys, 2, 3, rng);
                const PilotSet pilots = make_pilots(cfg, 3, rng);
                const Observation clean = noiseless_observation(scene, cfg, pilots);
                const CVec hs = beamspace_channel(synth_sensing_channel(scene.sensing_paths, cfg), sys);
                const CVec hc = beamspace_channel(synth_comm_channel(scene.comm_paths, cfg), sys);
                for (int n = 0; n < 3; ++n)
                {
                    const auto os = build_measurement(sys, pilots, Subsystem::Sensing, n);
                    const auto oc = build_measurement(sys, pilots, Subsystem::Communication, n);
                    worst = std::max(worst, (os.apply(hs) - clean.y_s[static_cast<std::size_t>(n)]).norm());
                    worst = std::max(worst, (oc.apply(hc) - clean.y_c[static_cast<std::size_t>(n)]).norm());
                }
            }
            return worst < 1e-10 ? "" : fmt("Omega h - y error", worst);
        }

        std::string check_weighted_ls()
        {
            Rng rng(13);
            const CMat a = CMat::Random(16, 5);
            const CVecList y{CVec::Random(16), CVec::Random(16)};
            const std::vector<CMat> omegas{a, a};
            const std::vector<double> w{0.1, 0.3, 0.2, 0.25, 0.15};
            const auto wl = weighted_ls(omegas, w, y);
            const auto pl = plain_ls(omegas, y);
            double err = 0.0;
            for (std::size_t n = 0; n < y.size(); ++n)
                err = std::max(err, (wl[n] - pl[n]).norm());
            return err < 1e-10 ? "" : fmt("weighted vs plain LS difference", err);
        }

        std::string check_noiseless_coarse()
        {
            const ArrayConfig cfg;
            const BeamspaceSystem sys = make_beamspace(cfg);
            Rng rng(14);
            OmpConfig omp;
            for (int t = 0; t < 20; ++t)
            {
                const ChannelScene scene = sample_on_grid_scene(sys, 2, 4, rng, sampling_of(ExperimentConfig{}));
                const PilotSet pilots = make_pilots(cfg, 4, rng);
                const Observation clean = noiseless_observation(scene, cfg, pilots);
                const auto omegas = build_measurements(sys, pilots, Subsystem::Sensing, 4);
                const auto est = proposed_omp(clean.y_s, omegas, omp, sys);
                auto centers = est.center_atoms;
                std::sort(centers.begin(), centers.end());
                if (centers != true_support(scene, sys))
                    return "proposed OMP missed a noiseless support";
                for (std::size_t i = 1; i < est.residual_trace.size(); ++i)
                    if (est.residual_trace[i] > est.residual_trace[i - 1] * (1.0 + 1e-12))
                        return "OMP residual increased";
                auto angles = esprit_aoa(build_snapshots(clean.y_s), 2);
                std::vector<double> truth{scene.sensing_paths[0].aoa, scene.sensing_paths[1].aoa};
                std::sort(truth.begin(), truth.end());
                for (std::size_t k = 0; k < 2; ++k)
                    if (std::abs(angles[k] - truth[k]) > 1e-6)
                        return fmt("ESPRIT noiseless error", std::abs(angles[k] - truth[k]));
            }
            return "";
        }

        double assigned_cost(const ParamSet &p, ParamKind kind, const SageData &data, SageMode mode)
        {
            if (mode != SageMode::Joint)
                return cost_for_mode(p, data, mode);
            if (kind == ParamKind::SensGain)
                return cost_sens(p, data);
            if (kind == ParamKind::CommGain || kind == ParamKind::CommAod)
                return cost_comm(p, data);
            return cost_joint(p, data);
        }

        ParamSet perturbed(ParamSet p, int k, ParamKind kind, SageMode mode, Complex d)
        {
            auto &q = p.paths[static_cast<std::size_t>(k)];
            if (mode == SageMode::Joint && is_angle(kind) && kind != ParamKind::CommAod)
            {
                q.sens_aoa += d.real();
                p.tie_shared();
            }
            else
                q.set(kind, q.get_complex(kind) + d);
            return p;
        }

        std::string check_gradients()
        {
            const ArrayConfig cfg;
            const BeamspaceSystem sys = make_beamspace(cfg);
            Rng rng(15);
            const ChannelScene scene = sample_off_grid_scene(sys, 2, 3, rng);
            const PilotSet pilots = make_pilots(cfg, 3, rng);
            ChannelScene noisy = scene;
            const Observation clean = noiseless_observation(scene, cfg, pilots);
            calibrate_noise(noisy, clean, 0.0);
            const Observation obs = add_noise(clean, noisy, rng);
            const SageData data =
                SageData::make(cfg, obs.y_c, obs.y_s, pilots.comm_excitations(), pilots.sensing_pilots);
            ParamSet params = params_from_scene(scene);
            for (auto &p : params.paths)
            {
                p.comm_aod += 0.01;
                p.sens_aoa += 0.005;
            }
            params.tie_shared();
            const ParamKind kinds[] = {ParamKind::SensGain, ParamKind::CommGain, ParamKind::CommAod,
                                       ParamKind::CommAoa,  ParamKind::SensAod,  ParamKind::SensAoa};
            for (SageMode mode : {SageMode::Joint, SageMode::CommOnly, SageMode::SensOnly})
                for (ParamKind kind : kinds)
                {
                    if (!kind_valid(kind, mode))
                        continue;
                    const Complex g = grad_param(params, 0, kind, data, mode);
                    const double h = is_angle(kind) ? 1e-6 : 1e-5;
                    auto fd = [&](Complex d) {
                        return (assigned_cost(perturbed(params, 0, kind, mode, d), kind, data, mode) -
                                assigned_cost(perturbed(params, 0, kind, mode, -d), kind, data, mode)) /
                               (2.0 * h);
                    };
                    const Complex num =
                        is_angle(kind) ? Complex(fd(h), 0.0) : Complex(fd(h), fd(Complex(0.0, h)));
                    const double rel = std::abs(num - g) / std::max(std::abs(g), 1e-12);
                    if (rel > 1e-5)
                        return std::string("gradient ") + to_string(kind) + " in " + to_string(mode) +
                               " mismatch " + std::to_string(rel);
                }
            return "";
        }

        std::string check_fisher()
        {
            const ArrayConfig cfg{8, 8, 16, 16};
            const BeamspaceSystem sys = make_beamspace(cfg);
            Rng rng(16);
            for (int t = 0; t < 20; ++t)
            {
                ChannelScene scene = sample_off_grid_scene(sys, 2, 4, rng);
                const PilotSet pilots = make_pilots(cfg, 4, rng);
                calibrate_noise(scene, noiseless_observation(scene, cfg, pilots), 5.0);
                const FisherProblem prob = FisherProblem::make(scene, pilots, cfg);
                const ParamSet params = params_from_scene(scene);
                for (const auto &b : crlb_compare(prob, params))
                {
                    if (b.shared > std::min(b.comm, b.sens) * (1.0 + 1e-12))
                        return "shared CRLB exceeds a standalone CRLB";
                    const double harmonic = 1.0 / (1.0 / b.comm_theta_only + 1.0 / b.sens_theta_only);
                    if (std::abs(b.shared_theta_only - harmonic) > 1e-9 * harmonic)
                        return "AOA-only shared bound is not the harmonic combination";
                }
            }
            return "";
        }

        std::string check_determinism()
        {
            ExperimentConfig cfg;
            cfg.array = ArrayConfig{8, 8, 16, 16};
            cfg.snr_grid_db = {-10.0, 10.0};
            cfg.n_subcarriers_list = {4};
            cfg.trials = 6;
            cfg.sage_outer_iters = 5;
            const std::string a = format_csv(run_sweep(cfg, 1), cfg);
            const std::string b = format_csv(run_sweep(cfg, 3), cfg);
            return a == b ? "" : "sweep output depends on the thread count";
        }
    }

    std::vector<SelftestCheck> run_selftest()
    {
        const Probe probes[] = {
            {"steering_derivative_matches_finite_difference", check_steering},
            {"dictionary_frame_identity", check_dictionary},
            {"measurement_vectorization_identity", check_vectorization},
            {"weighted_ls_equals_plain_ls", check_weighted_ls},
            {"noiseless_support_and_esprit_exact", check_noiseless_coarse},
            {"sage_gradients_match_finite_difference", check_gradients},
            {"shared_crlb_not_above_standalone", check_fisher},
            {"sweep_independent_of_thread_count", check_determinism},
        };
        std::vector<SelftestCheck> out;
        for (const auto &p : probes)
        {
            SelftestCheck c;
            c.name = p.name;
            try
            {
                c.detail = p.body();
                c.passed = c.detail.empty();
            }
            catch (const std::exception &e)
            {
                c.detail = std::string("exception: ") + e.what();
            }
            out.push_back(c);
        }
        return out;
    }

    std::string format_selftest(const std::vector<SelftestCheck> &checks)
    {
        std::string s;
        for (const auto &c : checks)
        {
            s += (c.passed ? "PASS " : "FAIL ") + c.name;
            if (!c.detail.empty())
                s += ": " + c.detail;
            s += "\n";
        }
        return s;
    }
}
