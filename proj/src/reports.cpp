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

#include <json.hpp>

#include <cmath>

namespace isac
{
    namespace
    {
        using nlohmann::ordered_json;

        std::vector<double> to_deg(const std::vector<double> &rad)
        {
            std::vector<double> out;
            for (double r : rad)
                out.push_back(rad_to_deg(r));
            return out;
        }

        ordered_json sparse_json(const SparseEstimate &est, const BeamspaceSystem &sys)
        {
            ordered_json j;
            j["center_atoms"] = est.center_atoms;
            j["support"] = est.support;
            j["weights"] = est.weights;
            std::vector<double> aoa, aod;
            for (AtomIndex m : est.center_atoms)
            {
                const auto a = atom_to_angles(m, sys);
                aoa.push_back(rad_to_deg(a.aoa));
                aod.push_back(rad_to_deg(a.aod));
            }
            j["aoa_deg"] = aoa;
            j["aod_deg"] = aod;
            j["residual_norm"] = est.residual_norm;
            return j;
        }

        std::vector<SageMode> refine_modes(const ExperimentConfig &cfg)
        {
            std::vector<SageMode> modes;
            for (Method m : cfg.methods)
            {
                if (m == Method::SageJoint)
                    modes.push_back(SageMode::Joint);
                else if (m == Method::SageComm)
                    modes.push_back(SageMode::CommOnly);
                else if (m == Method::SageSens)
                    modes.push_back(SageMode::SensOnly);
            }
            if (modes.empty())
                modes = {SageMode::Joint, SageMode::CommOnly, SageMode::SensOnly};
            return modes;
        }

        std::string complex_text(Complex c)
        {
            return format_real(c.real()) + (c.imag() < 0 ? "" : "+") + format_real(c.imag()) + "j";
        }
    }

    SceneSetup prepare_scene(const ExperimentConfig &cfg, bool on_grid)
    {
        cfg.validate();
        SceneSetup st;
        st.sys = make_beamspace(cfg.array);
        const int n_sub = cfg.n_subcarriers_list.front();
        Rng rng(trial_seed(cfg.seed, 0, 0, 0));
        if (cfg.sensing_paths.empty())
        {
            const SceneSampling sampling = sampling_of(cfg);
            st.scene = on_grid ? sample_on_grid_scene(st.sys, cfg.k_paths, n_sub, rng, sampling)
                               : sample_off_grid_scene(st.sys, cfg.k_paths, n_sub, rng, sampling);
            st.sampled = true;
        }
        else
        {
            st.scene.n_subcarriers = n_sub;
            st.scene.sensing_paths = cfg.sensing_paths;
            if (cfg.comm_paths.empty())
                st.scene.comm_paths = cfg.sensing_paths;
            else
            {
                st.scene.comm_paths = cfg.comm_paths;
                for (std::size_t k = 0; k < st.scene.comm_paths.size(); ++k)
                    if (std::abs(st.scene.comm_paths[k].aoa - cfg.sensing_paths[k].aoa) > 1e-12)
                        fail(ErrorKind::Config, "config key 'comm_path': entry " + std::to_string(k + 1) +
                                                    " must share the AOA of sensing_path " + std::to_string(k + 1));
            }
        }
        st.scene.validate();
        st.pilots = make_pilots(cfg.array, n_sub, rng);
        st.clean = noiseless_observation(st.scene, cfg.array, st.pilots);
        return st;
    }

    std::string estimate_report(const ExperimentConfig &cfg)
    {
        SceneSetup st = prepare_scene(cfg, true);
        const double snr_db = cfg.snr_grid_db.front();
        calibrate_noise(st.scene, st.clean, snr_db);
        Rng rng(trial_seed(cfg.seed, 0, 0, 1));
        const Observation obs = add_noise(st.clean, st.scene, rng);
        const int n_sub = st.scene.n_subcarriers;
        const int k = static_cast<int>(st.scene.sensing_paths.size());

        OmpConfig omp;
        omp.sparsity = k;
        omp.lobe_radius_override = cfg.lobe_radius_override;
        const auto omegas_s = build_measurements(st.sys, st.pilots, Subsystem::Sensing, n_sub);
        const auto omegas_c = build_measurements(st.sys, st.pilots, Subsystem::Communication, n_sub);

        ordered_json j;
        j["snr_db"] = snr_db;
        j["n_subcarriers"] = n_sub;
        j["scene"] = st.sampled ? "sampled" : "configured";
        j["lobe_radius"] = cfg.lobe_radius_override ? *cfg.lobe_radius_override : lobe_radius(cfg.array.g_rx);
        ordered_json truth = ordered_json::array();
        for (std::size_t i = 0; i < st.scene.sensing_paths.size(); ++i)
        {
            const auto &s = st.scene.sensing_paths[i];
            const auto &c = st.scene.comm_paths[i];
            truth.push_back({{"path", i + 1},
                             {"aoa_deg", rad_to_deg(s.aoa)},
                             {"comm_aod_deg", rad_to_deg(c.aod)},
                             {"atom", nearest_atom(s.aoa, s.aod, st.sys)}});
        }
        j["truth"] = truth;
        j["proposed_omp"] = sparse_json(proposed_omp(obs.y_s, omegas_s, omp, st.sys), st.sys);
        j["conventional_omp"] = sparse_json(conventional_omp(obs.y_s, omegas_s, omp), st.sys);
        j["esprit"] = {{"aoa_deg", to_deg(esprit_aoa(build_snapshots(obs.y_s), k))}};
        j["dcs_somp"] = sparse_json(dcs_somp(obs.y_c, omegas_c, omp), st.sys);
        return echo_header(cfg) + j.dump(2) + "\n";
    }

    std::string refine_report(const ExperimentConfig &cfg)
    {
        SceneSetup st = prepare_scene(cfg, false);
        const double snr_db = cfg.snr_grid_db.front();
        calibrate_noise(st.scene, st.clean, snr_db);
        Rng rng(trial_seed(cfg.seed, 0, 0, 1));
        const Observation obs = add_noise(st.clean, st.scene, rng);
        const int n_sub = st.scene.n_subcarriers;

        OmpConfig omp;
        omp.sparsity = static_cast<int>(st.scene.sensing_paths.size());
        omp.lobe_radius_override = cfg.lobe_radius_override;
        const auto omegas_s = build_measurements(st.sys, st.pilots, Subsystem::Sensing, n_sub);
        const auto omegas_c = build_measurements(st.sys, st.pilots, Subsystem::Communication, n_sub);
        const auto sens_init = coarse_angles(proposed_omp(obs.y_s, omegas_s, omp, st.sys), st.sys);
        const auto comm_init = coarse_angles(dcs_somp(obs.y_c, omegas_c, omp), st.sys);
        const SageData data =
            SageData::make(cfg.array, obs.y_c, obs.y_s, st.pilots.comm_excitations(), st.pilots.sensing_pilots);

        std::string head = echo_header(cfg);
        head += "# truth";
        for (const auto &p : st.scene.sensing_paths)
            head += "," + format_real(p.aoa);
        head += "\n";
        head += "# param,mode,path,name,value\n";
        std::string body = "iteration,mode,cost\n";
        for (SageMode mode : refine_modes(cfg))
        {
            SageConfig sc = SageConfig::with_steps(mode, cfg.sage_step_angle, cfg.sage_step_gain);
            sc.outer_iters = cfg.sage_outer_iters;
            const auto res = sage_refine(init_from_coarse(sens_init, comm_init, data, mode, cfg.sage_init_comm_weight), data, sc);
            const std::string tag = to_string(mode);
            head += "# status," + tag + ",iterations=" + std::to_string(res.iterations) +
                    ",converged=" + (res.converged ? "true" : "false") +
                    ",diverged=" + (res.diverged ? "true" : "false") + "\n";
            for (std::size_t k = 0; k < res.params.paths.size(); ++k)
            {
                const auto &p = res.params.paths[k];
                const std::string pre = "# param," + tag + "," + std::to_string(k + 1) + ",";
                head += pre + "aoa_rad," + format_real(reported_aoa(p, mode)) + "\n";
                if (mode != SageMode::SensOnly)
                {
                    head += pre + "comm_gain," + complex_text(p.comm_gain) + "\n";
                    head += pre + "comm_aod_rad," + format_real(p.comm_aod) + "\n";
                }
                if (mode != SageMode::CommOnly)
                    head += pre + "sens_gain," + complex_text(p.sens_gain) + "\n";
                if (mode == SageMode::SensOnly)
                    head += pre + "sens_aod_rad," + format_real(p.sens_aod) + "\n";
            }
            for (const auto &s : res.trace)
                body += std::to_string(s.iteration) + "," + tag + "," + format_real(s.cost) + "\n";
        }
        return head + body;
    }

    std::string crlb_report(const ExperimentConfig &cfg)
    {
        SceneSetup st = prepare_scene(cfg, false);
        const ParamSet params = params_from_scene(st.scene);
        std::string out = echo_header(cfg);
        out += "snr_db,subsystem,path,crlb_rad2,crlb_nuisance_rad2\n";
        for (double snr : cfg.snr_grid_db)
        {
            ChannelScene scene = st.scene;
            calibrate_noise(scene, st.clean, snr);
            FisherProblem problem = FisherProblem::make(scene, st.pilots, cfg.array);
            if (cfg.crlb_balance)
                problem.noise_var_sens = balanced_sensing_noise(problem, params);
            const auto bounds = crlb_compare(problem, params);
            for (std::size_t k = 0; k < bounds.size(); ++k)
            {
                const auto &b = bounds[k];
                const std::pair<const char *, std::pair<double, double>> rows[] = {
                    {"shared", {b.shared_theta_only, b.shared}},
                    {"comm", {b.comm_theta_only, b.comm}},
                    {"sens", {b.sens_theta_only, b.sens}}};
                for (const auto &[name, v] : rows)
                    out += format_real(snr) + "," + name + "," + std::to_string(k + 1) + "," +
                           format_real(v.first) + "," + format_real(v.second) + "\n";
            }
        }
        return out;
    }
}
