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

#include "isac/harness.hpp"

#include "isac/esprit.hpp"
#include "isac/sage.hpp"
#include "isac/sparse.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

namespace isac
{
    namespace
    {
        std::size_t method_slot(Method m) { return static_cast<std::size_t>(m); }

        Complex draw_gain(double var, Rng &rng)
        {
            std::normal_distribution<double> nd(0.0, std::sqrt(var / 2.0));
            const double re = nd(rng);
            const double im = nd(rng);
            return {re, im};
        }

        double path_power(int k, const SceneSampling &s) { return k == 0 ? s.los_power : 1.0; }

        // Draws `k` values with pairwise distance >= sep, by rejection.
        template <typename Draw>
        std::vector<double> draw_separated(int k, double sep, Draw draw, Rng &rng)
        {
            for (int attempt = 0; attempt < 10000; ++attempt)
            {
                std::vector<double> v;
                bool ok = true;
                for (int i = 0; i < k && ok; ++i)
                {
                    const double x = draw(rng);
                    for (double y : v)
                        if (std::abs(x - y) < sep)
                            ok = false;
                    v.push_back(x);
                }
                if (ok)
                    return v;
            }
            fail(ErrorKind::InvalidArgument, "cannot place " + std::to_string(k) + " separated paths in the sector");
        }

        void add_comm_paths(ChannelScene &scene, const SceneSampling &s, Rng &rng)
        {
            std::uniform_real_distribution<double> ud(-s.sector, s.sector);
            for (std::size_t k = 0; k < scene.sensing_paths.size(); ++k)
            {
                PathParams p;
                p.aoa = scene.sensing_paths[k].aoa;
                p.aod = std::asin(ud(rng));
                p.gain = draw_gain(path_power(static_cast<int>(k), s), rng);
                scene.comm_paths.push_back(p);
            }
        }

        struct Stage
        {
            ChannelScene scene;
            PilotSet pilots;
            Observation obs;
        };

        Stage make_stage(ChannelScene scene, const ArrayConfig &cfg, double snr_db, Rng &rng)
        {
            Stage st;
            st.pilots = make_pilots(cfg, scene.n_subcarriers, rng);
            const Observation clean = noiseless_observation(scene, cfg, st.pilots);
            calibrate_noise(scene, clean, snr_db);
            st.obs = add_noise(clean, scene, rng);
            st.scene = std::move(scene);
            return st;
        }

        std::vector<double> sensing_truth(const ChannelScene &scene)
        {
            std::vector<double> t;
            for (const auto &p : scene.sensing_paths)
                t.push_back(p.aoa);
            return t;
        }

        void score_angles(TrialOutcome &out, Method m, const std::vector<double> &est, const std::vector<double> &truth)
        {
            const auto paired = pair_nearest(est, truth);
            double acc = 0.0;
            for (std::size_t i = 0; i < truth.size(); ++i)
                acc += (paired[i] - truth[i]) * (paired[i] - truth[i]);
            out.sq_err[method_slot(m)] = acc;
            out.count[method_slot(m)] = static_cast<int>(truth.size());
        }

        bool same_set(std::vector<AtomIndex> a, std::vector<AtomIndex> b)
        {
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            return a == b;
        }

        bool wants(const ExperimentConfig &cfg, Method m)
        {
            return std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end();
        }

        std::uint64_t mix(std::uint64_t x)
        {
            x += 0x9e3779b97f4a7c15ULL;
            x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
            x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
            return x ^ (x >> 31);
        }
    }

    const char *to_string(Metric m) noexcept
    {
        return m == Metric::Srp ? "srp" : "rmse_aoa_rad";
    }

    double srp(const std::vector<bool> &outcomes)
    {
        require(!outcomes.empty(), "srp needs at least one trial outcome");
        const auto hits = std::count(outcomes.begin(), outcomes.end(), true);
        return static_cast<double>(hits) / static_cast<double>(outcomes.size());
    }

    double rmse(std::span<const double> estimates, std::span<const double> truths)
    {
        require(!truths.empty(), "rmse needs at least one value");
        require(estimates.size() == truths.size(), "rmse needs equally long estimate and truth lists");
        double acc = 0.0;
        for (std::size_t i = 0; i < truths.size(); ++i)
            acc += (estimates[i] - truths[i]) * (estimates[i] - truths[i]);
        return std::sqrt(acc / static_cast<double>(truths.size()));
    }

    std::vector<double> pair_nearest(std::span<const double> estimates, std::span<const double> truths)
    {
        std::vector<double> out(truths.size(), 0.0);
        if (estimates.empty())
            return out;
        if (estimates.size() != truths.size() || truths.size() > 8)
        {
            for (std::size_t i = 0; i < truths.size(); ++i)
            {
                double best = std::numeric_limits<double>::infinity();
                for (double e : estimates)
                    if (std::abs(e - truths[i]) < best)
                    {
                        best = std::abs(e - truths[i]);
                        out[i] = e;
                    }
            }
            return out;
        }
        std::vector<std::size_t> perm(truths.size());
        std::iota(perm.begin(), perm.end(), 0);
        double best = std::numeric_limits<double>::infinity();
        do
        {
            double acc = 0.0;
            for (std::size_t i = 0; i < truths.size(); ++i)
                acc += (estimates[perm[i]] - truths[i]) * (estimates[perm[i]] - truths[i]);
            if (acc < best)
            {
                best = acc;
                for (std::size_t i = 0; i < truths.size(); ++i)
                    out[i] = estimates[perm[i]];
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        return out;
    }

    ChannelScene sample_on_grid_scene(const BeamspaceSystem &sys, int k_paths, int n_subcarriers, Rng &rng,
                                      const SceneSampling &s)
    {
        require(k_paths >= 1 && n_subcarriers >= 1, "scene needs k_paths >= 1 and n_subcarriers >= 1");
        const int g = sys.cfg.g_rx;
        std::vector<int> allowed;
        for (int i = 0; i < g; ++i)
            if (std::abs(-1.0 + 2.0 * i / g) <= s.sector + 1e-12)
                allowed.push_back(i);
        require(!allowed.empty(), "sector contains no grid point");
        std::uniform_int_distribution<std::size_t> pick(0, allowed.size() - 1);
        const auto idx = draw_separated(
            k_paths, static_cast<double>(s.min_separation),
            [&](Rng &r) { return static_cast<double>(allowed[pick(r)]); }, rng);

        ChannelScene scene;
        scene.n_subcarriers = n_subcarriers;
        for (int k = 0; k < k_paths; ++k)
        {
            PathParams p;
            p.aoa = p.aod = sys.grid_rx[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
            p.gain = draw_gain(path_power(k, s), rng);
            scene.sensing_paths.push_back(p);
        }
        add_comm_paths(scene, s, rng);
        return scene;
    }

    ChannelScene sample_off_grid_scene(const BeamspaceSystem &sys, int k_paths, int n_subcarriers, Rng &rng,
                                       const SceneSampling &s)
    {
        require(k_paths >= 1 && n_subcarriers >= 1, "scene needs k_paths >= 1 and n_subcarriers >= 1");
        std::uniform_real_distribution<double> ud(-s.sector, s.sector);
        const double sep = s.min_separation * 2.0 / sys.cfg.g_rx;
        const auto sines = draw_separated(k_paths, sep, [&](Rng &r) { return ud(r); }, rng);

        ChannelScene scene;
        scene.n_subcarriers = n_subcarriers;
        for (int k = 0; k < k_paths; ++k)
        {
            PathParams p;
            p.aoa = p.aod = std::asin(sines[static_cast<std::size_t>(k)]);
            p.gain = draw_gain(path_power(k, s), rng);
            scene.sensing_paths.push_back(p);
        }
        add_comm_paths(scene, s, rng);
        return scene;
    }

    SceneSampling sampling_of(const ExperimentConfig &cfg)
    {
        SceneSampling s;
        s.sector = cfg.angle_sector;
        s.los_power = cfg.los_power_ratio;
        const int a = cfg.lobe_radius_override ? *cfg.lobe_radius_override : lobe_radius(cfg.array.g_rx);
        s.min_separation = cfg.min_separation ? *cfg.min_separation : 2 * (a + 1) + 1;
        return s;
    }

    std::vector<AtomIndex> true_support(const ChannelScene &scene, const BeamspaceSystem &sys)
    {
        std::vector<AtomIndex> out;
        for (const auto &p : scene.sensing_paths)
            out.push_back(nearest_atom(p.aoa, p.aod, sys));
        std::sort(out.begin(), out.end());
        return out;
    }

    std::uint64_t trial_seed(std::uint64_t seed, std::size_t snr_index, std::size_t n_index, std::size_t trial)
    {
        std::uint64_t h = mix(seed);
        h = mix(h ^ static_cast<std::uint64_t>(snr_index));
        h = mix(h ^ static_cast<std::uint64_t>(n_index));
        h = mix(h ^ static_cast<std::uint64_t>(trial));
        return h;
    }

    TrialOutcome run_trial(const ExperimentConfig &cfg, const BeamspaceSystem &sys, double snr_db,
                           int n_subcarriers, std::uint64_t seed)
    {
        Rng rng(seed);
        TrialOutcome out;
        OmpConfig omp;
        omp.sparsity = cfg.k_paths;
        omp.lobe_radius_override = cfg.lobe_radius_override;

        // Both scenes are always drawn so each method sees the same data whatever the method list.
        const SceneSampling sampling = sampling_of(cfg);
        const Stage grid =
            make_stage(sample_on_grid_scene(sys, cfg.k_paths, n_subcarriers, rng, sampling), sys.cfg, snr_db, rng);
        const Stage off =
            make_stage(sample_off_grid_scene(sys, cfg.k_paths, n_subcarriers, rng, sampling), sys.cfg, snr_db, rng);

        const bool any_coarse = std::any_of(cfg.methods.begin(), cfg.methods.end(), is_coarse);
        if (any_coarse)
        {
            const auto truth_atoms = true_support(grid.scene, sys);
            const auto truth = sensing_truth(grid.scene);
            const auto omegas = build_measurements(sys, grid.pilots, Subsystem::Sensing, n_subcarriers);

            if (wants(cfg, Method::ProposedOmp))
            {
                const auto est = proposed_omp(grid.obs.y_s, omegas, omp, sys);
                std::vector<double> angles;
                for (const auto &a : coarse_angles(est, sys))
                    angles.push_back(a.aoa);
                out.success[method_slot(Method::ProposedOmp)] = same_set(est.center_atoms, truth_atoms);
                score_angles(out, Method::ProposedOmp, angles, truth);
            }
            if (wants(cfg, Method::ConventionalOmp))
            {
                const auto est = conventional_omp(grid.obs.y_s, omegas, omp);
                std::vector<double> angles;
                for (AtomIndex m : est.center_atoms)
                    angles.push_back(atom_to_angles(m, sys).aoa);
                out.success[method_slot(Method::ConventionalOmp)] = same_set(est.center_atoms, truth_atoms);
                score_angles(out, Method::ConventionalOmp, angles, truth);
            }
            if (wants(cfg, Method::Esprit))
            {
                const auto angles = esprit_aoa(build_snapshots(grid.obs.y_s), cfg.k_paths);
                std::vector<AtomIndex> atoms;
                for (double a : angles)
                    atoms.push_back(nearest_atom(a, a, sys));
                out.success[method_slot(Method::Esprit)] = same_set(atoms, truth_atoms);
                score_angles(out, Method::Esprit, angles, truth);
            }
        }

        const bool any_sage = wants(cfg, Method::SageJoint) || wants(cfg, Method::SageComm) ||
                              wants(cfg, Method::SageSens);
        if (any_sage)
        {
            const auto truth = sensing_truth(off.scene);
            const auto omegas_s = build_measurements(sys, off.pilots, Subsystem::Sensing, n_subcarriers);
            const auto omegas_c = build_measurements(sys, off.pilots, Subsystem::Communication, n_subcarriers);
            const auto sens_init = coarse_angles(proposed_omp(off.obs.y_s, omegas_s, omp, sys), sys);
            const auto comm_init = coarse_angles(dcs_somp(off.obs.y_c, omegas_c, omp), sys);
            const SageData data =
                SageData::make(sys.cfg, off.obs.y_c, off.obs.y_s, off.pilots.comm_excitations(), off.pilots.sensing_pilots);

            const std::pair<Method, SageMode> modes[] = {{Method::SageJoint, SageMode::Joint},
                                                         {Method::SageComm, SageMode::CommOnly},
                                                         {Method::SageSens, SageMode::SensOnly}};
            for (const auto &[method, mode] : modes)
            {
                if (!wants(cfg, method))
                    continue;
                SageConfig sc = SageConfig::with_steps(mode, cfg.sage_step_angle, cfg.sage_step_gain);
                sc.outer_iters = cfg.sage_outer_iters;
                const auto res = sage_refine(init_from_coarse(sens_init, comm_init, data, mode, cfg.sage_init_comm_weight), data, sc);
                std::vector<double> angles;
                for (const auto &p : res.params.paths)
                    angles.push_back(reported_aoa(p, mode));
                score_angles(out, method, angles, truth);
            }
        }
        return out;
    }

    std::vector<MetricRecord> run_sweep(const ExperimentConfig &cfg, unsigned threads)
    {
        cfg.validate();
        const BeamspaceSystem sys = make_beamspace(cfg.array);
        const std::size_t n_snr = cfg.snr_grid_db.size();
        const std::size_t n_n = cfg.n_subcarriers_list.size();
        const auto trials = static_cast<std::size_t>(cfg.trials);
        const std::size_t total = n_snr * n_n * trials;

        std::vector<TrialOutcome> outcomes(total);
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;

        auto worker = [&]() {
            for (;;)
            {
                const std::size_t t = next.fetch_add(1);
                if (t >= total)
                    return;
                const std::size_t si = t / (n_n * trials);
                const std::size_t ni = (t / trials) % n_n;
                const std::size_t ti = t % trials;
                try
                {
                    outcomes[t] = run_trial(cfg, sys, cfg.snr_grid_db[si], cfg.n_subcarriers_list[ni],
                                            trial_seed(cfg.seed, si, ni, ti));
                }
                catch (...)
                {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    next.store(total);
                    return;
                }
            }
        };

        if (threads == 0)
            threads = std::max(1u, std::thread::hardware_concurrency());
        threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(total, 1)));
        if (threads <= 1)
            worker();
        else
        {
            std::vector<std::thread> pool;
            for (unsigned i = 0; i < threads; ++i)
                pool.emplace_back(worker);
            for (auto &th : pool)
                th.join();
        }
        if (error)
            std::rethrow_exception(error);

        std::vector<MetricRecord> records;
        for (Method m : cfg.methods)
            for (std::size_t ni = 0; ni < n_n; ++ni)
                for (std::size_t si = 0; si < n_snr; ++si)
                {
                    const std::size_t slot = method_slot(m);
                    std::size_t hits = 0;
                    double sq = 0.0;
                    long long count = 0;
                    for (std::size_t ti = 0; ti < trials; ++ti)
                    {
                        const auto &o = outcomes[(si * n_n + ni) * trials + ti];
                        hits += o.success[slot] ? 1 : 0;
                        sq += o.sq_err[slot];
                        count += o.count[slot];
                    }
                    MetricRecord r;
                    r.snr_db = cfg.snr_grid_db[si];
                    r.n_subcarriers = cfg.n_subcarriers_list[ni];
                    r.method = m;
                    r.trials = cfg.trials;
                    r.seed = cfg.seed;
                    if (is_coarse(m))
                    {
                        r.metric = Metric::Srp;
                        r.value = static_cast<double>(hits) / static_cast<double>(trials);
                        records.push_back(r);
                    }
                    r.metric = Metric::RmseAoa;
                    r.value = count > 0 ? std::sqrt(sq / static_cast<double>(count)) : 0.0;
                    records.push_back(r);
                }

        std::stable_sort(records.begin(), records.end(), [](const MetricRecord &a, const MetricRecord &b) {
            if (a.method != b.method)
                return a.method < b.method;
            if (a.n_subcarriers != b.n_subcarriers)
                return a.n_subcarriers < b.n_subcarriers;
            if (a.snr_db != b.snr_db)
                return a.snr_db < b.snr_db;
            return a.metric < b.metric;
        });
        return records;
    }

    std::string format_csv(const std::vector<MetricRecord> &records, const ExperimentConfig &cfg)
    {
        std::string s = echo_header(cfg);
        s += "snr_db,n_subcarriers,method,metric,value,trials,seed\n";
        for (const auto &r : records)
        {
            s += format_real(r.snr_db);
            s += ',';
            s += std::to_string(r.n_subcarriers);
            s += ',';
            s += to_string(r.method);
            s += ',';
            s += to_string(r.metric);
            s += ',';
            s += format_real(r.value);
            s += ',';
            s += std::to_string(r.trials);
            s += ',';
            s += std::to_string(r.seed);
            s += '\n';
        }
        return s;
    }
}
