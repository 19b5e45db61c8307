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

// Acceptance suite. One PASS/FAIL line per criterion; the exit status is the number of failures.

#include "isac/crlb.hpp"
#include "isac/esprit.hpp"
#include "isac/harness.hpp"
#include "isac/sage.hpp"
#include "isac/sparse.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>

using namespace isac;

namespace
{
    struct Verdict
    {
        bool pass = true;
        std::string detail;

        void require(bool ok, const std::string &what)
        {
            if (!ok)
            {
                if (pass)
                    detail = what;
                pass = false;
            }
        }
    };

    std::string fmt(const char *f, double a, double b = 0, double c = 0, double d = 0)
    {
        char buf[256];
        std::snprintf(buf, sizeof buf, f, a, b, c, d);
        return buf;
    }

    std::vector<double> snr_grid()
    {
        std::vector<double> g;
        for (int s = -20; s <= 10; s += 2)
            g.push_back(s);
        return g;
    }

    // (method, n, snr, metric) -> value
    using Table = std::map<std::tuple<Method, int, double, Metric>, double>;

    Table tabulate(const std::vector<MetricRecord> &recs)
    {
        Table t;
        for (const auto &r : recs)
            t[{r.method, r.n_subcarriers, r.snr_db, r.metric}] = r.value;
        return t;
    }

    void print_table(const Table &t, const std::vector<Method> &methods, const std::vector<int> &ns, Metric m)
    {
        std::printf("    %-8s", "snr_db");
        for (int n : ns)
            for (Method me : methods)
                std::printf(" %14s", (std::string(to_string(me)).substr(0, 10) + "/N" + std::to_string(n)).c_str());
        std::printf("\n");
        for (double s : snr_grid())
        {
            std::printf("    %-8g", s);
            for (int n : ns)
                for (Method me : methods)
                {
                    const auto it = t.find({me, n, s, m});
                    std::printf(" %14.4f", it == t.end() ? NAN : it->second);
                }
            std::printf("\n");
        }
    }

    SceneSampling auto_sampling(const ArrayConfig &cfg)
    {
        ExperimentConfig e;
        e.array = cfg;
        return sampling_of(e);
    }

    Verdict c1_noiseless()
    {
        Verdict v;
        const ArrayConfig cfg;
        const BeamspaceSystem sys = make_beamspace(cfg);
        Rng rng(101);
        const SceneSampling s = auto_sampling(cfg);
        int hits = 0;
        double worst = 0.0;
        for (int t = 0; t < 100; ++t)
        {
            const ChannelScene scene = sample_on_grid_scene(sys, 2, 10, rng, s);
            const PilotSet p = make_pilots(cfg, 10, rng);
            const Observation clean = noiseless_observation(scene, cfg, p);
            const auto est = proposed_omp(clean.y_s, build_measurements(sys, p, Subsystem::Sensing, 10), OmpConfig{}, sys);
            auto c = est.center_atoms;
            std::sort(c.begin(), c.end());
            hits += c == true_support(scene, sys);
            const auto a = esprit_aoa(build_snapshots(clean.y_s), 2);
            std::vector<double> truth{scene.sensing_paths[0].aoa, scene.sensing_paths[1].aoa};
            std::sort(truth.begin(), truth.end());
            for (int k = 0; k < 2; ++k)
                worst = std::max(worst, std::abs(a[k] - truth[k]));
        }
        v.require(hits == 100, fmt("SRP %.2f", hits / 100.0));
        v.require(worst < 1e-6, fmt("ESPRIT max error %.3g rad", worst));
        if (v.pass)
            v.detail = fmt("SRP = %.2f over 100 scenes, ESPRIT max error %.3g rad (min separation %g steps)",
                           hits / 100.0, worst, s.min_separation);
        return v;
    }

    ExperimentConfig coarse_config()
    {
        ExperimentConfig cfg;
        cfg.snr_grid_db = snr_grid();
        cfg.n_subcarriers_list = {10, 20};
        cfg.trials = 500;
        cfg.methods = {Method::ProposedOmp, Method::Esprit};
        return cfg;
    }

    Verdict c2_srp_trend(const Table &t)
    {
        Verdict v;
        const auto g = snr_grid();
        for (int n : {10, 20})
            for (std::size_t i = 1; i < g.size(); ++i)
            {
                const double a = t.at({Method::ProposedOmp, n, g[i - 1], Metric::Srp});
                const double b = t.at({Method::ProposedOmp, n, g[i], Metric::Srp});
                v.require(b >= a - 0.03, fmt("SRP not monotone at N=%g: %.3f -> %.3f at %g dB", n, a, b, g[i]));
            }
        for (double s : g)
        {
            const double a = t.at({Method::ProposedOmp, 10, s, Metric::Srp});
            const double b = t.at({Method::ProposedOmp, 20, s, Metric::Srp});
            v.require(b >= a - 0.02, fmt("SRP(N=20) %.3f < SRP(N=10) %.3f - 0.02 at %g dB", b, a, s));
        }
        double floor = 1.0;
        for (double s : g)
            if (s >= 6)
            {
                const double b = t.at({Method::ProposedOmp, 20, s, Metric::Srp});
                floor = std::min(floor, b);
                v.require(b >= 0.99, fmt("SRP(N=20) = %.3f < 0.99 at %g dB", b, s));
            }
        if (v.pass)
            v.detail = fmt("monotone within 0.03, N=20 >= N=10 - 0.02, min SRP(N=20, >=6 dB) = %.3f", floor);
        return v;
    }

    Verdict c3_rmse_trend(const Table &t)
    {
        Verdict v;
        double worst_low = -1e9, worst_high = 0.0;
        for (int n : {10, 20})
            for (double s : snr_grid())
            {
                const double o = t.at({Method::ProposedOmp, n, s, Metric::RmseAoa});
                const double e = t.at({Method::Esprit, n, s, Metric::RmseAoa});
                if (s >= -14 && s <= -2)
                {
                    worst_low = std::max(worst_low, o - e);
                    v.require(o <= e + 0.01, fmt("N=%g, %g dB: OMP %.4f > ESPRIT %.4f + 0.01", n, s, o, e));
                }
                else if (s > -2)
                {
                    worst_high = std::max(worst_high, std::abs(o - e));
                    if (o > e)
                        v.require(o - e <= 0.02, fmt("N=%g, %g dB: OMP %.4f vs ESPRIT %.4f beyond 0.02", n, s, o, e));
                }
            }
        if (v.pass)
            v.detail = fmt("max(OMP - ESPRIT) over -14..-2 dB = %.4f rad, max |delta| above -2 dB = %.4f rad",
                           worst_low, worst_high);
        return v;
    }

    Verdict c4_sage(const Table &t)
    {
        Verdict v;
        for (double s : snr_grid())
        {
            const double j = t.at({Method::SageJoint, 10, s, Metric::RmseAoa});
            const double c = t.at({Method::SageComm, 10, s, Metric::RmseAoa});
            const double e = t.at({Method::SageSens, 10, s, Metric::RmseAoa});
            v.require(j <= c, fmt("%g dB: joint %.4f > comm-only %.4f", s, j, c));
            v.require(j <= e, fmt("%g dB: joint %.4f > sens-only %.4f", s, j, e));
        }
        const double j0 = t.at({Method::SageJoint, 10, 0.0, Metric::RmseAoa});
        const double best0 = std::min(t.at({Method::SageComm, 10, 0.0, Metric::RmseAoa}),
                                      t.at({Method::SageSens, 10, 0.0, Metric::RmseAoa}));
        const double gain = best0 / j0;
        v.require(gain >= 1.2, fmt("0 dB improvement over the better standalone mode %.3fx < 1.2x", gain));
        if (v.pass)
            v.detail = fmt("joint <= both standalone modes at every SNR, %.3fx at 0 dB", gain);
        else
            v.detail += fmt(" (0 dB improvement %.3fx)", gain);
        return v;
    }

    Verdict c5_shared_bound()
    {
        Verdict v;
        const ArrayConfig cfg;
        const BeamspaceSystem sys = make_beamspace(cfg);
        Rng rng(105);
        std::uniform_real_distribution<double> us(-10.0, 10.0);
        int checked = 0;
        for (int t = 0; t < 100; ++t)
        {
            ChannelScene scene = sample_off_grid_scene(sys, 2, 10, rng, auto_sampling(cfg));
            const PilotSet p = make_pilots(cfg, 10, rng);
            calibrate_noise(scene, noiseless_observation(scene, cfg, p), us(rng));
            const FisherProblem prob = FisherProblem::make(scene, p, cfg);
            for (const auto &b : crlb_compare(prob, params_from_scene(scene)))
            {
                ++checked;
                v.require(b.shared <= std::min(b.comm, b.sens) * (1 + 1e-12),
                          fmt("shared %.6g > min(comm %.6g, sens %.6g)", b.shared, b.comm, b.sens));
                v.require(b.shared_theta_only <= std::min(b.comm_theta_only, b.sens_theta_only) * (1 + 1e-12),
                          "AOA-only shared bound above a standalone bound");
            }
        }
        // Symmetric subsystems: one path, sensing noise chosen so both carry equal AOA information.
        ChannelScene sym;
        sym.n_subcarriers = 10;
        sym.sensing_paths = {{Complex(1.0, 0.0), 0.21, 0.21}};
        sym.comm_paths = {{Complex(0.6, 0.8), 0.21, -0.5}};
        const PilotSet p = make_pilots(cfg, 10, rng);
        calibrate_noise(sym, noiseless_observation(sym, cfg, p), 0.0);
        FisherProblem prob = FisherProblem::make(sym, p, cfg);
        const ParamSet params = params_from_scene(sym);
        prob.noise_var_sens = balanced_sensing_noise(prob, params);
        const auto b = crlb_compare(prob, params).at(0);
        const double ratio = b.comm_theta_only / b.shared_theta_only;
        v.require(std::abs(b.comm_theta_only - b.sens_theta_only) <= 1e-12 * b.comm_theta_only, "symmetric scene not balanced");
        v.require(std::abs(ratio - 2.0) <= 1e-12, fmt("symmetric ratio %.15g != 2", ratio));
        if (v.pass)
            v.detail = fmt("%g path bounds certified, symmetric standalone/shared = %.15g", checked, ratio);
        return v;
    }

    double assigned_cost(const ParamSet &q, ParamKind kind, const SageData &d, SageMode mode)
    {
        if (mode == SageMode::CommOnly)
            return cost_comm(q, d);
        if (mode == SageMode::SensOnly)
            return cost_sens(q, d);
        if (kind == ParamKind::SensGain)
            return cost_sens(q, d);
        if (kind == ParamKind::CommGain || kind == ParamKind::CommAod)
            return cost_comm(q, d);
        return cost_joint(q, d);
    }

    Verdict c6_gradients()
    {
        Verdict v;
        const ArrayConfig cfg;
        const BeamspaceSystem sys = make_beamspace(cfg);
        Rng rng(106);
        std::uniform_real_distribution<double> jitter(-0.03, 0.03);
        const ParamKind kinds[] = {ParamKind::SensGain, ParamKind::CommGain, ParamKind::CommAod,
                                   ParamKind::CommAoa,  ParamKind::SensAod,  ParamKind::SensAoa};
        double worst = 0.0;
        int evaluated = 0;
        for (int draw = 0; draw < 50; ++draw)
        {
            ChannelScene scene = sample_off_grid_scene(sys, 2, 4, rng);
            const PilotSet p = make_pilots(cfg, 4, rng);
            const Observation clean = noiseless_observation(scene, cfg, p);
            calibrate_noise(scene, clean, 0.0);
            const Observation obs = add_noise(clean, scene, rng);
            const SageData data = SageData::make(cfg, obs.y_c, obs.y_s, p.comm_excitations(), p.sensing_pilots);
            ParamSet q = params_from_scene(scene);
            for (auto &e : q.paths)
            {
                e.comm_aod += jitter(rng);
                e.comm_aoa += jitter(rng);
                e.sens_aoa += jitter(rng);
                e.sens_aod += jitter(rng);
                e.sens_gain *= Complex(1.0 + jitter(rng), jitter(rng));
                e.comm_gain *= Complex(1.0 - jitter(rng), jitter(rng));
            }
            const int k = draw % 2;
            for (SageMode mode : {SageMode::Joint, SageMode::CommOnly, SageMode::SensOnly})
            {
                ParamSet m = q;
                if (mode == SageMode::Joint)
                    m.tie_shared();
                for (ParamKind kind : kinds)
                {
                    if (!kind_valid(kind, mode))
                        continue;
                    auto shifted = [&](Complex d) {
                        ParamSet r = m;
                        auto &e = r.paths[static_cast<std::size_t>(k)];
                        if (mode == SageMode::Joint && is_angle(kind) && kind != ParamKind::CommAod)
                        {
                            e.sens_aoa += d.real();
                            r.tie_shared();
                        }
                        else
                            e.set(kind, e.get_complex(kind) + d);
                        return assigned_cost(r, kind, data, mode);
                    };
                    const double h = is_angle(kind) ? 1e-6 : 1e-5;
                    const Complex num =
                        is_angle(kind) ? Complex((shifted(h) - shifted(-h)) / (2 * h), 0.0)
                                       : Complex((shifted(h) - shifted(-h)) / (2 * h),
                                                 (shifted(Complex(0, h)) - shifted(Complex(0, -h))) / (2 * h));
                    const Complex an = grad_param(m, k, kind, data, mode);
                    const double rel = std::abs(num - an) / std::max(std::abs(an), 1e-12);
                    worst = std::max(worst, rel);
                    ++evaluated;
                    v.require(rel < 1e-5, std::string(to_string(kind)) + " in " + to_string(mode) +
                                              fmt(" relative error %.3g", rel));
                }
            }
        }
        if (v.pass)
            v.detail = fmt("%g gradients (50 draws per kind and mode), max relative error %.3g", evaluated, worst);
        return v;
    }

    Verdict c7_identities()
    {
        Verdict v;
        Rng rng(107);
        std::uniform_real_distribution<double> uw(0.01, 1.0);
        double ls_worst = 0.0;
        for (int t = 0; t < 100; ++t)
        {
            const CMat a = CMat::Random(16, 5);
            const CVecList y{CVec::Random(16), CVec::Random(16), CVec::Random(16)};
            std::vector<double> w(5);
            for (auto &x : w)
                x = uw(rng);
            const auto wl = weighted_ls({a, a, a}, w, y);
            const auto pl = plain_ls({a, a, a}, y);
            for (std::size_t n = 0; n < 3; ++n)
                ls_worst = std::max(ls_worst, (wl[n] - pl[n]).norm() / pl[n].norm());
        }
        v.require(ls_worst < 1e-10, fmt("weighted vs plain LS %.3g", ls_worst));

        const ArrayConfig cfg;
        const BeamspaceSystem sys = make_beamspace(cfg);
        double op_worst = 0.0;
        bool monotone = true;
        for (int t = 0; t < 50; ++t)
        {
            ChannelScene scene = sample_off_grid_scene(sys, 2, 5, rng);
            const PilotSet p = make_pilots(cfg, 5, rng);
            const Observation clean = noiseless_observation(scene, cfg, p);
            const CVec hs = beamspace_channel(synth_sensing_channel(scene.sensing_paths, cfg), sys);
            const CVec hc = beamspace_channel(synth_comm_channel(scene.comm_paths, cfg), sys);
            const auto os = build_measurements(sys, p, Subsystem::Sensing, 5);
            const auto oc = build_measurements(sys, p, Subsystem::Communication, 5);
            for (std::size_t n = 0; n < 5; ++n)
            {
                op_worst = std::max(op_worst, (clean.y_s[n] - os[n].apply(hs)).norm() / clean.y_s[n].norm());
                op_worst = std::max(op_worst, (clean.y_c[n] - oc[n].apply(hc)).norm() / clean.y_c[n].norm());
            }
            calibrate_noise(scene, clean, 0.0);
            const Observation obs = add_noise(clean, scene, rng);
            OmpConfig omp;
            omp.sparsity = 4;
            for (const auto &est : {proposed_omp(obs.y_s, os, omp, sys), conventional_omp(obs.y_s, os, omp),
                                    dcs_somp(obs.y_c, oc, omp)})
                for (std::size_t i = 1; i < est.residual_trace.size(); ++i)
                    monotone = monotone && est.residual_trace[i] <= est.residual_trace[i - 1] * (1 + 1e-12);
        }
        v.require(op_worst < 1e-10, fmt("operator identity error %.3g", op_worst));
        v.require(monotone, "OMP residual increased");
        if (v.pass)
            v.detail = fmt("LS %.3g, operator %.3g, residual traces non-increasing", ls_worst, op_worst);
        return v;
    }

    Verdict c8_determinism()
    {
        Verdict v;
        ExperimentConfig cfg;
        cfg.snr_grid_db = {-10.0, 0.0, 10.0};
        cfg.n_subcarriers_list = {4, 8};
        cfg.trials = 8;
        cfg.sage_outer_iters = 10;
        const std::string a = format_csv(run_sweep(cfg, 1), cfg);
        const std::string b = format_csv(run_sweep(cfg, 1), cfg);
        const std::string c = format_csv(run_sweep(cfg, 4), cfg);
        v.require(a == b, "repeated single-threaded sweeps differ");
        v.require(a == c, "output depends on the thread count");
        if (v.pass)
            v.detail = fmt("%g-byte CSV identical across repeats and 1 vs 4 threads", static_cast<double>(a.size()));
        return v;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"acceptance suite"};
    std::set<int> only;
    unsigned threads = 0;
    app.add_option("--only", only, "run only these criteria")->delimiter(',');
    app.add_option("--threads", threads, "sweep worker threads (0 = all cores)");
    CLI11_PARSE(app, argc, argv);
    auto wanted = [&](int c) { return only.empty() || only.count(c) > 0; };

    int failures = 0;
    auto report = [&](int id, const char *name, const Verdict &v, double seconds) {
        std::printf("%s %d %s: %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str(), seconds);
        std::fflush(stdout);
        failures += v.pass ? 0 : 1;
    };
    auto timed = [&](int id, const char *name, auto &&body) {
        if (!wanted(id))
            return;
        const auto t0 = std::chrono::steady_clock::now();
        const Verdict v = body();
        report(id, name, v, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    };

    timed(1, "noiseless_exactness", c1_noiseless);

    if (wanted(2) || wanted(3))
    {
        const auto t0 = std::chrono::steady_clock::now();
        const ExperimentConfig cfg = coarse_config();
        const Table t = tabulate(run_sweep(cfg, threads));
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("    coarse sweep: %d trials per point\n", cfg.trials);
        print_table(t, {Method::ProposedOmp}, {10, 20}, Metric::Srp);
        print_table(t, {Method::ProposedOmp, Method::Esprit}, {10, 20}, Metric::RmseAoa);
        if (wanted(2))
            report(2, "srp_trend", c2_srp_trend(t), secs);
        if (wanted(3))
            report(3, "coarse_rmse_trend", c3_rmse_trend(t), 0.0);
    }

    timed(4, "refinement_rmse_trend", [&] {
        ExperimentConfig cfg;
        cfg.snr_grid_db = snr_grid();
        cfg.n_subcarriers_list = {10};
        cfg.trials = 300;
        cfg.methods = {Method::SageJoint, Method::SageComm, Method::SageSens};
        const Table t = tabulate(run_sweep(cfg, threads));
        std::printf("    refinement sweep: %d trials per point\n", cfg.trials);
        print_table(t, cfg.methods, {10}, Metric::RmseAoa);
        return c4_sage(t);
    });

    timed(5, "shared_crlb_bound", c5_shared_bound);
    timed(6, "gradient_correctness", c6_gradients);
    timed(7, "algebraic_identities", c7_identities);
    timed(8, "determinism", c8_determinism);

    std::printf("%d criteria failed\n", failures);
    return failures;
}
