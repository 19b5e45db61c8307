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

#include "isac/sage.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace isac
{
    namespace
    {
        constexpr double angle_margin = 1e-6;
        constexpr int max_backtracks = 40;
        constexpr double step_growth = 1.5;
        constexpr int divergence_patience = 5;

        enum class CostKind
        {
            Joint,
            Comm,
            Sens,
        };

        // Sum of conj(a) .* b.
        Complex inner(const CMat &a, const CMat &b)
        {
            return a.conjugate().cwiseProduct(b).sum();
        }

        CostKind assigned_cost(ParamKind kind, SageMode mode)
        {
            switch (mode)
            {
            case SageMode::CommOnly: return CostKind::Comm;
            case SageMode::SensOnly: return CostKind::Sens;
            case SageMode::Joint: break;
            }
            switch (kind)
            {
            case ParamKind::SensGain: return CostKind::Sens;
            case ParamKind::CommGain:
            case ParamKind::CommAod: return CostKind::Comm;
            default: return CostKind::Joint;
            }
        }

        std::vector<ParamKind> sweep_order(SageMode mode)
        {
            switch (mode)
            {
            case SageMode::Joint:
                return {ParamKind::SensGain, ParamKind::CommGain, ParamKind::CommAod, ParamKind::CommAoa};
            case SageMode::CommOnly:
                return {ParamKind::CommGain, ParamKind::CommAod, ParamKind::CommAoa};
            case SageMode::SensOnly:
                return {ParamKind::SensGain, ParamKind::SensAod, ParamKind::SensAoa};
            }
            return {};
        }

        // Per-path view of the E-step: z = y - (other paths), cost = ||z - model_k||^2.
        struct PathProblem
        {
            const SageData &data;
            CMat z_c;
            CMat z_s;
            SageMode mode;

            double cost(const PathEstimate &p, CostKind which) const
            {
                switch (which)
                {
                case CostKind::Comm: return (z_c - comm_path_response(p, data)).squaredNorm();
                case CostKind::Sens: return (z_s - sensing_path_response(p, data)).squaredNorm();
                case CostKind::Joint:
                    return (z_c + z_s - comm_path_response(p, data) - sensing_path_response(p, data)).squaredNorm();
                }
                return 0.0;
            }

            Complex gradient(const PathEstimate &p, ParamKind kind) const
            {
                const int n_rx = data.cfg.n_rx;
                const int n_tx = data.cfg.n_tx;
                switch (kind)
                {
                case ParamKind::SensGain:
                {
                    const CMat unit = steering(p.sens_aoa, n_rx) * (steering(p.sens_aod, n_tx).adjoint() * data.v_s);
                    const CMat e = z_s - p.sens_gain * unit;
                    return -2.0 * inner(unit, e);
                }
                case ParamKind::CommGain:
                {
                    const CMat unit = steering(p.comm_aoa, n_rx) * (steering(p.comm_aod, n_tx).adjoint() * data.v_c);
                    const CMat e = z_c - p.comm_gain * unit;
                    return -2.0 * inner(unit, e);
                }
                case ParamKind::CommAod:
                {
                    const CMat e = z_c - comm_path_response(p, data);
                    const CMat dm = p.comm_gain * steering(p.comm_aoa, n_rx) *
                                    (steering_derivative(p.comm_aod, n_tx).adjoint() * data.v_c);
                    return -2.0 * inner(e, dm).real();
                }
                default: break;
                }

                if (mode == SageMode::Joint)
                {
                    // Shared angle: comm AOA, sensing AOA and sensing AOD move together.
                    const double th = p.sens_aoa;
                    const CVec a_r = steering(th, n_rx);
                    const CVec d_r = steering_derivative(th, n_rx);
                    const CVec a_t = steering(th, n_tx);
                    const CVec d_t = steering_derivative(th, n_tx);
                    const CMat q_s = a_t.adjoint() * data.v_s;
                    const CMat dq_s = d_t.adjoint() * data.v_s;
                    const CMat q_c = steering(p.comm_aod, n_tx).adjoint() * data.v_c;
                    const CMat dm = p.comm_gain * d_r * q_c + p.sens_gain * (d_r * q_s + a_r * dq_s);
                    const CMat e = z_c + z_s - comm_path_response(p, data) - sensing_path_response(p, data);
                    return -2.0 * inner(e, dm).real();
                }

                switch (kind)
                {
                case ParamKind::CommAoa:
                {
                    const CMat e = z_c - comm_path_response(p, data);
                    const CMat dm = p.comm_gain * steering_derivative(p.comm_aoa, n_rx) *
                                    (steering(p.comm_aod, n_tx).adjoint() * data.v_c);
                    return -2.0 * inner(e, dm).real();
                }
                case ParamKind::SensAod:
                {
                    const CMat e = z_s - sensing_path_response(p, data);
                    const CMat dm = p.sens_gain * steering(p.sens_aoa, n_rx) *
                                    (steering_derivative(p.sens_aod, n_tx).adjoint() * data.v_s);
                    return -2.0 * inner(e, dm).real();
                }
                case ParamKind::SensAoa:
                {
                    const CMat e = z_s - sensing_path_response(p, data);
                    const CMat dm = p.sens_gain * steering_derivative(p.sens_aoa, n_rx) *
                                    (steering(p.sens_aod, n_tx).adjoint() * data.v_s);
                    return -2.0 * inner(e, dm).real();
                }
                default: break;
                }
                return {0.0, 0.0};
            }
        };

        PathProblem make_problem(const ParamSet &params, int k, const SageData &data, SageMode mode,
                                 const std::vector<CMat> &comm_parts, const std::vector<CMat> &sens_parts)
        {
            PathProblem prob{data, data.y_c, data.y_s, mode};
            for (int l = 0; l < params.size(); ++l)
            {
                if (l == k)
                    continue;
                prob.z_c -= comm_parts[l];
                prob.z_s -= sens_parts[l];
            }
            return prob;
        }

        void step_param(PathEstimate &p, ParamKind kind, SageMode mode, double gamma, Complex g)
        {
            if (is_angle(kind))
            {
                const double v = clamp_angle(p.get(kind) - gamma * g.real());
                if (mode == SageMode::Joint && kind != ParamKind::CommAod)
                {
                    p.sens_aoa = p.sens_aod = p.comm_aoa = v;
                    return;
                }
                p.set(kind, v);
                return;
            }
            p.set(kind, p.get_complex(kind) - gamma * g);
        }

        void fit_gains(ParamSet &params, const CMat &y, const SageData &data, bool sensing)
        {
            const int k = params.size();
            if (k == 0)
                return;
            const auto rows = y.size();
            CMat a(rows, k);
            for (int l = 0; l < k; ++l)
            {
                PathEstimate unit = params.paths[l];
                unit.sens_gain = unit.comm_gain = Complex(1.0, 0.0);
                const CMat r = sensing ? sensing_path_response(unit, data) : comm_path_response(unit, data);
                a.col(l) = Eigen::Map<const CVec>(r.data(), rows);
            }
            const CVec yv = Eigen::Map<const CVec>(y.data(), rows);
            const CVec g = a.colPivHouseholderQr().solve(yv);
            for (int l = 0; l < k; ++l)
            {
                const Complex v = std::isfinite(g(l).real()) && std::isfinite(g(l).imag()) ? g(l) : Complex(0.0, 0.0);
                (sensing ? params.paths[l].sens_gain : params.paths[l].comm_gain) = v;
            }
        }
    }

    namespace
    {
        // Coordinate-wise search of each comm AOD over the transmit grid with the
        // current AOAs held fixed and all comm gains refit by LS.
        void search_comm_aod(ParamSet &params, const SageData &data)
        {
            const int g = data.cfg.g_tx;
            for (int pass = 0; pass < 2; ++pass)
                for (auto &path : params.paths)
                {
                    double best_cost = std::numeric_limits<double>::infinity();
                    double best_aod = path.comm_aod;
                    for (int i = 0; i < g; ++i)
                    {
                        path.comm_aod = std::asin(-1.0 + 2.0 * i / g);
                        fit_gains(params, data.y_c, data, false);
                        const double c = cost_comm(params, data);
                        if (c < best_cost)
                        {
                            best_cost = c;
                            best_aod = path.comm_aod;
                        }
                    }
                    path.comm_aod = best_aod;
                }
        }
    }

    SageMode parse_sage_mode(std::string_view tag)
    {
        if (tag == "joint" || tag == "sage_joint")
            return SageMode::Joint;
        if (tag == "comm" || tag == "comm_only" || tag == "sage_comm")
            return SageMode::CommOnly;
        if (tag == "sens" || tag == "sens_only" || tag == "sage_sens")
            return SageMode::SensOnly;
        fail(ErrorKind::InvalidArgument, "unknown refinement mode '" + std::string(tag) + "'");
    }

    const char *to_string(SageMode m) noexcept
    {
        switch (m)
        {
        case SageMode::Joint: return "joint";
        case SageMode::CommOnly: return "comm_only";
        case SageMode::SensOnly: return "sens_only";
        }
        return "?";
    }

    const char *to_string(ParamKind k) noexcept
    {
        switch (k)
        {
        case ParamKind::SensGain: return "sens_gain";
        case ParamKind::CommGain: return "comm_gain";
        case ParamKind::CommAod: return "comm_aod";
        case ParamKind::CommAoa: return "comm_aoa";
        case ParamKind::SensAod: return "sens_aod";
        case ParamKind::SensAoa: return "sens_aoa";
        }
        return "?";
    }

    bool is_angle(ParamKind k) noexcept
    {
        return k != ParamKind::SensGain && k != ParamKind::CommGain;
    }

    bool kind_valid(ParamKind k, SageMode mode) noexcept
    {
        switch (mode)
        {
        case SageMode::Joint: return true;
        case SageMode::CommOnly:
            return k == ParamKind::CommGain || k == ParamKind::CommAod || k == ParamKind::CommAoa;
        case SageMode::SensOnly:
            return k == ParamKind::SensGain || k == ParamKind::SensAod || k == ParamKind::SensAoa;
        }
        return false;
    }

    double PathEstimate::get(ParamKind k) const
    {
        switch (k)
        {
        case ParamKind::CommAod: return comm_aod;
        case ParamKind::CommAoa: return comm_aoa;
        case ParamKind::SensAod: return sens_aod;
        case ParamKind::SensAoa: return sens_aoa;
        default: break;
        }
        fail(ErrorKind::InvalidArgument, "PathEstimate::get: gain kinds are complex");
    }

    Complex PathEstimate::get_complex(ParamKind k) const
    {
        if (k == ParamKind::SensGain)
            return sens_gain;
        if (k == ParamKind::CommGain)
            return comm_gain;
        return {get(k), 0.0};
    }

    void PathEstimate::set(ParamKind k, Complex v)
    {
        switch (k)
        {
        case ParamKind::SensGain: sens_gain = v; return;
        case ParamKind::CommGain: comm_gain = v; return;
        case ParamKind::CommAod: comm_aod = v.real(); return;
        case ParamKind::CommAoa: comm_aoa = v.real(); return;
        case ParamKind::SensAod: sens_aod = v.real(); return;
        case ParamKind::SensAoa: sens_aoa = v.real(); return;
        }
    }

    void ParamSet::tie_shared()
    {
        for (auto &p : paths)
            p.comm_aoa = p.sens_aod = p.sens_aoa;
    }

    bool ParamSet::shared_tie_holds(double tol) const
    {
        return std::all_of(paths.begin(), paths.end(), [tol](const PathEstimate &p) {
            return std::abs(p.comm_aoa - p.sens_aoa) <= tol && std::abs(p.sens_aod - p.sens_aoa) <= tol;
        });
    }

    SageConfig SageConfig::defaults(SageMode mode)
    {
        return with_steps(mode, 1e-3, 1e-2);
    }

    SageConfig SageConfig::with_steps(SageMode mode, double step_angle, double step_gain)
    {
        SageConfig c;
        c.mode = mode;
        for (ParamKind k : {ParamKind::SensGain, ParamKind::CommGain, ParamKind::CommAod,
                            ParamKind::CommAoa, ParamKind::SensAod, ParamKind::SensAoa})
            c.step_sizes[k] = is_angle(k) ? step_angle : step_gain;
        return c;
    }

    double SageConfig::step(ParamKind k) const
    {
        auto it = step_sizes.find(k);
        if (it != step_sizes.end())
            return it->second;
        return is_angle(k) ? 1e-3 : 1e-2;
    }

    void SageConfig::validate() const
    {
        require(outer_iters >= 1, "sage: outer_iters must be >= 1");
        require(convergence_tol >= 0.0, "sage: convergence_tol must be >= 0");
        for (const auto &[k, v] : step_sizes)
            require(v > 0.0, std::string("sage: step size for ") + to_string(k) + " must be positive");
    }

    SageData SageData::make(const ArrayConfig &cfg, const CVecList &y_c, const CVecList &y_s,
                            const CVecList &comm_excitation, const CVecList &sens_excitation)
    {
        cfg.validate();
        const auto n = static_cast<Eigen::Index>(y_c.size());
        require(n >= 1, "sage data: need at least one subcarrier");
        require(y_s.size() == y_c.size() && comm_excitation.size() >= y_c.size() &&
                    sens_excitation.size() >= y_c.size(),
                "sage data: subcarrier count mismatch");
        SageData d{cfg, CMat(cfg.n_rx, n), CMat(cfg.n_rx, n), CMat(cfg.n_tx, n), CMat(cfg.n_tx, n)};
        for (Eigen::Index i = 0; i < n; ++i)
        {
            require(y_c[i].size() == cfg.n_rx && y_s[i].size() == cfg.n_rx, "sage data: signal length must be n_rx");
            require(comm_excitation[i].size() == cfg.n_tx && sens_excitation[i].size() == cfg.n_tx,
                    "sage data: excitation length must be n_tx");
            d.y_c.col(i) = y_c[i];
            d.y_s.col(i) = y_s[i];
            d.v_c.col(i) = comm_excitation[i];
            d.v_s.col(i) = sens_excitation[i];
        }
        return d;
    }

    CMat sensing_path_response(const PathEstimate &p, const SageData &data)
    {
        return p.sens_gain * steering(p.sens_aoa, data.cfg.n_rx) *
               (steering(p.sens_aod, data.cfg.n_tx).adjoint() * data.v_s);
    }

    CMat comm_path_response(const PathEstimate &p, const SageData &data)
    {
        return p.comm_gain * steering(p.comm_aoa, data.cfg.n_rx) *
               (steering(p.comm_aod, data.cfg.n_tx).adjoint() * data.v_c);
    }

    CMat sensing_model(const ParamSet &params, const SageData &data)
    {
        CMat m = CMat::Zero(data.y_s.rows(), data.y_s.cols());
        for (const auto &p : params.paths)
            m += sensing_path_response(p, data);
        return m;
    }

    CMat comm_model(const ParamSet &params, const SageData &data)
    {
        CMat m = CMat::Zero(data.y_c.rows(), data.y_c.cols());
        for (const auto &p : params.paths)
            m += comm_path_response(p, data);
        return m;
    }

    double cost_joint(const ParamSet &params, const SageData &data)
    {
        return (data.y_c + data.y_s - comm_model(params, data) - sensing_model(params, data)).squaredNorm();
    }

    double cost_comm(const ParamSet &params, const SageData &data)
    {
        return (data.y_c - comm_model(params, data)).squaredNorm();
    }

    double cost_sens(const ParamSet &params, const SageData &data)
    {
        return (data.y_s - sensing_model(params, data)).squaredNorm();
    }

    double cost_for_mode(const ParamSet &params, const SageData &data, SageMode mode)
    {
        switch (mode)
        {
        case SageMode::Joint: return cost_joint(params, data);
        case SageMode::CommOnly: return cost_comm(params, data);
        case SageMode::SensOnly: return cost_sens(params, data);
        }
        return 0.0;
    }

    Complex grad_param(const ParamSet &params, int k, ParamKind kind, const SageData &data, SageMode mode)
    {
        require(k >= 0 && k < params.size(), "grad_param: path index out of range");
        if (!kind_valid(kind, mode))
            fail(ErrorKind::InvalidArgument, std::string("grad_param: ") + to_string(kind) +
                                                 " is not a free parameter in mode " + to_string(mode));
        std::vector<CMat> comm_parts, sens_parts;
        for (const auto &p : params.paths)
        {
            comm_parts.push_back(comm_path_response(p, data));
            sens_parts.push_back(sensing_path_response(p, data));
        }
        const PathProblem prob = make_problem(params, k, data, mode, comm_parts, sens_parts);
        return prob.gradient(params.paths[k], kind);
    }

    double clamp_angle(double theta)
    {
        return std::clamp(theta, -pi / 2.0 + angle_margin, pi / 2.0 - angle_margin);
    }

    SageResult sage_refine(const ParamSet &init, const SageData &data, const SageConfig &cfg)
    {
        cfg.validate();
        require(init.size() >= 1, "sage_refine: need at least one path");
        const SageMode mode = cfg.mode;
        const auto kinds = sweep_order(mode);
        const int k_paths = init.size();

        ParamSet cur = init;
        for (auto &p : cur.paths)
        {
            p.comm_aoa = clamp_angle(p.comm_aoa);
            p.comm_aod = clamp_angle(p.comm_aod);
            p.sens_aoa = clamp_angle(p.sens_aoa);
            p.sens_aod = clamp_angle(p.sens_aod);
        }
        if (mode == SageMode::Joint)
            cur.tie_shared();

        std::vector<std::array<double, 6>> steps(k_paths);
        for (auto &s : steps)
            for (int i = 0; i < 6; ++i)
                s[i] = cfg.step(static_cast<ParamKind>(i));

        SageResult out;
        double cur_cost = cost_for_mode(cur, data, mode);
        out.trace.push_back({0, mode, cur_cost});
        int failures = 0;

        for (int it = 1; it <= cfg.outer_iters; ++it)
        {
            out.iterations = it;

            // E-step references use the previous outer iterate for the other paths.
            std::vector<CMat> comm_parts, sens_parts;
            for (const auto &p : cur.paths)
            {
                comm_parts.push_back(comm_path_response(p, data));
                sens_parts.push_back(sensing_path_response(p, data));
            }

            ParamSet next = cur;
            for (int k = 0; k < k_paths; ++k)
            {
                const PathProblem prob = make_problem(cur, k, data, mode, comm_parts, sens_parts);
                PathEstimate p = next.paths[k];
                for (ParamKind kind : kinds)
                {
                    const Complex g = prob.gradient(p, kind);
                    if (g == Complex(0.0, 0.0) || !std::isfinite(std::abs(g)))
                        continue;
                    const CostKind which = assigned_cost(kind, mode);
                    const double c0 = prob.cost(p, which);
                    double &gamma = steps[k][static_cast<int>(kind)];
                    const double gamma0 = gamma;
                    bool moved = false;
                    for (int bt = 0; bt < max_backtracks && !moved; ++bt)
                    {
                        PathEstimate cand = p;
                        step_param(cand, kind, mode, gamma, g);
                        if (prob.cost(cand, which) < c0)
                        {
                            p = cand;
                            gamma = std::min(gamma * step_growth, 1e12 * cfg.step(kind));
                            moved = true;
                        }
                        else
                            gamma = std::max(gamma * 0.5, 1e-300);
                    }
                    // A coordinate with no descent this sweep keeps a usable step for the next.
                    if (!moved)
                        gamma = std::max(gamma0 * 0.5, 1e-300);
                }
                next.paths[k] = p;
            }

            const double new_cost = cost_for_mode(next, data, mode);
            if (new_cost <= cur_cost)
            {
                const double improvement = cur_cost - new_cost;
                const double prev = cur_cost;
                cur = std::move(next);
                cur_cost = new_cost;
                failures = 0;
                out.trace.push_back({it, mode, cur_cost});
                if (improvement <= cfg.convergence_tol * prev)
                {
                    out.converged = true;
                    break;
                }
            }
            else
            {
                // Reject the sweep and retry from the same iterate with halved steps.
                for (auto &s : steps)
                    for (double &g : s)
                        g *= 0.5;
                out.trace.push_back({it, mode, cur_cost});
                if (++failures >= divergence_patience)
                {
                    out.diverged = true;
                    break;
                }
            }
        }

        out.params = std::move(cur);
        return out;
    }

    void fit_sensing_gains(ParamSet &params, const SageData &data)
    {
        fit_gains(params, data.y_s, data, true);
    }

    void fit_comm_gains(ParamSet &params, const SageData &data)
    {
        fit_gains(params, data.y_c, data, false);
    }

    ParamSet init_from_coarse(const std::vector<AnglePair> &sensing, const std::vector<AnglePair> &comm,
                              const SageData &data, SageMode mode, double comm_weight)
    {
        require(comm_weight >= 0.0, "init_from_coarse: comm_weight must be >= 0");
        ParamSet ps;
        if (mode == SageMode::CommOnly)
        {
            require(!comm.empty(), "init_from_coarse: no communication estimates");
            for (const auto &c : comm)
            {
                PathEstimate p;
                p.comm_aoa = p.sens_aoa = p.sens_aod = c.aoa;
                p.comm_aod = c.aod;
                ps.paths.push_back(p);
            }
            search_comm_aod(ps, data);
        }
        else if (mode == SageMode::SensOnly)
        {
            require(!sensing.empty(), "init_from_coarse: no sensing estimates");
            for (const auto &c : sensing)
            {
                PathEstimate p;
                p.sens_aoa = p.sens_aod = p.comm_aoa = c.aoa;
                p.comm_aod = c.aod;
                ps.paths.push_back(p);
            }
        }
        else
        {
            require(!sensing.empty(), "init_from_coarse: no sensing estimates");
            require(!comm.empty(), "init_from_coarse: no communication estimates");
            // Pool the AOAs of both coarse estimators (sensing first) and keep the
            // K-subset that leaves the least relative residual energy in the two observations.
            // Angles inside one main-lobe half-width of each other are never paired,
            // or an off-grid LOS would be fit twice instead of reaching a weak path.
            const double lobe = 2.0 / data.cfg.n_rx;
            std::vector<double> pool;
            auto add = [&pool](double a) {
                for (double b : pool)
                    if (std::abs(a - b) < 1e-9)
                        return;
                pool.push_back(a);
            };
            for (const auto &c : sensing)
                add(c.aoa);
            for (const auto &c : comm)
                add(c.aoa);
            const std::size_t k = sensing.size();
            require(pool.size() <= 16, "init_from_coarse: too many coarse candidates");

            // Each subsystem's residual is taken relative to its observation energy.
            const double e_s = std::max(data.y_s.squaredNorm(), std::numeric_limits<double>::min());
            const double e_c = std::max(data.y_c.squaredNorm(), std::numeric_limits<double>::min());
            std::vector<bool> chosen(pool.size(), false);
            std::fill(chosen.begin(), chosen.begin() + static_cast<std::ptrdiff_t>(std::min(k, pool.size())), true);
            double best = std::numeric_limits<double>::infinity();
            do
            {
                ParamSet cand;
                bool separated = true;
                for (std::size_t i = 0; i < pool.size(); ++i)
                    if (chosen[i])
                    {
                        for (const auto &q : cand.paths)
                            if (std::abs(std::sin(q.sens_aoa) - std::sin(pool[i])) < lobe)
                                separated = false;
                        PathEstimate p;
                        p.sens_aoa = p.sens_aod = p.comm_aoa = pool[i];
                        cand.paths.push_back(p);
                    }
                if (!separated && std::isfinite(best))
                    continue;
                search_comm_aod(cand, data);
                fit_sensing_gains(cand, data);
                fit_comm_gains(cand, data);
                const double c = cost_sens(cand, data) / e_s + comm_weight * cost_comm(cand, data) / e_c;
                if (c < best)
                {
                    best = c;
                    ps = std::move(cand);
                }
            } while (std::prev_permutation(chosen.begin(), chosen.end()));
        }
        fit_sensing_gains(ps, data);
        fit_comm_gains(ps, data);
        return ps;
    }

    double reported_aoa(const PathEstimate &p, SageMode mode)
    {
        return mode == SageMode::CommOnly ? p.comm_aoa : p.sens_aoa;
    }
}
