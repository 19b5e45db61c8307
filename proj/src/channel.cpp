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

#include "isac/channel.hpp"

#include <cmath>

namespace isac
{
    namespace
    {
        constexpr double angle_tie_tol = 1e-12;

        CMat synth(const std::vector<PathParams> &paths, const ArrayConfig &cfg)
        {
            cfg.validate();
            CMat h = CMat::Zero(cfg.n_rx, cfg.n_tx);
            for (const auto &p : paths)
                h.noalias() += p.gain * steering(p.aoa, cfg.n_rx) * steering(p.aod, cfg.n_tx).adjoint();
            return h;
        }
    }

    void ChannelScene::validate() const
    {
        if (sensing_paths.empty() || comm_paths.empty())
            fail(ErrorKind::InvalidScene, "scene needs at least one sensing and one communication path");
        if (n_subcarriers < 1)
            fail(ErrorKind::InvalidScene, "n_subcarriers must be positive");
        if (noise_var_sensing < 0.0 || noise_var_comm < 0.0)
            fail(ErrorKind::InvalidScene, "noise variances must be nonnegative");
        for (const auto &p : sensing_paths)
            if (std::abs(p.aoa - p.aod) > angle_tie_tol)
                fail(ErrorKind::InvalidScene, "sensing path requires aoa == aod");
        if (shared_aoa)
        {
            if (sensing_paths.size() != comm_paths.size())
                fail(ErrorKind::InvalidScene, "shared-AOA scene needs equal path counts");
            for (std::size_t k = 0; k < comm_paths.size(); ++k)
                if (std::abs(comm_paths[k].aoa - sensing_paths[k].aoa) > angle_tie_tol)
                    fail(ErrorKind::InvalidScene, "shared-AOA tie broken at path " + std::to_string(k));
        }
    }

    CVec PilotSet::comm_excitation(int n) const
    {
        return comm_beamformers.at(n) * comm_pilots.at(n);
    }

    CVecList PilotSet::comm_excitations() const
    {
        CVecList out;
        out.reserve(comm_pilots.size());
        for (int n = 0; n < static_cast<int>(comm_pilots.size()); ++n)
            out.push_back(comm_excitation(n));
        return out;
    }

    PilotSet make_pilots(const ArrayConfig &cfg, int n_subcarriers, Rng &rng)
    {
        cfg.validate();
        require(n_subcarriers >= 1, "make_pilots: n_subcarriers must be positive");
        std::uniform_int_distribution<int> quadrant(0, 3);
        auto qpsk = [&](int m) {
            CVec v(m);
            for (int k = 0; k < m; ++k)
                v(k) = std::polar(1.0, pi / 4.0 + pi / 2.0 * quadrant(rng));
            return v;
        };
        PilotSet p;
        for (int n = 0; n < n_subcarriers; ++n)
        {
            p.sensing_pilots.push_back(qpsk(cfg.n_tx));
            p.comm_pilots.push_back(qpsk(cfg.n_tx));
            p.comm_beamformers.push_back(CMat::Identity(cfg.n_tx, cfg.n_tx));
        }
        return p;
    }

    CMat synth_sensing_channel(const std::vector<PathParams> &paths, const ArrayConfig &cfg)
    {
        for (const auto &p : paths)
            if (std::abs(p.aoa - p.aod) > angle_tie_tol)
                fail(ErrorKind::InvalidScene, "sensing path requires aoa == aod");
        return synth(paths, cfg);
    }

    CMat synth_comm_channel(const std::vector<PathParams> &paths, const ArrayConfig &cfg)
    {
        return synth(paths, cfg);
    }

    CVec complex_noise(int n, double var, Rng &rng)
    {
        require(var >= 0.0, "noise variance must be nonnegative");
        CVec w(n);
        if (var == 0.0)
        {
            w.setZero();
            return w;
        }
        std::normal_distribution<double> g(0.0, std::sqrt(var / 2.0));
        for (int k = 0; k < n; ++k)
        {
            const double re = g(rng);
            const double im = g(rng);
            w(k) = Complex(re, im);
        }
        return w;
    }

    CVec gen_echo(const CMat &h_s, const CVec &pilot, double noise_var, Rng &rng)
    {
        require(h_s.cols() == pilot.size(), "gen_echo: pilot length does not match channel");
        require(noise_var >= 0.0, "gen_echo: negative noise variance");
        return h_s * pilot + complex_noise(static_cast<int>(h_s.rows()), noise_var, rng);
    }

    CVec gen_uplink(const CMat &h_c, const CMat &f, const CVec &x, double noise_var, Rng &rng)
    {
        require(h_c.cols() == f.rows() && f.cols() == x.size(), "gen_uplink: dimension mismatch");
        require(noise_var >= 0.0, "gen_uplink: negative noise variance");
        return h_c * (f * x) + complex_noise(static_cast<int>(h_c.rows()), noise_var, rng);
    }

    double snr_to_noise_var(double snr_db, double signal_power)
    {
        require(signal_power > 0.0, "snr_to_noise_var: signal power must be positive");
        return signal_power / std::pow(10.0, snr_db / 10.0);
    }

    double mean_power(const CVecList &signals)
    {
        double acc = 0.0;
        Eigen::Index count = 0;
        for (const auto &y : signals)
        {
            acc += y.squaredNorm();
            count += y.size();
        }
        return count > 0 ? acc / static_cast<double>(count) : 0.0;
    }

    Observation noiseless_observation(const ChannelScene &scene, const ArrayConfig &cfg,
                                      const PilotSet &pilots)
    {
        require(pilots.size() >= scene.n_subcarriers, "not enough pilots for the scene");
        const CMat h_s = synth_sensing_channel(scene.sensing_paths, cfg);
        const CMat h_c = synth_comm_channel(scene.comm_paths, cfg);
        Observation obs;
        for (int n = 0; n < scene.n_subcarriers; ++n)
        {
            obs.y_s.push_back(h_s * pilots.sensing_pilots[n]);
            obs.y_c.push_back(h_c * pilots.comm_excitation(n));
        }
        return obs;
    }

    void calibrate_noise(ChannelScene &scene, const Observation &clean, double snr_db)
    {
        scene.noise_var_sensing = snr_to_noise_var(snr_db, mean_power(clean.y_s));
        scene.noise_var_comm = snr_to_noise_var(snr_db, mean_power(clean.y_c));
    }

    Observation add_noise(const Observation &clean, const ChannelScene &scene, Rng &rng)
    {
        Observation out = clean;
        for (auto &y : out.y_s)
            y += complex_noise(static_cast<int>(y.size()), scene.noise_var_sensing, rng);
        for (auto &y : out.y_c)
            y += complex_noise(static_cast<int>(y.size()), scene.noise_var_comm, rng);
        return out;
    }
}
