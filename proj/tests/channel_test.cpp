// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The fdrelay Authors
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

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "fdrelay/channel.hpp"
#include "fdrelay/problem.hpp"

namespace {

using cd = std::complex<double>;
using fdrelay::SystemConfig;

SystemConfig small_config(int N, int K, int L)
{
    SystemConfig c;
    c.N = N;
    c.K = K;
    c.L = L;
    c.tx_corr = SystemConfig::constant_correlation(N, 0.2);
    c.rx_corr = SystemConfig::constant_correlation(N, 0.2);
    return c;
}

Eigen::VectorXcd naive_dft(const Eigen::VectorXcd& taps, int K)
{
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(K);
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < taps.size(); ++l)
            out(k) += taps(l) * std::polar(1.0, -2.0 * std::numbers::pi * k * l / K);
    return out;
}

TEST(Channel, PathLossAmplitude)
{
    EXPECT_NEAR(fdrelay::path_loss_amplitude(10.0, 2.0), std::pow(10.0, -2.5), 1e-15);
    EXPECT_NEAR(fdrelay::path_loss_amplitude(50.0, 3.0), std::pow(10.0, -(30.0 + 30.0 * std::log10(50.0)) / 20.0), 1e-18);
}

TEST(Channel, PowerDelayProfile)
{
    const auto pdp = fdrelay::power_delay_profile(16, 3.0);
    double total = 0.0;
    for (double p : pdp) total += p;
    EXPECT_NEAR(total, 1.0, 1e-15);
    EXPECT_NEAR(pdp[0] / pdp[1], 1.3956124250860895, 1e-14);
    for (std::size_t l = 1; l < pdp.size(); ++l) EXPECT_LT(pdp[l], pdp[l - 1]);
}

TEST(Channel, SameSeedSameTaps)
{
    const auto c = small_config(2, 32, 8);
    const auto a = fdrelay::generate_multipath_channels(c, 42);
    const auto b = fdrelay::generate_multipath_channels(c, 42);
    const auto d = fdrelay::generate_multipath_channels(c, 43);
    for (std::size_t i = 0; i < a.source_relay.size(); ++i) {
        EXPECT_EQ(a.source_relay[i], b.source_relay[i]);
        EXPECT_EQ(a.relay_destination[i], b.relay_destination[i]);
    }
    EXPECT_NE(a.source_relay[0], d.source_relay[0]);
}

TEST(Channel, PathLossScalesEveryTap)
{
    auto c = small_config(1, 16, 4);
    c.d_SR = 10.0;
    c.beta_SR = 2.0;
    auto near = c;
    near.d_SR = 1.0;
    const auto far_taps = fdrelay::generate_multipath_channels(c, 5);
    const auto ref_taps = fdrelay::generate_multipath_channels(near, 5);
    // At 1 m only the 30 dB constant remains.
    const double ratio = std::pow(10.0, -2.5) / std::pow(10.0, -1.5);
    for (int l = 0; l < 4; ++l)
        EXPECT_NEAR(std::abs(far_taps.sr(0, 0)(l) - ratio * ref_taps.sr(0, 0)(l)), 0.0, 1e-18);
}

TEST(Channel, ImpulseIsFlat)
{
    fdrelay::MultipathChannelSet set;
    set.N = 1;
    set.L = 4;
    set.source_relay = {Eigen::VectorXcd::Zero(4)};
    set.relay_destination = {Eigen::VectorXcd::Zero(4)};
    set.source_relay[0](0) = cd(0.3, -0.7);
    const auto H = fdrelay::to_frequency_domain(set, 16);
    for (int k = 0; k < 16; ++k) {
        EXPECT_NEAR(std::abs(H.source_relay[k](0, 0) - cd(0.3, -0.7)), 0.0, 1e-15);
        EXPECT_NEAR(std::abs(H.relay_destination[k](0, 0)), 0.0, 1e-15);
    }
}

TEST(Channel, FftMatchesNaiveDftAndParseval)
{
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto c = small_config(2, 8, 4);
        auto set = fdrelay::generate_multipath_channels(c, seed);
        // Undo path loss so the comparison is at unit scale.
        for (auto& v : set.source_relay) v /= fdrelay::path_loss_amplitude(c.d_SR, c.beta_SR);
        for (auto& v : set.relay_destination) v /= fdrelay::path_loss_amplitude(c.d_RD, c.beta_RD);
        const auto H = fdrelay::to_frequency_domain(set, 8);
        for (int n = 0; n < 2; ++n)
            for (int nbar = 0; nbar < 2; ++nbar) {
                const auto ref = naive_dft(set.sr(n, nbar), 8);
                double energy = 0.0;
                for (int k = 0; k < 8; ++k) {
                    EXPECT_NEAR(std::abs(H.source_relay[k](n, nbar) - ref(k)), 0.0, 1e-12);
                    energy += std::norm(H.source_relay[k](n, nbar));
                }
                const double taps = set.sr(n, nbar).squaredNorm();
                EXPECT_NEAR(energy, 8.0 * taps, 1e-9 * 8.0 * taps);
                const auto ref_rd = naive_dft(set.rd(n, nbar), 8);
                for (int k = 0; k < 8; ++k)
                    EXPECT_NEAR(std::abs(H.relay_destination[k](n, nbar) - ref_rd(k)), 0.0, 1e-12);
            }
    }
}

TEST(Channel, TooFewSubcarriersRejected)
{
    const auto c = small_config(1, 16, 16);
    const auto set = fdrelay::generate_multipath_channels(c, 1);
    EXPECT_THROW(fdrelay::to_frequency_domain(set, 8), fdrelay::ConfigError);
}

TEST(Channel, DecompositionReconstructsAndIsUnitary)
{
    const auto c = small_config(4, 64, 16);
    const auto H = fdrelay::to_frequency_domain(fdrelay::generate_multipath_channels(c, 9), 64);
    const auto g = fdrelay::decompose(H);
    const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(4, 4);
    for (int k = 0; k < 64; ++k) {
        const Eigen::MatrixXcd& HS = H.source_relay[k];
        const Eigen::MatrixXcd& HR = H.relay_destination[k];
        const Eigen::VectorXd sS = g.h_source.row(k).sqrt().transpose().matrix();
        const Eigen::VectorXd sR = g.h_relay.row(k).sqrt().transpose().matrix();
        EXPECT_LE((g.V_S[k] * sS.cast<cd>().asDiagonal() * g.U_S[k] - HS).norm(), 1e-9 * HS.norm());
        EXPECT_LE((g.V_R[k] * sR.cast<cd>().asDiagonal() * g.U_R[k] - HR).norm(), 1e-9 * HR.norm());
        for (const auto* m : {&g.V_S[k], &g.U_S[k], &g.V_R[k], &g.U_R[k]})
            EXPECT_LE((m->adjoint() * *m - I).norm(), 1e-9);
        EXPECT_NEAR(g.h_source.row(k).sum(), HS.squaredNorm(), 1e-9 * HS.squaredNorm());
        EXPECT_NEAR(g.h_relay.row(k).sum(), HR.squaredNorm(), 1e-9 * HR.squaredNorm());
        EXPECT_TRUE((g.h_source.row(k) >= 0).all());
        for (int n = 1; n < 4; ++n) EXPECT_LE(g.h_source(k, n), g.h_source(k, n - 1));
    }
}

TEST(Channel, TwoByTwoEigenvaluesClosedForm)
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    for (int t = 0; t < 200; ++t) {
        Eigen::MatrixXcd H(2, 2);
        for (int i = 0; i < 4; ++i) H(i) = cd(z(rng), z(rng));
        const Eigen::MatrixXcd M = H * H.adjoint();
        const double tr = M.trace().real();
        const double det = (M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0)).real();
        const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
        const auto d = fdrelay::decompose_matrix(H);
        EXPECT_NEAR(d.gains(0), 0.5 * (tr + disc), 1e-9 * tr);
        EXPECT_NEAR(d.gains(1), 0.5 * (tr - disc), 1e-9 * tr);
    }
}

TEST(Channel, PrecodersDiagonalizeEndToEnd)
{
    const auto c = small_config(4, 32, 8);
    const auto H = fdrelay::to_frequency_domain(fdrelay::generate_multipath_channels(c, 11), 32);
    const auto g = fdrelay::decompose(H);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    fdrelay::PowerAllocation alloc = fdrelay::PowerAllocation::zeros(32, 4);
    alloc.p_id = alloc.p_id.unaryExpr([&](double) { return u(rng); });
    alloc.p_r = alloc.p_r.unaryExpr([&](double) { return u(rng); });
    const double sigma_R = 1e-6;
    const auto m = fdrelay::build_precoders(g, alloc, sigma_R);
    for (int k = 0; k < 32; ++k) {
        const Eigen::MatrixXcd E =
            g.V_R[k].adjoint() * H.relay_destination[k] * m.relay[k] * H.source_relay[k] * m.precoder[k];
        const double scale = E.norm();
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                if (i == j) {
                    const double expect = std::sqrt(g.h_relay(k, i) * m.zeta(k, i) * alloc.p_r(k, i) * g.h_source(k, i) *
                                                    alloc.p_id(k, i));
                    EXPECT_NEAR(std::abs(E(i, i) - expect), 0.0, 1e-8 * scale);
                }
                else {
                    EXPECT_NEAR(std::abs(E(i, j)), 0.0, 1e-8 * scale);
                }
            }
        EXPECT_NEAR(m.zeta(k, 0), alloc.p_r(k, 0) / (g.h_source(k, 0) * alloc.p_id(k, 0) + sigma_R), 1e-12 * m.zeta(k, 0));
    }
}

TEST(Channel, SingleAntennaRelayGain)
{
    fdrelay::SubcarrierGains g;
    g.h_source = Eigen::ArrayXXd::Constant(1, 1, 1.0);
    g.h_relay = Eigen::ArrayXXd::Constant(1, 1, 1.0);
    const cd v = std::polar(1.0, 0.4), w = std::polar(1.0, -1.1);
    g.V_S = {Eigen::MatrixXcd::Constant(1, 1, v)};
    g.U_S = {Eigen::MatrixXcd::Constant(1, 1, w)};
    g.V_R = {Eigen::MatrixXcd::Constant(1, 1, w)};
    g.U_R = {Eigen::MatrixXcd::Constant(1, 1, v)};
    fdrelay::PowerAllocation alloc = fdrelay::PowerAllocation::zeros(1, 1);
    alloc.p_id(0, 0) = 1.0;
    alloc.p_r(0, 0) = 2.0;
    const auto m = fdrelay::build_precoders(g, alloc, 1.0);
    EXPECT_DOUBLE_EQ(m.zeta(0, 0), 1.0);
    EXPECT_NEAR(std::abs(m.relay[0](0, 0)), std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(std::abs(m.precoder[0](0, 0)), 1.0, 1e-15);
}

TEST(Channel, RicianPowerSplit)
{
    auto c = small_config(2, 16, 4);
    c.rician_K_dB = 6.0;
    c.d_SR = 1.0;
    const double k = std::pow(10.0, 0.6);
    const double pdp0 = fdrelay::power_delay_profile(4, c.rms_delay_symbols)[0];
    const double amp = fdrelay::path_loss_amplitude(1.0, c.beta_SR);
    const int draws = 10000;
    cd mean = 0.0;
    double power = 0.0;
    for (int t = 0; t < draws; ++t) {
        const auto set = fdrelay::generate_multipath_channels(c, static_cast<std::uint64_t>(t));
        const cd g = set.sr(1, 0)(0) / amp;
        mean += g;
        power += std::norm(g);
    }
    mean /= draws;
    power /= draws;
    EXPECT_NEAR(power, pdp0, 0.05 * pdp0);
    const double los_fraction = std::norm(mean) / power;
    EXPECT_NEAR(los_fraction, k / (k + 1.0), 0.05 * k / (k + 1.0));
}

TEST(Channel, KroneckerCovariance)
{
    auto c = small_config(2, 16, 2);
    c.tx_corr = SystemConfig::constant_correlation(2, 0.6);
    c.rx_corr = SystemConfig::constant_correlation(2, 0.3);
    c.d_RD = 1.0;
    const double amp2 = std::pow(fdrelay::path_loss_amplitude(1.0, c.beta_RD), 2);
    const double pdp1 = fdrelay::power_delay_profile(2, c.rms_delay_symbols)[1];
    const int draws = 20000;
    // E[G(n,nbar) G(m,mbar)^*] over all index pairs.
    Eigen::MatrixXcd cov = Eigen::MatrixXcd::Zero(4, 4);
    for (int t = 0; t < draws; ++t) {
        const auto set = fdrelay::generate_multipath_channels(c, static_cast<std::uint64_t>(t) + 100000);
        Eigen::VectorXcd v(4);
        for (int n = 0; n < 2; ++n)
            for (int nbar = 0; nbar < 2; ++nbar) v(2 * n + nbar) = set.rd(n, nbar)(1);
        cov += v * v.adjoint();
    }
    cov /= draws * amp2 * pdp1;
    for (int n = 0; n < 2; ++n)
        for (int nbar = 0; nbar < 2; ++nbar)
            for (int m = 0; m < 2; ++m)
                for (int mbar = 0; mbar < 2; ++mbar) {
                    const double expect = c.tx_corr(n, m).real() * c.rx_corr(nbar, mbar).real();
                    EXPECT_NEAR(std::abs(cov(2 * n + nbar, 2 * m + mbar) - expect), 0.0, 0.04)
                        << n << nbar << m << mbar;
                }
}

TEST(Channel, CsvDump)
{
    const auto c = small_config(2, 16, 3);
    const auto set = fdrelay::generate_multipath_channels(c, 1);
    std::ostringstream out;
    fdrelay::write_channel_csv(set, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "link,n,nbar,l,re,im");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 2 * 2 * 2 * 3);
}

} // namespace
