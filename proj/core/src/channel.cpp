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

#include "fdrelay/channel.hpp"

#include <cmath>
#include <complex>
#include <iomanip>
#include <memory>
#include <mutex>
#include <ostream>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <fftw3.h>

#include "fdrelay/problem.hpp"

namespace fdrelay {

namespace {

using cd = std::complex<double>;

// Hermitian PSD square root through the eigendecomposition.
Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& m)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

Eigen::MatrixXcd standard_complex_normal(int n, std::mt19937_64& rng)
{
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    Eigen::MatrixXcd w(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            w(i, j) = cd(re, im);
        }
    return w;
}

// The FFTW planner is not re-entrant; plan execution is.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

struct FftwBuffer {
    explicit FftwBuffer(int n) : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)))
    {
        if (!data) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;

    fftw_complex* data;
};

class ForwardFft {
public:
    explicit ForwardFft(int n) : n_(n), in_(n), out_(n)
    {
        std::lock_guard lock(planner_mutex());
        plan_ = fftw_plan_dft_1d(n, in_.data, out_.data, FFTW_FORWARD, FFTW_ESTIMATE);
        if (!plan_) throw NumericalError("FFTW could not create a plan");
    }
    ~ForwardFft()
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_);
    }
    ForwardFft(const ForwardFft&) = delete;
    ForwardFft& operator=(const ForwardFft&) = delete;

    // Zero-pads `taps` to n and returns the n-point DFT.
    Eigen::VectorXcd operator()(const Eigen::VectorXcd& taps)
    {
        for (int i = 0; i < n_; ++i) {
            const cd v = i < taps.size() ? taps(i) : cd(0.0, 0.0);
            in_.data[i][0] = v.real();
            in_.data[i][1] = v.imag();
        }
        fftw_execute_dft(plan_, in_.data, out_.data);
        Eigen::VectorXcd y(n_);
        for (int i = 0; i < n_; ++i) y(i) = cd(out_.data[i][0], out_.data[i][1]);
        return y;
    }

private:
    int n_;
    FftwBuffer in_;
    FftwBuffer out_;
    fftw_plan plan_ = nullptr;
};

std::vector<Eigen::MatrixXcd> transform_link(const std::vector<Eigen::VectorXcd>& taps, int N, int K, ForwardFft& fft)
{
    std::vector<Eigen::MatrixXcd> H(static_cast<std::size_t>(K), Eigen::MatrixXcd::Zero(N, N));
    for (int n = 0; n < N; ++n)
        for (int nbar = 0; nbar < N; ++nbar) {
            const Eigen::VectorXcd spectrum = fft(taps[static_cast<std::size_t>(n * N + nbar)]);
            for (int k = 0; k < K; ++k) H[static_cast<std::size_t>(k)](n, nbar) = spectrum(k);
        }
    return H;
}

} // namespace

std::vector<double> power_delay_profile(int L, double rms_delay_symbols)
{
    std::vector<double> pdp(static_cast<std::size_t>(L));
    double total = 0.0;
    for (int l = 0; l < L; ++l) {
        pdp[static_cast<std::size_t>(l)] = std::exp(-l / rms_delay_symbols);
        total += pdp[static_cast<std::size_t>(l)];
    }
    for (auto& p : pdp) p /= total;
    return pdp;
}

double path_loss_amplitude(double distance_m, double exponent)
{
    const double loss_db = 30.0 + 10.0 * exponent * std::log10(distance_m);
    return std::pow(10.0, -loss_db / 20.0);
}

MultipathChannelSet generate_multipath_channels(const SystemConfig& config, std::uint64_t seed)
{
    config.validate();
    const int N = config.N;
    const int L = config.L;
    const auto pdp = power_delay_profile(L, config.rms_delay_symbols);
    const Eigen::MatrixXcd tx_half = psd_sqrt(config.tx_corr);
    // G = R_tx^{1/2} W (R_rx^{1/2})^T gives E[G_{n,nbar} G_{m,mbar}^*] = R_tx(n,m) R_rx(nbar,mbar).
    const Eigen::MatrixXcd rx_half_t = psd_sqrt(config.rx_corr).transpose();
    const double kfactor = db_to_linear(config.rician_K_dB);

    std::mt19937_64 rng(seed);

    auto draw_link = [&](bool rician_first_tap, double amplitude) {
        std::vector<Eigen::VectorXcd> taps(static_cast<std::size_t>(N * N), Eigen::VectorXcd::Zero(L));
        for (int l = 0; l < L; ++l) {
            const double power = pdp[static_cast<std::size_t>(l)];
            const bool rician = rician_first_tap && l == 0;
            const double diffuse_power = rician ? power / (kfactor + 1.0) : power;
            const double los = rician ? std::sqrt(power * kfactor / (kfactor + 1.0)) : 0.0;
            const Eigen::MatrixXcd G = tx_half * standard_complex_normal(N, rng) * rx_half_t;
            for (int n = 0; n < N; ++n)
                for (int nbar = 0; nbar < N; ++nbar)
                    taps[static_cast<std::size_t>(n * N + nbar)](l) =
                        amplitude * (los + std::sqrt(diffuse_power) * G(n, nbar));
        }
        return taps;
    };

    MultipathChannelSet set;
    set.N = N;
    set.L = L;
    set.source_relay = draw_link(true, path_loss_amplitude(config.d_SR, config.beta_SR));
    set.relay_destination = draw_link(false, path_loss_amplitude(config.d_RD, config.beta_RD));
    return set;
}

FrequencyResponse to_frequency_domain(const MultipathChannelSet& channels, int K)
{
    if (K < 1) throw ConfigError("K must be >= 1");
    if (K < channels.L)
        throw ConfigError("K = " + std::to_string(K) + " is smaller than the tap count L = " +
                          std::to_string(channels.L));
    ForwardFft fft(K);
    FrequencyResponse out;
    out.source_relay = transform_link(channels.source_relay, channels.N, K, fft);
    out.relay_destination = transform_link(channels.relay_destination, channels.N, K, fft);
    return out;
}

MatrixDecomposition decompose_matrix(const Eigen::MatrixXcd& H)
{
    // Eigen returns H = U_e S V_e^H with singular values descending.
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
    MatrixDecomposition d;
    d.gains = svd.singularValues().array().square().matrix();
    d.V = svd.matrixU();
    d.U = svd.matrixV().adjoint();
    return d;
}

SubcarrierGains decompose(const FrequencyResponse& response)
{
    const int K = response.K();
    const int N = K > 0 ? static_cast<int>(response.source_relay.front().rows()) : 0;
    SubcarrierGains g;
    g.h_source.resize(K, N);
    g.h_relay.resize(K, N);
    g.V_S.reserve(static_cast<std::size_t>(K));
    g.U_S.reserve(static_cast<std::size_t>(K));
    g.V_R.reserve(static_cast<std::size_t>(K));
    g.U_R.reserve(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        auto s = decompose_matrix(response.source_relay[static_cast<std::size_t>(k)]);
        auto r = decompose_matrix(response.relay_destination[static_cast<std::size_t>(k)]);
        g.h_source.row(k) = s.gains.transpose().array();
        g.h_relay.row(k) = r.gains.transpose().array();
        g.V_S.push_back(std::move(s.V));
        g.U_S.push_back(std::move(s.U));
        g.V_R.push_back(std::move(r.V));
        g.U_R.push_back(std::move(r.U));
    }
    return g;
}

SubcarrierGains generate_gains(const SystemConfig& config, std::uint64_t seed)
{
    return decompose(to_frequency_domain(generate_multipath_channels(config, seed), config.K));
}

RelayMatrices build_precoders(const SubcarrierGains& gains, const PowerAllocation& alloc, double sigma_R)
{
    if (!(sigma_R > 0)) throw ConfigError("sigma_R must be positive");
    if (!alloc.nonnegative()) throw ConfigError("allocation must be nonnegative");
    const int K = gains.K();
    RelayMatrices m;
    m.zeta = alloc.p_r / (gains.h_source * alloc.p_id + sigma_R);
    m.precoder.reserve(static_cast<std::size_t>(K));
    m.relay.reserve(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        const Eigen::VectorXd gamma_s = alloc.p_id.row(k).sqrt().transpose().matrix();
        const Eigen::VectorXd gamma_r = (m.zeta.row(k) * alloc.p_r.row(k)).sqrt().transpose().matrix();
        m.precoder.push_back(gains.U_S[ks].adjoint() * gamma_s.cast<cd>().asDiagonal());
        m.relay.push_back(gains.U_R[ks].adjoint() * gamma_r.cast<cd>().asDiagonal() * gains.V_S[ks].adjoint());
    }
    return m;
}

void write_channel_csv(const MultipathChannelSet& channels, std::ostream& out)
{
    out << "link,n,nbar,l,re,im\n";
    out << std::setprecision(17);
    auto dump = [&](const char* link, const std::vector<Eigen::VectorXcd>& taps) {
        for (int n = 0; n < channels.N; ++n)
            for (int nbar = 0; nbar < channels.N; ++nbar) {
                const auto& g = taps[static_cast<std::size_t>(n * channels.N + nbar)];
                for (int l = 0; l < channels.L; ++l)
                    out << link << ',' << n << ',' << nbar << ',' << l << ',' << g(l).real() << ','
                        << g(l).imag() << '\n';
            }
    };
    dump("SR", channels.source_relay);
    dump("RD", channels.relay_destination);
}

} // namespace fdrelay
