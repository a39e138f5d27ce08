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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "fdrelay/common.hpp"

namespace fdrelay {

/// Every scenario parameter of the relay link: array geometry, OFDM
/// numerology, large- and small-scale fading, power budget, harvesting
/// efficiency, solver tolerances and Monte-Carlo controls.
///
/// Default-constructed values reproduce the reference scenario: 4x4 MIMO,
/// 1024 subcarriers over 1 MHz, 16-tap channels with 3-sample RMS delay,
/// 10 m / 50 m hops with exponents 2 / 3, 6 dB Rician first tap,
/// -174 dBm/Hz noise, 10 dB self-loop loss, eta = 0.5, 20 dBm budget.
struct SystemConfig {
    int N = 4;
    int K = 1024;
    double B = 1e6;
    int L = 16;
    double d_SR = 10.0;
    double d_RD = 50.0;
    double beta_SR = 2.0;
    double beta_RD = 3.0;
    double rician_K_dB = 6.0;
    double rms_delay_symbols = 3.0;
    double noise_psd_dBm_Hz = -174.0;
    // Recorded for completeness; the rate expressions assume white noise.
    double noise_corr = 0.2;
    double self_loop_loss_dB = 10.0;
    double eta = 0.5;
    double P_dBm = 20.0;
    double tol = 1e-3;
    int max_iters = 500;
    std::uint64_t seed = 1;
    int runs = 100;
    Eigen::MatrixXcd tx_corr = constant_correlation(4, 0.2);
    Eigen::MatrixXcd rx_corr = constant_correlation(4, 0.2);

    /// Loop gain gamma_LI = 10^(-self_loop_loss_dB / 10).
    double gamma_li() const { return db_to_linear(-self_loop_loss_dB); }

    /// Per-subcarrier noise variance in watts: PSD times B / K.
    double noise_variance() const { return dbm_to_watts(noise_psd_dBm_Hz) * (B / K); }

    double power_budget() const { return dbm_to_watts(P_dBm); }

    /// Throws ConfigError describing the first violated invariant.
    void validate() const;

    /// N x N matrix with unit diagonal and `rho` everywhere else.
    static Eigen::MatrixXcd constant_correlation(int n, double rho);
};

/// Parses a configuration document. JSON objects (first non-blank
/// character '{') and `key = value` lines are both accepted; keys are the
/// SystemConfig field names. Correlation matrices may be given as a scalar
/// (constant-correlation matrix), a flat list of N*N reals, or (JSON) a
/// nested array. The result is validated before it is returned.
SystemConfig parse_config(std::string_view text, const SystemConfig& base = {});

SystemConfig load_config(const std::filesystem::path& path, const SystemConfig& base = {});

/// Sets one field by name from its textual value.
void set_config_value(SystemConfig& config, std::string_view key, std::string_view value);

} // namespace fdrelay
