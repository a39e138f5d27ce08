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
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "fdrelay/common.hpp"
#include "fdrelay/config.hpp"

namespace fdrelay {

struct PowerAllocation;

/// Time-domain L-tap channels for both hops. Entry (n, nbar) is the
/// channel from transmit antenna n to receive antenna nbar; path loss is
/// already applied.
struct MultipathChannelSet {
    int N = 0;
    int L = 0;
    std::vector<Eigen::VectorXcd> source_relay;
    std::vector<Eigen::VectorXcd> relay_destination;

    const Eigen::VectorXcd& sr(int n, int nbar) const { return source_relay[static_cast<std::size_t>(n * N + nbar)]; }
    const Eigen::VectorXcd& rd(int n, int nbar) const { return relay_destination[static_cast<std::size_t>(n * N + nbar)]; }
};

/// Per-subcarrier N x N channel matrices, [H]_{n, nbar} indexed like the taps.
struct FrequencyResponse {
    std::vector<Eigen::MatrixXcd> source_relay;
    std::vector<Eigen::MatrixXcd> relay_destination;

    int K() const { return static_cast<int>(source_relay.size()); }
};

/// Singular factors H = V * diag(sqrt(h)) * U of one matrix; h descending.
struct MatrixDecomposition {
    Eigen::VectorXd gains;
    Eigen::MatrixXcd V;
    Eigen::MatrixXcd U;
};

/// Eigen-channel gains for every subcarrier together with the unitary
/// factors that produced them.
struct SubcarrierGains {
    Grid h_source;
    Grid h_relay;
    std::vector<Eigen::MatrixXcd> V_S, U_S, V_R, U_R;

    int K() const { return static_cast<int>(h_source.rows()); }
    int N() const { return static_cast<int>(h_source.cols()); }
};

/// Transmit precoders, relay processing matrices and the relay power
/// normalization zeta for one allocation.
struct RelayMatrices {
    std::vector<Eigen::MatrixXcd> precoder;
    std::vector<Eigen::MatrixXcd> relay;
    Grid zeta;
};

/// Exponential power delay profile exp(-l / rms), normalized to unit sum.
std::vector<double> power_delay_profile(int L, double rms_delay_symbols);

/// Amplitude factor for a path loss of 30 + 10 * exponent * log10(d) dB.
double path_loss_amplitude(double distance_m, double exponent);

/// Draws both hops. Taps follow the exponential PDP, the first source-relay
/// tap is Rician with a deterministic phase-0 line-of-sight part, spatial
/// correlation is imposed per tap with the Kronecker model, and path loss
/// scales every tap. Output is a pure function of (config, seed).
MultipathChannelSet generate_multipath_channels(const SystemConfig& config, std::uint64_t seed);

/// K-point FFT of every tap vector. Throws ConfigError when K < L.
FrequencyResponse to_frequency_domain(const MultipathChannelSet& channels, int K);

MatrixDecomposition decompose_matrix(const Eigen::MatrixXcd& H);

/// SVD of every subcarrier matrix of both hops.
SubcarrierGains decompose(const FrequencyResponse& response);

/// Convenience pipeline: channels -> FFT -> SVD.
SubcarrierGains generate_gains(const SystemConfig& config, std::uint64_t seed);

/// Builds Psi_k = U_S^H Gamma_S and F_k = U_R^H Gamma_R V_S^H with
/// Gamma_S = diag(sqrt(p_ID)), Gamma_R = diag(sqrt(zeta * p_R)) and
/// zeta = p_R / (h_S p_ID + sigma_R). Combined with the destination
/// combiner V_R^H this diagonalizes every subcarrier:
///   V_R^H H_R F_k H_S Psi_k = diag(sqrt(h_R zeta p_R h_S p_ID)).
RelayMatrices build_precoders(const SubcarrierGains& gains, const PowerAllocation& alloc, double sigma_R);

/// Writes one row per tap: link,n,nbar,l,re,im (link is "SR" or "RD").
void write_channel_csv(const MultipathChannelSet& channels, std::ostream& out);

} // namespace fdrelay
