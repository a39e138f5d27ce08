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
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fdrelay/config.hpp"
#include "fdrelay/path_follower.hpp"
#include "fdrelay/problem.hpp"

namespace fdrelay {

enum class SweepVariable { power_dBm, self_loop_loss_dB, d_RD, rician_K_dB, K };

std::string_view to_string(SweepVariable v);
std::optional<SweepVariable> parse_sweep_variable(std::string_view name);

/// Returns `base` with the swept field set to `value` (validated).
SystemConfig apply_sweep(const SystemConfig& base, SweepVariable variable, double value);

struct CampaignSpec {
    SystemConfig base;
    SweepVariable variable = SweepVariable::power_dBm;
    std::vector<double> values;
    int runs = 100;
    // Empty path: rows are returned but not written.
    std::filesystem::path output;
    // Wall-clock columns break byte-for-byte reproducibility; when false
    // the mean_time_s column is written as 0.
    bool record_timing = true;
};

struct CampaignRow {
    double sweep_value = 0.0;
    double se_opt = 0.0;
    double se_eq = 0.0;
    double se_opt_half = 0.0;
    double se_eq_half = 0.0;
    double mean_iters = 0.0;
    double mean_time_s = 0.0;
    // Standard errors of the two raw means over the successful runs.
    double se_opt_stderr = 0.0;
    double se_eq_stderr = 0.0;
    int completed_runs = 0;
    int failed_runs = 0;
};

/// Channel draw -> eigen-gains -> normalized instance for one seed.
ProblemInstance make_instance(const SystemConfig& config, std::uint64_t seed);

/// Spectral efficiency in bits/s/Hz per subcarrier: f / (K ln 2).
double spectral_efficiency(double objective_nats, int K);

/// Runs `count` independent jobs on a worker pool; job i writes slot i.
void parallel_for(int count, const std::function<void(int)>& job);

/// For every sweep value, solves `runs` seeded instances (seed = base.seed +
/// run index) and averages optimized and equal-power spectral efficiency.
/// Rows are written to spec.output when it is set.
std::vector<CampaignRow> run_campaign(const CampaignSpec& spec);

/// sweep_value,se_opt_bps_hz,se_eq_bps_hz,se_opt_half,se_eq_half,mean_iters,mean_time_s
void write_campaign_csv(const std::vector<CampaignRow>& rows, std::ostream& out);

struct ConvergenceTrace {
    double P_dBm = 0.0;
    SolverResult result;
};

/// One channel draw (config.seed), solved at every power budget.
std::vector<ConvergenceTrace> run_convergence_trace(const SystemConfig& config, const std::vector<double>& P_dBm);

/// P_dBm,iteration,objective_nats,se_bps_hz
void write_convergence_csv(const std::vector<ConvergenceTrace>& traces, int K, std::ostream& out);

struct TimingRow {
    int K = 0;
    double mean_solve_s = 0.0;
    double mean_iters = 0.0;
    double mean_iteration_s = 0.0;
};

/// Sequential wall-clock timing of solve() (channel generation excluded).
std::vector<TimingRow> run_timing(const SystemConfig& config, const std::vector<int>& K_values, int runs = 20);

/// K,mean_solve_s,mean_iters,mean_iteration_s
void write_timing_csv(const std::vector<TimingRow>& rows, std::ostream& out);

struct OracleCheckRow {
    std::string kind;
    int run = 0;
    double path_following = 0.0;
    double reference = 0.0;
    double relative_gap = 0.0;
};

/// Grid search on single-entry draws and iterated d.c. steps on
/// K = 16 (L = 4, unit RMS delay) draws, each against the path follower.
// The grid rows solve to `grid_tol`; the d.c. rows stop both methods at `dci_tol`.
std::vector<OracleCheckRow> run_oracle_check(const SystemConfig& config, int runs, int grid_points = 64,
                                             double grid_tol = 1e-10, double dci_tol = 1e-6);

void write_oracle_check_csv(const std::vector<OracleCheckRow>& rows, std::ostream& out);

} // namespace fdrelay
