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

#include "fdrelay/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <ostream>
#include <thread>

#include "fdrelay/channel.hpp"
#include "fdrelay/oracle.hpp"

namespace fdrelay {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct RunOutcome {
    bool ok = false;
    double se_opt = 0.0;
    double se_eq = 0.0;
    int iterations = 0;
    double seconds = 0.0;
};

double standard_error(const std::vector<double>& xs, double mean)
{
    if (xs.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
}

std::ofstream open_output(const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file '" + path.string() + "'");
    return out;
}

} // namespace

std::string_view to_string(SweepVariable v)
{
    switch (v) {
    case SweepVariable::power_dBm: return "P_dBm";
    case SweepVariable::self_loop_loss_dB: return "self_loop_loss_dB";
    case SweepVariable::d_RD: return "d_RD";
    case SweepVariable::rician_K_dB: return "rician_K_dB";
    case SweepVariable::K: return "K";
    }
    return "unknown";
}

std::optional<SweepVariable> parse_sweep_variable(std::string_view name)
{
    for (auto v : {SweepVariable::power_dBm, SweepVariable::self_loop_loss_dB, SweepVariable::d_RD,
                   SweepVariable::rician_K_dB, SweepVariable::K})
        if (to_string(v) == name) return v;
    return std::nullopt;
}

SystemConfig apply_sweep(const SystemConfig& base, SweepVariable variable, double value)
{
    SystemConfig c = base;
    switch (variable) {
    case SweepVariable::power_dBm: c.P_dBm = value; break;
    case SweepVariable::self_loop_loss_dB: c.self_loop_loss_dB = value; break;
    case SweepVariable::d_RD: c.d_RD = value; break;
    case SweepVariable::rician_K_dB: c.rician_K_dB = value; break;
    case SweepVariable::K:
        if (value != std::floor(value)) throw ConfigError("K sweep values must be integers");
        c.K = static_cast<int>(value);
        break;
    }
    c.validate();
    return c;
}

ProblemInstance make_instance(const SystemConfig& config, std::uint64_t seed)
{
    const SubcarrierGains gains = generate_gains(config, seed);
    const double sigma = config.noise_variance();
    return build_instance(gains, sigma, sigma, config.power_budget(), config.eta, config.gamma_li());
}

double spectral_efficiency(double objective_nats, int K)
{
    return objective_nats / (static_cast<double>(K) * std::numbers::ln2);
}

void parallel_for(int count, const std::function<void(int)>& job)
{
    const int workers = std::max(1, std::min<int>(count, static_cast<int>(std::thread::hardware_concurrency())));
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    job(i);
                }
                catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

std::vector<CampaignRow> run_campaign(const CampaignSpec& spec)
{
    if (spec.runs < 1) throw ConfigError("runs must be >= 1");
    if (spec.values.empty()) throw ConfigError("sweep needs at least one value");

    std::vector<CampaignRow> rows;
    rows.reserve(spec.values.size());
    for (double value : spec.values) {
        const SystemConfig config = apply_sweep(spec.base, spec.variable, value);
        std::vector<RunOutcome> outcomes(static_cast<std::size_t>(spec.runs));
        parallel_for(spec.runs, [&](int run) {
            RunOutcome& out = outcomes[static_cast<std::size_t>(run)];
            try {
                const ProblemInstance inst = make_instance(config, config.seed + static_cast<std::uint64_t>(run));
                out.se_eq = spectral_efficiency(objective(inst, initial_point(inst)), config.K);
                const auto start = Clock::now();
                const SolverResult result = solve(inst, config.tol, config.max_iters);
                out.seconds = seconds_since(start);
                out.se_opt = spectral_efficiency(result.objective_trace.back(), config.K);
                out.iterations = result.iterations;
                out.ok = true;
            }
            catch (const NumericalError&) {
                out.ok = false;
            }
        });

        CampaignRow row;
        row.sweep_value = value;
        std::vector<double> opt, eq;
        double iters = 0.0, secs = 0.0;
        for (const auto& o : outcomes) {
            if (!o.ok) {
                ++row.failed_runs;
                continue;
            }
            opt.push_back(o.se_opt);
            eq.push_back(o.se_eq);
            iters += o.iterations;
            secs += o.seconds;
        }
        row.completed_runs = static_cast<int>(opt.size());
        if (row.completed_runs > 0) {
            const double n = row.completed_runs;
            for (double x : opt) row.se_opt += x;
            for (double x : eq) row.se_eq += x;
            row.se_opt /= n;
            row.se_eq /= n;
            row.se_opt_half = 0.5 * row.se_opt;
            row.se_eq_half = 0.5 * row.se_eq;
            row.mean_iters = iters / n;
            row.mean_time_s = spec.record_timing ? secs / n : 0.0;
            row.se_opt_stderr = standard_error(opt, row.se_opt);
            row.se_eq_stderr = standard_error(eq, row.se_eq);
        }
        rows.push_back(row);
    }

    if (!spec.output.empty()) {
        auto out = open_output(spec.output);
        write_campaign_csv(rows, out);
    }
    return rows;
}

void write_campaign_csv(const std::vector<CampaignRow>& rows, std::ostream& out)
{
    out << "sweep_value,se_opt_bps_hz,se_eq_bps_hz,se_opt_half,se_eq_half,mean_iters,mean_time_s\n"
        << std::setprecision(17);
    for (const auto& r : rows)
        out << r.sweep_value << ',' << r.se_opt << ',' << r.se_eq << ',' << r.se_opt_half << ',' << r.se_eq_half << ','
            << r.mean_iters << ',' << r.mean_time_s << '\n';
}

std::vector<ConvergenceTrace> run_convergence_trace(const SystemConfig& config, const std::vector<double>& P_dBm)
{
    std::vector<ConvergenceTrace> traces;
    const SubcarrierGains gains = generate_gains(config, config.seed);
    const double sigma = config.noise_variance();
    for (double p : P_dBm) {
        SystemConfig c = config;
        c.P_dBm = p;
        c.validate();
        const ProblemInstance inst = build_instance(gains, sigma, sigma, c.power_budget(), c.eta, c.gamma_li());
        traces.push_back({p, solve(inst, c.tol, c.max_iters)});
    }
    return traces;
}

void write_convergence_csv(const std::vector<ConvergenceTrace>& traces, int K, std::ostream& out)
{
    out << "P_dBm,iteration,objective_nats,se_bps_hz\n" << std::setprecision(17);
    for (const auto& t : traces)
        for (std::size_t i = 0; i < t.result.objective_trace.size(); ++i)
            out << t.P_dBm << ',' << i << ',' << t.result.objective_trace[i] << ','
                << spectral_efficiency(t.result.objective_trace[i], K) << '\n';
}

std::vector<TimingRow> run_timing(const SystemConfig& config, const std::vector<int>& K_values, int runs)
{
    if (runs < 1) throw ConfigError("runs must be >= 1");
    std::vector<TimingRow> rows;
    for (int K : K_values) {
        SystemConfig c = config;
        c.K = K;
        c.validate();
        TimingRow row;
        row.K = K;
        double total_iters = 0.0;
        double total_s = 0.0;
        for (int run = 0; run < runs; ++run) {
            const ProblemInstance inst = make_instance(c, c.seed + static_cast<std::uint64_t>(run));
            const auto start = Clock::now();
            const SolverResult result = solve(inst, c.tol, c.max_iters);
            total_s += seconds_since(start);
            total_iters += result.iterations;
        }
        row.mean_solve_s = total_s / runs;
        row.mean_iters = total_iters / runs;
        row.mean_iteration_s = total_iters > 0 ? total_s / total_iters : 0.0;
        rows.push_back(row);
    }
    return rows;
}

void write_timing_csv(const std::vector<TimingRow>& rows, std::ostream& out)
{
    out << "K,mean_solve_s,mean_iters,mean_iteration_s\n" << std::setprecision(9);
    for (const auto& r : rows)
        out << r.K << ',' << r.mean_solve_s << ',' << r.mean_iters << ',' << r.mean_iteration_s << '\n';
}

std::vector<OracleCheckRow> run_oracle_check(const SystemConfig& config, int runs, int grid_points, double grid_tol,
                                             double dci_tol)
{
    constexpr int kOracleMaxIters = 1000000;
    std::vector<OracleCheckRow> rows(static_cast<std::size_t>(2 * runs));

    SystemConfig tiny = config;
    set_config_value(tiny, "N", "1");
    tiny.K = 1;
    tiny.L = 1;
    tiny.validate();

    SystemConfig small = config;
    small.K = 16;
    small.L = 4;
    small.rms_delay_symbols = 1.0;
    small.validate();

    parallel_for(2 * runs, [&](int job) {
        const int run = job % runs;
        const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(run);
        OracleCheckRow& row = rows[static_cast<std::size_t>(job)];
        row.run = run;
        if (job < runs) {
            const ProblemInstance inst = make_instance(tiny, seed);
            row.kind = "grid";
            row.path_following = solve(inst, grid_tol, kOracleMaxIters).objective_trace.back();
            row.reference = grid_search(inst, grid_points).best_objective;
        }
        else {
            const ProblemInstance inst = make_instance(small, seed);
            row.kind = "dci";
            row.path_following = solve(inst, dci_tol, kOracleMaxIters).objective_trace.back();
            row.reference = run_dci(inst, dci_tol, kOracleMaxIters).objective_trace.back();
        }
        row.relative_gap = (row.reference - row.path_following) / std::max(std::abs(row.reference), 1e-300);
    });
    return rows;
}

void write_oracle_check_csv(const std::vector<OracleCheckRow>& rows, std::ostream& out)
{
    out << "kind,run,path_following,reference,relative_gap\n" << std::setprecision(17);
    for (const auto& r : rows)
        out << r.kind << ',' << r.run << ',' << r.path_following << ',' << r.reference << ',' << r.relative_gap << '\n';
}

} // namespace fdrelay
