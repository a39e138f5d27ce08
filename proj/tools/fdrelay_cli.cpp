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

// Command-line harness: Monte-Carlo sweeps, convergence traces, timing and
// oracle cross-checks. Every subcommand writes CSV to --out (or stdout).

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fdrelay/campaign.hpp"
#include "fdrelay/channel.hpp"
#include "fdrelay/config.hpp"
#include "fdrelay/oracle.hpp"
#include "fdrelay/path_follower.hpp"
#include "fdrelay/problem.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> runs;
    std::string out;
    bool two_phase = false;
    std::vector<double> values;
    bool no_timing = false;
};

void add_common(CLI::App* cmd, CommonOptions& o)
{
    cmd->add_option("--config", o.config_path, "Scenario file (key = value lines or JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "Base RNG seed");
    cmd->add_option("--runs", o.runs, "Monte-Carlo runs per point")->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, "Output CSV path (default: stdout)");
    cmd->add_flag("--two-phase", o.two_phase, "Report the halved two-phase spectral efficiency in summaries");
}

fdrelay::SystemConfig resolve_config(const CommonOptions& o)
{
    fdrelay::SystemConfig c = o.config_path.empty() ? fdrelay::SystemConfig{} : fdrelay::load_config(o.config_path);
    if (o.seed) c.seed = *o.seed;
    if (o.runs) c.runs = *o.runs;
    c.validate();
    return c;
}

// Writes through `emit` either to the --out file or to stdout.
template <typename Emit>
void write_output(const std::string& path, Emit&& emit)
{
    if (path.empty()) {
        emit(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    emit(out);
}

int run_sweep(const CommonOptions& o, fdrelay::SweepVariable variable, std::vector<double> defaults)
{
    fdrelay::CampaignSpec spec;
    spec.base = resolve_config(o);
    spec.variable = variable;
    spec.values = o.values.empty() ? std::move(defaults) : o.values;
    spec.runs = spec.base.runs;
    spec.record_timing = !o.no_timing;
    const auto rows = fdrelay::run_campaign(spec);
    write_output(o.out, [&](std::ostream& os) { fdrelay::write_campaign_csv(rows, os); });

    std::cerr << fdrelay::to_string(variable) << " sweep, " << spec.runs << " runs/point"
              << (o.two_phase ? " (two-phase SE)" : "") << '\n';
    for (const auto& r : rows) {
        const double opt = o.two_phase ? r.se_opt_half : r.se_opt;
        const double eq = o.two_phase ? r.se_eq_half : r.se_eq;
        std::cerr << "  " << std::setw(8) << r.sweep_value << "  optimized " << std::setw(10) << opt
                  << "  equal-power " << std::setw(10) << eq << "  iters " << r.mean_iters;
        if (r.failed_runs > 0) std::cerr << "  failed " << r.failed_runs;
        std::cerr << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Full-duplex energy-recycling relay: power allocation experiments"};
    app.require_subcommand(1);

    CommonOptions o;
    std::string trace_out, channel_out, instance_out, allocation_out;
    std::vector<int> k_values;
    int grid_points = 64;
    double grid_tol = 1e-10;
    double dci_tol = 1e-6;

    auto* convergence = app.add_subcommand("convergence", "Objective trace per power budget for one channel draw");
    add_common(convergence, o);
    convergence->add_option("--values", o.values, "Power budgets in dBm (default 20,25,30)");
    convergence->add_option("--trace-out", trace_out, "Per-iteration solver trace of the first budget");
    convergence->add_option("--channel-out", channel_out, "Dump the time-domain channel realization");
    convergence->add_option("--instance-out", instance_out, "Dump the normalized gains a, b");
    convergence->add_option("--allocation-out", allocation_out, "Dump the final allocation of the first budget");

    struct SweepCommand {
        const char* name;
        const char* help;
        fdrelay::SweepVariable variable;
        std::vector<double> defaults;
    };
    const std::vector<SweepCommand> sweeps = {
        {"sweep-power", "Average SE versus power budget (dBm)", fdrelay::SweepVariable::power_dBm, {10, 15, 20, 25, 30}},
        {"sweep-selfloop", "Average SE versus self-loop loss (dB)", fdrelay::SweepVariable::self_loop_loss_dB,
         {0, 5, 10, 15, 20}},
        {"sweep-distance", "Average SE versus relay-destination distance (m)", fdrelay::SweepVariable::d_RD,
         {30, 40, 50, 60, 70}},
        {"sweep-rician", "Average SE versus first-tap Rician factor (dB)", fdrelay::SweepVariable::rician_K_dB,
         {0, 3, 6, 9, 12}},
    };
    std::vector<CLI::App*> sweep_apps;
    for (const auto& s : sweeps) {
        auto* cmd = app.add_subcommand(s.name, s.help);
        add_common(cmd, o);
        cmd->add_option("--values", o.values, "Sweep values");
        cmd->add_flag("--no-timing", o.no_timing, "Write 0 in mean_time_s so output is byte-reproducible");
        sweep_apps.push_back(cmd);
    }

    auto* timing = app.add_subcommand("timing", "Mean solve time versus subcarrier count");
    add_common(timing, o);
    timing->add_option("--k-values", k_values, "Subcarrier counts (default 64,256,1024,4096)");

    auto* oracle = app.add_subcommand("oracle-check", "Path follower against grid search and d.c. iterations");
    add_common(oracle, o);
    oracle->add_option("--grid-points", grid_points, "Grid points per axis")->check(CLI::Range(16, 256));
    oracle->add_option("--grid-tol", grid_tol, "Path-follower tolerance for the grid comparison")
        ->check(CLI::PositiveNumber);
    oracle->add_option("--dci-tol", dci_tol, "Tolerance of both methods in the d.c. comparison")
        ->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*convergence) {
            const auto config = resolve_config(o);
            const std::vector<double> budgets = o.values.empty() ? std::vector<double>{20, 25, 30} : o.values;
            const auto traces = fdrelay::run_convergence_trace(config, budgets);
            write_output(o.out, [&](std::ostream& os) { fdrelay::write_convergence_csv(traces, config.K, os); });
            if (!trace_out.empty())
                write_output(trace_out, [&](std::ostream& os) { fdrelay::write_trace_csv(traces.front().result, os); });
            if (!allocation_out.empty())
                write_output(allocation_out,
                             [&](std::ostream& os) { fdrelay::write_allocation_csv(traces.front().result.allocation, os); });
            if (!channel_out.empty()) {
                const auto channels = fdrelay::generate_multipath_channels(config, config.seed);
                write_output(channel_out, [&](std::ostream& os) { fdrelay::write_channel_csv(channels, os); });
            }
            if (!instance_out.empty()) {
                const auto inst = fdrelay::make_instance(config, config.seed);
                write_output(instance_out, [&](std::ostream& os) { fdrelay::write_instance_csv(inst, os); });
            }
            for (const auto& t : traces) {
                const double se = fdrelay::spectral_efficiency(t.result.objective_trace.back(), config.K);
                std::cerr << "P = " << t.P_dBm << " dBm: " << t.result.iterations << " iterations, SE "
                          << (o.two_phase ? 0.5 * se : se) << " bits/s/Hz (" << fdrelay::to_string(t.result.status)
                          << ")\n";
            }
            return 0;
        }
        for (std::size_t i = 0; i < sweeps.size(); ++i)
            if (*sweep_apps[i]) return run_sweep(o, sweeps[i].variable, sweeps[i].defaults);
        if (*timing) {
            auto config = resolve_config(o);
            const auto ks = k_values.empty() ? std::vector<int>{64, 256, 1024, 4096} : k_values;
            const int runs = o.runs ? *o.runs : 20;
            const auto rows = fdrelay::run_timing(config, ks, runs);
            write_output(o.out, [&](std::ostream& os) { fdrelay::write_timing_csv(rows, os); });
            return 0;
        }
        if (*oracle) {
            const auto config = resolve_config(o);
            const int runs = o.runs ? *o.runs : 10;
            const auto rows = fdrelay::run_oracle_check(config, runs, grid_points, grid_tol, dci_tol);
            write_output(o.out, [&](std::ostream& os) { fdrelay::write_oracle_check_csv(rows, os); });
            double worst = 0.0;
            for (const auto& r : rows) worst = std::max(worst, r.relative_gap);
            std::cerr << "largest relative shortfall of the path follower: " << worst << '\n';
            return 0;
        }
    }
    catch (const fdrelay::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
