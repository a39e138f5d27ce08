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

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "fdrelay/campaign.hpp"

namespace {

using fdrelay::SweepVariable;

fdrelay::SystemConfig small_config()
{
    fdrelay::SystemConfig c;
    c.K = 64;
    c.seed = 5;
    return c;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

TEST(Campaign, SweepVariableNames)
{
    for (auto v : {SweepVariable::power_dBm, SweepVariable::self_loop_loss_dB, SweepVariable::d_RD,
                   SweepVariable::rician_K_dB, SweepVariable::K})
        EXPECT_EQ(fdrelay::parse_sweep_variable(fdrelay::to_string(v)), v);
    EXPECT_FALSE(fdrelay::parse_sweep_variable("nope").has_value());
    EXPECT_THROW(fdrelay::apply_sweep(small_config(), SweepVariable::K, 64.5), fdrelay::ConfigError);
    EXPECT_THROW(fdrelay::apply_sweep(small_config(), SweepVariable::d_RD, -1.0), fdrelay::ConfigError);
    EXPECT_EQ(fdrelay::apply_sweep(small_config(), SweepVariable::K, 128).K, 128);
}

TEST(Campaign, SpectralEfficiency)
{
    EXPECT_DOUBLE_EQ(fdrelay::spectral_efficiency(64.0 * std::numbers::ln2, 64), 1.0);
}

TEST(Campaign, ReproducibleCsvAndOrdering)
{
    const auto dir = std::filesystem::temp_directory_path();
    fdrelay::CampaignSpec spec;
    spec.base = small_config();
    spec.variable = SweepVariable::power_dBm;
    spec.values = {20, 30};
    spec.runs = 3;
    spec.record_timing = false;
    spec.output = dir / "fdrelay_campaign_a.csv";
    const auto rows = fdrelay::run_campaign(spec);
    spec.output = dir / "fdrelay_campaign_b.csv";
    fdrelay::run_campaign(spec);

    const auto a = slurp(dir / "fdrelay_campaign_a.csv");
    EXPECT_EQ(a, slurp(dir / "fdrelay_campaign_b.csv"));
    EXPECT_EQ(a.substr(0, a.find('\n')),
              "sweep_value,se_opt_bps_hz,se_eq_bps_hz,se_opt_half,se_eq_half,mean_iters,mean_time_s");
    std::filesystem::remove(dir / "fdrelay_campaign_a.csv");
    std::filesystem::remove(dir / "fdrelay_campaign_b.csv");

    ASSERT_EQ(rows.size(), 2u);
    for (const auto& r : rows) {
        EXPECT_EQ(r.completed_runs, 3);
        EXPECT_EQ(r.failed_runs, 0);
        EXPECT_GE(r.se_opt, r.se_eq - 1e-9);
        EXPECT_DOUBLE_EQ(r.se_opt_half, 0.5 * r.se_opt);
        EXPECT_DOUBLE_EQ(r.se_eq_half, 0.5 * r.se_eq);
        EXPECT_EQ(r.mean_time_s, 0.0);
        EXPECT_GT(r.mean_iters, 0.0);
    }
    EXPECT_GT(rows[1].se_opt, rows[0].se_opt);
}

TEST(Campaign, RunsMatchDirectSolve)
{
    fdrelay::CampaignSpec spec;
    spec.base = small_config();
    spec.values = {20};
    spec.runs = 2;
    const auto rows = fdrelay::run_campaign(spec);
    double se = 0.0;
    for (int run = 0; run < 2; ++run) {
        const auto inst = fdrelay::make_instance(spec.base, spec.base.seed + run);
        se += fdrelay::spectral_efficiency(fdrelay::solve(inst, spec.base.tol, spec.base.max_iters).objective_trace.back(),
                                           spec.base.K);
    }
    EXPECT_DOUBLE_EQ(rows[0].se_opt, se / 2.0);
    EXPECT_GT(rows[0].mean_time_s, 0.0);
}

TEST(Campaign, OutputErrorNamesPath)
{
    fdrelay::CampaignSpec spec;
    spec.base = small_config();
    spec.values = {20};
    spec.runs = 1;
    spec.output = "/nonexistent-dir/fdrelay/out.csv";
    try {
        fdrelay::run_campaign(spec);
        FAIL() << "expected an I/O error";
    }
    catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/fdrelay/out.csv"), std::string::npos);
    }
}

TEST(Campaign, InvalidSpec)
{
    fdrelay::CampaignSpec spec;
    spec.base = small_config();
    spec.runs = 1;
    EXPECT_THROW(fdrelay::run_campaign(spec), fdrelay::ConfigError);
    spec.values = {20};
    spec.runs = 0;
    EXPECT_THROW(fdrelay::run_campaign(spec), fdrelay::ConfigError);
}

TEST(Campaign, ConvergenceTraces)
{
    const auto traces = fdrelay::run_convergence_trace(small_config(), {20, 30});
    ASSERT_EQ(traces.size(), 2u);
    for (const auto& t : traces) {
        const auto& tr = t.result.objective_trace;
        for (std::size_t i = 1; i < tr.size(); ++i) EXPECT_GE(tr[i], tr[i - 1] - 1e-12 * std::abs(tr[i - 1]));
    }
    EXPECT_GT(traces[1].result.objective_trace.back(), traces[0].result.objective_trace.back());
    std::ostringstream out;
    fdrelay::write_convergence_csv(traces, 64, out);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "P_dBm,iteration,objective_nats,se_bps_hz");
}

TEST(Campaign, TimingRows)
{
    const auto rows = fdrelay::run_timing(small_config(), {16, 32}, 2);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].K, 16);
    EXPECT_GT(rows[1].mean_solve_s, 0.0);
    EXPECT_GT(rows[1].mean_iters, 0.0);
}

TEST(Campaign, OracleCheckRows)
{
    auto c = small_config();
    const auto rows = fdrelay::run_oracle_check(c, 2, 16, 1e-8, 1e-4);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0].kind, "grid");
    EXPECT_EQ(rows[3].kind, "dci");
    std::ostringstream out;
    fdrelay::write_oracle_check_csv(rows, out);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "kind,run,path_following,reference,relative_gap");
}

TEST(Campaign, ParallelForRunsEveryIndexAndPropagatesErrors)
{
    std::vector<int> hits(100, 0);
    fdrelay::parallel_for(100, [&](int i) { hits[static_cast<std::size_t>(i)] += 1; });
    for (int h : hits) EXPECT_EQ(h, 1);
    EXPECT_THROW(fdrelay::parallel_for(10, [](int i) { if (i == 7) throw std::runtime_error("boom"); }),
                 std::runtime_error);
}

} // namespace
