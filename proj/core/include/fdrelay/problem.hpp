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

#include <iosfwd>

#include "fdrelay/channel.hpp"
#include "fdrelay/common.hpp"

namespace fdrelay {

/// Normalized sum-rate power allocation problem. `a` and `b` are the
/// per-(k, n) source-relay and relay-destination SNR gains per watt.
struct ProblemInstance {
    Grid a;
    Grid b;
    double P = 0.0;
    double eta = 0.0;
    double gamma_li = 0.0;
    double sigma_R = 0.0;

    int K() const { return static_cast<int>(a.rows()); }
    int N() const { return static_cast<int>(a.cols()); }

    /// 1 - eta * gamma_LI, the net cost of one watt of relay power.
    double recycle_margin() const { return 1.0 - eta * gamma_li; }

    /// Throws ConfigError when an invariant does not hold.
    void validate() const;
};

/// Source information power, source energy power and relay power grids.
struct PowerAllocation {
    Grid p_id;
    Grid p_eh;
    Grid p_r;

    static PowerAllocation zeros(int K, int N);

    int K() const { return static_cast<int>(p_id.rows()); }
    int N() const { return static_cast<int>(p_id.cols()); }
    bool nonnegative() const { return (p_id >= 0).all() && (p_eh >= 0).all() && (p_r >= 0).all(); }
};

struct ConstraintResiduals {
    double budget_slack = 0.0;
    double recycle_slack = 0.0;

    bool feasible(double tolerance = 0.0) const
    {
        return budget_slack >= -tolerance && recycle_slack >= -tolerance;
    }
};

ProblemInstance build_instance(const SubcarrierGains& gains, double sigma_R, double sigma_D, double P, double eta,
                               double gamma_li);

/// Sum rate in nats, evaluated as
/// sum ln((1 + a p_ID)(1 + b p_R)) - ln(1 + a p_ID + b p_R).
double objective(const ProblemInstance& inst, const PowerAllocation& alloc);

/// Per-entry rate ln(1 + SINR) in nats; sums to objective().
Grid rates(const ProblemInstance& inst, const PowerAllocation& alloc);

double sinr_destination(const ProblemInstance& inst, const PowerAllocation& alloc, int k, int n);

/// eta * (h_S p_EH + gamma_LI p_R), with h_S = a * sigma_R.
double harvested_power(const ProblemInstance& inst, const PowerAllocation& alloc, int k, int n);

/// budget_slack = P - sum(p_ID + p_EH);
/// recycle_slack = eta * sum(sigma_R a p_EH + gamma_LI p_R) - sum(p_R).
ConstraintResiduals constraint_residuals(const ProblemInstance& inst, const PowerAllocation& alloc);

/// Equal split of half the budget to information and half to energy on
/// every entry, relay power set so the recycling constraint is tight.
/// This is also the equal-power baseline.
PowerAllocation initial_point(const ProblemInstance& inst);

void write_instance_csv(const ProblemInstance& inst, std::ostream& out);
void write_allocation_csv(const PowerAllocation& alloc, std::ostream& out);

/// Reads k,n,a,b rows; scalar parameters are supplied by the caller.
ProblemInstance read_instance_csv(std::istream& in, double P, double eta, double gamma_li, double sigma_R);
PowerAllocation read_allocation_csv(std::istream& in);

} // namespace fdrelay
