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
#include <vector>

#include "fdrelay/common.hpp"
#include "fdrelay/problem.hpp"

namespace fdrelay {

struct OracleReport {
    double best_objective = 0.0;
    PowerAllocation best_allocation;
    int grid_resolution = 0;
    double kkt_residual = 0.0;
};

/// Analytic gradient of the sum rate. The objective does not depend on
/// p_EH, so only the p_ID and p_R blocks are returned.
struct ObjectiveGradient {
    Grid d_id;
    Grid d_r;
};

ObjectiveGradient objective_gradient(const ProblemInstance& inst, const PowerAllocation& alloc);

/// Exhaustive search for instances with K * N <= 2. Every p_ID and p_EH
/// axis spans [0, P]; relay powers are parameterized as fractions of the
/// largest total the harvested energy can support, so every grid point
/// satisfies the recycling constraint by construction.
OracleReport grid_search(const ProblemInstance& inst, int points_per_axis);

/// Value of the d.c. minorant built at `anchor`: the two concave log terms
/// are kept and the coupling term ln(1 + a p_ID + b p_R) is linearized.
double dci_surrogate_value(const ProblemInstance& inst, const PowerAllocation& anchor, const PowerAllocation& alloc);

/// One d.c. iteration: maximizes dci_surrogate_value over the exact
/// feasible polytope. Energy power is placed on the entry with the largest
/// a (it only enters the constraints, where that is the cheapest way to
/// buy recycled power), which leaves two water-filling problems coupled
/// through the energy total; that total is found by bisection on the
/// difference of their marginal values.
PowerAllocation dci_step(const ProblemInstance& inst, const PowerAllocation& anchor);

struct DciResult {
    PowerAllocation allocation;
    std::vector<double> objective_trace;
    int iterations = 0;
    bool converged = false;
};

/// Iterates dci_step from initial_point(inst) until the relative
/// objective change is below `tol`.
DciResult run_dci(const ProblemInstance& inst, double tol = 1e-9, int max_iters = 2000);

/// Norm of the gradient of f projected onto the tangent cone of the
/// feasible set at `alloc`. Multipliers of the active budget and recycling
/// constraints are fitted by nonnegative least squares; variables at zero
/// only contribute when the gradient pushes them further into the interior.
double kkt_residual(const ProblemInstance& inst, const PowerAllocation& alloc);

/// best_objective,grid_resolution,kkt_residual followed by the allocation.
void write_oracle_csv(const OracleReport& report, std::ostream& out);

} // namespace fdrelay
