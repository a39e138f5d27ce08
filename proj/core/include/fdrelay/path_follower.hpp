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

#include <functional>
#include <iosfwd>
#include <vector>

#include "fdrelay/common.hpp"
#include "fdrelay/problem.hpp"

namespace fdrelay {

/// Coefficients of the concave minorant
///   alpha + beta ln p_ID - chi p_ID + delta ln p_R - gamma p_R
/// of each per-entry rate, built around an anchor allocation.
struct SurrogateCoefficients {
    Grid alpha;
    Grid beta;
    Grid chi;
    Grid delta;
    Grid gamma;
};

struct DualMultipliers {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    // False when the budget cannot be made tight for any lambda2 > 0; the
    // returned multipliers are then the lambda2 -> 0 limit.
    bool budget_tight = true;
};

enum class SolverStatus { converged, iteration_cap };

struct IterationRecord {
    int iteration = 0;
    double objective_nats = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double budget_residual = 0.0;
    double recycle_residual = 0.0;
};

struct SolverResult {
    PowerAllocation allocation;
    // Entry 0 is the objective at the initial point, entry i after update i.
    std::vector<double> objective_trace;
    std::vector<IterationRecord> records;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    int iterations = 0;
    SolverStatus status = SolverStatus::iteration_cap;
};

/// Called after every update with the iteration number and the new iterate.
using IterateObserver = std::function<void(int, const PowerAllocation&)>;

/// Lower bound applied to anchor entries: 1e-12 * P / (K N).
double anchor_floor(const ProblemInstance& inst);

/// Clamps every anchor entry to at least anchor_floor(inst).
PowerAllocation floor_anchor(const ProblemInstance& inst, const PowerAllocation& anchor);

/// Throws NumericalError on a nonpositive anchor entry.
SurrogateCoefficients surrogate_coefficients(const ProblemInstance& inst, const PowerAllocation& anchor);

double surrogate_value(const SurrogateCoefficients& coeffs, const PowerAllocation& alloc);

/// lambda1 as the function of lambda2 that makes the recycling constraint
/// tight under the closed-form updates.
double lambda1_from_lambda2(const ProblemInstance& inst, const SurrogateCoefficients& coeffs,
                            const PowerAllocation& anchor, double lambda2);

/// Budget residual sum(p_ID + p_EH) - P of the closed-form update at
/// lambda2. Strictly decreasing in lambda2.
double dual_residual(const ProblemInstance& inst, const SurrogateCoefficients& coeffs, const PowerAllocation& anchor,
                     double lambda2);

/// Finds lambda2 with |dual_residual| <= 1e-9 P by a bracketing search on
/// log(lambda2), starting the bracket at `lambda2_hint`.
DualMultipliers solve_duals(const ProblemInstance& inst, const SurrogateCoefficients& coeffs,
                            const PowerAllocation& anchor, double lambda2_hint = 1.0);

PowerAllocation update_allocation(const SurrogateCoefficients& coeffs, const PowerAllocation& anchor,
                                  const DualMultipliers& duals, const ProblemInstance& inst);

/// Runs the path-following iteration from initial_point(inst) until the
/// relative objective change drops below `tol` or `max_iters` updates.
SolverResult solve(const ProblemInstance& inst, double tol = 1e-3, int max_iters = 500,
                   const IterateObserver& observer = {});

/// iteration,objective_nats,lambda1,lambda2,budget_residual,recycle_residual
void write_trace_csv(const SolverResult& result, std::ostream& out);

const char* to_string(SolverStatus status);

} // namespace fdrelay
