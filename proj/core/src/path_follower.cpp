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

#include "fdrelay/path_follower.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace fdrelay {

namespace {

constexpr int kMaxBracketSteps = 200;
constexpr int kMaxRootSteps = 200;
// Tighter than the 1e-9 P contract so that equality invariants have room.
constexpr double kRootTolerance = 1e-12;

// beta * ln(p) with the convention 0 * ln(0) = 0 for dead entries.
Grid weighted_log(const Grid& weight, const Grid& p)
{
    return (weight > 0).select(weight * p.log(), 0.0);
}

// Sum over entries of delta / (gamma + lambda2 * m): the total relay power.
double relay_power_sum(const SurrogateCoefficients& c, double lambda2, double margin)
{
    return (c.delta / (c.gamma + lambda2 * margin)).sum();
}

bool has_active_entry(const ProblemInstance& inst)
{
    return ((inst.a > 0) && (inst.b > 0)).any();
}

} // namespace

double anchor_floor(const ProblemInstance& inst)
{
    return 1e-12 * inst.P / (static_cast<double>(inst.K()) * inst.N());
}

PowerAllocation floor_anchor(const ProblemInstance& inst, const PowerAllocation& anchor)
{
    const double eps = anchor_floor(inst);
    return {anchor.p_id.max(eps), anchor.p_eh.max(eps), anchor.p_r.max(eps)};
}

SurrogateCoefficients surrogate_coefficients(const ProblemInstance& inst, const PowerAllocation& anchor)
{
    if (!(anchor.p_id > 0).all() || !(anchor.p_r > 0).all() || !(anchor.p_eh > 0).all())
        throw NumericalError("surrogate anchor must be strictly positive (anchor floor bypassed)");

    const Grid x = inst.a * anchor.p_id;
    const Grid y = inst.b * anchor.p_r;
    const Grid denom = 1.0 + x + y;

    SurrogateCoefficients c;
    c.beta = x / (1.0 + x);
    c.delta = y / (1.0 + y);
    c.chi = inst.a / denom;
    c.gamma = inst.b / denom;
    const Grid rate = rates(inst, anchor);
    c.alpha = rate - c.beta * anchor.p_id.log() - c.delta * anchor.p_r.log() + (x + y) / denom;
    return c;
}

double surrogate_value(const SurrogateCoefficients& c, const PowerAllocation& alloc)
{
    return (c.alpha + weighted_log(c.beta, alloc.p_id) - c.chi * alloc.p_id + weighted_log(c.delta, alloc.p_r) -
            c.gamma * alloc.p_r)
        .sum();
}

namespace {

// Sums over the anchor that do not depend on lambda2.
struct DualTerms {
    const ProblemInstance& inst;
    const SurrogateCoefficients& coeffs;
    double margin;
    double harvest;
    double energy;

    DualTerms(const ProblemInstance& i, const SurrogateCoefficients& c, const PowerAllocation& anchor)
        : inst(i), coeffs(c), margin(i.recycle_margin()),
          harvest(i.eta * i.sigma_R * i.sigma_R * (i.a.square() * anchor.p_eh).sum()),
          energy(i.eta * i.sigma_R * (i.a * anchor.p_eh).sum())
    {
    }

    double lambda1(double lambda2) const
    {
        return inst.eta * lambda2 / margin * harvest / relay_power_sum(coeffs, lambda2, margin);
    }

    double residual(double lambda2) const
    {
        const double l1 = lambda1(lambda2);
        return (coeffs.beta / (coeffs.chi + l1)).sum() + lambda2 * energy / l1 - inst.P;
    }
};

} // namespace

double lambda1_from_lambda2(const ProblemInstance& inst, const SurrogateCoefficients& coeffs,
                            const PowerAllocation& anchor, double lambda2)
{
    return DualTerms(inst, coeffs, anchor).lambda1(lambda2);
}

double dual_residual(const ProblemInstance& inst, const SurrogateCoefficients& coeffs, const PowerAllocation& anchor,
                     double lambda2)
{
    if (!(lambda2 > 0)) throw NumericalError("lambda2 must be positive");
    return DualTerms(inst, coeffs, anchor).residual(lambda2);
}

DualMultipliers solve_duals(const ProblemInstance& inst, const SurrogateCoefficients& coeffs,
                            const PowerAllocation& anchor, double lambda2_hint)
{
    if (!((inst.a * anchor.p_eh).sum() > 0))
        throw NumericalError("no energy can be harvested from the anchor (sum a * p_EH = 0)");
    if (!(coeffs.delta.sum() > 0)) throw NumericalError("no relay eigen-channel has positive gain");

    const DualTerms terms(inst, coeffs, anchor);
    auto g = [&](double u) { return terms.residual(std::exp(u)); };
    const double target = kRootTolerance * inst.P;

    double u = std::log(lambda2_hint > 0 && std::isfinite(lambda2_hint) ? lambda2_hint : 1.0);
    double gu = g(u);
    auto finish = [&](double root, bool tight) {
        const double lambda2 = std::exp(root);
        return DualMultipliers{terms.lambda1(lambda2), lambda2, tight};
    };
    if (std::abs(gu) <= target) return finish(u, true);

    // Geometric bracket expansion: g(lo) > 0 > g(hi).
    double lo = u, hi = u, g_lo = gu, g_hi = gu;
    const double step = std::log(2.0);
    if (gu > 0) {
        int i = 0;
        for (; i < kMaxBracketSteps && g_hi > 0; ++i) {
            lo = hi;
            g_lo = g_hi;
            hi += step;
            g_hi = g(hi);
        }
        if (g_hi > 0) throw NumericalError("lambda2 bracket expansion exceeded 200 doublings");
    }
    else {
        int i = 0;
        for (; i < kMaxBracketSteps && g_lo < 0; ++i) {
            hi = lo;
            g_hi = g_lo;
            lo -= step;
            g_lo = g(lo);
        }
        // Budget stays slack as lambda2 -> 0: take the limit solution.
        if (g_lo < 0) return finish(lo, false);
    }
    if (std::abs(g_hi) <= target) return finish(hi, true);
    if (std::abs(g_lo) <= target) return finish(lo, true);

    // False position with the Illinois modification; falls back to
    // bisection whenever the interpolated point leaves the bracket.
    int side = 0;
    double best = std::abs(g_lo) < std::abs(g_hi) ? lo : hi;
    double best_abs = std::min(std::abs(g_lo), std::abs(g_hi));
    for (int it = 0; it < kMaxRootSteps; ++it) {
        double mid = hi - g_hi * (hi - lo) / (g_hi - g_lo);
        if (!(mid > lo && mid < hi) || it % 8 == 7) mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double gm = g(mid);
        if (std::abs(gm) < best_abs) {
            best_abs = std::abs(gm);
            best = mid;
        }
        if (best_abs <= target) break;
        if (gm > 0) {
            lo = mid;
            g_lo = gm;
            if (side == -1) g_hi *= 0.5;
            side = -1;
        }
        else {
            hi = mid;
            g_hi = gm;
            if (side == 1) g_lo *= 0.5;
            side = 1;
        }
    }
    if (best_abs > 1e-9 * inst.P) throw NumericalError("lambda2 root finding did not reach |g| <= 1e-9 P");
    return finish(best, true);
}

PowerAllocation update_allocation(const SurrogateCoefficients& coeffs, const PowerAllocation& anchor,
                                  const DualMultipliers& duals, const ProblemInstance& inst)
{
    if (!(duals.lambda1 > 0) || !(duals.lambda2 > 0)) throw NumericalError("dual multipliers must be positive");
    PowerAllocation next;
    next.p_eh = duals.lambda2 * inst.eta * inst.sigma_R * inst.a * anchor.p_eh / duals.lambda1;
    next.p_id = coeffs.beta / (coeffs.chi + duals.lambda1);
    next.p_r = coeffs.delta / (coeffs.gamma + duals.lambda2 * inst.recycle_margin());
    return next;
}

SolverResult solve(const ProblemInstance& inst, double tol, int max_iters, const IterateObserver& observer)
{
    inst.validate();
    if (!(tol > 0)) throw ConfigError("tol must be positive");
    if (max_iters < 1) throw ConfigError("max_iters must be >= 1");

    SolverResult result;
    result.allocation = initial_point(inst);
    double current = objective(inst, result.allocation);
    result.objective_trace.push_back(current);
    {
        const auto r = constraint_residuals(inst, result.allocation);
        result.records.push_back({0, current, 0.0, 0.0, r.budget_slack, r.recycle_slack});
    }

    // Without an eigen-channel that is alive on both hops the rate is
    // identically zero and every feasible point is optimal.
    if (!has_active_entry(inst)) {
        result.status = SolverStatus::converged;
        return result;
    }

    double lambda2_hint = 1.0;
    for (int it = 1; it <= max_iters; ++it) {
        const PowerAllocation anchor = floor_anchor(inst, result.allocation);
        const SurrogateCoefficients coeffs = surrogate_coefficients(inst, anchor);
        const DualMultipliers duals = solve_duals(inst, coeffs, anchor, lambda2_hint);
        lambda2_hint = duals.lambda2;

        result.allocation = update_allocation(coeffs, anchor, duals, inst);
        const double next = objective(inst, result.allocation);
        const auto r = constraint_residuals(inst, result.allocation);

        result.objective_trace.push_back(next);
        result.records.push_back({it, next, duals.lambda1, duals.lambda2, r.budget_slack, r.recycle_slack});
        result.lambda1 = duals.lambda1;
        result.lambda2 = duals.lambda2;
        result.iterations = it;
        if (observer) observer(it, result.allocation);

        const double change = std::abs(next - current) / std::max(1.0, std::abs(current));
        current = next;
        if (change < tol) {
            result.status = SolverStatus::converged;
            return result;
        }
    }
    result.status = SolverStatus::iteration_cap;
    return result;
}

void write_trace_csv(const SolverResult& result, std::ostream& out)
{
    out << "iteration,objective_nats,lambda1,lambda2,budget_residual,recycle_residual\n" << std::setprecision(17);
    for (const auto& r : result.records)
        out << r.iteration << ',' << r.objective_nats << ',' << r.lambda1 << ',' << r.lambda2 << ','
            << r.budget_residual << ',' << r.recycle_residual << '\n';
}

const char* to_string(SolverStatus status)
{
    switch (status) {
    case SolverStatus::converged: return "converged";
    case SolverStatus::iteration_cap: return "iteration_cap";
    }
    return "unknown";
}

} // namespace fdrelay
