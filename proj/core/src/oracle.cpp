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

#include "fdrelay/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include <Eigen/Dense>

namespace fdrelay {

ObjectiveGradient objective_gradient(const ProblemInstance& inst, const PowerAllocation& alloc)
{
    const Grid x = inst.a * alloc.p_id;
    const Grid y = inst.b * alloc.p_r;
    const Grid joint = 1.0 + x + y;
    return {inst.a / (1.0 + x) * (y / joint), inst.b / (1.0 + y) * (x / joint)};
}

OracleReport grid_search(const ProblemInstance& inst, int points_per_axis)
{
    inst.validate();
    const int entries = inst.K() * inst.N();
    if (entries > 2) throw ConfigError("grid_search supports K * N <= 2 only");
    if (points_per_axis < 16) throw ConfigError("grid_search needs at least 16 points per axis");

    const int n = points_per_axis;
    const double step = 1.0 / (n - 1);
    const double support = inst.eta * inst.sigma_R / inst.recycle_margin();
    const int K = inst.K();
    const int N = inst.N();

    OracleReport report;
    report.grid_resolution = n;
    report.best_allocation = PowerAllocation::zeros(K, N);
    report.best_objective = -std::numeric_limits<double>::infinity();

    // Digits: [p_ID per entry][p_EH per entry][relay fraction per entry].
    const int dims = 3 * entries;
    std::vector<int> digit(static_cast<std::size_t>(dims), 0);
    PowerAllocation cand = PowerAllocation::zeros(K, N);
    for (;;) {
        double spent = 0.0;
        double fraction = 0.0;
        double harvest = 0.0;
        for (int e = 0; e < entries; ++e) {
            const auto es = static_cast<std::size_t>(e);
            cand.p_id(e / N, e % N) = digit[es] * step * inst.P;
            cand.p_eh(e / N, e % N) = digit[es + entries] * step * inst.P;
            spent += cand.p_id(e / N, e % N) + cand.p_eh(e / N, e % N);
            harvest += inst.a(e / N, e % N) * cand.p_eh(e / N, e % N);
            fraction += digit[es + 2 * static_cast<std::size_t>(entries)] * step;
        }
        if (spent <= inst.P * (1.0 + 1e-12) && fraction <= 1.0 + 1e-12) {
            const double relay_total = support * harvest;
            for (int e = 0; e < entries; ++e)
                cand.p_r(e / N, e % N) = digit[static_cast<std::size_t>(e + 2 * entries)] * step * relay_total;
            const double f = objective(inst, cand);
            if (f > report.best_objective) {
                report.best_objective = f;
                report.best_allocation = cand;
            }
        }
        int d = 0;
        while (d < dims && ++digit[static_cast<std::size_t>(d)] == n) digit[static_cast<std::size_t>(d++)] = 0;
        if (d == dims) break;
    }
    report.kkt_residual = kkt_residual(inst, report.best_allocation);
    return report;
}

double dci_surrogate_value(const ProblemInstance& inst, const PowerAllocation& anchor, const PowerAllocation& alloc)
{
    const Grid joint = 1.0 + inst.a * anchor.p_id + inst.b * anchor.p_r;
    const Grid linear = (inst.a * (alloc.p_id - anchor.p_id) + inst.b * (alloc.p_r - anchor.p_r)) / joint;
    return ((inst.a * alloc.p_id).log1p() + (inst.b * alloc.p_r).log1p() - joint.log() - linear).sum();
}

namespace {

// maximize sum ln(1 + g p) - c p  s.t.  sum p <= budget, p >= 0.
// Solution p = max(0, 1/(c + mu) - 1/g); `multiplier` returns mu.
class WaterFill {
public:
    WaterFill(const Grid& gain, const Grid& cost) : gain_(gain), cost_(cost)
    {
        ceiling_ = 0.0;
        for (Eigen::Index i = 0; i < gain_.size(); ++i)
            if (gain_(i) > 0) ceiling_ = std::max(ceiling_, gain_(i) - cost_(i));
    }

    Grid powers(double mu) const
    {
        Grid p = Grid::Zero(gain_.rows(), gain_.cols());
        for (Eigen::Index i = 0; i < gain_.size(); ++i)
            if (gain_(i) > 0) p(i) = std::max(0.0, 1.0 / (cost_(i) + mu) - 1.0 / gain_(i));
        return p;
    }

    double multiplier(double budget) const
    {
        if (ceiling_ <= 0) return 0.0;
        if (powers(0.0).sum() <= budget) return 0.0;
        if (budget <= 0) return ceiling_;
        double lo = 0.0;
        double hi = ceiling_;
        for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (powers(mid).sum() > budget ? lo : hi) = mid;
        }
        return hi;
    }

private:
    Grid gain_;
    Grid cost_;
    double ceiling_ = 0.0;
};

} // namespace

PowerAllocation dci_step(const ProblemInstance& inst, const PowerAllocation& anchor)
{
    inst.validate();
    const int K = inst.K();
    const int N = inst.N();
    const Grid joint = 1.0 + inst.a * anchor.p_id + inst.b * anchor.p_r;
    const WaterFill info(inst.a, inst.a / joint);
    const WaterFill relay(inst.b, inst.b / joint);

    Eigen::Index best_row = 0;
    Eigen::Index best_col = 0;
    const double a_max = inst.a.maxCoeff(&best_row, &best_col);
    // Relay watts supported per watt of energy signal.
    const double conversion = inst.eta * inst.sigma_R * a_max / inst.recycle_margin();

    PowerAllocation out = PowerAllocation::zeros(K, N);
    if (!(a_max > 0)) return out;

    // d/dE of the optimal value: conversion * nu(conversion E) - mu(P - E), decreasing in E.
    auto slope = [&](double energy) {
        return conversion * relay.multiplier(conversion * energy) - info.multiplier(inst.P - energy);
    };
    double energy = 0.0;
    if (slope(inst.P) >= 0) {
        energy = inst.P;
    }
    else if (slope(0.0) > 0) {
        double lo = 0.0;
        double hi = inst.P;
        int it = 0;
        for (; it < 200 && hi - lo > 1e-15 * inst.P; ++it) {
            const double mid = 0.5 * (lo + hi);
            (slope(mid) > 0 ? lo : hi) = mid;
        }
        if (hi - lo > 1e-12 * inst.P) throw OracleError("dci_step: energy split did not converge");
        energy = 0.5 * (lo + hi);
    }

    out.p_id = info.powers(info.multiplier(inst.P - energy));
    out.p_r = relay.powers(relay.multiplier(conversion * energy));
    out.p_eh(best_row, best_col) = energy;

    // Bisection leaves the sums a hair above their budgets; scale back in.
    const double id_total = out.p_id.sum();
    if (id_total > inst.P - energy && id_total > 0) out.p_id *= (inst.P - energy) / id_total;
    const double relay_total = out.p_r.sum();
    if (relay_total > conversion * energy && relay_total > 0) out.p_r *= conversion * energy / relay_total;
    return out;
}

DciResult run_dci(const ProblemInstance& inst, double tol, int max_iters)
{
    DciResult result;
    result.allocation = initial_point(inst);
    double current = objective(inst, result.allocation);
    result.objective_trace.push_back(current);
    for (int it = 1; it <= max_iters; ++it) {
        result.allocation = dci_step(inst, result.allocation);
        const double next = objective(inst, result.allocation);
        result.objective_trace.push_back(next);
        result.iterations = it;
        const double change = std::abs(next - current) / std::max(1.0, std::abs(current));
        current = next;
        if (change < tol) {
            result.converged = true;
            break;
        }
    }
    return result;
}

double kkt_residual(const ProblemInstance& inst, const PowerAllocation& alloc)
{
    const int K = inst.K();
    const int N = inst.N();
    const Eigen::Index m = static_cast<Eigen::Index>(K) * N;
    const Eigen::Index dim = 3 * m;

    const ObjectiveGradient grad = objective_gradient(inst, alloc);
    // Stacked as [p_ID; p_EH; p_R], column-major within each block.
    Eigen::VectorXd g(dim);
    g << grad.d_id.reshaped(), Eigen::VectorXd::Zero(m), grad.d_r.reshaped();

    Eigen::VectorXd x(dim);
    x << alloc.p_id.reshaped(), alloc.p_eh.reshaped(), alloc.p_r.reshaped();

    // Outward normals of the two coupling constraints written as c(x) <= 0.
    Eigen::MatrixXd normals = Eigen::MatrixXd::Zero(dim, 2);
    normals.col(0).head(2 * m).setOnes();
    normals.col(1).segment(m, m) = -inst.eta * inst.sigma_R * inst.a.reshaped();
    normals.col(1).tail(m).setConstant(inst.recycle_margin());

    const auto slack = constraint_residuals(inst, alloc);
    const double relay_scale =
        alloc.p_r.sum() + inst.eta * inst.sigma_R * (inst.a * alloc.p_eh).sum() + std::numeric_limits<double>::min();
    std::vector<int> active;
    if (std::abs(slack.budget_slack) <= 1e-6 * inst.P) active.push_back(0);
    if (std::abs(slack.recycle_slack) <= 1e-6 * relay_scale) active.push_back(1);

    const double bound_tol = 1e-9 * inst.P / static_cast<double>(m);
    const Eigen::Array<bool, Eigen::Dynamic, 1> at_bound = x.array() <= bound_tol;

    auto residual = [&](const Eigen::Vector2d& mu) {
        Eigen::VectorXd r = g - normals * mu;
        for (Eigen::Index i = 0; i < dim; ++i)
            if (at_bound(i)) r(i) = std::max(r(i), 0.0);
        return r;
    };

    Eigen::Vector2d mu = Eigen::Vector2d::Zero();
    double best = residual(mu).squaredNorm();
    if (active.empty()) return std::sqrt(best);

    // Active-set iteration on the piecewise-quadratic fit: rows at a bound
    // whose residual is clipped to zero drop out of the least-squares system.
    Eigen::Array<bool, Eigen::Dynamic, 1> used = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(dim, true);
    for (int it = 0; it < 100; ++it) {
        const Eigen::VectorXd r = g - normals * mu;
        Eigen::Array<bool, Eigen::Dynamic, 1> rows(dim);
        for (Eigen::Index i = 0; i < dim; ++i) rows(i) = !at_bound(i) || r(i) > 0;
        if (it > 0 && (rows == used).all()) break;
        used = rows;

        Eigen::Matrix2d ata = Eigen::Matrix2d::Zero();
        Eigen::Vector2d atg = Eigen::Vector2d::Zero();
        for (Eigen::Index i = 0; i < dim; ++i) {
            if (!rows(i)) continue;
            const Eigen::Vector2d a_i = normals.row(i).transpose();
            ata += a_i * a_i.transpose();
            atg += a_i * g(i);
        }
        // Enumerate supports of the nonnegative 2-variable least squares.
        Eigen::Vector2d candidate = mu;
        double candidate_value = std::numeric_limits<double>::infinity();
        auto consider = [&](const Eigen::Vector2d& trial) {
            if ((trial.array() < 0).any() || !trial.allFinite()) return;
            const double v = residual(trial).squaredNorm();
            if (v < candidate_value) {
                candidate_value = v;
                candidate = trial;
            }
        };
        const bool both = active.size() == 2;
        if (both) consider(ata.ldlt().solve(atg));
        for (int c : active) {
            Eigen::Vector2d trial = Eigen::Vector2d::Zero();
            if (ata(c, c) > 0) trial(c) = std::max(0.0, atg(c) / ata(c, c));
            consider(trial);
        }
        consider(Eigen::Vector2d::Zero());
        if (candidate_value < best) best = candidate_value;
        mu = candidate;
    }
    return std::sqrt(best);
}

void write_oracle_csv(const OracleReport& report, std::ostream& out)
{
    out << "best_objective,grid_resolution,kkt_residual\n" << std::setprecision(17) << report.best_objective << ','
        << report.grid_resolution << ',' << report.kkt_residual << '\n';
    write_allocation_csv(report.best_allocation, out);
}

} // namespace fdrelay
