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

#include "fdrelay/problem.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fdrelay {

void ProblemInstance::validate() const
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw ConfigError("a and b must have the same shape");
    if (a.size() == 0) throw ConfigError("instance must have at least one entry");
    if (!(a >= 0).all() || !(b >= 0).all()) throw ConfigError("gains a, b must be nonnegative");
    if (!a.allFinite() || !b.allFinite()) throw ConfigError("gains a, b must be finite");
    if (!(P > 0)) throw ConfigError("power budget P must be positive");
    if (!(eta > 0 && eta <= 1)) throw ConfigError("eta must lie in (0, 1]");
    if (!(gamma_li >= 0)) throw ConfigError("gamma_LI must be nonnegative");
    if (!(eta * gamma_li < 1)) throw ConfigError("eta * gamma_LI must be < 1");
    if (!(sigma_R > 0)) throw ConfigError("sigma_R must be positive");
}

PowerAllocation PowerAllocation::zeros(int K, int N)
{
    return {Grid::Zero(K, N), Grid::Zero(K, N), Grid::Zero(K, N)};
}

ProblemInstance build_instance(const SubcarrierGains& gains, double sigma_R, double sigma_D, double P, double eta,
                               double gamma_li)
{
    if (!(sigma_R > 0) || !(sigma_D > 0)) throw ConfigError("noise variances must be positive");
    ProblemInstance inst;
    inst.a = gains.h_source / sigma_R;
    inst.b = gains.h_relay / sigma_D;
    inst.P = P;
    inst.eta = eta;
    inst.gamma_li = gamma_li;
    inst.sigma_R = sigma_R;
    inst.validate();
    return inst;
}

Grid rates(const ProblemInstance& inst, const PowerAllocation& alloc)
{
    const Grid x = inst.a * alloc.p_id;
    const Grid y = inst.b * alloc.p_r;
    // ln(1 + SINR) with the quotient ordered so it cannot overflow.
    return (x / (1.0 + x + y) * y).log1p();
}

double objective(const ProblemInstance& inst, const PowerAllocation& alloc)
{
    return rates(inst, alloc).sum();
}

double sinr_destination(const ProblemInstance& inst, const PowerAllocation& alloc, int k, int n)
{
    const double x = inst.a(k, n) * alloc.p_id(k, n);
    const double y = inst.b(k, n) * alloc.p_r(k, n);
    return x / (1.0 + x + y) * y;
}

double harvested_power(const ProblemInstance& inst, const PowerAllocation& alloc, int k, int n)
{
    const double h_s = inst.a(k, n) * inst.sigma_R;
    return inst.eta * (h_s * alloc.p_eh(k, n) + inst.gamma_li * alloc.p_r(k, n));
}

ConstraintResiduals constraint_residuals(const ProblemInstance& inst, const PowerAllocation& alloc)
{
    ConstraintResiduals r;
    r.budget_slack = inst.P - (alloc.p_id.sum() + alloc.p_eh.sum());
    r.recycle_slack =
        inst.eta * (inst.sigma_R * (inst.a * alloc.p_eh).sum() + inst.gamma_li * alloc.p_r.sum()) - alloc.p_r.sum();
    return r;
}

PowerAllocation initial_point(const ProblemInstance& inst)
{
    const int K = inst.K();
    const int N = inst.N();
    const double share = 0.5 * inst.P / (static_cast<double>(K) * N);
    PowerAllocation p;
    p.p_id = Grid::Constant(K, N, share);
    p.p_eh = Grid::Constant(K, N, share);
    p.p_r = inst.eta * (inst.a * inst.sigma_R) * p.p_eh / inst.recycle_margin();
    return p;
}

void write_instance_csv(const ProblemInstance& inst, std::ostream& out)
{
    out << "k,n,a,b\n" << std::setprecision(17);
    for (int k = 0; k < inst.K(); ++k)
        for (int n = 0; n < inst.N(); ++n) out << k << ',' << n << ',' << inst.a(k, n) << ',' << inst.b(k, n) << '\n';
}

void write_allocation_csv(const PowerAllocation& alloc, std::ostream& out)
{
    out << "k,n,p_ID,p_EH,p_R\n" << std::setprecision(17);
    for (int k = 0; k < alloc.K(); ++k)
        for (int n = 0; n < alloc.N(); ++n)
            out << k << ',' << n << ',' << alloc.p_id(k, n) << ',' << alloc.p_eh(k, n) << ',' << alloc.p_r(k, n)
                << '\n';
}

namespace {

// Parses "k,n,v1,...,vm" rows after a header; returns (K, N, values per row).
std::map<std::pair<int, int>, std::vector<double>> read_indexed_rows(std::istream& in, std::size_t columns,
                                                                     int& K, int& N)
{
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("CSV input is empty");
    std::map<std::pair<int, int>, std::vector<double>> rows;
    K = 0;
    N = 0;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string cell;
        std::vector<double> values;
        while (std::getline(fields, cell, ',')) {
            try {
                values.push_back(std::stod(cell));
            }
            catch (const std::exception&) {
                throw ConfigError("CSV line " + std::to_string(lineno) + ": bad number '" + cell + "'");
            }
        }
        if (values.size() != columns + 2)
            throw ConfigError("CSV line " + std::to_string(lineno) + ": expected " + std::to_string(columns + 2) +
                              " fields");
        const int k = static_cast<int>(values[0]);
        const int n = static_cast<int>(values[1]);
        if (k < 0 || n < 0) throw ConfigError("CSV line " + std::to_string(lineno) + ": negative index");
        K = std::max(K, k + 1);
        N = std::max(N, n + 1);
        rows[{k, n}] = std::vector<double>(values.begin() + 2, values.end());
    }
    if (rows.size() != static_cast<std::size_t>(K) * static_cast<std::size_t>(N))
        throw ConfigError("CSV does not cover a full K x N grid");
    return rows;
}

} // namespace

ProblemInstance read_instance_csv(std::istream& in, double P, double eta, double gamma_li, double sigma_R)
{
    int K = 0;
    int N = 0;
    const auto rows = read_indexed_rows(in, 2, K, N);
    ProblemInstance inst;
    inst.a.resize(K, N);
    inst.b.resize(K, N);
    for (const auto& [idx, v] : rows) {
        inst.a(idx.first, idx.second) = v[0];
        inst.b(idx.first, idx.second) = v[1];
    }
    inst.P = P;
    inst.eta = eta;
    inst.gamma_li = gamma_li;
    inst.sigma_R = sigma_R;
    inst.validate();
    return inst;
}

PowerAllocation read_allocation_csv(std::istream& in)
{
    int K = 0;
    int N = 0;
    const auto rows = read_indexed_rows(in, 3, K, N);
    auto alloc = PowerAllocation::zeros(K, N);
    for (const auto& [idx, v] : rows) {
        alloc.p_id(idx.first, idx.second) = v[0];
        alloc.p_eh(idx.first, idx.second) = v[1];
        alloc.p_r(idx.first, idx.second) = v[2];
    }
    return alloc;
}

} // namespace fdrelay
