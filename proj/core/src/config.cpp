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

#include "fdrelay/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <json.hpp>

namespace fdrelay {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double parse_double(std::string_view key, std::string_view text)
{
    text = trim(text);
    std::string buf(text);
    char* end = nullptr;
    const double v = std::strtod(buf.c_str(), &end);
    if (buf.empty() || end != buf.c_str() + buf.size())
        throw ConfigError("config key '" + std::string(key) + "': expected a number, got '" + buf + "'");
    return v;
}

std::int64_t parse_integer(std::string_view key, std::string_view text)
{
    text = trim(text);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ConfigError("config key '" + std::string(key) + "': expected an integer, got '" + std::string(text) + "'");
    return v;
}

std::vector<double> parse_list(std::string_view key, std::string_view text)
{
    std::string buf(trim(text));
    std::replace_if(buf.begin(), buf.end(), [](char c) { return c == '[' || c == ']' || c == ',' || c == ';'; }, ' ');
    std::istringstream in(buf);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(parse_double(key, tok));
    return out;
}

Eigen::MatrixXcd correlation_from_values(std::string_view key, const std::vector<double>& values, int n)
{
    if (values.size() == 1) return SystemConfig::constant_correlation(n, values.front());
    if (values.size() != static_cast<std::size_t>(n) * n)
        throw ConfigError("config key '" + std::string(key) + "': expected 1 or N*N = " + std::to_string(n * n) +
                          " values, got " + std::to_string(values.size()));
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = values[static_cast<std::size_t>(i) * n + j];
    return m;
}

void check_correlation(const char* name, const Eigen::MatrixXcd& m, int n)
{
    using namespace std::string_literals;
    if (m.rows() != n || m.cols() != n) throw ConfigError(name + " must be N x N"s);
    constexpr double eps = 1e-9;
    if ((m - m.adjoint()).norm() > eps) throw ConfigError(name + " must be Hermitian"s);
    for (int i = 0; i < n; ++i)
        if (std::abs(m(i, i) - 1.0) > eps) throw ConfigError(name + " must have unit diagonal"s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -eps) throw ConfigError(name + " must be positive semidefinite"s);
}

} // namespace

Eigen::MatrixXcd SystemConfig::constant_correlation(int n, double rho)
{
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Constant(n, n, rho);
    m.diagonal().setOnes();
    return m;
}

void SystemConfig::validate() const
{
    if (N < 1) throw ConfigError("N must be >= 1");
    if (K < 1) throw ConfigError("K must be >= 1");
    if (L < 1) throw ConfigError("L must be >= 1");
    if (K < L) throw ConfigError("K must be >= L (the FFT cannot represent more taps than subcarriers)");
    if (!(B > 0)) throw ConfigError("B must be positive");
    if (!(d_SR > 0) || !(d_RD > 0)) throw ConfigError("link distances must be positive");
    if (!(rms_delay_symbols > 0)) throw ConfigError("rms_delay_symbols must be positive");
    if (!(eta > 0 && eta <= 1)) throw ConfigError("eta must lie in (0, 1]");
    if (!(eta * gamma_li() < 1)) throw ConfigError("eta * gamma_LI must be < 1");
    if (!(tol > 0)) throw ConfigError("tol must be positive");
    if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
    if (runs < 1) throw ConfigError("runs must be >= 1");
    check_correlation("tx_corr", tx_corr, N);
    check_correlation("rx_corr", rx_corr, N);
}

void set_config_value(SystemConfig& c, std::string_view key, std::string_view value)
{
    auto as_int = [&] { return static_cast<int>(parse_integer(key, value)); };
    auto as_real = [&] { return parse_double(key, value); };

    if (key == "N") {
        c.N = as_int();
        if (c.tx_corr.rows() != c.N) c.tx_corr = SystemConfig::constant_correlation(c.N, 0.2);
        if (c.rx_corr.rows() != c.N) c.rx_corr = SystemConfig::constant_correlation(c.N, 0.2);
    }
    else if (key == "K") c.K = as_int();
    else if (key == "B") c.B = as_real();
    else if (key == "L") c.L = as_int();
    else if (key == "d_SR") c.d_SR = as_real();
    else if (key == "d_RD") c.d_RD = as_real();
    else if (key == "beta_SR") c.beta_SR = as_real();
    else if (key == "beta_RD") c.beta_RD = as_real();
    else if (key == "rician_K_dB") c.rician_K_dB = as_real();
    else if (key == "rms_delay_symbols") c.rms_delay_symbols = as_real();
    else if (key == "noise_psd_dBm_Hz") c.noise_psd_dBm_Hz = as_real();
    else if (key == "noise_corr") c.noise_corr = as_real();
    else if (key == "self_loop_loss_dB") c.self_loop_loss_dB = as_real();
    else if (key == "eta") c.eta = as_real();
    else if (key == "P_dBm") c.P_dBm = as_real();
    else if (key == "tol") c.tol = as_real();
    else if (key == "max_iters") c.max_iters = as_int();
    else if (key == "seed") {
        const auto v = parse_integer(key, value);
        if (v < 0) throw ConfigError("seed must be non-negative");
        c.seed = static_cast<std::uint64_t>(v);
    }
    else if (key == "runs") c.runs = as_int();
    else if (key == "tx_corr") c.tx_corr = correlation_from_values(key, parse_list(key, value), c.N);
    else if (key == "rx_corr") c.rx_corr = correlation_from_values(key, parse_list(key, value), c.N);
    else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

SystemConfig parse_config(std::string_view text, const SystemConfig& base)
{
    std::vector<std::pair<std::string, std::string>> entries;

    const auto body = trim(text);
    if (!body.empty() && body.front() == '{') {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(body);
        }
        catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(std::string("malformed JSON config: ") + e.what());
        }
        for (const auto& [key, value] : doc.items()) {
            if (value.is_string())
                entries.emplace_back(key, value.get<std::string>());
            else if (value.is_number())
                entries.emplace_back(key, value.dump());
            else if (value.is_array()) {
                std::string flat;
                auto walk = [&flat](const nlohmann::json& node, auto&& self) -> void {
                    if (node.is_array())
                        for (const auto& child : node) self(child, self);
                    else
                        flat += node.dump() + " ";
                };
                walk(value, walk);
                entries.emplace_back(key, flat);
            }
            else
                throw ConfigError("config key '" + key + "': unsupported JSON value " + value.dump());
        }
    }
    else {
        std::istringstream in{std::string(text)};
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto content = trim(line);
            if (content.empty()) continue;
            const auto eq = content.find('=');
            if (eq == std::string_view::npos)
                throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
            entries.emplace_back(std::string(trim(content.substr(0, eq))), std::string(trim(content.substr(eq + 1))));
        }
    }

    SystemConfig config = base;
    // N first so that correlation matrices are read with the right size.
    std::stable_partition(entries.begin(), entries.end(), [](const auto& e) { return e.first == "N"; });
    for (const auto& [key, value] : entries) set_config_value(config, key, value);
    config.validate();
    return config;
}

SystemConfig load_config(const std::filesystem::path& path, const SystemConfig& base)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), base);
}

} // namespace fdrelay
