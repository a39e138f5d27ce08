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

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace fdrelay {

// K x N array: rows are subcarriers, columns are eigen-channels.
using Grid = Eigen::ArrayXXd;

// Invalid scenario parameters or malformed configuration input.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical routine could not reach its postcondition.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Reference oracles that fail to converge report through this type.
class OracleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

} // namespace fdrelay
