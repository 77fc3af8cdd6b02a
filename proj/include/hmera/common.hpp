/*
 * Copyright 2026 The hmera Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace hmera {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double sqrt2 = std::numbers::sqrt2;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

class DesignFailure : public Error {
public:
    DesignFailure(const std::string& what, std::string diagnostics)
        : Error(what + ": " + diagnostics), diagnostics_(std::move(diagnostics)) {}
    const std::string& diagnostics() const noexcept { return diagnostics_; }

private:
    std::string diagnostics_;
};

class ConditioningError : public Error {
public:
    using Error::Error;
};

class DegenerateFilter : public Error {
public:
    using Error::Error;
};

class DecompositionFailure : public Error {
public:
    using Error::Error;
};

class WindowTooSmall : public Error {
public:
    WindowTooSmall(const std::string& what, long required)
        : Error(what + " (required window size " + std::to_string(required) + ")"),
          required_(required) {}
    long required() const noexcept { return required_; }

private:
    long required_;
};

class Unsupported : public Error {
public:
    using Error::Error;
};

class ResolutionError : public Error {
public:
    using Error::Error;
};

/// Floor division for possibly negative numerators.
inline long floor_div(long a, long b) {
    long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

inline long ceil_div(long a, long b) { return -floor_div(-a, b); }

inline long positive_mod(long a, long n) {
    long m = a % n;
    return m < 0 ? m + n : m;
}

/// Uniform grid of `count` points covering [lo, hi] inclusive.
inline std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> out(static_cast<std::size_t>(count));
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    const double step = (hi - lo) / (count - 1);
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lo + step * i;
    return out;
}

}  // namespace hmera
