// SPDX-License-Identifier: Apache-2.0
//
// beamcast — link-level simulator for predictive hybrid beamforming on
// high-speed-railway mmWave links
// Copyright (C) 2026 beamcast developers
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

#ifndef BEAMCAST_COMMON_HPP
#define BEAMCAST_COMMON_HPP

#include <complex>
#include <stdexcept>
#include <string>

namespace beamcast {

using cdouble = std::complex<double>;

// Propagation constant used throughout (radio convention, not CODATA).
inline constexpr double kLightSpeed = 3.0e8; // m/s
inline constexpr double kPi = 3.14159265358979323846;

inline double kmh_to_ms(double kmh) { return kmh / 3.6; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

struct NoBracketError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyBinError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TooCloseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateBasisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DivergedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RangeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace beamcast

#endif
