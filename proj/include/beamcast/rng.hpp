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

#ifndef BEAMCAST_RNG_HPP
#define BEAMCAST_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

#include "beamcast/common.hpp"

namespace beamcast {

namespace detail {
// splitmix64 step, used only to decorrelate stream seeds.
inline uint64_t splitmix64(uint64_t& s) {
    uint64_t z = (s += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
} // namespace detail

// Deterministic RNG. The mt19937_64 engine is fully specified by the
// standard; all transforms are written out here so draws are identical
// across standard libraries. Parallel workers must each own a stream
// derived with Rng::stream(seed, index).
class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    static Rng stream(uint64_t base_seed, uint64_t stream_id) {
        uint64_t s = base_seed;
        uint64_t a = detail::splitmix64(s);
        s ^= stream_id * 0xD1B54A32D192ED03ull + 0x2545F4914F6CDD1Dull;
        uint64_t b = detail::splitmix64(s);
        return Rng(a ^ (b + 0x9E3779B97F4A7C15ull));
    }

    uint64_t next_u64() { return eng_(); }

    // Uniform draw in [0, 1).
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Integer in [0, n).
    int uniform_int(int n) { return static_cast<int>(uniform() * n) % n; }

    // Standard normal via Box-Muller, no cached second value.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0)
            u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Laplace with given mean and scale b (variance 2 b^2).
    double laplace(double mean, double scale) {
        double u = uniform() - 0.5;
        double mag = -std::log(1.0 - 2.0 * std::abs(u));
        return mean + scale * (u < 0.0 ? -mag : mag);
    }

    // Unit-magnitude complex with uniform phase.
    cdouble unit_phase() {
        double th = uniform() * 2.0 * kPi;
        return {std::cos(th), std::sin(th)};
    }

  private:
    std::mt19937_64 eng_;
};

} // namespace beamcast

#endif
