#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace bcred {

/* Deterministic 64-bit generator (splitmix-style). Every random quantity in
 * the library (matrix entries, noise, block selection, shuffles, phantom
 * geometry) is drawn from this recurrence so that a seed pins the exact bit
 * stream, independent of platform or standard-library version.
 *
 * State update and output, in order:
 *   state <- state + 0x9E3779B97F4A7C15          (mod 2^64)
 *   z <- state
 *   z <- (z xor (z >> 30)) * 0xBF58476D1CE4E5B9  (mod 2^64)
 *   z <- (z xor (z >> 27)) * 0x94D049BB133111EB  (mod 2^64)
 *   output = z xor (z >> 31)
 *
 * Derived draws are defined exactly as:
 *   uniform01:   (output >> 11) * 2^-53                  in [0, 1)
 *   uniform_pos: ((output >> 11) + 1) * 2^-53            in (0, 1]
 *   below(k):    high 64 bits of the 128-bit product output * k
 *   normal():    Box-Muller, consumes exactly two outputs:
 *                u1 = uniform_pos, u2 = uniform01,
 *                returns sqrt(-2 ln u1) * cos(2 pi u2)
 *   shuffle:     Fisher-Yates, i = n-1 .. 1, j = below(i+1), swap a[i], a[j]
 */
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /* Uniform on [0, 1), 53 random bits. */
    double uniform01() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    /* Uniform on (0, 1]; safe as a log argument. */
    double uniform_pos() {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

    /* Uniform integer in [0, k). Multiply-shift map; k must be positive. */
    std::uint64_t below(std::uint64_t k) {
        if (k == 0)
            throw std::invalid_argument("SplitMix64::below: k must be positive");
        using u128 = unsigned __int128;
        return static_cast<std::uint64_t>((static_cast<u128>(next()) * k) >> 64);
    }

    /* Standard normal draw. Consumes exactly two generator outputs; no
     * state is cached, so interleaved consumers stay reproducible. */
    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::vector<double> normal_vector(std::size_t n) {
        std::vector<double> v(n);
        for (double& x : v) x = normal();
        return v;
    }

    template <class T>
    void shuffle(std::vector<T>& a) {
        for (std::size_t i = a.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(a[i - 1], a[j]);
        }
    }

private:
    std::uint64_t state_;
};

} // namespace bcred
