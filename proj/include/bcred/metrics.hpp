#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "bcred/la.hpp"
#include "bcred/prng.hpp"

namespace bcred {

/* Measurements with additive noise realized at an exact input SNR: the noise
 * direction comes from the seeded generator and is rescaled so that
 * ||y - y_clean|| hits ||y_clean|| / 10^(snr/20) exactly. */
struct NoisySystem {
    std::vector<double> y;
    std::vector<double> y_clean;
    double input_snr_db = 0.0;
    std::uint64_t noise_seed = 0;
};

/* 10 log10( ||reference||^2 / ||reference - estimate||^2 ), +inf on an exact
 * match. The reference must be a nonzero signal. */
inline double snr_db(std::span<const double> estimate, std::span<const double> reference) {
    require_same_size(estimate, reference, "snr_db");
    const double ref2 = norm_sq(reference);
    if (ref2 == 0.0)
        throw std::invalid_argument("snr_db: reference signal is identically zero");
    double err2 = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double d = reference[i] - estimate[i];
        err2 += d * d;
    }
    if (err2 == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(ref2 / err2);
}

/* Requested SNRs above 300 dB are clamped there; beyond that the noise would
 * vanish below double rounding anyway. */
inline NoisySystem add_noise_at_input_snr(std::span<const double> y_clean, double input_snr_db,
                                          std::uint64_t seed) {
    const double clean_norm = norm2(y_clean);
    if (clean_norm == 0.0)
        throw std::invalid_argument("add_noise_at_input_snr: clean signal is identically zero");
    if (std::isnan(input_snr_db))
        throw std::invalid_argument("add_noise_at_input_snr: snr is NaN");
    const double snr = std::min(input_snr_db, 300.0);

    SplitMix64 rng(seed);
    std::vector<double> e = rng.normal_vector(y_clean.size());
    double en = norm2(e);
    if (en == 0.0) { e[0] = 1.0; en = 1.0; }
    const double scale = clean_norm / (en * std::pow(10.0, snr / 20.0));

    NoisySystem out;
    out.y_clean.assign(y_clean.begin(), y_clean.end());
    out.y.resize(y_clean.size());
    for (std::size_t i = 0; i < y_clean.size(); ++i) out.y[i] = y_clean[i] + scale * e[i];
    out.input_snr_db = snr;
    out.noise_seed = seed;
    return out;
}

} // namespace bcred
