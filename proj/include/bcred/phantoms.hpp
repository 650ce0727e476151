#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "bcred/prng.hpp"

namespace bcred {

/* Piecewise-constant test signal with 3..8 segments at levels in [0, 1].
 * Geometry and levels are pinned by the seed through the documented draw
 * order: segment count, then the interior cut positions, then the levels. */
inline std::vector<double> piecewise_constant_1d(std::size_t n, std::uint64_t seed) {
    if (n == 0)
        throw std::invalid_argument("piecewise_constant_1d: n must be positive");
    SplitMix64 rng(seed);
    const std::size_t segments = 3 + static_cast<std::size_t>(rng.below(6));
    std::vector<std::size_t> cuts;
    if (n > 1)
        for (std::size_t s = 0; s + 1 < segments; ++s)
            cuts.push_back(1 + static_cast<std::size_t>(rng.below(n - 1)));
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    cuts.push_back(n);

    std::vector<double> x(n);
    std::size_t at = 0;
    for (const std::size_t cut : cuts) {
        const double level = rng.uniform01();
        while (at < cut) x[at++] = level;
    }
    return x;
}

/* Blob phantom: one large base ellipse plus 4..7 random ellipses of mixed
 * sign, clamped to [0, 1]. Coordinates are normalized to the unit square;
 * deterministic in (height, width, seed). */
inline std::vector<double> shepp_like(std::size_t height, std::size_t width,
                                      std::uint64_t seed) {
    if (height == 0 || width == 0)
        throw std::invalid_argument("shepp_like: dimensions must be positive");
    struct Ellipse {
        double cr, cc, ar, ac, angle, intensity;
    };
    SplitMix64 rng(seed);
    std::vector<Ellipse> blobs;
    blobs.push_back({0.5, 0.5, 0.46, 0.42, 0.0, 0.7});
    const std::size_t extra = 4 + static_cast<std::size_t>(rng.below(4));
    for (std::size_t i = 0; i < extra; ++i) {
        Ellipse e;
        e.cr = 0.25 + 0.5 * rng.uniform01();
        e.cc = 0.25 + 0.5 * rng.uniform01();
        e.ar = 0.05 + 0.15 * rng.uniform01();
        e.ac = 0.05 + 0.15 * rng.uniform01();
        e.angle = std::numbers::pi * rng.uniform01();
        const double magnitude = 0.1 + 0.3 * rng.uniform01();
        e.intensity = rng.uniform01() < 0.4 ? -magnitude : magnitude;
        blobs.push_back(e);
    }

    std::vector<double> img(height * width, 0.0);
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c) {
            const double pr = (r + 0.5) / height;
            const double pc = (c + 0.5) / width;
            double v = 0.0;
            for (const Ellipse& e : blobs) {
                const double dr = pr - e.cr, dc = pc - e.cc;
                const double u = dr * std::cos(e.angle) + dc * std::sin(e.angle);
                const double w = -dr * std::sin(e.angle) + dc * std::cos(e.angle);
                const double q = (u / e.ar) * (u / e.ar) + (w / e.ac) * (w / e.ac);
                if (q <= 1.0) v += e.intensity;
            }
            img[r * width + c] = std::clamp(v, 0.0, 1.0);
        }
    return img;
}

} // namespace bcred
