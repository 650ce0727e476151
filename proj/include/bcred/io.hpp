#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bcred {

/* Dense row-major matrix payload of the binary matrix-file format:
 * magic "BMAT", then u32 rows, u32 cols (little-endian), then rows*cols
 * float64 entries row-major, little-endian. */
struct MatrixFileData {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> entries;
};

namespace detail {

inline void put_u32_le(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                          static_cast<unsigned char>((v >> 8) & 0xFF),
                          static_cast<unsigned char>((v >> 16) & 0xFF),
                          static_cast<unsigned char>((v >> 24) & 0xFF)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32_le(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void put_f64_le(std::ostream& os, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xFF);
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline double get_f64_le(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

/* Shortest decimal that round-trips a double; used by every text artifact so
 * that reruns are byte-identical. */
inline std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // prefer the shorter %.16g / %.15g form when it parses back exactly
    for (int prec = 15; prec <= 16; ++prec) {
        char shorter[40];
        std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
        if (std::strtod(shorter, nullptr) == v) return shorter;
    }
    return buf;
}

} // namespace detail

inline void write_matrix_file(const std::string& path, const MatrixFileData& m) {
    if (m.entries.size() != m.rows * m.cols)
        throw std::invalid_argument("write_matrix_file: entry count does not match dimensions");
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("write_matrix_file: cannot open '" + path + "' for writing");
    os.write("BMAT", 4);
    detail::put_u32_le(os, static_cast<std::uint32_t>(m.rows));
    detail::put_u32_le(os, static_cast<std::uint32_t>(m.cols));
    for (double v : m.entries) detail::put_f64_le(os, v);
    if (!os) throw std::runtime_error("write_matrix_file: write failed on '" + path + "'");
}

inline MatrixFileData read_matrix_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("read_matrix_file: cannot open '" + path + "'");
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "BMAT", 4) != 0)
        throw std::runtime_error("read_matrix_file: '" + path + "' is not a matrix file (bad magic)");
    MatrixFileData m;
    m.rows = detail::get_u32_le(is);
    m.cols = detail::get_u32_le(is);
    if (!is)
        throw std::runtime_error("read_matrix_file: truncated header in '" + path + "'");
    m.entries.resize(m.rows * m.cols);
    for (double& v : m.entries) v = detail::get_f64_le(is);
    if (!is)
        throw std::runtime_error("read_matrix_file: truncated data in '" + path + "'");
    return m;
}

/* Frequency selection mask for the subsampled Fourier model. Text format:
 * first line "H W", then H lines of W characters, '1' selects. */
struct FrequencyMask {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<bool> selected; // row-major

    std::size_t count() const {
        std::size_t c = 0;
        for (bool b : selected) c += b ? 1 : 0;
        return c;
    }
};

inline FrequencyMask read_mask_file(const std::string& path) {
    std::ifstream is(path);
    if (!is)
        throw std::runtime_error("read_mask_file: cannot open '" + path + "'");
    FrequencyMask mask;
    if (!(is >> mask.height >> mask.width) || mask.height == 0 || mask.width == 0)
        throw std::runtime_error("read_mask_file: malformed header in '" + path + "'");
    is >> std::ws;
    mask.selected.assign(mask.height * mask.width, false);
    std::string line;
    for (std::size_t r = 0; r < mask.height; ++r) {
        if (!std::getline(is, line) || line.size() < mask.width)
            throw std::runtime_error("read_mask_file: truncated mask row in '" + path + "'");
        for (std::size_t c = 0; c < mask.width; ++c) {
            if (line[c] == '1')
                mask.selected[r * mask.width + c] = true;
            else if (line[c] != '0')
                throw std::runtime_error("read_mask_file: invalid character '" +
                                         std::string(1, line[c]) + "' in '" + path + "'");
        }
    }
    return mask;
}

inline void write_mask_file(const std::string& path, const FrequencyMask& mask) {
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("write_mask_file: cannot open '" + path + "' for writing");
    os << mask.height << " " << mask.width << "\n";
    for (std::size_t r = 0; r < mask.height; ++r) {
        for (std::size_t c = 0; c < mask.width; ++c)
            os << (mask.selected[r * mask.width + c] ? '1' : '0');
        os << "\n";
    }
}

/* Grayscale image with intensities in [0, 1]. */
struct Image {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> pixels; // row-major
};

namespace detail {

inline int pgm_next_token_int(std::istream& is, const std::string& path) {
    // skip whitespace and '#' comments, then read a nonnegative integer
    for (;;) {
        const int c = is.peek();
        if (c == '#') {
            std::string dummy;
            std::getline(is, dummy);
        } else if (std::isspace(c)) {
            is.get();
        } else {
            break;
        }
    }
    int value = -1;
    if (!(is >> value) || value < 0)
        throw std::runtime_error("read_pgm: malformed header in '" + path + "'");
    return value;
}

} // namespace detail

/* Reads binary (P5) or ASCII (P2) PGM with maxval up to 65535; samples map
 * to [0, 1] by division with maxval. Two-byte P5 samples are big-endian. */
inline Image read_pgm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("read_pgm: cannot open '" + path + "'");
    std::string magic;
    is >> magic;
    if (magic != "P5" && magic != "P2")
        throw std::runtime_error("read_pgm: '" + path + "' is not a P2/P5 PGM");
    const int width = detail::pgm_next_token_int(is, path);
    const int height = detail::pgm_next_token_int(is, path);
    const int maxval = detail::pgm_next_token_int(is, path);
    if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535)
        throw std::runtime_error("read_pgm: malformed header in '" + path + "'");

    Image img;
    img.width = static_cast<std::size_t>(width);
    img.height = static_cast<std::size_t>(height);
    img.pixels.resize(img.width * img.height);
    const double scale = 1.0 / maxval;

    if (magic == "P2") {
        for (double& p : img.pixels) {
            long v;
            if (!(is >> v) || v < 0 || v > maxval)
                throw std::runtime_error("read_pgm: bad sample in '" + path + "'");
            p = v * scale;
        }
    } else {
        is.get(); // single whitespace byte after maxval
        const bool wide = maxval > 255;
        for (double& p : img.pixels) {
            int v;
            if (wide) {
                const int hi = is.get(), lo = is.get();
                if (hi < 0 || lo < 0)
                    throw std::runtime_error("read_pgm: truncated data in '" + path + "'");
                v = hi * 256 + lo;
            } else {
                v = is.get();
                if (v < 0)
                    throw std::runtime_error("read_pgm: truncated data in '" + path + "'");
            }
            if (v > maxval)
                throw std::runtime_error("read_pgm: sample exceeds maxval in '" + path + "'");
            p = v * scale;
        }
    }
    return img;
}

/* Writes binary P5 with maxval 255. Intensities are clamped to [0, 1] and
 * quantized with round-half-away-from-zero, so a write/read round trip moves
 * any in-range pixel by at most 1/510. */
inline void write_pgm(const std::string& path, const Image& img) {
    if (img.pixels.size() != img.width * img.height)
        throw std::invalid_argument("write_pgm: pixel count does not match dimensions");
    if (img.width == 0 || img.height == 0)
        throw std::invalid_argument("write_pgm: empty image");
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("write_pgm: cannot open '" + path + "' for writing");
    os << "P5\n" << img.width << " " << img.height << "\n255\n";
    for (double p : img.pixels) {
        const double clamped = p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
        const int q = static_cast<int>(std::round(clamped * 255.0));
        os.put(static_cast<char>(q));
    }
    if (!os) throw std::runtime_error("write_pgm: write failed on '" + path + "'");
}

/* One value per line, shortest round-tripping decimal. Used for 1-D signals. */
inline void write_signal_csv(const std::string& path, std::span<const double> x) {
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("write_signal_csv: cannot open '" + path + "' for writing");
    for (double v : x) os << detail::format_double(v) << "\n";
}

inline std::vector<double> read_signal_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is)
        throw std::runtime_error("read_signal_csv: cannot open '" + path + "'");
    std::vector<double> x;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        char* end = nullptr;
        const double v = std::strtod(line.c_str(), &end);
        if (end == line.c_str())
            throw std::runtime_error("read_signal_csv: bad value '" + line + "' in '" + path + "'");
        x.push_back(v);
    }
    if (x.empty())
        throw std::runtime_error("read_signal_csv: no samples in '" + path + "'");
    return x;
}

} // namespace bcred
