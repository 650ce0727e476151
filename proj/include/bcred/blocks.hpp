#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bcred {

/* Rectangle of a 2-D tile in image coordinates, rows [r0, r1) x cols [c0, c1). */
struct TileRect {
    std::size_t r0 = 0, r1 = 0, c0 = 0, c1 = 0;
    std::size_t rows() const { return r1 - r0; }
    std::size_t cols() const { return c1 - c0; }
};

/* Partition of {0..n-1} into b disjoint index blocks whose union covers all
 * coordinates. Two layouts:
 *
 *   contiguous: consecutive runs; the first (n mod b) blocks get ceil(n/b)
 *               coordinates, the rest floor(n/b).
 *   tiles:      row-major tiles of an H x W image; tiles at the right and
 *               bottom edges are smaller when tile_h / tile_w do not divide
 *               H / W. Blocks are ordered row-major over the tile grid.
 *
 * Every block stores its coordinate indices sorted ascending.
 */
class BlockPartition {
public:
    enum class Kind { Contiguous, Tiles };

    static BlockPartition contiguous(std::size_t n, std::size_t b) {
        if (b == 0)
            throw std::invalid_argument("BlockPartition: block count must be positive");
        if (b > n)
            throw std::invalid_argument("BlockPartition: block count " + std::to_string(b) +
                                        " exceeds dimension " + std::to_string(n));
        BlockPartition p;
        p.kind_ = Kind::Contiguous;
        p.n_ = n;
        const std::size_t base = n / b;
        const std::size_t larger = n % b; // this many leading blocks have base+1 entries
        p.blocks_.reserve(b);
        std::size_t at = 0;
        for (std::size_t i = 0; i < b; ++i) {
            const std::size_t len = base + (i < larger ? 1 : 0);
            std::vector<std::size_t> idx(len);
            for (std::size_t j = 0; j < len; ++j) idx[j] = at + j;
            at += len;
            p.blocks_.push_back(std::move(idx));
        }
        return p;
    }

    static BlockPartition tiles(std::size_t height, std::size_t width,
                                std::size_t tile_h, std::size_t tile_w) {
        if (height == 0 || width == 0)
            throw std::invalid_argument("BlockPartition: image dimensions must be positive");
        if (tile_h == 0 || tile_w == 0)
            throw std::invalid_argument("BlockPartition: tile dimensions must be positive");
        if (tile_h > height || tile_w > width)
            throw std::invalid_argument("BlockPartition: tile exceeds image (" +
                                        std::to_string(tile_h) + "x" + std::to_string(tile_w) +
                                        " vs " + std::to_string(height) + "x" +
                                        std::to_string(width) + ")");
        BlockPartition p;
        p.kind_ = Kind::Tiles;
        p.n_ = height * width;
        p.height_ = height;
        p.width_ = width;
        for (std::size_t r0 = 0; r0 < height; r0 += tile_h) {
            const std::size_t r1 = std::min(r0 + tile_h, height);
            for (std::size_t c0 = 0; c0 < width; c0 += tile_w) {
                const std::size_t c1 = std::min(c0 + tile_w, width);
                std::vector<std::size_t> idx;
                idx.reserve((r1 - r0) * (c1 - c0));
                for (std::size_t r = r0; r < r1; ++r)
                    for (std::size_t c = c0; c < c1; ++c)
                        idx.push_back(r * width + c);
                p.blocks_.push_back(std::move(idx));
                p.rects_.push_back(TileRect{r0, r1, c0, c1});
            }
        }
        return p;
    }

    Kind kind() const { return kind_; }
    std::size_t dim() const { return n_; }
    std::size_t block_count() const { return blocks_.size(); }

    const std::vector<std::size_t>& block(std::size_t i) const {
        check_index(i);
        return blocks_[i];
    }

    std::size_t block_size(std::size_t i) const { return block(i).size(); }

    /* Image geometry; valid only for the tile layout. */
    std::size_t image_height() const { require_tiles(); return height_; }
    std::size_t image_width() const { require_tiles(); return width_; }
    const TileRect& tile_rect(std::size_t i) const {
        require_tiles();
        check_index(i);
        return rects_[i];
    }

private:
    void check_index(std::size_t i) const {
        if (i >= blocks_.size())
            throw std::invalid_argument("BlockPartition: block index " + std::to_string(i) +
                                        " out of range (b=" + std::to_string(blocks_.size()) + ")");
    }
    void require_tiles() const {
        if (kind_ != Kind::Tiles)
            throw std::invalid_argument("BlockPartition: tile geometry requested from a non-tile partition");
    }

    Kind kind_ = Kind::Contiguous;
    std::size_t n_ = 0;
    std::size_t height_ = 0, width_ = 0;
    std::vector<std::vector<std::size_t>> blocks_;
    std::vector<TileRect> rects_;
};

/* x_i = U_i^T x, the coordinates of block i in ascending index order. */
inline std::vector<double> extract_block(std::span<const double> x,
                                         const BlockPartition& p, std::size_t i) {
    if (x.size() != p.dim())
        throw std::invalid_argument("extract_block: vector length " + std::to_string(x.size()) +
                                    " does not match partition dimension " +
                                    std::to_string(p.dim()));
    const auto& idx = p.block(i);
    std::vector<double> out(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) out[j] = x[idx[j]];
    return out;
}

/* U_i h: an n-vector that is zero outside block i. */
inline std::vector<double> inject_block(std::span<const double> h,
                                        const BlockPartition& p, std::size_t i) {
    const auto& idx = p.block(i);
    if (h.size() != idx.size())
        throw std::invalid_argument("inject_block: block vector length " +
                                    std::to_string(h.size()) + " does not match block size " +
                                    std::to_string(idx.size()));
    std::vector<double> out(p.dim(), 0.0);
    for (std::size_t j = 0; j < idx.size(); ++j) out[idx[j]] = h[j];
    return out;
}

/* x += alpha * U_i h, in place. */
inline void add_scaled_block(std::span<double> x, double alpha, std::span<const double> h,
                             const BlockPartition& p, std::size_t i) {
    const auto& idx = p.block(i);
    if (x.size() != p.dim() || h.size() != idx.size())
        throw std::invalid_argument("add_scaled_block: dimension mismatch");
    for (std::size_t j = 0; j < idx.size(); ++j) x[idx[j]] += alpha * h[j];
}

} // namespace bcred
