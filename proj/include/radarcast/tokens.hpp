#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "radarcast/error.hpp"

namespace radarcast {

/// Codebook indices on the downsampled grid, row-major.
class TokenGrid {
public:
    TokenGrid() = default;
    TokenGrid(int height, int width, std::int32_t fill = 0);
    TokenGrid(int height, int width, std::vector<std::int32_t> indices);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return indices_.size(); }

    std::int32_t& operator()(int row, int col) { return indices_[static_cast<std::size_t>(row) * width_ + col]; }
    std::int32_t operator()(int row, int col) const { return indices_[static_cast<std::size_t>(row) * width_ + col]; }

    std::span<const std::int32_t> indices() const noexcept { return indices_; }
    std::span<std::int32_t> indices() noexcept { return indices_; }

    /// Throws InvalidArgument if any index is outside [0, vocab).
    void check_range(int vocab) const;

    friend bool operator==(const TokenGrid&, const TokenGrid&) = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<std::int32_t> indices_;
};

struct TokenLayout {
    int frames = 0;
    int height = 0;
    int width = 0;

    int tokens_per_frame() const { return height * width; }
    int length() const { return frames * height * width; }
    friend bool operator==(const TokenLayout&, const TokenLayout&) = default;
};

/// Flattened spatiotemporal tokens: frame-major (oldest first), then row-major.
struct TokenSequence {
    std::vector<std::int32_t> tokens;
    TokenLayout layout;
};

/// output[t*h*w + r*w + c] = grids[t](r, c). `max_frames` < 0 disables the cap.
TokenSequence flatten_spatiotemporal(std::span<const TokenGrid> grids, int max_frames = -1);

/// Inverse of flatten_spatiotemporal; the token count must equal layout.length().
std::vector<TokenGrid> unflatten_spatiotemporal(const TokenSequence& seq);

/// Copy of the h x w block of `grid` whose top-left corner is (row0, col0).
TokenGrid crop(const TokenGrid& grid, int row0, int col0, int height, int width);

}  // namespace radarcast
