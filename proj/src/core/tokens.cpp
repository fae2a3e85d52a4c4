#include "radarcast/tokens.hpp"

#include <string>

namespace radarcast {

TokenGrid::TokenGrid(int height, int width, std::int32_t fill) : height_(height), width_(width)
{
    if (height < 0 || width < 0)
        throw InvalidArgument("token grid dimensions must be non-negative");
    indices_.assign(static_cast<std::size_t>(height) * width, fill);
}

TokenGrid::TokenGrid(int height, int width, std::vector<std::int32_t> indices)
    : height_(height), width_(width), indices_(std::move(indices))
{
    if (height < 0 || width < 0 || indices_.size() != static_cast<std::size_t>(height) * width)
        throw ShapeMismatch("token count does not match grid shape");
}

void TokenGrid::check_range(int vocab) const
{
    for (std::size_t i = 0; i < indices_.size(); ++i)
        if (indices_[i] < 0 || indices_[i] >= vocab)
            throw InvalidArgument("token index " + std::to_string(indices_[i]) + " at position " +
                                  std::to_string(i) + " outside codebook of size " + std::to_string(vocab));
}

TokenSequence flatten_spatiotemporal(std::span<const TokenGrid> grids, int max_frames)
{
    if (max_frames >= 0 && static_cast<int>(grids.size()) > max_frames)
        throw InvalidArgument(std::to_string(grids.size()) + " frames exceed the context of " +
                              std::to_string(max_frames));
    TokenSequence seq;
    if (grids.empty())
        return seq;
    const int h = grids.front().height();
    const int w = grids.front().width();
    seq.layout = {static_cast<int>(grids.size()), h, w};
    seq.tokens.reserve(static_cast<std::size_t>(seq.layout.length()));
    for (const auto& g : grids) {
        if (g.height() != h || g.width() != w)
            throw ShapeMismatch("token grids differ in shape");
        seq.tokens.insert(seq.tokens.end(), g.indices().begin(), g.indices().end());
    }
    return seq;
}

std::vector<TokenGrid> unflatten_spatiotemporal(const TokenSequence& seq)
{
    const auto& l = seq.layout;
    if (static_cast<int>(seq.tokens.size()) != l.length())
        throw ShapeMismatch("sequence has " + std::to_string(seq.tokens.size()) +
                            " tokens, layout expects " + std::to_string(l.length()));
    std::vector<TokenGrid> grids;
    grids.reserve(static_cast<std::size_t>(l.frames));
    const auto per_frame = static_cast<std::size_t>(l.tokens_per_frame());
    for (int t = 0; t < l.frames; ++t) {
        auto first = seq.tokens.begin() + static_cast<std::ptrdiff_t>(t * per_frame);
        grids.emplace_back(l.height, l.width,
                           std::vector<std::int32_t>(first, first + static_cast<std::ptrdiff_t>(per_frame)));
    }
    return grids;
}

TokenGrid crop(const TokenGrid& grid, int row0, int col0, int height, int width)
{
    if (row0 < 0 || col0 < 0 || row0 + height > grid.height() || col0 + width > grid.width())
        throw InvalidArgument("token crop outside grid");
    TokenGrid out(height, width);
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c)
            out(r, c) = grid(row0 + r, col0 + c);
    return out;
}

}  // namespace radarcast
