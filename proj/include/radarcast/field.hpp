#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "radarcast/error.hpp"

namespace radarcast {

/// Dense row-major 2-D grid of 32-bit values. The tag keeps reflectivity
/// and rain-rate grids from being mixed up at compile time.
template <typename Tag>
class Field {
public:
    Field() = default;
    Field(int height, int width, float fill = 0.0f)
        : height_(height), width_(width)
    {
        if (height < 0 || width < 0)
            throw InvalidArgument("field dimensions must be non-negative");
        values_.assign(static_cast<std::size_t>(height) * width, fill);
    }
    Field(int height, int width, std::vector<float> values)
        : height_(height), width_(width), values_(std::move(values))
    {
        if (height < 0 || width < 0 ||
            values_.size() != static_cast<std::size_t>(height) * width)
            throw ShapeMismatch("field value count does not match " +
                                std::to_string(height) + "x" + std::to_string(width));
    }

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool same_shape(const Field& other) const noexcept
    {
        return height_ == other.height_ && width_ == other.width_;
    }

    float& operator()(int row, int col) { return values_[static_cast<std::size_t>(row) * width_ + col]; }
    float operator()(int row, int col) const { return values_[static_cast<std::size_t>(row) * width_ + col]; }

    std::span<float> values() noexcept { return values_; }
    std::span<const float> values() const noexcept { return values_; }

    double resolution_km = 1.0;

    friend bool operator==(const Field& a, const Field& b)
    {
        return a.height_ == b.height_ && a.width_ == b.width_ && a.values_ == b.values_;
    }

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<float> values_;
};

struct DbzTag {};
struct RainRateTag {};

/// Reflectivity in dBZ.
using ReflectivityField = Field<DbzTag>;
/// Rain rate in mm/h.
using RainRateField = Field<RainRateTag>;

template <typename A, typename B>
void require_same_shape(const Field<A>& a, const Field<B>& b, const char* what)
{
    if (a.height() != b.height() || a.width() != b.width())
        throw ShapeMismatch(std::string(what) + ": shape " + std::to_string(a.height()) + "x" +
                            std::to_string(a.width()) + " vs " + std::to_string(b.height()) +
                            "x" + std::to_string(b.width()));
}

}  // namespace radarcast
