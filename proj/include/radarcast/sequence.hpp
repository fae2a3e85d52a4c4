#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "radarcast/field.hpp"

namespace radarcast {

/// Time-ordered frames at a fixed step; frame 0 is the oldest.
struct RadarSequence {
    std::vector<ReflectivityField> frames;
    int timestep_minutes = 5;
    /// Minutes since the Unix epoch of frame 0; empty for synthetic data.
    std::optional<std::uint32_t> start_time;

    int height() const { return frames.empty() ? 0 : frames.front().height(); }
    int width() const { return frames.empty() ? 0 : frames.front().width(); }
    int length() const { return static_cast<int>(frames.size()); }

    /// Throws ShapeMismatch if frames differ in shape.
    void validate() const;

    friend bool operator==(const RadarSequence&, const RadarSequence&) = default;
};

/// One draw of the shared geometric transform.
struct AugmentParams {
    int row_offset = 0;
    int col_offset = 0;
    int rotation = 0;  ///< quarter turns counter-clockwise, 0..3
    bool flip = false; ///< mirror left-right after rotation
};

/// Draws crop offset, rotation and flip from a generator seeded with `seed`.
AugmentParams draw_augment(int height, int width, int crop_h, int crop_w, std::uint64_t seed);

/// Crop, rotate, flip; identical for every frame.
ReflectivityField apply_augment(const ReflectivityField& frame, const AugmentParams& params, int crop_h, int crop_w);
RadarSequence apply_augment(const RadarSequence& seq, const AugmentParams& params, int crop_h, int crop_w);

/// Random crop + 90-degree rotation + flip. Crop dims must be multiples of
/// `patch` and no larger than the frames.
RadarSequence augment(const RadarSequence& seq, std::pair<int, int> crop_hw, std::uint64_t seed, int patch = 8);

// RPRC container: "RPRC", u16 version, u32 T, u32 H, u32 W, u16 timestep,
// u32 start time (minutes since epoch, 0 = unset); then T*H*W float32 values.
// All little-endian.
inline constexpr std::uint16_t kRprcVersion = 1;
inline constexpr std::size_t kRprcHeaderBytes = 24;

void write_sequence(const RadarSequence& seq, const std::filesystem::path& path);
RadarSequence read_sequence(const std::filesystem::path& path);

}  // namespace radarcast
