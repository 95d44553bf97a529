#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "mshr/preprocess.hpp"

namespace mshr {

enum class Orientation : std::uint8_t { Horizontal, Vertical };

/// Coordinate view of a derivate. Horizontal derivates sit at column
/// c in [0, width] of pixel row r and separate pixels (c-1, r), (c, r);
/// vertical derivates sit at gap row r in [0, height] of pixel column c
/// and separate (c, r-1), (c, r). Columns 0/width and gap rows 0/height
/// are the border positions.
struct DerivateRef {
    Orientation orientation = Orientation::Horizontal;
    std::int32_t row = 0;
    std::int32_t col = 0;

    bool operator==(const DerivateRef&) const = default;
};

/// Flat-indexed grid of all derivates of an image, border sentinels
/// included. Horizontal derivates occupy ids [0, (w+1)*h) row-major,
/// vertical derivates follow row-major. Border derivates carry the
/// sentinel level == bins; every derivate has exactly 6 neighbors with
/// no special cases at the image border. Immutable after build.
class DerivateGrid {
public:
    static DerivateGrid build(const QuantizedDerivates& q);

    std::int32_t width() const { return width_; }
    std::int32_t height() const { return height_; }
    std::int32_t bins() const { return bins_; }
    std::int32_t sentinel_level() const { return bins_; }

    std::int32_t node_count() const { return static_cast<std::int32_t>(levels_.size()); }
    std::int32_t horizontal_count() const { return hcount_; }
    std::int32_t interior_count() const { return interior_count_; }
    std::int32_t border_count() const { return node_count() - interior_count_; }
    std::int32_t pixel_count() const { return width_ * height_; }

    std::int32_t level(std::int32_t id) const { return levels_[static_cast<std::size_t>(id)]; }
    bool is_border(std::int32_t id) const { return level(id) >= bins_; }

    static constexpr int degree() { return 6; }

    /// One of the 6 Khalimsky neighbors of an interior derivate; the
    /// result may be a border sentinel but is always a valid id.
    std::int32_t neighbor(std::int32_t id, int edge) const;

    /// All 6 neighbors of an interior derivate. Throws on border ids.
    std::array<std::int32_t, 6> neighbors(std::int32_t id) const;

    /// Flat node_count() x 6 neighbor ids (entries of border sentinels
    /// are left as -1); the flooding engine walks this instead of paying
    /// a coordinate decode per edge.
    std::vector<std::int32_t> neighbor_table() const;

    /// The two 4-adjacent pixels an interior derivate separates, as
    /// row-major pixel indices. Throws on border ids.
    std::pair<std::int32_t, std::int32_t> pixel_pair(std::int32_t id) const;

    /// Lowest-index interior derivate, or -1 when none exists (1x1 image).
    std::int32_t first_floodable() const;

    DerivateRef ref(std::int32_t id) const;
    std::int32_t id(const DerivateRef& ref) const;

private:
    std::int32_t width_ = 0;
    std::int32_t height_ = 0;
    std::int32_t bins_ = 0;
    std::int32_t hcount_ = 0; // (width+1)*height
    std::int32_t interior_count_ = 0;
    std::vector<std::int32_t> levels_;
};

} // namespace mshr
