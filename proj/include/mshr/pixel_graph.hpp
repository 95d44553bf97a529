#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mshr/image.hpp"

namespace mshr {

enum class GrayPolarity : std::uint8_t { Dark, Light };

/// Classical 4-connected pixel grid with quantized gray levels, the graph
/// the gray-value component-tree (and the MSER baseline) floods over.
/// Dark polarity floods toward gray minima; Light floods the inverted
/// levels. One polarity per build.
class GrayPixelGraph {
public:
    GrayPixelGraph(const MultiChannelImage& image, std::int32_t bins, GrayPolarity polarity);

    std::int32_t width() const { return width_; }
    std::int32_t height() const { return height_; }
    std::int32_t bins() const { return bins_; }
    std::int32_t node_count() const { return width_ * height_; }
    std::int32_t pixel_count() const { return width_ * height_; }
    static constexpr int degree() { return 4; }

    std::int32_t level(std::int32_t id) const { return levels_[static_cast<std::size_t>(id)]; }

    std::pair<std::int32_t, std::int32_t> pixel_pair(std::int32_t id) const {
        return {id, id};
    }

    std::int32_t first_floodable() const { return 0; }

    std::vector<std::int32_t> neighbor_table() const {
        std::vector<std::int32_t> table(static_cast<std::size_t>(node_count()) * 4, -1);
        for (std::int32_t y = 0; y < height_; ++y)
            for (std::int32_t x = 0; x < width_; ++x) {
                std::int32_t* out =
                    table.data() + (static_cast<std::size_t>(y) * width_ + x) * 4;
                const std::int32_t id = y * width_ + x;
                if (x + 1 < width_)
                    out[0] = id + 1;
                if (y + 1 < height_)
                    out[1] = id + width_;
                if (x > 0)
                    out[2] = id - 1;
                if (y > 0)
                    out[3] = id - width_;
            }
        return table;
    }

private:
    std::int32_t width_ = 0;
    std::int32_t height_ = 0;
    std::int32_t bins_ = 0;
    std::vector<std::int32_t> levels_;
};

} // namespace mshr
