#include "mshr/derivate_grid.hpp"

#include "mshr/error.hpp"

namespace mshr {

DerivateGrid DerivateGrid::build(const QuantizedDerivates& q) {
    require(q.width >= 1 && q.height >= 1, "derivate grid needs a non-empty image");
    require(q.bins >= 2, "derivate grid needs bins >= 2");
    const std::int32_t w = q.width, h = q.height;
    require(static_cast<std::int64_t>(q.horiz.size()) ==
                static_cast<std::int64_t>(w - 1) * h &&
            static_cast<std::int64_t>(q.vert.size()) ==
                static_cast<std::int64_t>(w) * (h - 1),
            "quantized derivate geometry mismatch");

    for (std::int32_t lvl : q.horiz)
        require(lvl >= 0 && lvl < q.bins, "interior derivate level out of range");
    for (std::int32_t lvl : q.vert)
        require(lvl >= 0 && lvl < q.bins, "interior derivate level out of range");

    DerivateGrid g;
    g.width_ = w;
    g.height_ = h;
    g.bins_ = q.bins;
    g.hcount_ = (w + 1) * h;
    const std::int32_t vcount = w * (h + 1);
    g.levels_.assign(static_cast<std::size_t>(g.hcount_) + vcount, q.bins);

    for (std::int32_t y = 0; y < h; ++y) {
        const std::int32_t* src = q.horiz.data() + static_cast<std::size_t>(y) * (w - 1);
        std::int32_t* dst = g.levels_.data() + static_cast<std::size_t>(y) * (w + 1) + 1;
        std::copy(src, src + (w - 1), dst);
    }
    if (h > 1)
        std::copy(q.vert.begin(), q.vert.end(),
                  g.levels_.begin() + g.hcount_ + w);
    g.interior_count_ = (w - 1) * h + w * (h - 1);
    return g;
}

std::vector<std::int32_t> DerivateGrid::neighbor_table() const {
    const std::int32_t w = width_, h = height_;
    std::vector<std::int32_t> table(static_cast<std::size_t>(node_count()) * 6, -1);
    // Horizontal derivates, interior columns only (row r, cols 1..w-1).
    for (std::int32_t r = 0; r < h; ++r) {
        const std::int32_t row_id = r * (w + 1);
        const std::int32_t v_up = hcount_ + r * w;   // V(*, r)
        const std::int32_t v_dn = v_up + w;          // V(*, r+1)
        for (std::int32_t c = 1; c < w; ++c) {
            std::int32_t* out = table.data() + static_cast<std::size_t>(row_id + c) * 6;
            out[0] = v_up + c - 1;
            out[1] = v_up + c;
            out[2] = v_dn + c - 1;
            out[3] = v_dn + c;
            out[4] = row_id + c - 1;
            out[5] = row_id + c + 1;
        }
    }
    // Vertical derivates, interior gap rows only (rows 1..h-1).
    for (std::int32_t r = 1; r < h; ++r) {
        const std::int32_t row_id = hcount_ + r * w;
        const std::int32_t h_up = (r - 1) * (w + 1); // H(*, r-1)
        const std::int32_t h_dn = r * (w + 1);       // H(*, r)
        for (std::int32_t c = 0; c < w; ++c) {
            std::int32_t* out = table.data() + static_cast<std::size_t>(row_id + c) * 6;
            out[0] = h_up + c;
            out[1] = h_up + c + 1;
            out[2] = h_dn + c;
            out[3] = h_dn + c + 1;
            out[4] = row_id + c - w;
            out[5] = row_id + c + w;
        }
    }
    return table;
}

std::int32_t DerivateGrid::neighbor(std::int32_t id, int edge) const {
    const std::int32_t w = width_;
    if (id < hcount_) {
        // horizontal at (row r, col c): 4 vertical derivates around the
        // two pixels it separates, plus the horizontal left and right.
        const std::int32_t r = id / (w + 1);
        const std::int32_t c = id % (w + 1);
        switch (edge) {
        case 0: return hcount_ + r * w + (c - 1);       // V(c-1, r)
        case 1: return hcount_ + r * w + c;             // V(c,   r)
        case 2: return hcount_ + (r + 1) * w + (c - 1); // V(c-1, r+1)
        case 3: return hcount_ + (r + 1) * w + c;       // V(c,   r+1)
        case 4: return id - 1;                          // H(c-1, r)
        default: return id + 1;                         // H(c+1, r)
        }
    }
    // vertical at (gap row r, col c): 4 horizontal derivates around the
    // two pixels it separates, plus the vertical above and below.
    const std::int32_t v = id - hcount_;
    const std::int32_t r = v / w;
    const std::int32_t c = v % w;
    switch (edge) {
    case 0: return (r - 1) * (w + 1) + c;     // H(c,   r-1)
    case 1: return (r - 1) * (w + 1) + c + 1; // H(c+1, r-1)
    case 2: return r * (w + 1) + c;           // H(c,   r)
    case 3: return r * (w + 1) + c + 1;       // H(c+1, r)
    case 4: return id - w;                    // V(c, r-1)
    default: return id + w;                   // V(c, r+1)
    }
}

std::array<std::int32_t, 6> DerivateGrid::neighbors(std::int32_t id) const {
    require(id >= 0 && id < node_count(), "derivate id out of range");
    require(!is_border(id), "neighbors() called on a border sentinel");
    std::array<std::int32_t, 6> out;
    for (int e = 0; e < 6; ++e)
        out[static_cast<std::size_t>(e)] = neighbor(id, e);
    return out;
}

std::pair<std::int32_t, std::int32_t> DerivateGrid::pixel_pair(std::int32_t id) const {
    require(id >= 0 && id < node_count(), "derivate id out of range");
    require(!is_border(id), "pixel_pair() called on a border sentinel");
    const std::int32_t w = width_;
    if (id < hcount_) {
        const std::int32_t r = id / (w + 1);
        const std::int32_t c = id % (w + 1);
        return {r * w + (c - 1), r * w + c};
    }
    const std::int32_t v = id - hcount_;
    const std::int32_t r = v / w;
    const std::int32_t c = v % w;
    return {(r - 1) * w + c, r * w + c};
}

std::int32_t DerivateGrid::first_floodable() const {
    if (width_ >= 2)
        return 1; // H(1, 0)
    if (height_ >= 2)
        return hcount_ + width_; // V(0, 1)
    return -1;
}

DerivateRef DerivateGrid::ref(std::int32_t id) const {
    require(id >= 0 && id < node_count(), "derivate id out of range");
    if (id < hcount_)
        return {Orientation::Horizontal, id / (width_ + 1), id % (width_ + 1)};
    const std::int32_t v = id - hcount_;
    return {Orientation::Vertical, v / width_, v % width_};
}

std::int32_t DerivateGrid::id(const DerivateRef& ref) const {
    if (ref.orientation == Orientation::Horizontal) {
        require(ref.row >= 0 && ref.row < height_ && ref.col >= 0 && ref.col <= width_,
                "horizontal derivate coordinates out of range");
        return ref.row * (width_ + 1) + ref.col;
    }
    require(ref.row >= 0 && ref.row <= height_ && ref.col >= 0 && ref.col < width_,
            "vertical derivate coordinates out of range");
    return hcount_ + ref.row * width_ + ref.col;
}

} // namespace mshr
