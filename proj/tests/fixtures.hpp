#pragma once

// Shared synthetic inputs and independent reference computations used
// across the test suites. Everything here is deliberately naive; the
// brute-force paths must not share logic with the library internals they
// check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "mshr/component_tree.hpp"
#include "mshr/derivate_grid.hpp"
#include "mshr/image.hpp"
#include "mshr/preprocess.hpp"
#include "mshr/regions.hpp"

namespace fixtures {

using mshr::ComponentTree;
using mshr::MultiChannelImage;
using mshr::SampleDepth;

inline MultiChannelImage image_from(std::int32_t width, std::int32_t height,
                                    std::int32_t channels,
                                    const std::vector<float>& samples,
                                    SampleDepth depth = SampleDepth::U8) {
    MultiChannelImage img = MultiChannelImage::make(width, height, channels, depth);
    img.data = samples;
    img.validate();
    return img;
}

inline MultiChannelImage random_image(std::mt19937& rng, std::int32_t width,
                                      std::int32_t height, std::int32_t channels,
                                      std::int32_t max_value = 255) {
    MultiChannelImage img = MultiChannelImage::make(width, height, channels, SampleDepth::U8);
    std::uniform_int_distribution<std::int32_t> dist(0, std::min(max_value, 255));
    for (float& v : img.data)
        v = static_cast<float>(dist(rng));
    return img;
}

/// Fills a rectangle [x0,x1]x[y0,y1] (inclusive) with a channel vector.
inline void fill_rect(MultiChannelImage& img, std::int32_t x0, std::int32_t y0,
                      std::int32_t x1, std::int32_t y1, const std::vector<float>& color) {
    for (std::int32_t y = y0; y <= y1; ++y)
        for (std::int32_t x = x0; x <= x1; ++x)
            for (std::int32_t c = 0; c < img.channels; ++c)
                img.at(x, y, c) = color[static_cast<std::size_t>(c)];
}

/// The lighter-and-darker-background layout: a mid-gray square whose left
/// half sits on a black background and right half on a white background.
/// The square is no extremal region but is perfectly homogeneous.
struct SplitBackgroundFixture {
    MultiChannelImage image;
    std::int32_t x0, y0, x1, y1; // the center square, inclusive
};

inline SplitBackgroundFixture split_background_image() {
    SplitBackgroundFixture f;
    f.image = MultiChannelImage::make(64, 64, 1, SampleDepth::U8);
    fill_rect(f.image, 0, 0, 31, 63, {0.0f});
    fill_rect(f.image, 32, 0, 63, 63, {255.0f});
    f.x0 = 16;
    f.y0 = 16;
    f.x1 = 47;
    f.y1 = 47;
    fill_rect(f.image, f.x0, f.y0, f.x1, f.y1, {128.0f});
    return f;
}

/// Concentric squares; values.front() is the outermost (whole image).
inline MultiChannelImage nested_squares(const std::vector<float>& values,
                                        std::int32_t size = 48) {
    MultiChannelImage img = MultiChannelImage::make(size, size, 1, SampleDepth::U8);
    std::int32_t inset = 0;
    for (const float v : values) {
        fill_rect(img, inset, inset, size - 1 - inset, size - 1 - inset, {v});
        inset += size / (2 * static_cast<std::int32_t>(values.size()) + 1);
    }
    return img;
}

/// Five colored rectangles on a gray background with engineered color
/// distances: d(pink,red) < d(lightgreen,green) < d(orange,red) =
/// d(orange,green) < every distance to gray.
struct ToyMergeFixture {
    MultiChannelImage image;
    // representative pixels (row-major indices)
    std::int32_t red, pink, green, lightgreen, orange, gray;
};

inline ToyMergeFixture toy_merge_image() {
    ToyMergeFixture f;
    f.image = MultiChannelImage::make(6, 6, 3, SampleDepth::U8);
    fill_rect(f.image, 0, 0, 5, 5, {200, 200, 200});  // gray
    fill_rect(f.image, 1, 0, 2, 1, {100, 0, 0});      // red
    fill_rect(f.image, 1, 2, 2, 3, {110, 0, 0});      // pink
    fill_rect(f.image, 3, 0, 3, 1, {60, 60, 0});      // orange
    fill_rect(f.image, 4, 0, 4, 1, {0, 120, 0});      // lightgreen
    fill_rect(f.image, 3, 2, 4, 3, {0, 100, 0});      // green
    auto at = [&](std::int32_t x, std::int32_t y) { return y * 6 + x; };
    f.red = at(1, 0);
    f.pink = at(1, 2);
    f.orange = at(3, 0);
    f.lightgreen = at(4, 0);
    f.green = at(3, 2);
    f.gray = at(0, 0);
    return f;
}

inline mshr::QuantizedDerivates quantized(const MultiChannelImage& img, std::int32_t bins,
                                          mshr::Norm norm = mshr::Norm::L2) {
    return mshr::quantize(mshr::compute_derivates(img, norm), bins);
}

/// Full derivate pipeline (no smoothing) ending in a canonical tree.
inline ComponentTree derivate_tree(const MultiChannelImage& img, std::int32_t bins = 256,
                                   std::int32_t min_area = 1, std::int32_t start = -1,
                                   std::uint64_t shuffle = 0,
                                   mshr::BuildStats* stats = nullptr) {
    const mshr::DerivateGrid grid = mshr::DerivateGrid::build(quantized(img, bins));
    mshr::TreeBuildParams params;
    params.bins = bins;
    params.min_area = min_area;
    params.start_node = start;
    params.visit_shuffle_seed = shuffle;
    return mshr::canonicalize(mshr::build_tree(grid, params, stats));
}

/// Pixel set of a node from first principles: every pixel whose
/// pixel_to_node entry lies in the node's subtree.
inline std::set<std::int32_t> region_pixels(const ComponentTree& tree, std::int32_t node) {
    std::vector<char> mark(static_cast<std::size_t>(tree.node_count()), 0);
    std::vector<std::int32_t> stack{node};
    while (!stack.empty()) {
        const std::int32_t cur = stack.back();
        stack.pop_back();
        mark[static_cast<std::size_t>(cur)] = 1;
        for (std::int32_t c : tree.nodes[static_cast<std::size_t>(cur)].children)
            stack.push_back(c);
    }
    std::set<std::int32_t> out;
    for (std::size_t p = 0; p < tree.pixel_to_node.size(); ++p)
        if (mark[static_cast<std::size_t>(tree.pixel_to_node[p])])
            out.insert(static_cast<std::int32_t>(p));
    return out;
}

inline std::int32_t lowest_common_ancestor(const ComponentTree& tree, std::int32_t a,
                                           std::int32_t b) {
    std::set<std::int32_t> ancestors;
    for (std::int32_t n = a; n >= 0; n = tree.nodes[static_cast<std::size_t>(n)].parent)
        ancestors.insert(n);
    for (std::int32_t n = b; n >= 0; n = tree.nodes[static_cast<std::size_t>(n)].parent)
        if (ancestors.count(n))
            return n;
    return -1;
}

/// Independent stability recomputation that materializes the nested
/// region chain through a node instead of walking areas.
inline double stability_by_paths(const ComponentTree& tree, std::int32_t node,
                                 std::int32_t delta, mshr::StabilityMode mode) {
    const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
    // Upward: the region at threshold level+delta is the outermost
    // materialized ancestor set whose creation level fits the window.
    std::size_t upper = region_pixels(tree, node).size();
    for (std::int32_t a = nd.parent; a >= 0;
         a = tree.nodes[static_cast<std::size_t>(a)].parent) {
        if (tree.nodes[static_cast<std::size_t>(a)].level > nd.level + delta)
            break;
        upper = region_pixels(tree, a).size();
    }
    // Downward: follow the largest-region child path (ties: smallest
    // representative), materializing each pixel set.
    std::int32_t cur = node;
    std::size_t lower = region_pixels(tree, node).size();
    while (true) {
        const auto& children = tree.nodes[static_cast<std::size_t>(cur)].children;
        if (children.empty()) {
            lower = region_pixels(tree, cur).size();
            break;
        }
        std::int32_t best = -1;
        std::size_t best_size = 0;
        std::int32_t best_first = 0;
        for (std::int32_t c : children) {
            const auto pix = region_pixels(tree, c);
            const std::int32_t first = *pix.begin();
            if (best < 0 || pix.size() > best_size ||
                (pix.size() == best_size && first < best_first)) {
                best = c;
                best_size = pix.size();
                best_first = first;
            }
        }
        cur = best;
        if (tree.nodes[static_cast<std::size_t>(cur)].level <= nd.level - delta) {
            lower = best_size;
            break;
        }
        lower = best_size;
    }
    const double s = static_cast<double>(upper) - static_cast<double>(lower);
    return mode == mshr::StabilityMode::Difference ? s : s / nd.area;
}

inline std::set<std::int32_t> mask_pixels(const mshr::StableRegion& region,
                                          std::int32_t width) {
    std::set<std::int32_t> out;
    for (const auto& run : region.mask)
        for (std::int32_t x = run.x_start; x < run.x_start + run.length; ++x)
            out.insert(run.y * width + x);
    return out;
}

inline double mask_iou(const std::set<std::int32_t>& a, const std::set<std::int32_t>& b) {
    std::size_t inter = 0;
    for (std::int32_t p : a)
        inter += b.count(p);
    const std::size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

} // namespace fixtures
