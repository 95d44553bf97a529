#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mshr/component_tree.hpp"
#include "mshr/image.hpp"

namespace mshr {

enum class StabilityMode : std::uint8_t { Difference, Ratio };
enum class RegionPolarity : std::uint8_t { None, Light, Dark, Both };
enum class OverlapPolicy : std::uint8_t { SmallestOnTop, LargestOnTop };

/// Shared parameters of MSHR and MSER extraction.
struct ExtractParams {
    std::int32_t delta = 5;
    std::int32_t min_area = 30;
    double max_area_fraction = 0.75;
    StabilityMode stability_mode = StabilityMode::Difference;
    RegionPolarity polarity = RegionPolarity::None; // gray extraction only

    void validate() const;
};

/// Inclusive pixel bounding box.
struct BBox {
    std::int32_t x_min = 0, y_min = 0, x_max = -1, y_max = -1;

    bool valid() const { return x_max >= x_min && y_max >= y_min; }
    std::int64_t area() const {
        return valid() ? static_cast<std::int64_t>(x_max - x_min + 1) * (y_max - y_min + 1) : 0;
    }
    bool operator==(const BBox&) const = default;
};

struct RleRun {
    std::int32_t y = 0, x_start = 0, length = 0;

    bool operator==(const RleRun&) const = default;
};

struct StableRegion {
    std::int32_t id = 0;
    std::int32_t node = -1; // source tree node (not serialized)
    std::int32_t level = 0;
    std::int32_t area = 0;
    double stability = 0.0;
    BBox bbox;
    std::vector<RleRun> mask;

    bool operator==(const StableRegion&) const = default;
};

struct RegionSet {
    std::int32_t width = 0;
    std::int32_t height = 0;
    ExtractParams params;
    std::vector<StableRegion> regions;
};

struct GroundTruthBox {
    std::string label;
    BBox bbox;
};

/// Stability of a node: the area of its region at threshold
/// level + delta (the last self-or-ancestor created at or below that
/// level) minus the area at threshold level - delta along the
/// maximum-area child path (bottoming out at the path's deepest node).
/// Ratio mode divides by the node's own area.
double stability(const ComponentTree& tree, std::int32_t node, std::int32_t delta,
                 StabilityMode mode);

/// Nodes whose stability is a local minimum along their path (at most
/// the parent, strictly below the path child; a plateau selects its
/// deepest node) within the area bounds, rasterized to runs. Region ids
/// follow canonical node order.
RegionSet extract_stable(const ComponentTree& tree, const ExtractParams& params);

/// Gray-value MSER over a 1-channel image via the pixel-grid tree; for
/// Both, the dark and light passes are concatenated.
RegionSet extract_mser(const MultiChannelImage& image, std::int32_t bins,
                       const ExtractParams& params);

std::pair<BBox, std::vector<RleRun>> rasterize(const ComponentTree& tree, std::int32_t node);

/// Deterministic rasterization of a region set; overlaps resolve by
/// policy, unlabeled pixels are 0, region id r paints label r+1.
LabelImage label_map(const RegionSet& regions, OverlapPolicy policy);

/// Intersection over union of two boxes (the PASCAL criterion).
double pascal_overlap(const BBox& region, const GroundTruthBox& gt);

/// Fraction of ground-truth boxes matched by some region bbox with
/// overlap strictly above the threshold. Empty ground truth is an error.
double recall(const RegionSet& regions, const std::vector<GroundTruthBox>& gts,
              double threshold = 0.5);

std::string serialize_regions(const RegionSet& set);
RegionSet parse_regions(const std::string& text);

std::vector<GroundTruthBox> parse_ground_truth(const std::string& text);
std::vector<GroundTruthBox> load_ground_truth(const std::string& path);

const char* polarity_name(RegionPolarity p);
const char* stability_mode_name(StabilityMode m);

} // namespace mshr
