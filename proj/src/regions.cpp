#include "mshr/regions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "mshr/pixel_graph.hpp"

namespace mshr {

void ExtractParams::validate() const {
    require(delta >= 1, "delta must be >= 1");
    require(min_area >= 1, "min_area must be >= 1");
    require(max_area_fraction > 0.0 && max_area_fraction <= 1.0,
            "max_area_fraction must be in (0, 1]");
}

const char* polarity_name(RegionPolarity p) {
    switch (p) {
    case RegionPolarity::None: return "none";
    case RegionPolarity::Light: return "light";
    case RegionPolarity::Dark: return "dark";
    case RegionPolarity::Both: return "both";
    }
    return "?";
}

const char* stability_mode_name(StabilityMode m) {
    return m == StabilityMode::Difference ? "difference" : "ratio";
}

namespace {

std::int32_t chain_child(const ComponentTree& tree, std::int32_t node) {
    const auto& children = tree.nodes[static_cast<std::size_t>(node)].children;
    std::int32_t best = -1;
    for (std::int32_t c : children) {
        if (best < 0) {
            best = c;
            continue;
        }
        const auto& nc = tree.nodes[static_cast<std::size_t>(c)];
        const auto& nb = tree.nodes[static_cast<std::size_t>(best)];
        if (nc.area > nb.area || (nc.area == nb.area && nc.first_pixel < nb.first_pixel))
            best = c;
    }
    return best;
}

std::vector<RleRun> runs_from_sorted_pixels(const std::vector<std::int32_t>& pixels,
                                            std::int32_t width, BBox& bbox) {
    std::vector<RleRun> runs;
    bbox = BBox{};
    bool first = true;
    for (std::int32_t p : pixels) {
        const std::int32_t y = p / width;
        const std::int32_t x = p % width;
        if (!runs.empty() && runs.back().y == y &&
            runs.back().x_start + runs.back().length == x) {
            ++runs.back().length;
        } else {
            runs.push_back({y, x, 1});
        }
        if (first) {
            bbox = {x, y, x, y};
            first = false;
        } else {
            bbox.x_min = std::min(bbox.x_min, x);
            bbox.x_max = std::max(bbox.x_max, x);
            bbox.y_min = std::min(bbox.y_min, y);
            bbox.y_max = std::max(bbox.y_max, y);
        }
    }
    return runs;
}

} // namespace

double stability(const ComponentTree& tree, std::int32_t node, std::int32_t delta,
                 StabilityMode mode) {
    require(node >= 0 && node < tree.node_count(), "stability: invalid node id");
    require(delta >= 1, "stability: delta must be >= 1");
    const auto& nd = tree.nodes[static_cast<std::size_t>(node)];

    // Region at threshold level+delta: the last self-or-ancestor created
    // at or below that level. A node whose parent lies beyond the window
    // has not grown at all there.
    std::int32_t a = node;
    while (true) {
        const std::int32_t p = tree.nodes[static_cast<std::size_t>(a)].parent;
        if (p < 0 || tree.nodes[static_cast<std::size_t>(p)].level > nd.level + delta)
            break;
        a = p;
    }
    const std::int64_t upper = tree.nodes[static_cast<std::size_t>(a)].area;

    // Region at threshold level-delta along the maximum-area child path;
    // the deepest chain node caps the walk when no level is low enough.
    std::int32_t d = node;
    while (true) {
        const std::int32_t c = chain_child(tree, d);
        if (c < 0)
            break;
        d = c;
        if (tree.nodes[static_cast<std::size_t>(d)].level <= nd.level - delta)
            break;
    }
    const std::int64_t lower = tree.nodes[static_cast<std::size_t>(d)].area;

    const double s = static_cast<double>(upper - lower);
    return mode == StabilityMode::Difference ? s : s / static_cast<double>(nd.area);
}

RegionSet extract_stable(const ComponentTree& tree, const ExtractParams& params) {
    params.validate();
    const std::int32_t n = tree.node_count();
    require(n >= 1 && tree.root >= 0, "extract_stable: malformed tree");

    RegionSet set;
    set.width = tree.width;
    set.height = tree.height;
    set.params = params;

    std::vector<double> s(static_cast<std::size_t>(n));
    std::vector<std::int32_t> path_child(static_cast<std::size_t>(n));
    for (std::int32_t i = 0; i < n; ++i) {
        s[static_cast<std::size_t>(i)] = stability(tree, i, params.delta, params.stability_mode);
        path_child[static_cast<std::size_t>(i)] = chain_child(tree, i);
    }

    const double max_area = params.max_area_fraction * static_cast<double>(tree.pixel_count());
    std::vector<std::int32_t> selected;
    for (std::int32_t i = 0; i < n; ++i) {
        const auto& node = tree.nodes[static_cast<std::size_t>(i)];
        if (node.area < params.min_area || static_cast<double>(node.area) > max_area)
            continue;
        // Local minimum along the path: at most the parent, strictly
        // below the path child, so a plateau selects its deepest node.
        const std::int32_t p = node.parent;
        if (p >= 0 && !(s[static_cast<std::size_t>(i)] <= s[static_cast<std::size_t>(p)]))
            continue;
        const std::int32_t c = path_child[static_cast<std::size_t>(i)];
        if (c >= 0 && !(s[static_cast<std::size_t>(i)] < s[static_cast<std::size_t>(c)]))
            continue;
        selected.push_back(i);
    }
    if (selected.empty())
        return set;

    // Subtree pixel slices over a single post-order arrangement instead
    // of one full sweep per region.
    std::vector<std::int32_t> po;
    po.reserve(static_cast<std::size_t>(n));
    std::vector<std::int32_t> po_index(static_cast<std::size_t>(n), -1);
    {
        std::vector<std::pair<std::int32_t, std::size_t>> stack{{tree.root, 0}};
        while (!stack.empty()) {
            auto& [cur, next] = stack.back();
            const auto& children = tree.nodes[static_cast<std::size_t>(cur)].children;
            if (next < children.size()) {
                stack.emplace_back(children[next++], 0);
            } else {
                po_index[static_cast<std::size_t>(cur)] = static_cast<std::int32_t>(po.size());
                po.push_back(cur);
                stack.pop_back();
            }
        }
    }
    std::vector<std::int32_t> subtree_size(static_cast<std::size_t>(n), 1);
    for (std::int32_t id : po)
        for (std::int32_t c : tree.nodes[static_cast<std::size_t>(id)].children)
            subtree_size[static_cast<std::size_t>(id)] += subtree_size[static_cast<std::size_t>(c)];

    // Bucket pixels by the post-order position of their node.
    const std::size_t pixels = tree.pixel_to_node.size();
    std::vector<std::int32_t> counts(static_cast<std::size_t>(n) + 1, 0);
    for (std::int32_t node : tree.pixel_to_node)
        ++counts[static_cast<std::size_t>(po_index[static_cast<std::size_t>(node)]) + 1];
    for (std::size_t i = 1; i < counts.size(); ++i)
        counts[i] += counts[i - 1];
    std::vector<std::int32_t> arranged(pixels);
    {
        std::vector<std::int32_t> cursor(counts.begin(), counts.end() - 1);
        for (std::size_t p = 0; p < pixels; ++p) {
            const std::int32_t pi = po_index[static_cast<std::size_t>(tree.pixel_to_node[p])];
            arranged[static_cast<std::size_t>(cursor[static_cast<std::size_t>(pi)]++)] =
                static_cast<std::int32_t>(p);
        }
    }

    for (std::int32_t node : selected) {
        const std::int32_t last = po_index[static_cast<std::size_t>(node)];
        const std::int32_t first = last - subtree_size[static_cast<std::size_t>(node)] + 1;
        std::vector<std::int32_t> px(arranged.begin() + counts[static_cast<std::size_t>(first)],
                                     arranged.begin() + counts[static_cast<std::size_t>(last) + 1]);
        std::sort(px.begin(), px.end());

        StableRegion region;
        region.id = static_cast<std::int32_t>(set.regions.size());
        region.node = node;
        region.level = tree.nodes[static_cast<std::size_t>(node)].level;
        region.area = tree.nodes[static_cast<std::size_t>(node)].area;
        region.stability = s[static_cast<std::size_t>(node)];
        region.mask = runs_from_sorted_pixels(px, tree.width, region.bbox);
        require(static_cast<std::int32_t>(px.size()) == region.area,
                "extract_stable: region size mismatch");
        set.regions.push_back(std::move(region));
    }
    return set;
}

RegionSet extract_mser(const MultiChannelImage& image, std::int32_t bins,
                       const ExtractParams& params) {
    params.validate();
    require(image.channels == 1,
            "MSER extraction requires a 1-channel image (got " +
                std::to_string(image.channels) + " channels)");
    require(params.polarity != RegionPolarity::None,
            "MSER extraction needs polarity light, dark or both");

    TreeBuildParams build;
    build.bins = bins;
    build.min_area = params.min_area;

    auto run_one = [&](GrayPolarity polarity) {
        GrayPixelGraph graph(image, bins, polarity);
        ComponentTree tree = canonicalize(build_tree(graph, build));
        return extract_stable(tree, params);
    };

    RegionSet out;
    out.width = image.width;
    out.height = image.height;
    out.params = params;
    if (params.polarity == RegionPolarity::Dark || params.polarity == RegionPolarity::Both) {
        RegionSet dark = run_one(GrayPolarity::Dark);
        for (auto& region : dark.regions)
            out.regions.push_back(std::move(region));
    }
    if (params.polarity == RegionPolarity::Light || params.polarity == RegionPolarity::Both) {
        RegionSet light = run_one(GrayPolarity::Light);
        for (auto& region : light.regions)
            out.regions.push_back(std::move(region));
    }
    for (std::size_t i = 0; i < out.regions.size(); ++i)
        out.regions[i].id = static_cast<std::int32_t>(i);
    return out;
}

std::pair<BBox, std::vector<RleRun>> rasterize(const ComponentTree& tree, std::int32_t node) {
    const std::vector<std::int32_t> pixels = node_region(tree, node);
    BBox bbox;
    std::vector<RleRun> runs = runs_from_sorted_pixels(pixels, tree.width, bbox);
    return {bbox, std::move(runs)};
}

LabelImage label_map(const RegionSet& set, OverlapPolicy policy) {
    LabelImage out;
    out.width = set.width;
    out.height = set.height;
    out.labels.assign(static_cast<std::size_t>(set.width) * set.height, 0);

    std::vector<std::size_t> order(set.regions.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const std::int32_t aa = set.regions[a].area, ab = set.regions[b].area;
        return policy == OverlapPolicy::SmallestOnTop ? aa > ab : aa < ab;
    });
    for (std::size_t idx : order) {
        const StableRegion& region = set.regions[idx];
        for (const RleRun& run : region.mask) {
            require(run.y >= 0 && run.y < set.height && run.x_start >= 0 && run.length >= 1 &&
                        run.x_start + run.length <= set.width,
                    "label_map: region run outside the image");
            std::int32_t* row = out.labels.data() +
                                static_cast<std::int64_t>(run.y) * set.width + run.x_start;
            std::fill(row, row + run.length, region.id + 1);
        }
    }
    return out;
}

double pascal_overlap(const BBox& region, const GroundTruthBox& gt) {
    require(gt.bbox.valid(), "degenerate ground-truth box");
    require(region.valid(), "degenerate region box");
    const std::int64_t ix = std::min(region.x_max, gt.bbox.x_max) -
                            std::max(region.x_min, gt.bbox.x_min) + 1;
    const std::int64_t iy = std::min(region.y_max, gt.bbox.y_max) -
                            std::max(region.y_min, gt.bbox.y_min) + 1;
    if (ix <= 0 || iy <= 0)
        return 0.0;
    const std::int64_t inter = ix * iy;
    const std::int64_t uni = region.area() + gt.bbox.area() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double recall(const RegionSet& regions, const std::vector<GroundTruthBox>& gts,
              double threshold) {
    require(!gts.empty(), "recall is undefined for empty ground truth");
    std::int32_t matched = 0;
    for (const GroundTruthBox& gt : gts) {
        for (const StableRegion& region : regions.regions) {
            if (pascal_overlap(region.bbox, gt) > threshold) {
                ++matched;
                break;
            }
        }
    }
    return static_cast<double>(matched) / static_cast<double>(gts.size());
}

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::string serialize_regions(const RegionSet& set) {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "RGN1\n%d %d %d\n", set.width, set.height,
                  static_cast<std::int32_t>(set.regions.size()));
    out += buf;
    out += "params delta=" + std::to_string(set.params.delta) +
           " min_area=" + std::to_string(set.params.min_area) +
           " max_area_fraction=" + format_double(set.params.max_area_fraction) +
           " mode=" + stability_mode_name(set.params.stability_mode) +
           " polarity=" + polarity_name(set.params.polarity) + "\n";
    for (const StableRegion& region : set.regions) {
        std::snprintf(buf, sizeof buf,
                      "region %d level=%d area=%d stability=%s bbox=%d %d %d %d runs=%d\n",
                      region.id, region.level, region.area,
                      format_double(region.stability).c_str(), region.bbox.x_min,
                      region.bbox.y_min, region.bbox.x_max, region.bbox.y_max,
                      static_cast<std::int32_t>(region.mask.size()));
        out += buf;
        for (const RleRun& run : region.mask) {
            std::snprintf(buf, sizeof buf, "%d %d %d\n", run.y, run.x_start, run.length);
            out += buf;
        }
    }
    return out;
}

namespace {

std::int64_t parse_kv_int(const std::string& token, const char* key) {
    const std::string prefix = std::string(key) + "=";
    require(token.rfind(prefix, 0) == 0, std::string("region file: expected ") + key);
    return std::stoll(token.substr(prefix.size()));
}

double parse_kv_double(const std::string& token, const char* key) {
    const std::string prefix = std::string(key) + "=";
    require(token.rfind(prefix, 0) == 0, std::string("region file: expected ") + key);
    return std::stod(token.substr(prefix.size()));
}

std::string parse_kv_string(const std::string& token, const char* key) {
    const std::string prefix = std::string(key) + "=";
    require(token.rfind(prefix, 0) == 0, std::string("region file: expected ") + key);
    return token.substr(prefix.size());
}

} // namespace

RegionSet parse_regions(const std::string& text) {
    std::istringstream in(text);
    std::string magic;
    in >> magic;
    require(magic == "RGN1", "region file: bad magic");
    RegionSet set;
    std::int32_t count = 0;
    in >> set.width >> set.height >> count;
    require(!in.fail() && set.width >= 1 && set.height >= 1 && count >= 0,
            "region file: malformed header");

    std::string tok;
    in >> tok;
    require(tok == "params", "region file: missing params line");
    in >> tok;
    set.params.delta = static_cast<std::int32_t>(parse_kv_int(tok, "delta"));
    in >> tok;
    set.params.min_area = static_cast<std::int32_t>(parse_kv_int(tok, "min_area"));
    in >> tok;
    set.params.max_area_fraction = parse_kv_double(tok, "max_area_fraction");
    in >> tok;
    {
        const std::string mode = parse_kv_string(tok, "mode");
        require(mode == "difference" || mode == "ratio", "region file: bad mode");
        set.params.stability_mode =
            mode == "difference" ? StabilityMode::Difference : StabilityMode::Ratio;
    }
    in >> tok;
    {
        const std::string pol = parse_kv_string(tok, "polarity");
        if (pol == "none")
            set.params.polarity = RegionPolarity::None;
        else if (pol == "light")
            set.params.polarity = RegionPolarity::Light;
        else if (pol == "dark")
            set.params.polarity = RegionPolarity::Dark;
        else if (pol == "both")
            set.params.polarity = RegionPolarity::Both;
        else
            fail("region file: bad polarity");
    }

    for (std::int32_t i = 0; i < count; ++i) {
        in >> tok;
        require(tok == "region", "region file: missing region record");
        StableRegion region;
        in >> region.id;
        in >> tok;
        region.level = static_cast<std::int32_t>(parse_kv_int(tok, "level"));
        in >> tok;
        region.area = static_cast<std::int32_t>(parse_kv_int(tok, "area"));
        in >> tok;
        region.stability = parse_kv_double(tok, "stability");
        in >> tok;
        require(tok.rfind("bbox=", 0) == 0, "region file: expected bbox");
        region.bbox.x_min = static_cast<std::int32_t>(std::stol(tok.substr(5)));
        in >> region.bbox.y_min >> region.bbox.x_max >> region.bbox.y_max;
        in >> tok;
        const std::int64_t nruns = parse_kv_int(tok, "runs");
        require(!in.fail() && nruns >= 0, "region file: malformed region record");
        std::int64_t total = 0;
        BBox rb;
        bool first = true;
        for (std::int64_t r = 0; r < nruns; ++r) {
            RleRun run;
            in >> run.y >> run.x_start >> run.length;
            require(!in.fail() && run.length >= 1 && run.y >= 0 && run.y < set.height &&
                        run.x_start >= 0 && run.x_start + run.length <= set.width,
                    "region file: malformed run");
            region.mask.push_back(run);
            total += run.length;
            if (first) {
                rb = {run.x_start, run.y, run.x_start + run.length - 1, run.y};
                first = false;
            } else {
                rb.x_min = std::min(rb.x_min, run.x_start);
                rb.x_max = std::max(rb.x_max, run.x_start + run.length - 1);
                rb.y_min = std::min(rb.y_min, run.y);
                rb.y_max = std::max(rb.y_max, run.y);
            }
        }
        require(total == region.area, "region file: run lengths disagree with area");
        require(nruns == 0 || rb == region.bbox, "region file: bbox is not tight");
        set.regions.push_back(std::move(region));
    }
    return set;
}

std::vector<GroundTruthBox> parse_ground_truth(const std::string& text) {
    std::vector<GroundTruthBox> boxes;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ls(line);
        GroundTruthBox box;
        ls >> box.label >> box.bbox.x_min >> box.bbox.y_min >> box.bbox.x_max >> box.bbox.y_max;
        require(!ls.fail(), "ground truth: malformed line: " + line);
        require(box.bbox.valid(), "ground truth: degenerate box: " + line);
        boxes.push_back(std::move(box));
    }
    return boxes;
}

std::vector<GroundTruthBox> load_ground_truth(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), path + ": cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_ground_truth(ss.str());
}

} // namespace mshr
