#include "mshr/oracle.hpp"

#include <algorithm>
#include <map>

#include "mshr/union_find.hpp"

namespace mshr {

namespace {

struct Edge {
    std::int32_t a, b, level;
};

std::vector<Edge> interior_edges(const QuantizedDerivates& q) {
    const std::int32_t w = q.width, h = q.height;
    std::vector<Edge> edges;
    edges.reserve(q.horiz.size() + q.vert.size());
    for (std::int32_t y = 0; y < h; ++y)
        for (std::int32_t x = 0; x + 1 < w; ++x)
            edges.push_back({y * w + x, y * w + x + 1,
                             q.horiz[static_cast<std::size_t>(y) * (w - 1) + x]});
    for (std::int32_t y = 0; y + 1 < h; ++y)
        for (std::int32_t x = 0; x < w; ++x)
            edges.push_back({y * w + x, (y + 1) * w + x,
                             q.vert[static_cast<std::size_t>(y) * w + x]});
    return edges;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Components of "edge level <= t" as sorted pixel lists ordered by first
// pixel, recomputed from scratch with a fresh union-find. A pixel belongs
// to a component only once one of its derivates is below the threshold;
// uncovered pixels are not singleton regions.
std::vector<std::vector<std::int32_t>> components_at(const std::vector<Edge>& edges,
                                                     std::int32_t pixels, std::int32_t t) {
    UnionFind uf(pixels);
    std::vector<char> covered(static_cast<std::size_t>(pixels), 0);
    for (const Edge& e : edges)
        if (e.level <= t) {
            uf.unite(uf.find(e.a), uf.find(e.b));
            covered[static_cast<std::size_t>(e.a)] = 1;
            covered[static_cast<std::size_t>(e.b)] = 1;
        }
    std::vector<std::int32_t> comp_of_root(static_cast<std::size_t>(pixels), -1);
    std::vector<std::vector<std::int32_t>> comps;
    for (std::int32_t p = 0; p < pixels; ++p) {
        if (!covered[static_cast<std::size_t>(p)])
            continue;
        const std::int32_t r = uf.find(p);
        if (comp_of_root[static_cast<std::size_t>(r)] < 0) {
            comp_of_root[static_cast<std::size_t>(r)] = static_cast<std::int32_t>(comps.size());
            comps.emplace_back();
        }
        comps[static_cast<std::size_t>(comp_of_root[static_cast<std::size_t>(r)])].push_back(p);
    }
    return comps;
}

} // namespace

ThresholdDecomposition threshold_decomposition(const QuantizedDerivates& q) {
    require(q.width >= 1 && q.height >= 1 && q.bins >= 2, "invalid quantized derivates");
    ThresholdDecomposition d;
    d.bins = q.bins;
    const std::vector<Edge> edges = interior_edges(q);
    const std::int32_t pixels = q.width * q.height;
    d.levels.reserve(static_cast<std::size_t>(q.bins));
    for (std::int32_t t = 0; t < q.bins; ++t)
        d.levels.push_back(components_at(edges, pixels, t));
    return d;
}

ComponentTree oracle_tree(const QuantizedDerivates& q, std::int32_t min_area,
                          std::uint64_t shuffle_seed) {
    require(q.width >= 1 && q.height >= 1, "oracle_tree needs a non-empty image");
    require(q.bins >= 2, "oracle_tree needs bins >= 2");
    require(min_area >= 1, "min_area must be >= 1");
    const std::int32_t pixels = q.width * q.height;

    ComponentTree tree;
    tree.width = q.width;
    tree.height = q.height;

    if (pixels == 1) {
        ComponentNode root;
        root.level = 0;
        root.area = 1;
        root.first_pixel = 0;
        tree.nodes.push_back(std::move(root));
        tree.root = 0;
        tree.pixel_to_node.assign(1, 0);
        return canonicalize(std::move(tree));
    }

    std::vector<Edge> edges = interior_edges(q);
    if (shuffle_seed) {
        std::uint64_t state = shuffle_seed;
        for (std::size_t i = edges.size() - 1; i > 0; --i)
            std::swap(edges[i], edges[splitmix64(state) % (i + 1)]);
    }

    struct RawNode {
        std::int32_t level;
        std::vector<std::int32_t> pixels; // sorted
    };
    std::vector<RawNode> raw;
    std::map<std::vector<std::int32_t>, std::int32_t> seen;
    std::int32_t first_single_level = -1;

    // A node is born at the smallest threshold where its pixel set
    // appears as a component (subject to min_area).
    for (std::int32_t t = 0; t < q.bins; ++t) {
        auto comps = components_at(edges, pixels, t);
        if (first_single_level < 0 && comps.size() == 1 &&
            static_cast<std::int32_t>(comps.front().size()) == pixels)
            first_single_level = t;
        for (auto& comp : comps) {
            if (static_cast<std::int32_t>(comp.size()) < min_area)
                continue;
            if (seen.find(comp) != seen.end())
                continue;
            seen.emplace(comp, static_cast<std::int32_t>(raw.size()));
            raw.push_back({t, std::move(comp)});
        }
    }
    // The root exists regardless of min_area.
    if (raw.empty() || static_cast<std::int32_t>(raw.back().pixels.size()) != pixels) {
        bool have_full = false;
        for (const auto& node : raw)
            have_full |= static_cast<std::int32_t>(node.pixels.size()) == pixels;
        if (!have_full) {
            std::vector<std::int32_t> all(static_cast<std::size_t>(pixels));
            std::iota(all.begin(), all.end(), 0);
            raw.push_back({first_single_level, std::move(all)});
        }
    }

    const std::int32_t n = static_cast<std::int32_t>(raw.size());
    std::vector<std::vector<char>> member(static_cast<std::size_t>(n));
    for (std::int32_t i = 0; i < n; ++i) {
        member[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(pixels), 0);
        for (std::int32_t p : raw[static_cast<std::size_t>(i)].pixels)
            member[static_cast<std::size_t>(i)][static_cast<std::size_t>(p)] = 1;
    }

    // Parent: the smallest strictly containing set. The family is laminar,
    // so containing the representative pixel with a larger area suffices.
    tree.nodes.resize(static_cast<std::size_t>(n));
    for (std::int32_t i = 0; i < n; ++i) {
        const auto& ri = raw[static_cast<std::size_t>(i)];
        ComponentNode node;
        node.level = ri.level;
        node.area = static_cast<std::int32_t>(ri.pixels.size());
        node.first_pixel = ri.pixels.front();
        std::int32_t parent = -1;
        for (std::int32_t j = 0; j < n; ++j) {
            const auto& rj = raw[static_cast<std::size_t>(j)];
            if (rj.pixels.size() <= ri.pixels.size())
                continue;
            if (!member[static_cast<std::size_t>(j)][static_cast<std::size_t>(node.first_pixel)])
                continue;
            if (parent < 0 ||
                rj.pixels.size() < raw[static_cast<std::size_t>(parent)].pixels.size())
                parent = j;
        }
        node.parent = parent;
        if (parent < 0)
            tree.root = i;
        tree.nodes[static_cast<std::size_t>(i)] = std::move(node);
    }
    for (std::int32_t i = 0; i < n; ++i) {
        const std::int32_t p = tree.nodes[static_cast<std::size_t>(i)].parent;
        if (p >= 0)
            tree.nodes[static_cast<std::size_t>(p)].children.push_back(i);
    }

    // Each pixel maps to the smallest node containing it.
    std::vector<std::int32_t> by_area(static_cast<std::size_t>(n));
    std::iota(by_area.begin(), by_area.end(), 0);
    std::sort(by_area.begin(), by_area.end(), [&](std::int32_t a, std::int32_t b) {
        return raw[static_cast<std::size_t>(a)].pixels.size() <
               raw[static_cast<std::size_t>(b)].pixels.size();
    });
    tree.pixel_to_node.assign(static_cast<std::size_t>(pixels), -1);
    for (std::int32_t id : by_area)
        for (std::int32_t p : raw[static_cast<std::size_t>(id)].pixels)
            if (tree.pixel_to_node[static_cast<std::size_t>(p)] < 0)
                tree.pixel_to_node[static_cast<std::size_t>(p)] = id;

    return canonicalize(std::move(tree));
}

} // namespace mshr
