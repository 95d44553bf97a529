#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mshr/error.hpp"
#include "mshr/union_find.hpp"

namespace mshr {

/// Parameters of the flooding immersion.
struct TreeBuildParams {
    std::int32_t bins = 256;
    std::int32_t min_area = 1;    // minimum component area to create a node
    std::int32_t start_node = -1; // -1: lowest-index floodable node
    // Test hook: nonzero seeds permute the per-node edge visit order; the
    // canonical result must not depend on it.
    std::uint64_t visit_shuffle_seed = 0;
};

struct ComponentNode {
    std::int32_t parent = -1; // -1 for the root
    std::int32_t level = 0;   // bin at which the component formed
    std::int32_t area = 0;    // distinct pixels in the component
    std::int32_t first_pixel = 0; // smallest contained pixel index
    std::vector<std::int32_t> children;

    bool operator==(const ComponentNode&) const = default;
};

/// Rooted component hierarchy. pixel_to_node maps every pixel to the
/// smallest emitted node containing it. Immutable once built.
struct ComponentTree {
    std::int32_t width = 0;
    std::int32_t height = 0;
    std::int32_t root = -1;
    std::vector<ComponentNode> nodes;
    std::vector<std::int32_t> pixel_to_node;

    std::int64_t pixel_count() const { return static_cast<std::int64_t>(width) * height; }
    std::int32_t node_count() const { return static_cast<std::int32_t>(nodes.size()); }

    bool operator==(const ComponentTree&) const = default;
};

struct BuildStats {
    std::int64_t saturations = 0; // graph nodes merged; one per interior node
};

/// Merges single-child chains with identical pixel sets (keeping the
/// minimum level), recomputes representative pixels, and reassigns node
/// ids in the deterministic order (level descending, then smallest
/// contained pixel). The root always receives id 0. Idempotent.
ComponentTree canonicalize(ComponentTree tree);

/// Deterministic text form. One node per line "id parent level area
/// first_pixel" with the root first, framed by a small header and the
/// pixel-to-node map (one image row per line).
std::string serialize_tree(const ComponentTree& tree);
ComponentTree parse_tree(const std::string& text);

/// The pixel set of a node, ascending pixel indices.
std::vector<std::int32_t> node_region(const ComponentTree& tree, std::int32_t node);

/// Throws unless every structural invariant holds (acyclic parents, strict
/// level increase, disjoint nested regions, root covering all pixels).
void validate_tree(const ComponentTree& tree);

namespace detail {

inline int shuffled_edge(std::uint64_t seed, std::int32_t node, int k, int degree) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(node + 1));
    int perm[8];
    for (int i = 0; i < degree; ++i)
        perm[i] = i;
    for (int i = degree - 1; i > 0; --i) {
        s ^= s >> 12;
        s ^= s << 25;
        s ^= s >> 27;
        const int j = static_cast<int>((s * 0x2545F4914F6CDD1DULL >> 33) %
                                       static_cast<std::uint64_t>(i + 1));
        std::swap(perm[i], perm[j]);
    }
    return perm[k];
}

inline void splice(std::vector<std::int32_t>& dst, std::vector<std::int32_t>& src) {
    if (dst.empty())
        dst = std::move(src);
    else
        dst.insert(dst.end(), src.begin(), src.end());
    src.clear();
}

} // namespace detail

/// Flooding immersion over any leveled node graph. The graph contract:
///   node_count(), pixel_count(), width(), height(), bins(), degree(),
///   level(id)            -- < bins() for floodable nodes, >= bins() for
///                           sentinels that are never flooded,
///   neighbor_table()     -- flat node_count() x degree() ids, -1 for none,
///   pixel_pair(id)       -- the one or two pixels a node merges,
///   first_floodable()    -- lowest floodable id, -1 when none exists.
/// Every floodable node is processed exactly once; components whose area
/// stays below min_area never emit a node (their pixels map to the first
/// emitted ancestor) but the root is always emitted.
template <class Graph>
ComponentTree build_tree(const Graph& graph, const TreeBuildParams& params,
                         BuildStats* stats = nullptr) {
    const std::int32_t bins = graph.bins();
    const std::int32_t pixels = graph.pixel_count();
    require(pixels >= 1, "cannot build a tree over zero pixels");
    require(params.min_area >= 1, "min_area must be >= 1");
    require(params.bins == bins, "TreeBuildParams.bins does not match the graph");

    ComponentTree tree;
    tree.width = graph.width();
    tree.height = graph.height();
    tree.pixel_to_node.assign(static_cast<std::size_t>(pixels), -1);

    std::int32_t start = params.start_node >= 0 ? params.start_node : graph.first_floodable();
    if (params.start_node >= 0) {
        require(start < graph.node_count(), "start_node out of range");
        require(graph.level(start) < bins, "start_node is a border sentinel");
    }
    if (start < 0) {
        // No floodable node (1x1 image): a single root holds the pixel.
        ComponentNode root;
        root.level = 0;
        root.area = pixels;
        root.first_pixel = 0;
        tree.nodes.push_back(std::move(root));
        tree.root = 0;
        std::fill(tree.pixel_to_node.begin(), tree.pixel_to_node.end(), 0);
        return tree;
    }

    struct Comp {
        explicit Comp(std::int32_t lvl) : level(lvl) {}
        std::int32_t level;
        std::int32_t root = -1; // union-find root, -1 while empty
        std::int32_t area = 0;
        // Level of the last change to the pixel set. Stays below `level`
        // when the component only inherited an unchanged set from below
        // (redundant high derivates add no pixels); nodes are emitted at
        // this level so suppressed sub-components cannot shift levels up.
        std::int32_t growth = -1;
        std::int32_t min_pixel = std::numeric_limits<std::int32_t>::max();
        std::vector<std::int32_t> pending;  // pixels not yet assigned to a node
        std::vector<std::int32_t> children; // emitted nodes awaiting a parent
    };

    UnionFind uf(pixels);
    std::vector<Comp> comp_stack;
    std::vector<char> visited(static_cast<std::size_t>(graph.node_count()), 0);
    // Boundary heap: one stack per level, entries pack (node, resume edge).
    std::vector<std::vector<std::uint64_t>> boundary(static_cast<std::size_t>(bins));
    std::int32_t priority = bins;
    const int degree = graph.degree();
    const std::vector<std::int32_t> neighbors = graph.neighbor_table();

    auto add_pixel = [&](Comp& c, std::int32_t px) {
        const std::int32_t r = uf.find(px);
        if (c.root < 0) {
            c.root = r;
            c.area += uf.size(r);
            if (uf.size(r) == 1)
                c.pending.push_back(px);
            c.min_pixel = std::min(c.min_pixel, px);
            c.growth = c.level;
            return;
        }
        const std::int32_t cr = uf.find(c.root);
        if (r == cr)
            return;
        c.area += uf.size(r);
        if (uf.size(r) == 1)
            c.pending.push_back(px);
        c.root = uf.unite(cr, r);
        c.min_pixel = std::min(c.min_pixel, px);
        c.growth = c.level;
    };

    // Finalizes c as a tree node if eligible, then folds it into d.
    auto finalize_into = [&](Comp&& c, Comp& d) {
        std::int32_t emitted = -1;
        if (c.area >= params.min_area) {
            if (c.children.size() == 1 && tree.nodes[c.children[0]].area == c.area) {
                emitted = c.children[0]; // identical pixel set: keep the lower node
            } else {
                emitted = static_cast<std::int32_t>(tree.nodes.size());
                ComponentNode node;
                node.level = c.growth;
                node.area = c.area;
                node.first_pixel = c.min_pixel;
                tree.nodes.push_back(std::move(node));
                for (std::int32_t ch : c.children)
                    tree.nodes[static_cast<std::size_t>(ch)].parent = emitted;
                for (std::int32_t px : c.pending)
                    tree.pixel_to_node[static_cast<std::size_t>(px)] = emitted;
                c.pending.clear();
                c.children.clear();
            }
        }
        if (c.root >= 0) {
            // Folding a nonempty set into an already nonempty component
            // changes the combined set right here, at d's level; an empty
            // d merely inherits c's set unchanged.
            d.growth = d.area > 0 ? d.level : std::max(d.growth, c.growth);
            d.root = d.root < 0 ? c.root : uf.unite(uf.find(d.root), uf.find(c.root));
            d.area += c.area;
            d.min_pixel = std::min(d.min_pixel, c.min_pixel);
        }
        detail::splice(d.pending, c.pending);
        if (emitted >= 0)
            d.children.push_back(emitted);
        else
            detail::splice(d.children, c.children);
    };

    auto process_stack = [&](std::int32_t new_level) {
        do {
            Comp top = std::move(comp_stack.back());
            comp_stack.pop_back();
            if (comp_stack.empty() || new_level < comp_stack.back().level)
                comp_stack.push_back(Comp{new_level});
            finalize_into(std::move(top), comp_stack.back());
        } while (new_level > comp_stack.back().level);
    };

    std::int32_t cur = start;
    int cur_edge = 0;
    std::int32_t cur_level = graph.level(cur);
    visited[static_cast<std::size_t>(cur)] = 1;
    comp_stack.push_back(Comp{cur_level});

    const std::uint64_t seed = params.visit_shuffle_seed;
    for (;;) {
        // Flood phase: explore remaining edges, descending on any
        // strictly lower unvisited neighbor.
        while (cur_edge < degree) {
            const int e = seed ? detail::shuffled_edge(seed, cur, cur_edge, degree) : cur_edge;
            ++cur_edge;
            const std::int32_t nb =
                neighbors[static_cast<std::size_t>(cur) * degree + e];
            if (nb < 0)
                continue;
            const std::int32_t nl = graph.level(nb);
            if (nl >= bins || visited[static_cast<std::size_t>(nb)])
                continue;
            visited[static_cast<std::size_t>(nb)] = 1;
            if (nl >= cur_level) {
                boundary[static_cast<std::size_t>(nl)].push_back(
                    (static_cast<std::uint64_t>(nb) << 3) | 0u);
                if (nl < priority)
                    priority = nl;
            } else {
                boundary[static_cast<std::size_t>(cur_level)].push_back(
                    (static_cast<std::uint64_t>(cur) << 3) |
                    static_cast<std::uint64_t>(cur_edge));
                if (cur_level < priority)
                    priority = cur_level;
                cur = nb;
                cur_edge = 0;
                cur_level = nl;
                comp_stack.push_back(Comp{cur_level});
            }
        }

        // Saturated: merge the node's pixel(s) into the current component.
        const auto [pa, pb] = graph.pixel_pair(cur);
        add_pixel(comp_stack.back(), pa);
        if (pb != pa)
            add_pixel(comp_stack.back(), pb);
        if (stats)
            ++stats->saturations;

        if (priority >= bins)
            break;
        const std::uint64_t entry = boundary[static_cast<std::size_t>(priority)].back();
        boundary[static_cast<std::size_t>(priority)].pop_back();
        cur = static_cast<std::int32_t>(entry >> 3);
        cur_edge = static_cast<int>(entry & 7u);
        const std::int32_t popped_level = priority;
        while (priority < bins && boundary[static_cast<std::size_t>(priority)].empty())
            ++priority;
        if (popped_level != cur_level) {
            process_stack(popped_level);
            cur_level = popped_level;
        }
    }

    // Drain the component stack; the last component becomes the root,
    // emitted regardless of min_area.
    while (comp_stack.size() > 1) {
        Comp top = std::move(comp_stack.back());
        comp_stack.pop_back();
        finalize_into(std::move(top), comp_stack.back());
    }
    Comp last = std::move(comp_stack.back());
    comp_stack.pop_back();
    if (last.children.size() == 1 && tree.nodes[last.children[0]].area == last.area) {
        tree.root = last.children[0];
    } else {
        tree.root = static_cast<std::int32_t>(tree.nodes.size());
        ComponentNode node;
        node.level = last.growth;
        node.area = last.area;
        node.first_pixel = last.min_pixel;
        tree.nodes.push_back(std::move(node));
        for (std::int32_t ch : last.children)
            tree.nodes[static_cast<std::size_t>(ch)].parent = tree.root;
        for (std::int32_t px : last.pending)
            tree.pixel_to_node[static_cast<std::size_t>(px)] = tree.root;
    }

    for (std::int32_t i = 0; i < tree.node_count(); ++i) {
        const std::int32_t p = tree.nodes[static_cast<std::size_t>(i)].parent;
        if (p >= 0)
            tree.nodes[static_cast<std::size_t>(p)].children.push_back(i);
    }
    return tree;
}

} // namespace mshr
