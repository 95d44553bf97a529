#include "mshr/component_tree.hpp"

#include <cstdio>
#include <cstring>
#include <numeric>
#include <sstream>

namespace mshr {

namespace {

// Children-before-parents order without relying on level monotonicity.
std::vector<std::int32_t> postorder(const ComponentTree& tree) {
    std::vector<std::int32_t> order;
    order.reserve(tree.nodes.size());
    std::vector<std::pair<std::int32_t, std::size_t>> stack;
    stack.emplace_back(tree.root, 0);
    while (!stack.empty()) {
        auto& [node, next_child] = stack.back();
        const auto& children = tree.nodes[static_cast<std::size_t>(node)].children;
        if (next_child < children.size()) {
            const std::int32_t child = children[next_child++];
            stack.emplace_back(child, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    return order;
}

} // namespace

ComponentTree canonicalize(ComponentTree tree) {
    const std::int32_t n = tree.node_count();
    require(n > 0 && tree.root >= 0 && tree.root < n, "canonicalize: malformed tree");

    // Recompute the smallest contained pixel per node bottom-up.
    std::vector<std::int32_t> min_pixel(static_cast<std::size_t>(n),
                                        std::numeric_limits<std::int32_t>::max());
    for (std::size_t px = 0; px < tree.pixel_to_node.size(); ++px) {
        const std::int32_t node = tree.pixel_to_node[px];
        require(node >= 0 && node < n, "canonicalize: pixel mapped to invalid node");
        min_pixel[static_cast<std::size_t>(node)] =
            std::min(min_pixel[static_cast<std::size_t>(node)], static_cast<std::int32_t>(px));
    }
    const std::vector<std::int32_t> order = postorder(tree);
    require(static_cast<std::int32_t>(order.size()) == n,
            "canonicalize: tree has unreachable nodes");
    for (std::int32_t node : order) {
        const std::int32_t parent = tree.nodes[static_cast<std::size_t>(node)].parent;
        if (parent >= 0)
            min_pixel[static_cast<std::size_t>(parent)] =
                std::min(min_pixel[static_cast<std::size_t>(parent)],
                         min_pixel[static_cast<std::size_t>(node)]);
    }

    // A node with a single child of equal area has the same pixel set as
    // that child; the child survives with its lower level.
    std::vector<char> dead(static_cast<std::size_t>(n), 0);
    for (std::int32_t i = 0; i < n; ++i) {
        const auto& node = tree.nodes[static_cast<std::size_t>(i)];
        if (node.children.size() == 1 &&
            tree.nodes[static_cast<std::size_t>(node.children[0])].area == node.area)
            dead[static_cast<std::size_t>(i)] = 1;
    }
    auto skip_dead_down = [&](std::int32_t node) {
        while (dead[static_cast<std::size_t>(node)])
            node = tree.nodes[static_cast<std::size_t>(node)].children[0];
        return node;
    };
    auto skip_dead_up = [&](std::int32_t node) {
        while (node >= 0 && dead[static_cast<std::size_t>(node)])
            node = tree.nodes[static_cast<std::size_t>(node)].parent;
        return node;
    };

    // Deterministic ids: level descending, then smallest contained pixel.
    std::vector<std::int32_t> alive;
    alive.reserve(static_cast<std::size_t>(n));
    for (std::int32_t i = 0; i < n; ++i)
        if (!dead[static_cast<std::size_t>(i)])
            alive.push_back(i);
    std::sort(alive.begin(), alive.end(), [&](std::int32_t a, std::int32_t b) {
        const auto& na = tree.nodes[static_cast<std::size_t>(a)];
        const auto& nb = tree.nodes[static_cast<std::size_t>(b)];
        if (na.level != nb.level)
            return na.level > nb.level;
        return min_pixel[static_cast<std::size_t>(a)] < min_pixel[static_cast<std::size_t>(b)];
    });

    std::vector<std::int32_t> new_id(static_cast<std::size_t>(n), -1);
    for (std::size_t i = 0; i < alive.size(); ++i)
        new_id[static_cast<std::size_t>(alive[i])] = static_cast<std::int32_t>(i);

    ComponentTree out;
    out.width = tree.width;
    out.height = tree.height;
    out.nodes.resize(alive.size());
    for (std::size_t i = 0; i < alive.size(); ++i) {
        const auto& src = tree.nodes[static_cast<std::size_t>(alive[i])];
        ComponentNode dst;
        const std::int32_t parent = skip_dead_up(src.parent);
        dst.parent = parent < 0 ? -1 : new_id[static_cast<std::size_t>(parent)];
        dst.level = src.level;
        dst.area = src.area;
        dst.first_pixel = min_pixel[static_cast<std::size_t>(alive[i])];
        out.nodes[i] = std::move(dst);
        if (out.nodes[i].parent < 0)
            out.root = static_cast<std::int32_t>(i);
    }
    for (std::int32_t i = 0; i < static_cast<std::int32_t>(out.nodes.size()); ++i) {
        const std::int32_t p = out.nodes[static_cast<std::size_t>(i)].parent;
        if (p >= 0)
            out.nodes[static_cast<std::size_t>(p)].children.push_back(i);
    }
    // Children of the same parent have distinct ids in ascending order
    // already (ids were assigned in sorted order), but keep it explicit.
    for (auto& node : out.nodes)
        std::sort(node.children.begin(), node.children.end());

    out.pixel_to_node.resize(tree.pixel_to_node.size());
    for (std::size_t px = 0; px < tree.pixel_to_node.size(); ++px)
        out.pixel_to_node[px] =
            new_id[static_cast<std::size_t>(skip_dead_down(tree.pixel_to_node[px]))];
    return out;
}

std::string serialize_tree(const ComponentTree& tree) {
    std::string out;
    out.reserve(32 * tree.nodes.size() + 8 * tree.pixel_to_node.size());
    char buf[96];
    std::snprintf(buf, sizeof buf, "CTT1\n%d %d %d\n", tree.width, tree.height,
                  tree.node_count());
    out += buf;
    // Root first; canonical ids give the root id 0 and make this the
    // natural order.
    std::vector<std::int32_t> order(static_cast<std::size_t>(tree.node_count()));
    std::iota(order.begin(), order.end(), 0);
    if (tree.root != 0)
        std::swap(order[0], order[static_cast<std::size_t>(tree.root)]);
    for (std::int32_t id : order) {
        const auto& node = tree.nodes[static_cast<std::size_t>(id)];
        std::snprintf(buf, sizeof buf, "%d %d %d %d %d\n", id, node.parent, node.level,
                      node.area, node.first_pixel);
        out += buf;
    }
    for (std::int32_t y = 0; y < tree.height; ++y) {
        for (std::int32_t x = 0; x < tree.width; ++x) {
            if (x)
                out += ' ';
            std::snprintf(buf, sizeof buf, "%d",
                          tree.pixel_to_node[static_cast<std::size_t>(y) * tree.width + x]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

ComponentTree parse_tree(const std::string& text) {
    std::istringstream in(text);
    std::string magic;
    in >> magic;
    require(magic == "CTT1", "tree file: bad magic");
    ComponentTree tree;
    std::int32_t count = 0;
    in >> tree.width >> tree.height >> count;
    require(in.good() && tree.width >= 1 && tree.height >= 1 && count >= 1,
            "tree file: malformed header");
    tree.nodes.resize(static_cast<std::size_t>(count));
    std::vector<char> seen(static_cast<std::size_t>(count), 0);
    for (std::int32_t i = 0; i < count; ++i) {
        std::int32_t id;
        ComponentNode node;
        in >> id >> node.parent >> node.level >> node.area >> node.first_pixel;
        require(!in.fail(), "tree file: malformed node line");
        require(id >= 0 && id < count && !seen[static_cast<std::size_t>(id)],
                "tree file: bad node id");
        seen[static_cast<std::size_t>(id)] = 1;
        if (node.parent < 0) {
            require(tree.root < 0, "tree file: multiple roots");
            tree.root = id;
        } else {
            require(node.parent < count, "tree file: parent out of range");
        }
        tree.nodes[static_cast<std::size_t>(id)] = std::move(node);
    }
    require(tree.root >= 0, "tree file: missing root");
    tree.pixel_to_node.resize(static_cast<std::size_t>(tree.pixel_count()));
    for (std::int64_t i = 0; i < tree.pixel_count(); ++i) {
        std::int32_t v;
        in >> v;
        require(!in.fail() && v >= 0 && v < count, "tree file: malformed pixel map");
        tree.pixel_to_node[static_cast<std::size_t>(i)] = v;
    }
    for (std::int32_t i = 0; i < count; ++i) {
        const std::int32_t p = tree.nodes[static_cast<std::size_t>(i)].parent;
        if (p >= 0)
            tree.nodes[static_cast<std::size_t>(p)].children.push_back(i);
    }
    for (auto& node : tree.nodes)
        std::sort(node.children.begin(), node.children.end());
    validate_tree(tree);
    return tree;
}

std::vector<std::int32_t> node_region(const ComponentTree& tree, std::int32_t node) {
    require(node >= 0 && node < tree.node_count(), "node_region: invalid node id");
    std::vector<char> in_subtree(static_cast<std::size_t>(tree.node_count()), 0);
    std::vector<std::int32_t> stack{node};
    while (!stack.empty()) {
        const std::int32_t cur = stack.back();
        stack.pop_back();
        in_subtree[static_cast<std::size_t>(cur)] = 1;
        for (std::int32_t child : tree.nodes[static_cast<std::size_t>(cur)].children)
            stack.push_back(child);
    }
    std::vector<std::int32_t> pixels;
    pixels.reserve(static_cast<std::size_t>(tree.nodes[static_cast<std::size_t>(node)].area));
    for (std::size_t px = 0; px < tree.pixel_to_node.size(); ++px)
        if (in_subtree[static_cast<std::size_t>(tree.pixel_to_node[px])])
            pixels.push_back(static_cast<std::int32_t>(px));
    require(static_cast<std::int32_t>(pixels.size()) ==
                tree.nodes[static_cast<std::size_t>(node)].area,
            "node_region: area does not match collected pixels");
    return pixels;
}

void validate_tree(const ComponentTree& tree) {
    const std::int32_t n = tree.node_count();
    require(n >= 1, "tree has no nodes");
    require(tree.root >= 0 && tree.root < n, "tree root out of range");
    require(tree.nodes[static_cast<std::size_t>(tree.root)].parent == -1,
            "root must not have a parent");
    require(static_cast<std::int64_t>(tree.pixel_to_node.size()) == tree.pixel_count(),
            "pixel map size mismatch");

    std::vector<std::int32_t> depth(static_cast<std::size_t>(n), -1);
    for (std::int32_t i = 0; i < n; ++i) {
        // Walk to a node of known depth; bounded by n steps (acyclic check).
        std::int32_t cur = i;
        std::int32_t steps = 0;
        std::vector<std::int32_t> path;
        while (cur >= 0 && depth[static_cast<std::size_t>(cur)] < 0) {
            path.push_back(cur);
            const auto& node = tree.nodes[static_cast<std::size_t>(cur)];
            if (node.parent >= 0) {
                require(node.parent < n, "parent id out of range");
                require(node.level < tree.nodes[static_cast<std::size_t>(node.parent)].level,
                        "child level must be strictly below parent level");
                require(node.area <= tree.nodes[static_cast<std::size_t>(node.parent)].area,
                        "child area exceeds parent area");
            } else {
                require(cur == tree.root, "multiple roots");
            }
            cur = node.parent;
            require(++steps <= n, "parent links contain a cycle");
        }
        std::int32_t d = cur < 0 ? 0 : depth[static_cast<std::size_t>(cur)] + 1;
        for (auto it = path.rbegin(); it != path.rend(); ++it)
            depth[static_cast<std::size_t>(*it)] = d++;
    }

    // Areas from the pixel map must agree with the stored areas, which
    // also forces sibling disjointness and nesting.
    std::vector<std::int64_t> pixel_hits(static_cast<std::size_t>(n), 0);
    for (std::int32_t node : tree.pixel_to_node) {
        require(node >= 0 && node < n, "pixel mapped to invalid node");
        ++pixel_hits[static_cast<std::size_t>(node)];
    }
    std::vector<std::int32_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
        return depth[static_cast<std::size_t>(a)] > depth[static_cast<std::size_t>(b)];
    });
    std::vector<std::int64_t> subtree(pixel_hits);
    for (std::int32_t id : order) {
        const auto& node = tree.nodes[static_cast<std::size_t>(id)];
        require(node.area > 0, "node area must be positive");
        require(subtree[static_cast<std::size_t>(id)] == node.area,
                "node area disagrees with pixel map");
        if (node.parent >= 0)
            subtree[static_cast<std::size_t>(node.parent)] += subtree[static_cast<std::size_t>(id)];
    }
    require(tree.nodes[static_cast<std::size_t>(tree.root)].area == tree.pixel_count(),
            "root area must cover all pixels");
}

} // namespace mshr
