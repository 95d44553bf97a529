#include <doctest.h>

#include <random>
#include <set>

#include "mshr/component_tree.hpp"
#include "mshr/derivate_grid.hpp"
#include "mshr/oracle.hpp"
#include "mshr/pixel_graph.hpp"

#include "fixtures.hpp"

using namespace mshr;

TEST_CASE("a constant image yields a single root node") {
    const MultiChannelImage img = fixtures::image_from(4, 4, 1, std::vector<float>(16, 77.0f));
    const ComponentTree tree = fixtures::derivate_tree(img);
    REQUIRE(tree.node_count() == 1);
    CHECK(tree.root == 0);
    CHECK(tree.nodes[0].level == 0);
    CHECK(tree.nodes[0].area == 16);
    CHECK(tree.nodes[0].first_pixel == 0);
    validate_tree(tree);
}

TEST_CASE("a 1x1 image yields a single root of area 1 at level 0") {
    const MultiChannelImage img = fixtures::image_from(1, 1, 3, {1, 2, 3});
    const ComponentTree tree = fixtures::derivate_tree(img);
    REQUIRE(tree.node_count() == 1);
    CHECK(tree.nodes[0].area == 1);
    CHECK(tree.nodes[0].level == 0);
    CHECK(tree.pixel_to_node == std::vector<std::int32_t>{0});
}

TEST_CASE("the 1x4 two-plateau image merges at the high bin") {
    // Values 0 0 9 9: interior derivates 0, 9, 0; bins=10 with max 9.
    const MultiChannelImage img = fixtures::image_from(4, 1, 1, {0, 0, 9, 9});
    const QuantizedDerivates q = quantize(compute_derivates(img, Norm::L2), 10, 9.0f);
    const DerivateGrid grid = DerivateGrid::build(q);
    TreeBuildParams params;
    params.bins = 10;
    const ComponentTree tree = canonicalize(build_tree(grid, params));
    validate_tree(tree);
    REQUIRE(tree.node_count() == 3);
    CHECK(tree.nodes[tree.root].level == 9);
    CHECK(tree.nodes[tree.root].area == 4);
    std::set<std::set<std::int32_t>> leaves;
    for (std::int32_t i = 0; i < 3; ++i) {
        if (i == tree.root)
            continue;
        CHECK(tree.nodes[i].level == 0);
        CHECK(tree.nodes[i].area == 2);
        leaves.insert(fixtures::region_pixels(tree, i));
    }
    CHECK(leaves == std::set<std::set<std::int32_t>>{{0, 1}, {2, 3}});
}

TEST_CASE("toy five-rectangle image merges in color-distance order") {
    const fixtures::ToyMergeFixture f = fixtures::toy_merge_image();
    const ComponentTree tree = fixtures::derivate_tree(f.image);
    validate_tree(tree);

    auto node_of = [&](std::int32_t px) { return tree.pixel_to_node[px]; };
    auto lca_level = [&](std::int32_t a, std::int32_t b) {
        const std::int32_t l = fixtures::lowest_common_ancestor(tree, node_of(a), node_of(b));
        REQUIRE(l >= 0);
        return tree.nodes[l].level;
    };

    const std::int32_t pink_red = lca_level(f.pink, f.red);
    const std::int32_t greens = lca_level(f.lightgreen, f.green);
    const std::int32_t with_orange = lca_level(f.pink, f.orange);
    const std::int32_t with_gray = lca_level(f.pink, f.gray);

    // Most similar first: pink/red, then the greens, then orange joins
    // both color components at once, finally gray.
    CHECK(pink_red < greens);
    CHECK(greens < with_orange);
    CHECK(with_orange < with_gray);
    CHECK(fixtures::lowest_common_ancestor(tree, node_of(f.pink), node_of(f.orange)) ==
          fixtures::lowest_common_ancestor(tree, node_of(f.green), node_of(f.orange)));

    // Each uniquely colored rectangle is a level-0 component.
    for (std::int32_t px : {f.red, f.pink, f.green, f.lightgreen, f.orange, f.gray})
        CHECK(tree.nodes[node_of(px)].level == 0);
    CHECK(tree.nodes[node_of(f.gray)].area == 20);
    CHECK(tree.nodes[node_of(f.red)].area == 4);
    CHECK(tree.nodes[node_of(f.orange)].area == 2);
}

TEST_CASE("flooding equals the brute-force oracle on random images") {
    std::mt19937 rng(2024);
    std::uniform_int_distribution<std::int32_t> dim(1, 12);
    for (int iter = 0; iter < 60; ++iter) {
        const std::int32_t w = dim(rng), h = dim(rng);
        const std::int32_t channels = std::uniform_int_distribution<std::int32_t>(1, 3)(rng);
        const std::int32_t bins = 4 << (iter % 3);
        const MultiChannelImage img = fixtures::random_image(rng, w, h, channels);
        const QuantizedDerivates q = fixtures::quantized(img, bins);
        TreeBuildParams params;
        params.bins = bins;
        const ComponentTree flooded = canonicalize(build_tree(DerivateGrid::build(q), params));
        const ComponentTree reference = oracle_tree(q);
        CHECK(serialize_tree(flooded) == serialize_tree(reference));
        CHECK(flooded == reference);
    }
}

TEST_CASE("the result is independent of start derivate and visit order") {
    std::mt19937 rng(555);
    std::uniform_int_distribution<std::int32_t> dim(2, 10);
    for (int iter = 0; iter < 10; ++iter) {
        const MultiChannelImage img =
            fixtures::random_image(rng, dim(rng), dim(rng), 2);
        const std::string reference = serialize_tree(fixtures::derivate_tree(img, 16));

        const DerivateGrid grid = DerivateGrid::build(fixtures::quantized(img, 16));
        std::vector<std::int32_t> interior;
        for (std::int32_t id = 0; id < grid.node_count(); ++id)
            if (!grid.is_border(id))
                interior.push_back(id);
        for (int run = 0; run < 5; ++run) {
            const std::int32_t start =
                interior[std::uniform_int_distribution<std::size_t>(0, interior.size() - 1)(rng)];
            const std::uint64_t shuffle = rng();
            const ComponentTree tree =
                fixtures::derivate_tree(img, 16, 1, start, shuffle);
            CHECK(serialize_tree(tree) == reference);
        }
    }
}

TEST_CASE("every interior derivate is merged exactly once") {
    std::mt19937 rng(91);
    for (int iter = 0; iter < 10; ++iter) {
        std::uniform_int_distribution<std::int32_t> dim(1, 12);
        const MultiChannelImage img = fixtures::random_image(rng, dim(rng), dim(rng), 2);
        const DerivateGrid grid = DerivateGrid::build(fixtures::quantized(img, 8));
        BuildStats stats;
        TreeBuildParams params;
        params.bins = 8;
        (void)build_tree(grid, params, &stats);
        CHECK(stats.saturations == grid.interior_count());
    }
}

TEST_CASE("min_area trees refine the full tree") {
    std::mt19937 rng(72);
    for (int iter = 0; iter < 15; ++iter) {
        std::uniform_int_distribution<std::int32_t> dim(2, 10);
        const MultiChannelImage img = fixtures::random_image(rng, dim(rng), dim(rng), 1);
        const ComponentTree full = fixtures::derivate_tree(img, 8, 1);
        std::set<std::set<std::int32_t>> full_regions;
        for (std::int32_t i = 0; i < full.node_count(); ++i)
            full_regions.insert(fixtures::region_pixels(full, i));
        for (std::int32_t k : {2, 4, 9}) {
            const ComponentTree pruned = fixtures::derivate_tree(img, 8, k);
            validate_tree(pruned);
            for (std::int32_t i = 0; i < pruned.node_count(); ++i) {
                const auto pixels = fixtures::region_pixels(pruned, i);
                CHECK(full_regions.count(pixels) == 1);
                if (i != pruned.root)
                    CHECK(static_cast<std::int32_t>(pixels.size()) >= k);
            }
        }
    }
}

TEST_CASE("canonicalize collapses equal-pixel-set chains to the lowest level") {
    // Three stacked nodes over the same two pixels at levels 2, 3, 4.
    ComponentTree tree;
    tree.width = 2;
    tree.height = 1;
    tree.root = 0;
    tree.nodes.resize(3);
    tree.nodes[0] = {.parent = -1, .level = 4, .area = 2, .first_pixel = 0, .children = {1}};
    tree.nodes[1] = {.parent = 0, .level = 3, .area = 2, .first_pixel = 0, .children = {2}};
    tree.nodes[2] = {.parent = 1, .level = 2, .area = 2, .first_pixel = 0, .children = {}};
    tree.pixel_to_node = {2, 2};
    const ComponentTree canon = canonicalize(tree);
    REQUIRE(canon.node_count() == 1);
    CHECK(canon.nodes[0].level == 2);
    CHECK(canon.nodes[0].area == 2);
    CHECK(canon.root == 0);
}

TEST_CASE("canonicalize is idempotent and stable on already-canonical trees") {
    std::mt19937 rng(44);
    for (int iter = 0; iter < 20; ++iter) {
        std::uniform_int_distribution<std::int32_t> dim(1, 10);
        const MultiChannelImage img = fixtures::random_image(rng, dim(rng), dim(rng), 2);
        const ComponentTree canon = fixtures::derivate_tree(img, 16);
        const ComponentTree again = canonicalize(canon);
        CHECK(again == canon);
        CHECK(serialize_tree(again) == serialize_tree(canon));
    }
}

TEST_CASE("serialization of the single-node tree matches the documented line") {
    const MultiChannelImage img = fixtures::image_from(4, 4, 1, std::vector<float>(16, 5.0f));
    const ComponentTree tree = fixtures::derivate_tree(img);
    const std::string text = serialize_tree(tree);
    CHECK(text.find("0 -1 0 16 0\n") != std::string::npos);
    CHECK(text.rfind("CTT1\n", 0) == 0);
}

TEST_CASE("serialize/parse round trip preserves the tree") {
    std::mt19937 rng(31);
    for (int iter = 0; iter < 20; ++iter) {
        std::uniform_int_distribution<std::int32_t> dim(1, 11);
        const MultiChannelImage img = fixtures::random_image(rng, dim(rng), dim(rng), 3);
        const ComponentTree tree = fixtures::derivate_tree(img, 16);
        const std::string text = serialize_tree(tree);
        const ComponentTree back = parse_tree(text);
        CHECK(back == tree);
        CHECK(serialize_tree(back) == text);
    }
}

TEST_CASE("trees are equal exactly when their serializations are equal") {
    std::mt19937 rng(67);
    std::vector<ComponentTree> trees;
    std::uniform_int_distribution<std::int32_t> dim(2, 6);
    for (int i = 0; i < 6; ++i)
        trees.push_back(
            fixtures::derivate_tree(fixtures::random_image(rng, dim(rng), dim(rng), 1), 8));
    for (const ComponentTree& a : trees)
        for (const ComponentTree& b : trees)
            CHECK((a == b) == (serialize_tree(a) == serialize_tree(b)));
}

TEST_CASE("parse rejects malformed tree files") {
    CHECK_THROWS_AS((void)parse_tree("nope"), Error);
    CHECK_THROWS_AS((void)parse_tree("CTT1\n2 1 1\n0 -1 0 1 0\n0 0\n"), Error); // area
    CHECK_THROWS_AS((void)parse_tree("CTT1\n2 1 2\n0 -1 0 2 0\n1 5 0 1 0\n0 0\n"), Error);
}

TEST_CASE("node_region covers the root and nests strictly") {
    std::mt19937 rng(12);
    for (int iter = 0; iter < 10; ++iter) {
        std::uniform_int_distribution<std::int32_t> dim(2, 10);
        const MultiChannelImage img = fixtures::random_image(rng, dim(rng), dim(rng), 2);
        const ComponentTree tree = fixtures::derivate_tree(img, 8);
        const auto root_pixels = node_region(tree, tree.root);
        CHECK(static_cast<std::int64_t>(root_pixels.size()) == tree.pixel_count());
        for (std::int32_t i = 0; i < tree.node_count(); ++i) {
            const auto pixels = node_region(tree, i);
            CHECK(static_cast<std::int32_t>(pixels.size()) == tree.nodes[i].area);
            const std::int32_t parent = tree.nodes[i].parent;
            if (parent >= 0) {
                const auto parent_pixels = node_region(tree, parent);
                CHECK(std::includes(parent_pixels.begin(), parent_pixels.end(),
                                    pixels.begin(), pixels.end()));
                CHECK(pixels.size() < parent_pixels.size());
            }
            // Sibling regions are disjoint.
            for (std::int32_t sib : tree.nodes[i].children) {
                for (std::int32_t sib2 : tree.nodes[i].children) {
                    if (sib >= sib2)
                        continue;
                    const auto a = fixtures::region_pixels(tree, sib);
                    const auto b = fixtures::region_pixels(tree, sib2);
                    std::vector<std::int32_t> inter;
                    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                                          std::back_inserter(inter));
                    CHECK(inter.empty());
                }
            }
        }
    }
}

TEST_CASE("gray pixel graph: inverting the image swaps polarities exactly") {
    std::mt19937 rng(81);
    for (int iter = 0; iter < 10; ++iter) {
        std::uniform_int_distribution<std::int32_t> dim(1, 10);
        const MultiChannelImage img = fixtures::random_image(rng, dim(rng), dim(rng), 1);
        MultiChannelImage inverted = img;
        for (float& v : inverted.data)
            v = 255.0f - v;
        TreeBuildParams params;
        params.bins = 256;
        const ComponentTree dark_of_inverted = canonicalize(
            build_tree(GrayPixelGraph(inverted, 256, GrayPolarity::Dark), params));
        const ComponentTree light_of_original = canonicalize(
            build_tree(GrayPixelGraph(img, 256, GrayPolarity::Light), params));
        CHECK(serialize_tree(dark_of_inverted) == serialize_tree(light_of_original));
    }
}

TEST_CASE("build_tree validates its parameters") {
    const MultiChannelImage img = fixtures::image_from(2, 2, 1, {0, 1, 2, 3});
    const DerivateGrid grid = DerivateGrid::build(fixtures::quantized(img, 8));
    TreeBuildParams params;
    params.bins = 16; // mismatch
    CHECK_THROWS_AS((void)build_tree(grid, params), Error);
    params.bins = 8;
    params.min_area = 0;
    CHECK_THROWS_AS((void)build_tree(grid, params), Error);
    params.min_area = 1;
    params.start_node = 0; // a border sentinel
    REQUIRE(grid.is_border(0));
    CHECK_THROWS_AS((void)build_tree(grid, params), Error);
}
