#pragma once

#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

namespace mshr {

/// Disjoint sets over dense integer ids; path halving + union by size.
class UnionFind {
public:
    explicit UnionFind(std::int32_t count)
        : parent_(static_cast<std::size_t>(count)), size_(static_cast<std::size_t>(count), 1) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }

    std::int32_t find(std::int32_t x) {
        while (parent_[static_cast<std::size_t>(x)] != x) {
            parent_[static_cast<std::size_t>(x)] =
                parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(x)])];
            x = parent_[static_cast<std::size_t>(x)];
        }
        return x;
    }

    std::int32_t size(std::int32_t root) const { return size_[static_cast<std::size_t>(root)]; }

    /// Unites the sets of two roots; returns the surviving root.
    std::int32_t unite(std::int32_t a, std::int32_t b) {
        if (a == b)
            return a;
        if (size_[static_cast<std::size_t>(a)] < size_[static_cast<std::size_t>(b)])
            std::swap(a, b);
        parent_[static_cast<std::size_t>(b)] = a;
        size_[static_cast<std::size_t>(a)] += size_[static_cast<std::size_t>(b)];
        return a;
    }

private:
    std::vector<std::int32_t> parent_;
    std::vector<std::int32_t> size_;
};

} // namespace mshr
