#pragma once

#include <cstdint>
#include <vector>

#include "mshr/component_tree.hpp"
#include "mshr/preprocess.hpp"

namespace mshr {

/// Connected components of the interior-derivate graph at every threshold
/// level: level[t] holds the partition for "derivate level <= t", each
/// component as sorted pixel indices, components ordered by first pixel.
struct ThresholdDecomposition {
    std::int32_t bins = 0;
    std::vector<std::vector<std::vector<std::int32_t>>> levels;
};

ThresholdDecomposition threshold_decomposition(const QuantizedDerivates& q);

/// Brute-force reference tree: recomputes connected components from
/// scratch at every level by global thresholding, entirely independent of
/// the flooding engine. Intended for small test instances; the result is
/// canonical. A nonzero shuffle_seed permutes edge-union order (the
/// output must not depend on it).
ComponentTree oracle_tree(const QuantizedDerivates& q, std::int32_t min_area = 1,
                          std::uint64_t shuffle_seed = 0);

} // namespace mshr
