#pragma once

#include <cstdint>
#include <vector>

#include "mshr/image.hpp"

namespace mshr {

enum class SmoothingMethod : std::uint8_t { None, Bilateral, Guided };

/// Edge-preserving smoothing configuration. `regularization_eps <= 0`
/// selects an automatic value of (0.02 * observed sample range)^2.
struct SmoothingParams {
    SmoothingMethod method = SmoothingMethod::Guided;
    std::int32_t spatial_radius = 2;
    float range_sigma = 10.0f;       // bilateral only
    float regularization_eps = 0.0f; // guided only; <= 0 means auto

    void validate() const;
};

/// Magnitudes of all channel-vector differences between 4-adjacent pixels.
/// `horiz[y*(width-1)+x]` is the magnitude between (x,y) and (x+1,y);
/// `vert[y*width+x]` between (x,y) and (x,y+1). Border derivates are not
/// represented here; they are added by the grid layer.
struct DerivateField {
    std::int32_t width = 0;
    std::int32_t height = 0;
    std::vector<float> horiz; // (width-1)*height
    std::vector<float> vert;  // width*(height-1)
};

enum class Norm : std::uint8_t { L1, L2, Linf };

struct DerivateStats {
    std::int64_t samples_touched = 0; // channel accesses per adjacent pair
};

/// Same geometry as DerivateField with magnitudes mapped to bin indices in
/// [0, bins-1]. The mapping is monotone: m1 <= m2 implies bin(m1) <= bin(m2).
struct QuantizedDerivates {
    std::int32_t width = 0;
    std::int32_t height = 0;
    std::int32_t bins = 0;
    float max_magnitude = 0.0f;
    float bin_width = 0.0f;
    std::vector<std::int32_t> horiz;
    std::vector<std::int32_t> vert;
};

/// Returns the input unchanged for SmoothingMethod::None; otherwise a
/// float-32 image of identical geometry.
MultiChannelImage smooth(const MultiChannelImage& image, const SmoothingParams& params);

DerivateField compute_derivates(const MultiChannelImage& image, Norm norm,
                                DerivateStats* stats = nullptr);

/// max_magnitude <= 0 selects the observed maximum (1 if all magnitudes
/// are zero). bin(m) = min(bins-1, floor(m / max_magnitude * bins)).
QuantizedDerivates quantize(const DerivateField& field, std::int32_t bins,
                            float max_magnitude = 0.0f);

} // namespace mshr
