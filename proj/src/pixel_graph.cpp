#include "mshr/pixel_graph.hpp"

#include <algorithm>
#include <cmath>

#include "mshr/error.hpp"

namespace mshr {

GrayPixelGraph::GrayPixelGraph(const MultiChannelImage& image, std::int32_t bins,
                               GrayPolarity polarity) {
    image.validate();
    require(image.channels == 1, "gray pixel graph requires a 1-channel image");
    require(bins >= 2, "gray pixel graph requires bins >= 2");
    width_ = image.width;
    height_ = image.height;
    bins_ = bins;
    levels_.resize(static_cast<std::size_t>(node_count()));

    // u8/u16 samples map over their full nominal range so the light/dark
    // duality of inverted images is exact; float images use the observed
    // range.
    double lo = 0.0, span = 0.0;
    switch (image.depth) {
    case SampleDepth::U8: span = 256.0; break;
    case SampleDepth::U16: span = 65536.0; break;
    case SampleDepth::F32: {
        const auto [mn, mx] = std::minmax_element(image.data.begin(), image.data.end());
        lo = *mn;
        span = std::max(static_cast<double>(*mx) - *mn, 1e-12);
        break;
    }
    }
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        const double t = (static_cast<double>(image.data[i]) - lo) / span * bins;
        std::int32_t lvl = static_cast<std::int32_t>(
            std::clamp(std::floor(t), 0.0, static_cast<double>(bins - 1)));
        if (polarity == GrayPolarity::Light)
            lvl = bins - 1 - lvl;
        levels_[i] = lvl;
    }
}

} // namespace mshr
