#include "mshr/preprocess.hpp"

#include <algorithm>
#include <cmath>

namespace mshr {

void SmoothingParams::validate() const {
    require(spatial_radius >= 0, "spatial_radius must be >= 0");
    if (method == SmoothingMethod::Bilateral)
        require(range_sigma > 0.0f, "range_sigma must be > 0 for bilateral smoothing");
}

namespace {

MultiChannelImage to_float(const MultiChannelImage& image) {
    MultiChannelImage out = image;
    out.depth = SampleDepth::F32;
    return out;
}

// Box sums over a clamped window via a summed-area table, one channel at a
// time; windows at the border shrink and the normalizer tracks that.
class BoxFilter {
public:
    BoxFilter(std::int32_t width, std::int32_t height, std::int32_t radius)
        : w_(width), h_(height), r_(radius), sat_((width + 1) * (height + 1), 0.0) {}

    void load(const float* src, std::int64_t stride) {
        for (std::int32_t y = 0; y < h_; ++y) {
            double row = 0.0;
            for (std::int32_t x = 0; x < w_; ++x) {
                row += src[(static_cast<std::int64_t>(y) * w_ + x) * stride];
                sat_[idx(x + 1, y + 1)] = sat_[idx(x + 1, y)] + row;
            }
        }
    }

    double mean(std::int32_t x, std::int32_t y) const {
        const std::int32_t x0 = std::max(0, x - r_), x1 = std::min(w_ - 1, x + r_);
        const std::int32_t y0 = std::max(0, y - r_), y1 = std::min(h_ - 1, y + r_);
        const double sum = sat_[idx(x1 + 1, y1 + 1)] - sat_[idx(x0, y1 + 1)] -
                           sat_[idx(x1 + 1, y0)] + sat_[idx(x0, y0)];
        return sum / (static_cast<double>(x1 - x0 + 1) * (y1 - y0 + 1));
    }

private:
    std::size_t idx(std::int32_t x, std::int32_t y) const {
        return static_cast<std::size_t>(y) * (w_ + 1) + x;
    }
    std::int32_t w_, h_, r_;
    std::vector<double> sat_;
};

float sample_range(const MultiChannelImage& image) {
    float lo = image.data.empty() ? 0.0f : image.data[0];
    float hi = lo;
    for (float v : image.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return std::max(hi - lo, 1e-6f);
}

MultiChannelImage smooth_guided(const MultiChannelImage& image, const SmoothingParams& params) {
    const std::int32_t w = image.width, h = image.height, c = image.channels;
    const std::int32_t r = params.spatial_radius;
    float eps = params.regularization_eps;
    if (eps <= 0.0f) {
        const float range = sample_range(image);
        eps = (0.02f * range) * (0.02f * range);
    }

    MultiChannelImage out = to_float(image);
    const std::int64_t n = image.pixel_count();
    std::vector<float> sq(static_cast<std::size_t>(n));
    std::vector<float> a(static_cast<std::size_t>(n));
    std::vector<float> b(static_cast<std::size_t>(n));
    BoxFilter box(w, h, r);

    // Self-guided filter, each channel guiding itself.
    for (std::int32_t ch = 0; ch < c; ++ch) {
        const float* src = image.data.data() + ch;
        for (std::int64_t i = 0; i < n; ++i)
            sq[static_cast<std::size_t>(i)] = src[i * c] * src[i * c];

        box.load(src, c);
        std::vector<double> mean_i(static_cast<std::size_t>(n));
        for (std::int32_t y = 0; y < h; ++y)
            for (std::int32_t x = 0; x < w; ++x)
                mean_i[static_cast<std::size_t>(y) * w + x] = box.mean(x, y);

        box.load(sq.data(), 1);
        for (std::int32_t y = 0; y < h; ++y) {
            for (std::int32_t x = 0; x < w; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                const double mi = mean_i[i];
                const double var = std::max(0.0, box.mean(x, y) - mi * mi);
                const double ai = var / (var + eps);
                a[i] = static_cast<float>(ai);
                b[i] = static_cast<float>((1.0 - ai) * mi);
            }
        }

        box.load(a.data(), 1);
        std::vector<double> mean_a(static_cast<std::size_t>(n));
        for (std::int32_t y = 0; y < h; ++y)
            for (std::int32_t x = 0; x < w; ++x)
                mean_a[static_cast<std::size_t>(y) * w + x] = box.mean(x, y);

        box.load(b.data(), 1);
        float* dst = out.data.data() + ch;
        for (std::int32_t y = 0; y < h; ++y) {
            for (std::int32_t x = 0; x < w; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                dst[static_cast<std::int64_t>(i) * c] =
                    static_cast<float>(mean_a[i] * src[static_cast<std::int64_t>(i) * c] +
                                       box.mean(x, y));
            }
        }
    }
    return out;
}

MultiChannelImage smooth_bilateral(const MultiChannelImage& image, const SmoothingParams& params) {
    const std::int32_t w = image.width, h = image.height, c = image.channels;
    const std::int32_t r = params.spatial_radius;
    const double sigma_s = std::max(0.5, 0.5 * r);
    const double inv2ss = 1.0 / (2.0 * sigma_s * sigma_s);
    const double inv2sr = 1.0 / (2.0 * static_cast<double>(params.range_sigma) *
                                 params.range_sigma);

    std::vector<double> spatial((2 * r + 1) * (2 * r + 1));
    for (std::int32_t dy = -r; dy <= r; ++dy)
        for (std::int32_t dx = -r; dx <= r; ++dx)
            spatial[static_cast<std::size_t>(dy + r) * (2 * r + 1) + (dx + r)] =
                std::exp(-(dx * dx + dy * dy) * inv2ss);

    MultiChannelImage out = to_float(image);
    std::vector<double> acc(static_cast<std::size_t>(c));
    for (std::int32_t y = 0; y < h; ++y) {
        for (std::int32_t x = 0; x < w; ++x) {
            const float* center = image.pixel(x, y);
            std::fill(acc.begin(), acc.end(), 0.0);
            double wsum = 0.0;
            const std::int32_t y0 = std::max(0, y - r), y1 = std::min(h - 1, y + r);
            const std::int32_t x0 = std::max(0, x - r), x1 = std::min(w - 1, x + r);
            for (std::int32_t ny = y0; ny <= y1; ++ny) {
                for (std::int32_t nx = x0; nx <= x1; ++nx) {
                    const float* p = image.pixel(nx, ny);
                    double d2 = 0.0; // joint range distance over all channels
                    for (std::int32_t ch = 0; ch < c; ++ch) {
                        const double d = static_cast<double>(p[ch]) - center[ch];
                        d2 += d * d;
                    }
                    const double wgt =
                        spatial[static_cast<std::size_t>(ny - y + r) * (2 * r + 1) +
                                (nx - x + r)] *
                        std::exp(-d2 * inv2sr);
                    wsum += wgt;
                    for (std::int32_t ch = 0; ch < c; ++ch)
                        acc[static_cast<std::size_t>(ch)] += wgt * p[ch];
                }
            }
            float* dst = out.pixel(x, y);
            for (std::int32_t ch = 0; ch < c; ++ch)
                dst[ch] = static_cast<float>(acc[static_cast<std::size_t>(ch)] / wsum);
        }
    }
    return out;
}

} // namespace

MultiChannelImage smooth(const MultiChannelImage& image, const SmoothingParams& params) {
    image.validate();
    params.validate();
    switch (params.method) {
    case SmoothingMethod::None:
        return image;
    case SmoothingMethod::Bilateral:
        return params.spatial_radius == 0 ? to_float(image) : smooth_bilateral(image, params);
    case SmoothingMethod::Guided:
        return params.spatial_radius == 0 ? to_float(image) : smooth_guided(image, params);
    }
    fail("unknown smoothing method");
}

DerivateField compute_derivates(const MultiChannelImage& image, Norm norm,
                                DerivateStats* stats) {
    image.validate();
    const std::int32_t w = image.width, h = image.height, c = image.channels;
    DerivateField field;
    field.width = w;
    field.height = h;
    field.horiz.resize(static_cast<std::size_t>(w - 1) * h);
    field.vert.resize(static_cast<std::size_t>(w) * (h - 1));

    auto magnitude = [&](const float* u, const float* v) -> float {
        double m = 0.0;
        switch (norm) {
        case Norm::L1:
            for (std::int32_t ch = 0; ch < c; ++ch)
                m += std::abs(static_cast<double>(u[ch]) - v[ch]);
            break;
        case Norm::L2:
            for (std::int32_t ch = 0; ch < c; ++ch) {
                const double d = static_cast<double>(u[ch]) - v[ch];
                m += d * d;
            }
            m = std::sqrt(m);
            break;
        case Norm::Linf:
            for (std::int32_t ch = 0; ch < c; ++ch)
                m = std::max(m, std::abs(static_cast<double>(u[ch]) - v[ch]));
            break;
        }
        if (stats)
            stats->samples_touched += c;
        return static_cast<float>(m);
    };

    for (std::int32_t y = 0; y < h; ++y) {
        const float* row = image.pixel(0, y);
        for (std::int32_t x = 0; x + 1 < w; ++x)
            field.horiz[static_cast<std::size_t>(y) * (w - 1) + x] =
                magnitude(row + static_cast<std::int64_t>(x) * c,
                          row + static_cast<std::int64_t>(x + 1) * c);
    }
    for (std::int32_t y = 0; y + 1 < h; ++y) {
        const float* row = image.pixel(0, y);
        const float* next = image.pixel(0, y + 1);
        for (std::int32_t x = 0; x < w; ++x)
            field.vert[static_cast<std::size_t>(y) * w + x] =
                magnitude(row + static_cast<std::int64_t>(x) * c,
                          next + static_cast<std::int64_t>(x) * c);
    }
    return field;
}

QuantizedDerivates quantize(const DerivateField& field, std::int32_t bins,
                            float max_magnitude) {
    require(bins >= 2, "bins must be >= 2");
    QuantizedDerivates q;
    q.width = field.width;
    q.height = field.height;
    q.bins = bins;

    float maxm = max_magnitude;
    if (maxm <= 0.0f) {
        maxm = 0.0f;
        for (float m : field.horiz)
            maxm = std::max(maxm, m);
        for (float m : field.vert)
            maxm = std::max(maxm, m);
        if (maxm == 0.0f)
            maxm = 1.0f;
    }
    q.max_magnitude = maxm;
    q.bin_width = maxm / static_cast<float>(bins);

    auto bin_of = [&](float m) {
        const double t = std::floor(static_cast<double>(m) / maxm * bins);
        return static_cast<std::int32_t>(
            std::clamp(t, 0.0, static_cast<double>(bins - 1)));
    };
    q.horiz.resize(field.horiz.size());
    q.vert.resize(field.vert.size());
    for (std::size_t i = 0; i < field.horiz.size(); ++i)
        q.horiz[i] = bin_of(field.horiz[i]);
    for (std::size_t i = 0; i < field.vert.size(); ++i)
        q.vert[i] = bin_of(field.vert[i]);
    return q;
}

} // namespace mshr
