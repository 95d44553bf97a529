#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mshr/error.hpp"

namespace mshr {

enum class SampleDepth : std::uint8_t { U8, U16, F32 };

const char* depth_name(SampleDepth depth);

/// Row-major, channel-interleaved raster with an arbitrary number of
/// channels. Sample values are held in float working precision; the depth
/// tag records how samples are encoded on disk. Instances are treated as
/// immutable once built and are safe to share across threads read-only.
struct MultiChannelImage {
    std::int32_t width = 0;
    std::int32_t height = 0;
    std::int32_t channels = 0;
    SampleDepth depth = SampleDepth::U8;
    std::vector<float> data; // width*height*channels samples

    static MultiChannelImage make(std::int32_t width, std::int32_t height,
                                  std::int32_t channels,
                                  SampleDepth depth = SampleDepth::U8,
                                  float fill = 0.0f);

    std::int64_t pixel_count() const {
        return static_cast<std::int64_t>(width) * height;
    }
    std::int64_t sample_count() const { return pixel_count() * channels; }

    const float* pixel(std::int32_t x, std::int32_t y) const {
        return data.data() + (static_cast<std::int64_t>(y) * width + x) * channels;
    }
    float* pixel(std::int32_t x, std::int32_t y) {
        return data.data() + (static_cast<std::int64_t>(y) * width + x) * channels;
    }
    float at(std::int32_t x, std::int32_t y, std::int32_t c = 0) const {
        return pixel(x, y)[c];
    }
    float& at(std::int32_t x, std::int32_t y, std::int32_t c = 0) {
        return pixel(x, y)[c];
    }

    /// Throws Error if any structural invariant is violated.
    void validate() const;

    bool operator==(const MultiChannelImage&) const = default;
};

/// Per-pixel non-negative region identifiers; 0 marks unlabeled pixels.
struct LabelImage {
    std::int32_t width = 0;
    std::int32_t height = 0;
    std::vector<std::int32_t> labels; // width*height

    std::int32_t max_label() const;

    bool operator==(const LabelImage&) const = default;
};

enum class ImageFormat : std::uint8_t { Pgm, Ppm, Mci };

/// Decodes PGM (P5), PPM (P6) or MCI by sniffing the file magic.
MultiChannelImage load_image(const std::string& path);
MultiChannelImage decode_image(const std::vector<std::uint8_t>& bytes,
                               const std::string& origin = "<memory>");

void save_image(const MultiChannelImage& image, const std::string& path,
                ImageFormat format);
std::vector<std::uint8_t> encode_image(const MultiChannelImage& image,
                                       ImageFormat format);

/// Labels are written as a 16-bit PGM; max label above 65535 is an error.
void save_label_image(const LabelImage& labels, const std::string& path);

/// Picks the output format from the file extension (.pgm/.ppm/.mci).
ImageFormat format_from_path(const std::string& path);

} // namespace mshr
