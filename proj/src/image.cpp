#include "mshr/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mshr {

const char* depth_name(SampleDepth depth) {
    switch (depth) {
    case SampleDepth::U8: return "u8";
    case SampleDepth::U16: return "u16";
    case SampleDepth::F32: return "f32";
    }
    return "?";
}

MultiChannelImage MultiChannelImage::make(std::int32_t width, std::int32_t height,
                                          std::int32_t channels, SampleDepth depth,
                                          float fill) {
    MultiChannelImage image;
    image.width = width;
    image.height = height;
    image.channels = channels;
    image.depth = depth;
    require(width >= 1 && height >= 1 && channels >= 1, "image dimensions must be positive");
    image.data.assign(static_cast<std::size_t>(image.sample_count()), fill);
    return image;
}

void MultiChannelImage::validate() const {
    require(width >= 1 && height >= 1 && channels >= 1, "image dimensions must be positive");
    require(static_cast<std::int64_t>(data.size()) == sample_count(),
            "image data length does not match dimensions");
    for (float v : data)
        require(std::isfinite(v), "image contains non-finite samples");
}

std::int32_t LabelImage::max_label() const {
    std::int32_t m = 0;
    for (std::int32_t v : labels)
        m = std::max(m, v);
    return m;
}

namespace {

struct ByteReader {
    const std::vector<std::uint8_t>& bytes;
    std::size_t pos = 0;
    const std::string& origin;

    bool eof() const { return pos >= bytes.size(); }
    std::uint8_t get() {
        require(!eof(), origin + ": truncated file");
        return bytes[pos++];
    }
    std::uint8_t peek() const {
        require(!eof(), origin + ": truncated file");
        return bytes[pos];
    }

    // Skips netpbm whitespace and '#' comments.
    void skip_space_and_comments() {
        while (!eof()) {
            std::uint8_t c = peek();
            if (c == '#') {
                while (!eof() && get() != '\n') {
                }
            } else if (std::isspace(c)) {
                ++pos;
            } else {
                break;
            }
        }
    }

    std::int64_t read_pnm_int() {
        skip_space_and_comments();
        require(!eof() && std::isdigit(peek()), origin + ": malformed header");
        std::int64_t value = 0;
        while (!eof() && std::isdigit(peek())) {
            value = value * 10 + (get() - '0');
            require(value <= 1'000'000'000, origin + ": header value out of range");
        }
        return value;
    }

    std::string read_token() {
        skip_space_and_comments();
        std::string tok;
        while (!eof() && !std::isspace(peek()))
            tok.push_back(static_cast<char>(get()));
        require(!tok.empty(), origin + ": malformed header");
        return tok;
    }

    const std::uint8_t* raw(std::size_t n) {
        require(pos + n <= bytes.size(), origin + ": truncated data");
        const std::uint8_t* p = bytes.data() + pos;
        pos += n;
        return p;
    }
};

MultiChannelImage decode_pnm(ByteReader& r, std::int32_t channels) {
    r.pos = 2; // past the magic
    std::int64_t w = r.read_pnm_int();
    std::int64_t h = r.read_pnm_int();
    std::int64_t maxval = r.read_pnm_int();
    require(w >= 1 && h >= 1, r.origin + ": zero image dimensions");
    require(maxval == 255 || maxval == 65535, r.origin + ": unsupported maxval");
    // Exactly one whitespace byte separates the header from the samples.
    require(!r.eof() && std::isspace(r.peek()), r.origin + ": malformed header");
    ++r.pos;

    MultiChannelImage image = MultiChannelImage::make(
        static_cast<std::int32_t>(w), static_cast<std::int32_t>(h), channels,
        maxval == 255 ? SampleDepth::U8 : SampleDepth::U16);
    const std::size_t samples = static_cast<std::size_t>(image.sample_count());
    if (maxval == 255) {
        const std::uint8_t* p = r.raw(samples);
        for (std::size_t i = 0; i < samples; ++i)
            image.data[i] = static_cast<float>(p[i]);
    } else {
        const std::uint8_t* p = r.raw(samples * 2); // big-endian 16-bit
        for (std::size_t i = 0; i < samples; ++i)
            image.data[i] = static_cast<float>((p[2 * i] << 8) | p[2 * i + 1]);
    }
    require(r.pos == r.bytes.size(), r.origin + ": trailing bytes after image data");
    return image;
}

MultiChannelImage decode_mci(ByteReader& r) {
    r.pos = 0;
    std::string magic = r.read_token();
    require(magic == "MCI1", r.origin + ": bad MCI magic");
    std::int64_t w = r.read_pnm_int();
    std::int64_t h = r.read_pnm_int();
    std::int64_t c = r.read_pnm_int();
    std::string dtype = r.read_token();
    require(w >= 1 && h >= 1 && c >= 1, r.origin + ": zero image dimensions");
    SampleDepth depth;
    if (dtype == "u8")
        depth = SampleDepth::U8;
    else if (dtype == "u16")
        depth = SampleDepth::U16;
    else if (dtype == "f32")
        depth = SampleDepth::F32;
    else
        fail(r.origin + ": unknown MCI dtype '" + dtype + "'");
    require(!r.eof() && r.get() == '\n', r.origin + ": malformed MCI header");

    MultiChannelImage image = MultiChannelImage::make(
        static_cast<std::int32_t>(w), static_cast<std::int32_t>(h),
        static_cast<std::int32_t>(c), depth);
    const std::size_t samples = static_cast<std::size_t>(image.sample_count());
    switch (depth) {
    case SampleDepth::U8: {
        const std::uint8_t* p = r.raw(samples);
        for (std::size_t i = 0; i < samples; ++i)
            image.data[i] = static_cast<float>(p[i]);
        break;
    }
    case SampleDepth::U16: {
        const std::uint8_t* p = r.raw(samples * 2); // little-endian
        for (std::size_t i = 0; i < samples; ++i)
            image.data[i] = static_cast<float>(p[2 * i] | (p[2 * i + 1] << 8));
        break;
    }
    case SampleDepth::F32: {
        const std::uint8_t* p = r.raw(samples * 4);
        for (std::size_t i = 0; i < samples; ++i) {
            std::uint32_t u = static_cast<std::uint32_t>(p[4 * i]) |
                              (static_cast<std::uint32_t>(p[4 * i + 1]) << 8) |
                              (static_cast<std::uint32_t>(p[4 * i + 2]) << 16) |
                              (static_cast<std::uint32_t>(p[4 * i + 3]) << 24);
            float f;
            std::memcpy(&f, &u, 4);
            require(std::isfinite(f), r.origin + ": non-finite float sample");
            image.data[i] = f;
        }
        break;
    }
    }
    require(r.pos == r.bytes.size(), r.origin + ": trailing bytes after image data");
    return image;
}

void append_u16_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

std::uint32_t integral_sample(float v, std::uint32_t maxval, const char* what) {
    require(v >= 0.0f && v <= static_cast<float>(maxval) && v == std::floor(v),
            std::string(what) + ": sample value not representable");
    return static_cast<std::uint32_t>(v);
}

} // namespace

MultiChannelImage decode_image(const std::vector<std::uint8_t>& bytes,
                               const std::string& origin) {
    require(bytes.size() >= 2, origin + ": file too short");
    ByteReader r{bytes, 0, origin};
    MultiChannelImage image;
    if (bytes[0] == 'P' && bytes[1] == '5')
        image = decode_pnm(r, 1);
    else if (bytes[0] == 'P' && bytes[1] == '6')
        image = decode_pnm(r, 3);
    else if (bytes[0] == 'M')
        image = decode_mci(r);
    else
        fail(origin + ": unknown image format");
    image.validate();
    return image;
}

MultiChannelImage load_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), path + ": cannot open file");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return decode_image(bytes, path);
}

std::vector<std::uint8_t> encode_image(const MultiChannelImage& image, ImageFormat format) {
    image.validate();
    std::vector<std::uint8_t> out;
    const std::size_t samples = static_cast<std::size_t>(image.sample_count());

    if (format == ImageFormat::Pgm || format == ImageFormat::Ppm) {
        const std::int32_t want = format == ImageFormat::Pgm ? 1 : 3;
        require(image.channels == want,
                std::string(format == ImageFormat::Pgm ? "PGM" : "PPM") +
                    " requires exactly " + std::to_string(want) + " channel(s), image has " +
                    std::to_string(image.channels));
        require(image.depth != SampleDepth::F32,
                "float images cannot be written as PGM/PPM; use MCI");
        const std::uint32_t maxval = image.depth == SampleDepth::U8 ? 255u : 65535u;
        std::ostringstream header;
        header << (format == ImageFormat::Pgm ? "P5" : "P6") << "\n"
               << image.width << " " << image.height << "\n"
               << maxval << "\n";
        const std::string h = header.str();
        out.assign(h.begin(), h.end());
        for (std::size_t i = 0; i < samples; ++i) {
            std::uint32_t v = integral_sample(image.data[i], maxval, "PGM/PPM");
            if (maxval == 255)
                out.push_back(static_cast<std::uint8_t>(v));
            else
                append_u16_be(out, v);
        }
        return out;
    }

    std::ostringstream header;
    header << "MCI1\n"
           << image.width << " " << image.height << " " << image.channels << " "
           << depth_name(image.depth) << "\n";
    const std::string h = header.str();
    out.assign(h.begin(), h.end());
    switch (image.depth) {
    case SampleDepth::U8:
        for (std::size_t i = 0; i < samples; ++i)
            out.push_back(static_cast<std::uint8_t>(integral_sample(image.data[i], 255, "MCI")));
        break;
    case SampleDepth::U16:
        for (std::size_t i = 0; i < samples; ++i) {
            std::uint32_t v = integral_sample(image.data[i], 65535, "MCI");
            out.push_back(static_cast<std::uint8_t>(v & 0xff)); // little-endian
            out.push_back(static_cast<std::uint8_t>(v >> 8));
        }
        break;
    case SampleDepth::F32:
        for (std::size_t i = 0; i < samples; ++i) {
            std::uint32_t u;
            std::memcpy(&u, &image.data[i], 4);
            out.push_back(static_cast<std::uint8_t>(u & 0xff));
            out.push_back(static_cast<std::uint8_t>((u >> 8) & 0xff));
            out.push_back(static_cast<std::uint8_t>((u >> 16) & 0xff));
            out.push_back(static_cast<std::uint8_t>((u >> 24) & 0xff));
        }
        break;
    }
    return out;
}

void save_image(const MultiChannelImage& image, const std::string& path, ImageFormat format) {
    std::vector<std::uint8_t> bytes = encode_image(image, format);
    std::ofstream outf(path, std::ios::binary | std::ios::trunc);
    require(outf.good(), path + ": cannot open file for writing");
    outf.write(reinterpret_cast<const char*>(bytes.data()),
               static_cast<std::streamsize>(bytes.size()));
    require(outf.good(), path + ": write failed");
}

void save_label_image(const LabelImage& labels, const std::string& path) {
    require(labels.width >= 1 && labels.height >= 1, "label image dimensions must be positive");
    require(static_cast<std::int64_t>(labels.labels.size()) ==
                static_cast<std::int64_t>(labels.width) * labels.height,
            "label data length does not match dimensions");
    const std::int32_t maxl = labels.max_label();
    require(maxl <= 65535, "label value " + std::to_string(maxl) + " exceeds 16-bit PGM range");
    MultiChannelImage image = MultiChannelImage::make(labels.width, labels.height, 1,
                                                      SampleDepth::U16);
    for (std::size_t i = 0; i < labels.labels.size(); ++i) {
        require(labels.labels[i] >= 0, "negative label value");
        image.data[i] = static_cast<float>(labels.labels[i]);
    }
    save_image(image, path, ImageFormat::Pgm);
}

ImageFormat format_from_path(const std::string& path) {
    auto ends_with = [&](const char* suffix) {
        std::string s = path;
        std::transform(s.begin(), s.end(), s.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        const std::string suf(suffix);
        return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
    };
    if (ends_with(".pgm"))
        return ImageFormat::Pgm;
    if (ends_with(".ppm"))
        return ImageFormat::Ppm;
    if (ends_with(".mci"))
        return ImageFormat::Mci;
    fail(path + ": cannot infer image format from extension (use .pgm/.ppm/.mci)");
}

} // namespace mshr
