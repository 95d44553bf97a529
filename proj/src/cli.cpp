#include "mshr/cli.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "mshr/derivate_grid.hpp"
#include "mshr/oracle.hpp"
#include "mshr/pixel_graph.hpp"

namespace mshr::cli {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string format_ms(double ms) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3f", ms);
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), path + ": cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), path + ": cannot open file for writing");
    out << content;
    require(out.good(), path + ": write failed");
}

Norm parse_norm(const std::string& name) {
    if (name == "l1" || name == "L1")
        return Norm::L1;
    if (name == "l2" || name == "L2")
        return Norm::L2;
    if (name == "linf" || name == "Linf")
        return Norm::Linf;
    fail("unknown norm '" + name + "' (expected l1, l2 or linf)");
}

SmoothingMethod parse_smoothing(const std::string& name) {
    if (name == "none")
        return SmoothingMethod::None;
    if (name == "bilateral")
        return SmoothingMethod::Bilateral;
    if (name == "guided")
        return SmoothingMethod::Guided;
    fail("unknown smoothing method '" + name + "' (expected none, bilateral or guided)");
}

StabilityMode parse_mode(const std::string& name) {
    if (name == "difference")
        return StabilityMode::Difference;
    if (name == "ratio")
        return StabilityMode::Ratio;
    fail("unknown stability mode '" + name + "' (expected difference or ratio)");
}

RegionPolarity parse_polarity(const std::string& name) {
    if (name == "light")
        return RegionPolarity::Light;
    if (name == "dark")
        return RegionPolarity::Dark;
    if (name == "both")
        return RegionPolarity::Both;
    fail("unknown polarity '" + name + "' (expected light, dark or both)");
}

// Flags shared by every command that runs the tree-building pipeline.
struct PipelineFlags {
    std::int32_t bins = 256;
    std::string norm = "l2";
    std::string smoothing = "guided";
    std::int32_t radius = 2;
    float range_sigma = 10.0f;
    float eps = 0.0f;
    float max_magnitude = 0.0f;
    std::int32_t min_area = 30;
    std::int32_t start_node = -1;
    std::uint64_t shuffle_seed = 0;
    bool use_oracle = false;

    SmoothingParams smoothing_params() const {
        SmoothingParams p;
        p.method = parse_smoothing(smoothing);
        p.spatial_radius = radius;
        p.range_sigma = range_sigma;
        p.regularization_eps = eps;
        return p;
    }
    TreeBuildParams build_params() const {
        TreeBuildParams p;
        p.bins = bins;
        p.min_area = min_area;
        p.start_node = start_node;
        p.visit_shuffle_seed = shuffle_seed;
        return p;
    }
};

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& f) {
    cmd->add_option("--bins", f.bins, "Derivate bins (stack slots)")->capture_default_str();
    cmd->add_option("--norm", f.norm, "Channel-difference norm: l1, l2, linf")
        ->capture_default_str();
    cmd->add_option("--smoothing", f.smoothing,
                    "Edge-preserving smoothing: none, bilateral, guided")
        ->capture_default_str();
    cmd->add_option("--radius", f.radius, "Smoothing window radius")->capture_default_str();
    cmd->add_option("--range-sigma", f.range_sigma, "Bilateral range sigma")
        ->capture_default_str();
    cmd->add_option("--eps", f.eps, "Guided-filter regularization (0 = auto)")
        ->capture_default_str();
    cmd->add_option("--max-magnitude", f.max_magnitude,
                    "Quantization ceiling (0 = observed maximum)")
        ->capture_default_str();
    cmd->add_option("--min-area", f.min_area, "Minimum component area")->capture_default_str();
    cmd->add_option("--start-node", f.start_node, "Flooding start derivate (-1 = auto)")
        ->capture_default_str();
    cmd->add_option("--visit-shuffle-seed", f.shuffle_seed)->group("");
    cmd->add_flag("--use-oracle", f.use_oracle)->group("");
}

struct ExtractFlags {
    std::vector<std::int32_t> deltas = {5};
    double max_area_fraction = 0.75;
    std::string mode = "difference";

    ExtractParams extract_params(std::int32_t min_area, std::int32_t delta) const {
        ExtractParams p;
        p.delta = delta;
        p.min_area = min_area;
        p.max_area_fraction = max_area_fraction;
        p.stability_mode = parse_mode(mode);
        return p;
    }
};

void add_extract_flags(CLI::App* cmd, ExtractFlags& f) {
    cmd->add_option("--delta", f.deltas,
                    "Stability window in levels; may be given several times")
        ->capture_default_str();
    cmd->add_option("--max-area-fraction", f.max_area_fraction,
                    "Largest region as a fraction of the image")
        ->capture_default_str();
    cmd->add_option("--mode", f.mode, "Stability mode: difference or ratio")
        ->capture_default_str();
}

std::string derived_output(const std::string& output_dir, const std::string& input,
                           const std::string& extension) {
    const std::filesystem::path stem = std::filesystem::path(input).stem();
    return (std::filesystem::path(output_dir) / stem).string() + extension;
}

std::string delta_suffixed(const std::string& path, std::int32_t delta, bool multi) {
    if (!multi)
        return path;
    std::filesystem::path p(path);
    const std::string ext = p.extension().string();
    p.replace_extension();
    return p.string() + ".d" + std::to_string(delta) + ext;
}

// Runs `work` over every input, optionally on several worker threads, and
// prints the buffered per-input reports in input order.
void for_each_input(const std::vector<std::string>& inputs, std::int32_t jobs,
                    const std::function<std::string(const std::string&)>& work,
                    std::ostream& out) {
    const std::size_t n = inputs.size();
    std::vector<std::string> reports(n);
    std::vector<std::string> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n)
                return;
            try {
                reports[i] = work(inputs[i]);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const std::int32_t threads =
        std::max<std::int32_t>(1, std::min<std::int32_t>(jobs, static_cast<std::int32_t>(n)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::int32_t t = 0; t < threads; ++t)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    std::string failures;
    for (std::size_t i = 0; i < n; ++i) {
        if (!errors[i].empty()) {
            if (!failures.empty())
                failures += "; ";
            failures += errors[i];
        } else {
            out << reports[i];
        }
    }
    require(failures.empty(), failures);
}

// 3-channel u8 view of any image for overlay rendering.
MultiChannelImage make_display(const MultiChannelImage& in) {
    if (in.channels == 3 && in.depth == SampleDepth::U8)
        return in;
    MultiChannelImage out = MultiChannelImage::make(in.width, in.height, 3, SampleDepth::U8);
    std::vector<float> gray(static_cast<std::size_t>(in.pixel_count()));
    float lo = 0.0f, hi = 0.0f;
    for (std::int64_t p = 0; p < in.pixel_count(); ++p) {
        double acc = 0.0;
        for (std::int32_t c = 0; c < in.channels; ++c)
            acc += in.data[static_cast<std::size_t>(p * in.channels + c)];
        gray[static_cast<std::size_t>(p)] = static_cast<float>(acc / in.channels);
        if (p == 0) {
            lo = hi = gray[0];
        } else {
            lo = std::min(lo, gray[static_cast<std::size_t>(p)]);
            hi = std::max(hi, gray[static_cast<std::size_t>(p)]);
        }
    }
    const float span = std::max(hi - lo, 1e-6f);
    for (std::int64_t p = 0; p < in.pixel_count(); ++p) {
        const float v = std::floor((gray[static_cast<std::size_t>(p)] - lo) / span * 255.0f);
        for (std::int32_t c = 0; c < 3; ++c)
            out.data[static_cast<std::size_t>(p * 3 + c)] = v;
    }
    return out;
}

constexpr std::uint8_t kPalette[8][3] = {
    {230, 25, 75}, {60, 180, 75},  {255, 225, 25}, {0, 130, 200},
    {245, 130, 48}, {145, 30, 180}, {70, 240, 240}, {240, 50, 230},
};

// Burns 1-pixel region boundaries into a display image, color cycling by
// region id, later regions over earlier ones.
MultiChannelImage render_overlay(const MultiChannelImage& input, const RegionSet& set) {
    MultiChannelImage out = make_display(input);
    const std::int32_t w = set.width, h = set.height;
    std::vector<char> mask(static_cast<std::size_t>(w) * h);
    for (const StableRegion& region : set.regions) {
        std::fill(mask.begin(), mask.end(), 0);
        for (const RleRun& run : region.mask)
            for (std::int32_t x = run.x_start; x < run.x_start + run.length; ++x)
                mask[static_cast<std::size_t>(run.y) * w + x] = 1;
        const std::uint8_t* color = kPalette[region.id % 8];
        for (const RleRun& run : region.mask) {
            for (std::int32_t x = run.x_start; x < run.x_start + run.length; ++x) {
                const std::int32_t y = run.y;
                const bool boundary =
                    x == 0 || x == w - 1 || y == 0 || y == h - 1 ||
                    !mask[static_cast<std::size_t>(y) * w + x - 1] ||
                    !mask[static_cast<std::size_t>(y) * w + x + 1] ||
                    !mask[static_cast<std::size_t>(y - 1) * w + x] ||
                    !mask[static_cast<std::size_t>(y + 1) * w + x];
                if (!boundary)
                    continue;
                float* px = out.pixel(x, y);
                px[0] = color[0];
                px[1] = color[1];
                px[2] = color[2];
            }
        }
    }
    return out;
}

OverlapPolicy parse_policy(const std::string& name) {
    if (name == "smallest-on-top")
        return OverlapPolicy::SmallestOnTop;
    if (name == "largest-on-top")
        return OverlapPolicy::LargestOnTop;
    fail("unknown policy '" + name + "' (expected smallest-on-top or largest-on-top)");
}

} // namespace

PipelineResult build_pipeline(const MultiChannelImage& image, const SmoothingParams& smoothing,
                              Norm norm, float max_magnitude, const TreeBuildParams& build) {
    PipelineResult result;
    auto t0 = Clock::now();
    const MultiChannelImage smoothed = smooth(image, smoothing);
    const DerivateField field = compute_derivates(smoothed, norm);
    const QuantizedDerivates q = quantize(field, build.bins, max_magnitude);
    result.preprocess_ms = elapsed_ms(t0);

    t0 = Clock::now();
    const DerivateGrid grid = DerivateGrid::build(q);
    result.tree = canonicalize(build_tree(grid, build));
    result.construct_ms = elapsed_ms(t0);
    return result;
}

MultiChannelImage synthesize_channels(const MultiChannelImage& base, std::int32_t channels,
                                      std::uint64_t seed) {
    base.validate();
    require(channels >= 1, "channel count must be >= 1");
    MultiChannelImage out =
        MultiChannelImage::make(base.width, base.height, channels, SampleDepth::F32);
    for (std::int32_t c = 0; c < channels; ++c) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(c) * 0x9e3779b9ULL);
        std::normal_distribution<float> noise(0.0f, 2.0f);
        const std::int32_t src = c % base.channels;
        for (std::int64_t p = 0; p < base.pixel_count(); ++p)
            out.data[static_cast<std::size_t>(p * channels + c)] =
                base.data[static_cast<std::size_t>(p * base.channels + src)] + noise(rng);
    }
    return out;
}

BenchReport run_benchmark(const MultiChannelImage& base,
                          const std::vector<std::int32_t>& channel_counts,
                          std::int32_t repetitions, const SmoothingParams& smoothing,
                          Norm norm, const TreeBuildParams& build,
                          const ExtractParams& extract, float per_channel_magnitude) {
    require(repetitions >= 3, "benchmark needs at least 3 repetitions");
    require(!channel_counts.empty(), "benchmark needs at least one channel count");
    BenchReport report;
    report.repetitions = repetitions;

    auto ceiling = [&](std::int32_t channels) -> float {
        if (per_channel_magnitude <= 0.0f)
            return 0.0f; // observed maximum
        switch (norm) {
        case Norm::L1: return per_channel_magnitude * static_cast<float>(channels);
        case Norm::L2:
            return per_channel_magnitude * std::sqrt(static_cast<float>(channels));
        default: return per_channel_magnitude;
        }
    };

    // Repetitions iterate round-robin over the channel counts so slow
    // machine drift lands on every configuration equally. The pure
    // construct/traverse phases take the fastest of a small batch of
    // identical runs per repetition; interference only ever adds time,
    // so the batch minimum estimates the undisturbed cost.
    constexpr int kBatch = 5;
    const std::size_t n = channel_counts.size();
    std::vector<MultiChannelImage> images;
    images.reserve(n);
    for (std::int32_t channels : channel_counts)
        images.push_back(synthesize_channels(base, channels));

    std::vector<std::vector<double>> pre(n), cons(n), trav(n);
    for (std::int32_t rep = 0; rep <= repetitions; ++rep) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::int32_t channels = channel_counts[i];
            const int batch = rep == 0 ? 1 : kBatch;

            auto t0 = Clock::now();
            const MultiChannelImage smoothed = smooth(images[i], smoothing);
            const DerivateField field = compute_derivates(smoothed, norm);
            const QuantizedDerivates q = quantize(field, build.bins, ceiling(channels));
            const double t_pre = elapsed_ms(t0);

            double t_cons = 1e300;
            ComponentTree tree;
            for (int b = 0; b < batch; ++b) {
                t0 = Clock::now();
                const DerivateGrid grid = DerivateGrid::build(q);
                tree = canonicalize(build_tree(grid, build));
                t_cons = std::min(t_cons, elapsed_ms(t0));
            }

            double t_trav = 1e300;
            for (int b = 0; b < batch; ++b) {
                t0 = Clock::now();
                const RegionSet regions = extract_stable(tree, extract);
                t_trav = std::min(t_trav, elapsed_ms(t0));
                (void)regions;
            }

            if (rep == 0)
                continue; // warm-up pass
            pre[i].push_back(t_pre);
            cons[i].push_back(t_cons);
            trav[i].push_back(t_trav);
        }
    }

    auto stats = [](const std::vector<double>& xs) {
        PhaseStats s;
        for (double x : xs)
            s.mean_ms += x;
        s.mean_ms /= static_cast<double>(xs.size());
        for (double x : xs)
            s.variance += (x - s.mean_ms) * (x - s.mean_ms);
        s.variance /= static_cast<double>(xs.size());
        return s;
    };
    for (std::size_t i = 0; i < n; ++i)
        report.rows.push_back({channel_counts[i], stats(pre[i]), stats(cons[i]), stats(trav[i])});
    return report;
}

namespace {

int cmd_build(const std::vector<std::string>& inputs, const std::string& output,
              const std::string& output_dir, const PipelineFlags& flags, std::int32_t jobs,
              std::ostream& out) {
    require(inputs.size() == 1 || output.empty(),
            "--output is only valid with a single input; use --output-dir");
    for_each_input(
        inputs, jobs,
        [&](const std::string& input) {
            const MultiChannelImage image = load_image(input);
            std::string path = output;
            if (path.empty())
                path = derived_output(output_dir.empty() ? "." : output_dir, input, ".ctt");
            std::ostringstream report;
            report << "input=" << input << "\n";
            if (flags.use_oracle) {
                auto t0 = Clock::now();
                const MultiChannelImage smoothed = smooth(image, flags.smoothing_params());
                const DerivateField field = compute_derivates(smoothed, parse_norm(flags.norm));
                const QuantizedDerivates q =
                    quantize(field, flags.bins, flags.max_magnitude);
                const double pre = elapsed_ms(t0);
                t0 = Clock::now();
                const ComponentTree tree = oracle_tree(q, flags.min_area);
                write_text_file(path, serialize_tree(tree));
                report << "nodes=" << tree.node_count() << "\n"
                       << "preprocess_ms=" << format_ms(pre) << "\n"
                       << "construct_ms=" << format_ms(elapsed_ms(t0)) << "\n"
                       << "output=" << path << "\n";
                return report.str();
            }
            const PipelineResult result =
                build_pipeline(image, flags.smoothing_params(), parse_norm(flags.norm),
                               flags.max_magnitude, flags.build_params());
            write_text_file(path, serialize_tree(result.tree));
            report << "nodes=" << result.tree.node_count() << "\n"
                   << "preprocess_ms=" << format_ms(result.preprocess_ms) << "\n"
                   << "construct_ms=" << format_ms(result.construct_ms) << "\n"
                   << "output=" << path << "\n";
            return report.str();
        },
        out);
    return 0;
}

int cmd_mshr(const std::vector<std::string>& inputs, const std::string& from_tree,
             const std::string& output, const std::string& output_dir,
             const PipelineFlags& pflags, const ExtractFlags& eflags,
             const std::string& label_out, const std::string& overlay_out,
             const std::string& policy, bool segment_defaults, std::int32_t jobs,
             std::ostream& out) {
    require(!inputs.empty() || !from_tree.empty(), "need an input image or --from-tree");
    require(inputs.size() <= 1 || from_tree.empty(),
            "--from-tree cannot be combined with several inputs");
    require(inputs.size() <= 1 || output.empty(),
            "--output is only valid with a single input; use --output-dir");
    const bool multi_delta = eflags.deltas.size() > 1;

    auto process = [&](const std::string& input) {
        std::ostringstream report;
        std::optional<MultiChannelImage> image;
        ComponentTree tree;
        if (!input.empty()) {
            image = load_image(input);
            report << "input=" << input << "\n";
        }
        if (!from_tree.empty()) {
            auto t0 = Clock::now();
            tree = parse_tree(read_text_file(from_tree));
            report << "tree=" << from_tree << "\n"
                   << "load_ms=" << format_ms(elapsed_ms(t0)) << "\n";
            if (image)
                require(image->width == tree.width && image->height == tree.height,
                        "input image and tree dimensions disagree");
        } else {
            PipelineResult result =
                build_pipeline(*image, pflags.smoothing_params(), parse_norm(pflags.norm),
                               pflags.max_magnitude, pflags.build_params());
            tree = std::move(result.tree);
            report << "nodes=" << tree.node_count() << "\n"
                   << "preprocess_ms=" << format_ms(result.preprocess_ms) << "\n"
                   << "construct_ms=" << format_ms(result.construct_ms) << "\n";
        }

        std::string base_output = output;
        if (base_output.empty()) {
            const std::string stem_source = !input.empty() ? input : from_tree;
            base_output =
                derived_output(output_dir.empty() ? "." : output_dir, stem_source, ".rgn");
        }

        for (std::int32_t delta : eflags.deltas) {
            const ExtractParams params = eflags.extract_params(pflags.min_area, delta);
            auto t0 = Clock::now();
            const RegionSet set = extract_stable(tree, params);
            const double traverse = elapsed_ms(t0);
            const std::string path = delta_suffixed(base_output, delta, multi_delta);
            write_text_file(path, serialize_regions(set));
            report << "delta=" << delta << " regions=" << set.regions.size()
                   << " traverse_ms=" << format_ms(traverse) << " output=" << path << "\n";

            auto side_output = [&](const std::string& explicit_path, const char* suffix,
                                   bool available) -> std::string {
                if (!explicit_path.empty())
                    return delta_suffixed(explicit_path, delta, multi_delta);
                if (!segment_defaults || !available)
                    return "";
                std::filesystem::path p(path); // already delta-suffixed
                p.replace_extension();
                return p.string() + suffix;
            };
            const std::string lpath = side_output(label_out, ".labels.pgm", true);
            // A derived overlay needs the source image; with --from-tree
            // alone it is simply skipped.
            const std::string opath =
                side_output(overlay_out, ".overlay.ppm", image.has_value());
            if (!lpath.empty()) {
                save_label_image(label_map(set, parse_policy(policy)), lpath);
                report << "labels=" << lpath << "\n";
            }
            if (!opath.empty()) {
                require(image.has_value(), "--overlay-out needs the input image");
                save_image(render_overlay(*image, set), opath, ImageFormat::Ppm);
                report << "overlay=" << opath << "\n";
            }
        }
        return report.str();
    };

    if (inputs.empty()) {
        out << process("");
        return 0;
    }
    for_each_input(inputs, jobs, process, out);
    return 0;
}

int cmd_mser(const std::vector<std::string>& inputs, const std::string& output,
             const std::string& output_dir, std::int32_t bins, const ExtractFlags& eflags,
             std::int32_t min_area, const std::string& polarity, std::int32_t jobs,
             std::ostream& out) {
    require(inputs.size() == 1 || output.empty(),
            "--output is only valid with a single input; use --output-dir");
    const bool multi_delta = eflags.deltas.size() > 1;
    for_each_input(
        inputs, jobs,
        [&](const std::string& input) {
            const MultiChannelImage image = load_image(input);
            std::ostringstream report;
            report << "input=" << input << "\n";
            std::string base_output = output;
            if (base_output.empty())
                base_output =
                    derived_output(output_dir.empty() ? "." : output_dir, input, ".rgn");
            for (std::int32_t delta : eflags.deltas) {
                ExtractParams params = eflags.extract_params(min_area, delta);
                params.polarity = parse_polarity(polarity);
                auto t0 = Clock::now();
                const RegionSet set = extract_mser(image, bins, params);
                const double total = elapsed_ms(t0);
                const std::string path = delta_suffixed(base_output, delta, multi_delta);
                write_text_file(path, serialize_regions(set));
                report << "delta=" << delta << " regions=" << set.regions.size()
                       << " total_ms=" << format_ms(total) << " output=" << path << "\n";
            }
            return report.str();
        },
        out);
    return 0;
}

int cmd_bench(const std::string& input, std::vector<std::int32_t> channels,
              std::int32_t reps, const PipelineFlags& pflags, const ExtractFlags& eflags,
              std::ostream& out, std::ostream& err) {
    const MultiChannelImage base = load_image(input);
    const BenchReport report =
        run_benchmark(base, channels, reps, pflags.smoothing_params(),
                      parse_norm(pflags.norm), pflags.build_params(),
                      eflags.extract_params(pflags.min_area, eflags.deltas.front()),
                      pflags.max_magnitude);

    out << "channels\tpreprocess_ms\tpreprocess_var\tconstruct_ms\tconstruct_var"
           "\ttraverse_ms\ttraverse_var\n";
    char buf[256];
    for (const BenchRow& row : report.rows) {
        std::snprintf(buf, sizeof buf, "%d\t%.4f\t%.6f\t%.4f\t%.6f\t%.4f\t%.6f\n",
                      row.channels, row.preprocess.mean_ms, row.preprocess.variance,
                      row.construct.mean_ms, row.construct.variance, row.traverse.mean_ms,
                      row.traverse.variance);
        out << buf;
    }

    err << "  channels | preprocess [ms] | construct [ms] | traverse [ms]   ("
        << report.repetitions << " reps)\n";
    for (const BenchRow& row : report.rows) {
        std::snprintf(buf, sizeof buf, "  %8d | %9.3f±%-6.3f | %8.3f±%-6.3f | %8.3f±%-6.3f\n",
                      row.channels, row.preprocess.mean_ms, std::sqrt(row.preprocess.variance),
                      row.construct.mean_ms, std::sqrt(row.construct.variance),
                      row.traverse.mean_ms, std::sqrt(row.traverse.variance));
        err << buf;
    }
    return 0;
}

int cmd_eval(const std::string& regions_path, const std::string& gt_path, double threshold,
             std::ostream& out) {
    const RegionSet set = parse_regions(read_text_file(regions_path));
    const std::vector<GroundTruthBox> gts = load_ground_truth(gt_path);
    const double r = recall(set, gts, threshold);
    char buf[160];
    std::snprintf(buf, sizeof buf, "recall=%.3f\n", r);
    out << buf;
    std::int32_t matched = 0;
    std::vector<std::string> lines;
    for (const GroundTruthBox& gt : gts) {
        double best = 0.0;
        std::int32_t best_region = -1;
        for (const StableRegion& region : set.regions) {
            const double overlap = pascal_overlap(region.bbox, gt);
            if (overlap > best) {
                best = overlap;
                best_region = region.id;
            }
        }
        const bool hit = best > threshold;
        matched += hit ? 1 : 0;
        std::snprintf(buf, sizeof buf, "box label=%s status=%s best_iou=%.3f region=%d\n",
                      gt.label.c_str(), hit ? "matched" : "unmatched", best, best_region);
        lines.push_back(buf);
    }
    std::snprintf(buf, sizeof buf, "matched=%d total=%d threshold=%g\n", matched,
                  static_cast<std::int32_t>(gts.size()), threshold);
    out << buf;
    for (const std::string& line : lines)
        out << line;
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Derivate-based component-trees and stable-region extraction"};
    app.name("mshr");
    app.require_subcommand(1);

    // build
    auto* build = app.add_subcommand("build", "Build a component-tree file (.ctt)");
    std::vector<std::string> build_inputs;
    std::string build_output, build_outdir;
    std::int32_t build_jobs = 1;
    PipelineFlags build_flags;
    build->add_option("input", build_inputs, "Input image(s) (.pgm/.ppm/.mci)")->required();
    build->add_option("-o,--output", build_output, "Output tree path (single input)");
    build->add_option("--output-dir", build_outdir, "Output directory for several inputs");
    build->add_option("--jobs", build_jobs, "Worker threads across input files")
        ->capture_default_str();
    add_pipeline_flags(build, build_flags);

    // mshr / segment
    struct RegionCmd {
        CLI::App* cmd = nullptr;
        std::vector<std::string> inputs;
        std::string from_tree, output, outdir, label_out, overlay_out;
        std::string policy = "smallest-on-top";
        std::int32_t jobs = 1;
        PipelineFlags pflags;
        ExtractFlags eflags;
    };
    RegionCmd mshr_cmd;
    mshr_cmd.cmd = app.add_subcommand("mshr", "Extract maximally stable homogeneous regions");
    RegionCmd segment_cmd;
    segment_cmd.cmd = app.add_subcommand("segment", "mshr plus label-map and overlay renderings");
    for (RegionCmd* rc : {&mshr_cmd, &segment_cmd}) {
        rc->cmd->add_option("input", rc->inputs, "Input image(s)");
        rc->cmd->add_option("--from-tree", rc->from_tree, "Reuse a prebuilt .ctt file");
        rc->cmd->add_option("-o,--output", rc->output, "Output region file (.rgn)");
        rc->cmd->add_option("--output-dir", rc->outdir, "Output directory for several inputs");
        rc->cmd->add_option("--label-out", rc->label_out, "Write a label map (.pgm, 16-bit)");
        rc->cmd->add_option("--overlay-out", rc->overlay_out,
                            "Write region boundaries over the input (.ppm)");
        rc->cmd->add_option("--policy", rc->policy,
                            "Overlap policy: smallest-on-top or largest-on-top")
            ->capture_default_str();
        rc->cmd->add_option("--jobs", rc->jobs, "Worker threads across input files")
            ->capture_default_str();
        add_pipeline_flags(rc->cmd, rc->pflags);
        add_extract_flags(rc->cmd, rc->eflags);
    }

    // mser
    auto* mser = app.add_subcommand("mser", "Gray-value MSER baseline (1-channel input)");
    std::vector<std::string> mser_inputs;
    std::string mser_output, mser_outdir, mser_polarity = "both";
    std::int32_t mser_bins = 256, mser_min_area = 30, mser_jobs = 1;
    ExtractFlags mser_eflags;
    mser->add_option("input", mser_inputs, "Input image(s), 1 channel")->required();
    mser->add_option("-o,--output", mser_output, "Output region file (.rgn)");
    mser->add_option("--output-dir", mser_outdir, "Output directory for several inputs");
    mser->add_option("--polarity", mser_polarity, "light, dark or both")->capture_default_str();
    mser->add_option("--bins", mser_bins, "Gray levels")->capture_default_str();
    mser->add_option("--min-area", mser_min_area, "Minimum region area")->capture_default_str();
    mser->add_option("--jobs", mser_jobs, "Worker threads across input files")
        ->capture_default_str();
    add_extract_flags(mser, mser_eflags);

    // bench
    auto* bench = app.add_subcommand("bench", "Channel-scaling benchmark");
    std::string bench_input;
    std::vector<std::int32_t> bench_channels = {1, 2, 4, 8};
    std::int32_t bench_reps = 5;
    PipelineFlags bench_pflags;
    ExtractFlags bench_eflags;
    bench->add_option("input", bench_input, "Base image")->required();
    bench->add_option("--channels", bench_channels, "Channel counts to synthesize")
        ->capture_default_str();
    bench->add_option("--reps", bench_reps, "Timed repetitions per configuration (>= 3)")
        ->capture_default_str();
    add_pipeline_flags(bench, bench_pflags);
    add_extract_flags(bench, bench_eflags);

    // eval
    auto* eval = app.add_subcommand("eval", "Recall against ground-truth boxes");
    std::string eval_regions, eval_gt;
    double eval_threshold = 0.5;
    eval->add_option("--regions", eval_regions, "Region file (.rgn)")->required();
    eval->add_option("--ground-truth", eval_gt, "Ground-truth boxes, one per line")->required();
    eval->add_option("--threshold", eval_threshold, "PASCAL overlap threshold")
        ->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (build->parsed())
            return cmd_build(build_inputs, build_output, build_outdir, build_flags, build_jobs,
                             out);
        for (RegionCmd* rc : {&mshr_cmd, &segment_cmd}) {
            if (rc->cmd->parsed())
                return cmd_mshr(rc->inputs, rc->from_tree, rc->output, rc->outdir, rc->pflags,
                                rc->eflags, rc->label_out, rc->overlay_out, rc->policy,
                                rc == &segment_cmd, rc->jobs, out);
        }
        if (mser->parsed())
            return cmd_mser(mser_inputs, mser_output, mser_outdir, mser_bins, mser_eflags,
                            mser_min_area, mser_polarity, mser_jobs, out);
        if (bench->parsed())
            return cmd_bench(bench_input, bench_channels, bench_reps, bench_pflags,
                             bench_eflags, out, err);
        if (eval->parsed())
            return cmd_eval(eval_regions, eval_gt, eval_threshold, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    err << "error: no subcommand\n";
    return 1;
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i)
        args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

} // namespace mshr::cli
