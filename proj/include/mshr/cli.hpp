#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mshr/component_tree.hpp"
#include "mshr/image.hpp"
#include "mshr/preprocess.hpp"
#include "mshr/regions.hpp"

namespace mshr::cli {

/// Entry point behind the `mshr` binary. `args` excludes the program
/// name. Diagnostics go to `err`, data to `out` and files; returns the
/// process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

struct PhaseStats {
    double mean_ms = 0.0;
    double variance = 0.0; // ms^2
};

struct BenchRow {
    std::int32_t channels = 0;
    PhaseStats preprocess;
    PhaseStats construct;
    PhaseStats traverse;
};

struct BenchReport {
    std::int32_t repetitions = 0;
    std::vector<BenchRow> rows;
};

/// Stacks noisy copies of the base channels until `channels` are reached
/// (Gaussian noise, sigma 2, deterministic per channel index).
MultiChannelImage synthesize_channels(const MultiChannelImage& base, std::int32_t channels,
                                      std::uint64_t seed = 1);

/// Times preprocess / construct / traverse per channel count with one
/// untimed warm-up run per configuration. A positive
/// per_channel_magnitude fixes the quantization ceiling to the
/// norm-scaled theoretical bound (e.g. 255 -> 255*sqrt(C) for L2) so the
/// bin structure is comparable across channel counts; 0 keeps the
/// observed maximum.
BenchReport run_benchmark(const MultiChannelImage& base,
                          const std::vector<std::int32_t>& channel_counts,
                          std::int32_t repetitions, const SmoothingParams& smoothing,
                          Norm norm, const TreeBuildParams& build,
                          const ExtractParams& extract,
                          float per_channel_magnitude = 0.0f);

struct PipelineResult {
    ComponentTree tree; // canonical
    double preprocess_ms = 0.0;
    double construct_ms = 0.0;
};

/// smooth -> derivates -> quantize -> grid -> flooding -> canonicalize.
PipelineResult build_pipeline(const MultiChannelImage& image, const SmoothingParams& smoothing,
                              Norm norm, float max_magnitude, const TreeBuildParams& build);

} // namespace mshr::cli
