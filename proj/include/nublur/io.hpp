#pragma once

// File formats.
//
// NUBF blur-field container, little-endian, no padding:
//   "NUBF" | u32 version (1) | u32 B | u32 K | u32 H | u32 W
//   | B kernels, K*K float32 row-major | B mixing maps, H*W float32 row-major
//
// Images: PFM (float32, lossless) and 8/16-bit PNG mapped linearly to [0, 1].
// PNG gamma chunks are ignored.

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "nublur/image.hpp"
#include "nublur/types.hpp"

namespace nublur::io {

enum class ErrorCode {
    io,
    bad_magic,
    version_mismatch,
    truncated,
    trailing_data,
    invariant_violation,
    unsupported_format,
    decode_failure,
};

const char* to_string(ErrorCode code);

class FormatError : public std::runtime_error {
public:
    FormatError(ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

inline constexpr std::uint32_t kNubfVersion = 1;

struct ReadOptions {
    double tolerance = 1e-4;
    bool renormalize = false;
};

std::vector<std::uint8_t> encode_blurfield(const BlurField& field);
BlurField decode_blurfield(std::span<const std::uint8_t> bytes, ReadOptions options = {});
/// Header and payload without invariant checks.
RawBlurField decode_blurfield_raw(std::span<const std::uint8_t> bytes);

void write_blurfield(const BlurField& field, const std::filesystem::path& path);
BlurField read_blurfield(const std::filesystem::path& path, ReadOptions options = {});

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

enum class PngDepth { eight = 8, sixteen = 16 };

/// Format chosen by extension: .pfm or .png (case-insensitive).
Image read_image(const std::filesystem::path& path);
/// PFM stores samples as float32 unchanged; PNG clamps to [0, 1] and quantizes.
void write_image(const Image& image, const std::filesystem::path& path, PngDepth depth = PngDepth::eight);

std::vector<std::uint8_t> encode_pfm(const Image& image);
Image decode_pfm(std::span<const std::uint8_t> bytes);

/// Grayscale PNG whose raw sample values are the labels.
SegmentLabels read_labels(const std::filesystem::path& path);
void write_labels(const SegmentLabels& labels, const std::filesystem::path& path);

/// Per-pixel kernels sampled every `stride` pixels (at cell centers), each
/// scaled to peak 1, tiled with 1-pixel separators. Single channel.
Image render_kernel_grid(const BlurField& field, int stride);

}  // namespace nublur::io
