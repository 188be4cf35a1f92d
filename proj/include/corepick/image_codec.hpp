#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "corepick/dataset.hpp"

namespace corepick {

enum class ImageFormat { Jpeg, Png, Unknown };

enum class ChromaSubsampling {
    None, // 4:4:4
    S420, // 4:2:0
};

ImageFormat sniff_format(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

// Decodes an 8-bit grayscale or RGB image. 16-bit inputs and channel counts
// other than 1/3 are rejected, never truncated.
PixelBuffer decode_image(std::span<const std::uint8_t> bytes);

// Decodes a segmentation mask: 8-bit single-channel or paletted PNG. Palette
// images yield the raw palette indices, not colors.
MaskBuffer decode_mask(std::span<const std::uint8_t> bytes);

struct JpegHeader {
    std::size_t width = 0;
    std::size_t height = 0;
    int components = 0;
};

// Reads dimensions from a JPEG header without decoding pixel data.
JpegHeader read_jpeg_header(std::span<const std::uint8_t> bytes);

// Baseline JPEG encode. Grayscale buffers become single-component streams;
// subsampling only applies to 3-channel input. Deterministic for fixed input
// and settings.
std::vector<std::uint8_t> encode_jpeg(const PixelBuffer& pixels, int quality,
                                      ChromaSubsampling subsampling);

} // namespace corepick
