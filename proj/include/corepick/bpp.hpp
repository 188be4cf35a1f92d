#pragma once

#include <filesystem>
#include <vector>

#include "corepick/dataset.hpp"
#include "corepick/image_codec.hpp"

namespace corepick {

struct BppConfig {
    int jpeg_quality = 100;
    ChromaSubsampling subsampling = ChromaSubsampling::None;
    // Score already-encoded JPEG files by their stored byte size instead of
    // re-encoding. Never auto-mixed with re-encoding within one dataset:
    // the two byte counts are not comparable across samples.
    bool use_stored_size = false;
};

// 8 * stored_bytes / (width * height) for a file that already is a JPEG.
double bpp_from_stored(const std::filesystem::path& image_path);

// Encodes the buffer at the configured quality/subsampling and measures
// 8 * encoded_bytes / (width * height).
double bpp_reencode(const PixelBuffer& pixels, const BppConfig& config);

// One score per manifest record, manifest order. Per-image failures are
// reported with the offending sample id (first failing record wins).
std::vector<double> score_dataset_bpp(const DatasetManifest& manifest,
                                      const BppConfig& config, int threads = 0);

} // namespace corepick
