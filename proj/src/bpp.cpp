#include "corepick/bpp.hpp"

#include <optional>
#include <string>

#include "corepick/error.hpp"
#include "corepick/parallel.hpp"

namespace corepick {

namespace {

void check_quality(const BppConfig& config) {
    if (config.jpeg_quality < 1 || config.jpeg_quality > 100) {
        fail("JPEG quality ", config.jpeg_quality, " out of range [1, 100]");
    }
}

} // namespace

double bpp_from_stored(const std::filesystem::path& image_path) {
    const auto bytes = read_file_bytes(image_path);
    if (sniff_format(bytes) != ImageFormat::Jpeg) {
        fail(image_path.string(),
             " is not a JPEG; stored-size scoring needs JPEG sources (re-encode instead)");
    }
    const JpegHeader header = read_jpeg_header(bytes);
    if (header.width == 0 || header.height == 0) {
        fail(image_path.string(), ": JPEG header reports zero-sized image");
    }
    return static_cast<double>(bytes.size()) * 8.0 /
           (static_cast<double>(header.width) * static_cast<double>(header.height));
}

double bpp_reencode(const PixelBuffer& pixels, const BppConfig& config) {
    check_quality(config);
    const auto encoded = encode_jpeg(pixels, config.jpeg_quality, config.subsampling);
    return static_cast<double>(encoded.size()) * 8.0 /
           (static_cast<double>(pixels.width) * static_cast<double>(pixels.height));
}

std::vector<double> score_dataset_bpp(const DatasetManifest& manifest,
                                      const BppConfig& config, int threads) {
    check_quality(config);
    const std::size_t n = manifest.size();
    std::vector<double> scores(n, 0.0);
    std::vector<std::optional<std::string>> failures(n);

    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto& record = manifest.records[i];
            try {
                if (config.use_stored_size) {
                    scores[i] = bpp_from_stored(manifest.image_path(record));
                } else {
                    scores[i] = bpp_reencode(load_image(manifest.image_path(record)), config);
                }
            } catch (const std::exception& e) {
                failures[i] = cat("sample \"", record.id, "\": ", e.what());
            }
        }
    });

    for (const auto& failure : failures) {
        if (failure) fail(*failure);
    }
    return scores;
}

} // namespace corepick
