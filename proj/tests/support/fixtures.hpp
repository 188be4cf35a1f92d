#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "corepick/dataset.hpp"

namespace corepick::testing {

// Unique directory under the system temp dir, removed on destruction.
class TmpDir {
public:
    TmpDir();
    ~TmpDir();
    TmpDir(const TmpDir&) = delete;
    TmpDir& operator=(const TmpDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// PNG writers used to build test inputs. Independent of the decoder under
// test only in direction: they drive libpng's write API, which the decoder
// never touches.
void write_png_gray8(const std::filesystem::path& path, std::size_t w, std::size_t h,
                     std::span<const std::uint8_t> pixels);
void write_png_rgb8(const std::filesystem::path& path, std::size_t w, std::size_t h,
                    std::span<const std::uint8_t> pixels);
void write_png_gray16(const std::filesystem::path& path, std::size_t w, std::size_t h,
                      std::span<const std::uint16_t> pixels);
// Paletted PNG storing the given indices; bit_depth in {1,2,4,8}.
void write_png_palette(const std::filesystem::path& path, std::size_t w, std::size_t h,
                       std::span<const std::uint8_t> indices, int bit_depth = 8);

PixelBuffer constant_image(std::size_t w, std::size_t h, std::size_t channels,
                           std::uint8_t value);
PixelBuffer gradient_image(std::size_t w, std::size_t h, std::size_t channels);
PixelBuffer noise_image(std::size_t w, std::size_t h, std::size_t channels,
                        std::uint64_t seed);

// Encodes pixels as a quality-100 4:4:4 JPEG file.
void write_jpeg_file(const std::filesystem::path& path, const PixelBuffer& pixels);

} // namespace corepick::testing
