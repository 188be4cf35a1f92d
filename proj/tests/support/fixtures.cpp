#include "fixtures.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>

#include <png.h>
#include <unistd.h>

#include "corepick/error.hpp"
#include "corepick/image_codec.hpp"
#include "corepick/rng.hpp"

namespace corepick::testing {

TmpDir::TmpDir() {
    static std::atomic<unsigned> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    const unsigned index = counter++;
    path_ = base / cat("corepick-test-", ::getpid(), "-", index);
    std::filesystem::create_directories(path_);
}

TmpDir::~TmpDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail("cannot open fixture file: ", path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) fail("cannot write fixture file: ", path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail("cannot open fixture file: ", path.string());
    out << text;
    if (!out) fail("cannot write fixture file: ", path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open file: ", path.string());
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return text;
}

namespace {

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* file = nullptr;

    explicit PngWriter(const std::filesystem::path& path) {
        file = std::fopen(path.string().c_str(), "wb");
        if (file == nullptr) fail("cannot open fixture file: ", path.string());
        png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        info = png_create_info_struct(png);
        png_init_io(png, file);
    }

    ~PngWriter() {
        png_destroy_write_struct(&png, &info);
        if (file != nullptr) std::fclose(file);
    }
};

} // namespace

void write_png_gray8(const std::filesystem::path& path, std::size_t w, std::size_t h,
                     std::span<const std::uint8_t> pixels) {
    PngWriter writer(path);
    if (setjmp(png_jmpbuf(writer.png))) fail("png write failed: ", path.string());
    png_set_IHDR(writer.png, writer.info, static_cast<png_uint_32>(w),
                 static_cast<png_uint_32>(h), 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(writer.png, writer.info);
    for (std::size_t y = 0; y < h; ++y) {
        png_write_row(writer.png, const_cast<png_bytep>(pixels.data() + y * w));
    }
    png_write_end(writer.png, nullptr);
}

void write_png_rgb8(const std::filesystem::path& path, std::size_t w, std::size_t h,
                    std::span<const std::uint8_t> pixels) {
    PngWriter writer(path);
    if (setjmp(png_jmpbuf(writer.png))) fail("png write failed: ", path.string());
    png_set_IHDR(writer.png, writer.info, static_cast<png_uint_32>(w),
                 static_cast<png_uint_32>(h), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(writer.png, writer.info);
    for (std::size_t y = 0; y < h; ++y) {
        png_write_row(writer.png, const_cast<png_bytep>(pixels.data() + y * w * 3));
    }
    png_write_end(writer.png, nullptr);
}

void write_png_gray16(const std::filesystem::path& path, std::size_t w, std::size_t h,
                      std::span<const std::uint16_t> pixels) {
    PngWriter writer(path);
    if (setjmp(png_jmpbuf(writer.png))) fail("png write failed: ", path.string());
    png_set_IHDR(writer.png, writer.info, static_cast<png_uint_32>(w),
                 static_cast<png_uint_32>(h), 16, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(writer.png, writer.info);
    std::vector<std::uint8_t> row(w * 2);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const std::uint16_t v = pixels[y * w + x];
            row[x * 2] = static_cast<std::uint8_t>(v >> 8);
            row[x * 2 + 1] = static_cast<std::uint8_t>(v & 0xff);
        }
        png_write_row(writer.png, row.data());
    }
    png_write_end(writer.png, nullptr);
}

void write_png_palette(const std::filesystem::path& path, std::size_t w, std::size_t h,
                       std::span<const std::uint8_t> indices, int bit_depth) {
    PngWriter writer(path);
    if (setjmp(png_jmpbuf(writer.png))) fail("png write failed: ", path.string());
    png_set_IHDR(writer.png, writer.info, static_cast<png_uint_32>(w),
                 static_cast<png_uint_32>(h), bit_depth, PNG_COLOR_TYPE_PALETTE,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_color palette[256];
    for (int i = 0; i < 256; ++i) {
        palette[i].red = static_cast<png_byte>(i);
        palette[i].green = static_cast<png_byte>(255 - i);
        palette[i].blue = static_cast<png_byte>(i / 2);
    }
    png_set_PLTE(writer.png, writer.info, palette, 1 << bit_depth);
    png_write_info(writer.png, writer.info);
    if (bit_depth < 8) png_set_packing(writer.png);
    for (std::size_t y = 0; y < h; ++y) {
        png_write_row(writer.png, const_cast<png_bytep>(indices.data() + y * w));
    }
    png_write_end(writer.png, nullptr);
}

PixelBuffer constant_image(std::size_t w, std::size_t h, std::size_t channels,
                           std::uint8_t value) {
    PixelBuffer buffer;
    buffer.width = w;
    buffer.height = h;
    buffer.channels = channels;
    buffer.data.assign(w * h * channels, value);
    return buffer;
}

PixelBuffer gradient_image(std::size_t w, std::size_t h, std::size_t channels) {
    PixelBuffer buffer;
    buffer.width = w;
    buffer.height = h;
    buffer.channels = channels;
    buffer.data.resize(w * h * channels);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const std::uint8_t value = static_cast<std::uint8_t>(
                (x + y) * 255 / (w + h > 2 ? w + h - 2 : 1));
            for (std::size_t c = 0; c < channels; ++c) {
                buffer.data[(y * w + x) * channels + c] = value;
            }
        }
    }
    return buffer;
}

PixelBuffer noise_image(std::size_t w, std::size_t h, std::size_t channels,
                        std::uint64_t seed) {
    PixelBuffer buffer;
    buffer.width = w;
    buffer.height = h;
    buffer.channels = channels;
    buffer.data.resize(w * h * channels);
    Rng rng(seed);
    for (auto& byte : buffer.data) {
        byte = static_cast<std::uint8_t>(rng.index(256));
    }
    return buffer;
}

void write_jpeg_file(const std::filesystem::path& path, const PixelBuffer& pixels) {
    const auto bytes = encode_jpeg(pixels, 100, ChromaSubsampling::None);
    write_bytes(path, bytes);
}

} // namespace corepick::testing
