#include "corepick/image_codec.hpp"

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <jpeglib.h>
#include <png.h>

#include "corepick/error.hpp"

namespace corepick {

namespace {

// --- libjpeg error plumbing: capture the message, longjmp out ---

struct JpegErrorState {
    jpeg_error_mgr mgr;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit_cb(j_common_ptr cinfo) {
    auto* state = reinterpret_cast<JpegErrorState*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, state->message);
    std::longjmp(state->jump, 1);
}

void jpeg_silence_cb(j_common_ptr, int) {}

// --- libpng error plumbing ---

struct PngErrorState {
    std::string message;
};

void png_error_cb(png_structp png, png_const_charp msg) {
    auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
    if (state != nullptr) state->message = msg != nullptr ? msg : "unknown";
    png_longjmp(png, 1);
}

void png_warning_cb(png_structp, png_const_charp) {}

struct PngReadCursor {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos;
};

void png_read_cb(png_structp png, png_bytep out, png_size_t count) {
    auto* cursor = static_cast<PngReadCursor*>(png_get_io_ptr(png));
    if (cursor->pos + count > cursor->size) {
        png_error(png, "unexpected end of PNG data");
    }
    std::memcpy(out, cursor->data + cursor->pos, count);
    cursor->pos += count;
}

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    PngErrorState error_state;
    PngReadCursor cursor{};

    PngReader(std::span<const std::uint8_t> bytes) {
        png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error_state,
                                     png_error_cb, png_warning_cb);
        if (png == nullptr) fail("PNG decode failed: out of memory");
        info = png_create_info_struct(png);
        if (info == nullptr) {
            png_destroy_read_struct(&png, nullptr, nullptr);
            fail("PNG decode failed: out of memory");
        }
        cursor = PngReadCursor{bytes.data(), bytes.size(), 0};
        png_set_read_fn(png, &cursor, png_read_cb);
    }

    ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }

    PngReader(const PngReader&) = delete;
    PngReader& operator=(const PngReader&) = delete;
};

void read_png_rows(png_structp png, std::uint8_t* out, std::size_t height,
                   std::size_t rowbytes) {
    for (std::size_t y = 0; y < height; ++y) {
        png_read_row(png, out + y * rowbytes, nullptr);
    }
}

PixelBuffer decode_png_image(std::span<const std::uint8_t> bytes) {
    PngReader reader(bytes);
    PixelBuffer out;
    if (setjmp(png_jmpbuf(reader.png))) {
        fail("PNG decode failed: ", reader.error_state.message);
    }
    png_read_info(reader.png, reader.info);

    const png_uint_32 width = png_get_image_width(reader.png, reader.info);
    const png_uint_32 height = png_get_image_height(reader.png, reader.info);
    const int bit_depth = png_get_bit_depth(reader.png, reader.info);
    const int color_type = png_get_color_type(reader.png, reader.info);

    if (bit_depth == 16) {
        fail("16-bit PNG rejected (8-bit input required, truncation would corrupt scores)");
    }
    if (color_type == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(reader.png);
    } else if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
        png_set_expand_gray_1_2_4_to_8(reader.png);
    }
    png_read_update_info(reader.png, reader.info);

    const int channels = png_get_channels(reader.png, reader.info);
    if (channels != 1 && channels != 3) {
        fail("unsupported PNG channel count ", channels, " (grayscale or RGB required)");
    }

    out.width = width;
    out.height = height;
    out.channels = static_cast<std::size_t>(channels);
    out.data.resize(out.width * out.height * out.channels);
    read_png_rows(reader.png, out.data.data(), out.height, out.width * out.channels);
    png_read_end(reader.png, nullptr);
    return out;
}

MaskBuffer decode_png_mask(std::span<const std::uint8_t> bytes) {
    PngReader reader(bytes);
    std::vector<std::uint8_t> raw;
    MaskBuffer out;
    if (setjmp(png_jmpbuf(reader.png))) {
        fail("mask decode failed: ", reader.error_state.message);
    }
    png_read_info(reader.png, reader.info);

    const png_uint_32 width = png_get_image_width(reader.png, reader.info);
    const png_uint_32 height = png_get_image_height(reader.png, reader.info);
    const int bit_depth = png_get_bit_depth(reader.png, reader.info);
    const int color_type = png_get_color_type(reader.png, reader.info);

    if (bit_depth == 16) {
        fail("16-bit mask PNG rejected (8-bit class indices required)");
    }
    if (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_PALETTE) {
        fail("multi-channel mask rejected (single-channel or paletted PNG of class indices required)");
    }
    if (bit_depth < 8) {
        // Unpacks sub-byte pixels to one byte each without value scaling, so
        // palette/class indices pass through untouched.
        png_set_packing(reader.png);
    }
    png_read_update_info(reader.png, reader.info);

    out.width = width;
    out.height = height;
    raw.resize(out.width * out.height);
    read_png_rows(reader.png, raw.data(), out.height, out.width);
    png_read_end(reader.png, nullptr);

    out.labels.assign(raw.begin(), raw.end());
    return out;
}

PixelBuffer decode_jpeg_image(std::span<const std::uint8_t> bytes) {
    jpeg_decompress_struct cinfo;
    JpegErrorState err;
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_error_exit_cb;
    err.mgr.emit_message = jpeg_silence_cb;

    PixelBuffer out;
    std::string failure;
    jpeg_create_decompress(&cinfo);
    if (setjmp(err.jump)) {
        failure = err.message;
        jpeg_destroy_decompress(&cinfo);
        fail("JPEG decode failed: ", failure);
    }

    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);

    if (cinfo.data_precision != 8) {
        jpeg_destroy_decompress(&cinfo);
        fail("unsupported JPEG bit depth ", cinfo.data_precision, " (8-bit required)");
    }
    if (cinfo.jpeg_color_space == JCS_GRAYSCALE) {
        cinfo.out_color_space = JCS_GRAYSCALE;
    } else if (cinfo.jpeg_color_space == JCS_YCbCr ||
               cinfo.jpeg_color_space == JCS_RGB) {
        cinfo.out_color_space = JCS_RGB;
    } else {
        jpeg_destroy_decompress(&cinfo);
        fail("unsupported JPEG color space (grayscale or RGB/YCbCr required)");
    }

    jpeg_start_decompress(&cinfo);
    out.width = cinfo.output_width;
    out.height = cinfo.output_height;
    out.channels = static_cast<std::size_t>(cinfo.output_components);
    out.data.resize(out.width * out.height * out.channels);

    const std::size_t rowbytes = out.width * out.channels;
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = out.data.data() + cinfo.output_scanline * rowbytes;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return out;
}

} // namespace

ImageFormat sniff_format(std::span<const std::uint8_t> bytes) {
    static const std::uint8_t png_magic[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), png_magic, 8) == 0) {
        return ImageFormat::Png;
    }
    if (bytes.size() >= 3 && bytes[0] == 0xff && bytes[1] == 0xd8 && bytes[2] == 0xff) {
        return ImageFormat::Jpeg;
    }
    return ImageFormat::Unknown;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open file: ", path.string());
    std::vector<std::uint8_t> bytes;
    in.seekg(0, std::ios::end);
    const auto size = in.tellg();
    if (size < 0) fail("cannot read file: ", path.string());
    bytes.resize(static_cast<std::size_t>(size));
    in.seekg(0, std::ios::beg);
    in.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!in) fail("cannot read file: ", path.string());
    return bytes;
}

PixelBuffer decode_image(std::span<const std::uint8_t> bytes) {
    switch (sniff_format(bytes)) {
    case ImageFormat::Png:
        return decode_png_image(bytes);
    case ImageFormat::Jpeg:
        return decode_jpeg_image(bytes);
    default:
        fail("decode failed: not a PNG or JPEG stream");
    }
}

MaskBuffer decode_mask(std::span<const std::uint8_t> bytes) {
    if (sniff_format(bytes) != ImageFormat::Png) {
        fail("mask decode failed: masks must be PNG files");
    }
    return decode_png_mask(bytes);
}

JpegHeader read_jpeg_header(std::span<const std::uint8_t> bytes) {
    if (sniff_format(bytes) != ImageFormat::Jpeg) {
        fail("not a JPEG stream");
    }
    jpeg_decompress_struct cinfo;
    JpegErrorState err;
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_error_exit_cb;
    err.mgr.emit_message = jpeg_silence_cb;

    std::string failure;
    jpeg_create_decompress(&cinfo);
    if (setjmp(err.jump)) {
        failure = err.message;
        jpeg_destroy_decompress(&cinfo);
        fail("unreadable JPEG header: ", failure);
    }
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);

    JpegHeader header;
    header.width = cinfo.image_width;
    header.height = cinfo.image_height;
    header.components = cinfo.num_components;
    jpeg_destroy_decompress(&cinfo);
    return header;
}

std::vector<std::uint8_t> encode_jpeg(const PixelBuffer& pixels, int quality,
                                      ChromaSubsampling subsampling) {
    if (pixels.width == 0 || pixels.height == 0) {
        fail("cannot encode image with zero-sized dimensions (",
             pixels.width, "x", pixels.height, ")");
    }
    if (pixels.channels != 1 && pixels.channels != 3) {
        fail("cannot encode image with ", pixels.channels, " channels");
    }
    if (pixels.data.size() != pixels.width * pixels.height * pixels.channels) {
        fail("pixel buffer size mismatch: expected ",
             pixels.width * pixels.height * pixels.channels, " bytes, got ",
             pixels.data.size());
    }
    if (quality < 1 || quality > 100) {
        fail("JPEG quality ", quality, " out of range [1, 100]");
    }

    jpeg_compress_struct cinfo;
    JpegErrorState err;
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_error_exit_cb;
    err.mgr.emit_message = jpeg_silence_cb;

    unsigned char* buffer = nullptr;
    unsigned long buffer_size = 0;
    std::string failure;

    jpeg_create_compress(&cinfo);
    if (setjmp(err.jump)) {
        failure = err.message;
        jpeg_destroy_compress(&cinfo);
        if (buffer != nullptr) free(buffer);
        fail("JPEG encode failed: ", failure);
    }

    jpeg_mem_dest(&cinfo, &buffer, &buffer_size);
    cinfo.image_width = static_cast<JDIMENSION>(pixels.width);
    cinfo.image_height = static_cast<JDIMENSION>(pixels.height);
    cinfo.input_components = static_cast<int>(pixels.channels);
    cinfo.in_color_space = pixels.channels == 1 ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);

    if (pixels.channels == 3) {
        if (subsampling == ChromaSubsampling::None) {
            for (int c = 0; c < cinfo.num_components; ++c) {
                cinfo.comp_info[c].h_samp_factor = 1;
                cinfo.comp_info[c].v_samp_factor = 1;
            }
        } else {
            cinfo.comp_info[0].h_samp_factor = 2;
            cinfo.comp_info[0].v_samp_factor = 2;
            cinfo.comp_info[1].h_samp_factor = 1;
            cinfo.comp_info[1].v_samp_factor = 1;
            cinfo.comp_info[2].h_samp_factor = 1;
            cinfo.comp_info[2].v_samp_factor = 1;
        }
    }

    jpeg_start_compress(&cinfo, TRUE);
    const std::size_t rowbytes = pixels.width * pixels.channels;
    while (cinfo.next_scanline < cinfo.image_height) {
        JSAMPROW row = const_cast<JSAMPROW>(pixels.data.data() + cinfo.next_scanline * rowbytes);
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);

    std::vector<std::uint8_t> out(buffer, buffer + buffer_size);
    free(buffer);
    return out;
}

} // namespace corepick
