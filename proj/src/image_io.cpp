#include "iris/image.hpp"

#include "iris/errors.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <vector>

namespace iris {

GrayImage to_gray(const FloatImage& im) {
    GrayImage out(im.rows(), im.cols());
    for (Eigen::Index r = 0; r < im.rows(); ++r)
        for (Eigen::Index c = 0; c < im.cols(); ++c) {
            const float v = std::round(im(r, c));
            out(r, c) = static_cast<std::uint8_t>(v < 0.f ? 0.f : (v > 255.f ? 255.f : v));
        }
    return out;
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

} // namespace

GrayImage read_png_gray(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) raise(Errc::IoError, "cannot open " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        raise(Errc::IoError, "libpng init failed for " + path.string());
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        raise(Errc::IoError, "corrupt PNG " + path.string());
    }

    png_init_io(png, fp.get());
    png_read_info(png, info);

    const png_byte color = png_get_color_type(png, info);
    if (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_PALETTE) {
        png_destroy_read_struct(&png, &info, nullptr);
        raise(Errc::IoError, "not a grayscale PNG: " + path.string());
    }
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const auto w = png_get_image_width(png, info);
    const auto h = png_get_image_height(png, info);
    const auto channels = png_get_channels(png, info);

    GrayImage im(h, w);
    std::vector<png_byte> row(static_cast<size_t>(w) * channels);
    for (png_uint_32 y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        if (channels == 1) {
            std::copy(row.begin(), row.end(), im.data() + static_cast<size_t>(y) * w);
        } else {
            for (png_uint_32 x = 0; x < w; ++x) im(y, x) = row[static_cast<size_t>(x) * channels];
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return im;
}

void write_png_gray(const std::filesystem::path& path, const GrayImage& im) {
    if (im.rows() <= 0 || im.cols() <= 0) raise(Errc::IoError, "empty image for " + path.string());
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) raise(Errc::IoError, "cannot write " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        raise(Errc::IoError, "libpng init failed for " + path.string());
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        raise(Errc::IoError, "PNG write failed: " + path.string());
    }

    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(im.cols()), static_cast<png_uint_32>(im.rows()), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (Eigen::Index y = 0; y < im.rows(); ++y)
        png_write_row(png, const_cast<png_bytep>(im.data() + static_cast<size_t>(y) * im.cols()));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

BitMask read_png_mask(const std::filesystem::path& path) {
    GrayImage im = read_png_gray(path);
    BitMask mask(im.rows(), im.cols());
    for (Eigen::Index i = 0; i < im.size(); ++i) mask.data()[i] = im.data()[i] ? 1 : 0;
    return mask;
}

void write_png_mask(const std::filesystem::path& path, const BitMask& mask) {
    GrayImage im(mask.rows(), mask.cols());
    for (Eigen::Index i = 0; i < mask.size(); ++i) im.data()[i] = mask.data()[i] ? 255 : 0;
    write_png_gray(path, im);
}

} // namespace iris
