/*
 * image.hpp - dense raster types and PNG I/O.
 *
 * Images are Eigen arrays in row-major order: (row, col) == (y, x).
 * Grayscale frames are 8-bit; masks hold 0/1 with 1 = set.
 */
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>

namespace iris {

template <class Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using GrayImage = Plane<std::uint8_t>;
using BitMask = Plane<std::uint8_t>;
using FloatImage = Plane<float>;

inline Eigen::Index width(const GrayImage& im) { return im.cols(); }
inline Eigen::Index height(const GrayImage& im) { return im.rows(); }

inline FloatImage to_float(const GrayImage& im) {
    return im.cast<float>();
}

// Round-to-nearest with clamp to [0, 255].
GrayImage to_gray(const FloatImage& im);

// 8-bit grayscale PNG. Color inputs are rejected; 16-bit is narrowed.
GrayImage read_png_gray(const std::filesystem::path& path);
void write_png_gray(const std::filesystem::path& path, const GrayImage& im);

// Masks travel as PNG too; any nonzero sample reads as 1.
BitMask read_png_mask(const std::filesystem::path& path);
void write_png_mask(const std::filesystem::path& path, const BitMask& mask);

} // namespace iris
