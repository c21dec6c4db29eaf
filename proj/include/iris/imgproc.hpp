/*
 * imgproc.hpp - resampling and filtering shared by the pipeline stages.
 */
#pragma once

#include "iris/image.hpp"

namespace iris {

// Bilinear sample at (x, y) with border clamp. Coordinates are pixel
// centers: (0, 0) is the center of the top-left pixel.
float bilinear_at(const FloatImage& im, float x, float y);

// Bilinear resize using the half-pixel center convention
// (src = (dst + 0.5) * scale - 0.5).
FloatImage resize_bilinear(const FloatImage& im, Eigen::Index out_w, Eigen::Index out_h);

// Left-right flip: pixel (x, y) -> (W-1-x, y).
template <class Scalar>
Plane<Scalar> flip_horizontal(const Plane<Scalar>& im) {
    return im.rowwise().reverse();
}

// Separable gaussian blur, kernel radius ceil(3*sigma), replicated borders.
// sigma <= 0 returns the input unchanged.
FloatImage gaussian_blur(const FloatImage& im, float sigma);

// Blur (sigma 1) and decimate by two; used to build search pyramids.
FloatImage downsample2(const FloatImage& im);

// im - gaussian_blur(im, sigma): the residual used as a texture measure.
FloatImage high_pass(const FloatImage& im, float sigma);

} // namespace iris
