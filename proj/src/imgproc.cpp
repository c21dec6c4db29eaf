#include "iris/imgproc.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace iris {

float bilinear_at(const FloatImage& im, float x, float y) {
    const auto w = im.cols(), h = im.rows();
    const float xc = std::clamp(x, 0.f, static_cast<float>(w - 1));
    const float yc = std::clamp(y, 0.f, static_cast<float>(h - 1));
    const auto x0 = static_cast<Eigen::Index>(xc);
    const auto y0 = static_cast<Eigen::Index>(yc);
    const auto x1 = std::min(x0 + 1, w - 1);
    const auto y1 = std::min(y0 + 1, h - 1);
    const float fx = xc - static_cast<float>(x0);
    const float fy = yc - static_cast<float>(y0);
    const float top = im(y0, x0) + fx * (im(y0, x1) - im(y0, x0));
    const float bot = im(y1, x0) + fx * (im(y1, x1) - im(y1, x0));
    return top + fy * (bot - top);
}

FloatImage resize_bilinear(const FloatImage& im, Eigen::Index out_w, Eigen::Index out_h) {
    FloatImage out(out_h, out_w);
    const float sx = static_cast<float>(im.cols()) / static_cast<float>(out_w);
    const float sy = static_cast<float>(im.rows()) / static_cast<float>(out_h);
    for (Eigen::Index y = 0; y < out_h; ++y) {
        const float src_y = (static_cast<float>(y) + 0.5f) * sy - 0.5f;
        for (Eigen::Index x = 0; x < out_w; ++x) {
            const float src_x = (static_cast<float>(x) + 0.5f) * sx - 0.5f;
            out(y, x) = bilinear_at(im, src_x, src_y);
        }
    }
    return out;
}

namespace {

std::vector<float> gaussian_taps(float sigma) {
    const int radius = static_cast<int>(std::ceil(3.f * sigma));
    std::vector<float> taps(static_cast<size_t>(2 * radius + 1));
    float sum = 0.f;
    for (int i = -radius; i <= radius; ++i) {
        const float v = std::exp(-0.5f * static_cast<float>(i) * static_cast<float>(i) / (sigma * sigma));
        taps[static_cast<size_t>(i + radius)] = v;
        sum += v;
    }
    for (auto& t : taps) t /= sum;
    return taps;
}

} // namespace

FloatImage gaussian_blur(const FloatImage& im, float sigma) {
    if (sigma <= 0.f) return im;
    const auto taps = gaussian_taps(sigma);
    const int radius = static_cast<int>(taps.size() / 2);
    const auto w = im.cols(), h = im.rows();

    FloatImage tmp(h, w);
    for (Eigen::Index y = 0; y < h; ++y)
        for (Eigen::Index x = 0; x < w; ++x) {
            float acc = 0.f;
            for (int i = -radius; i <= radius; ++i) {
                const auto xi = std::clamp<Eigen::Index>(x + i, 0, w - 1);
                acc += taps[static_cast<size_t>(i + radius)] * im(y, xi);
            }
            tmp(y, x) = acc;
        }

    FloatImage out(h, w);
    for (Eigen::Index y = 0; y < h; ++y)
        for (Eigen::Index x = 0; x < w; ++x) {
            float acc = 0.f;
            for (int i = -radius; i <= radius; ++i) {
                const auto yi = std::clamp<Eigen::Index>(y + i, 0, h - 1);
                acc += taps[static_cast<size_t>(i + radius)] * tmp(yi, x);
            }
            out(y, x) = acc;
        }
    return out;
}

FloatImage downsample2(const FloatImage& im) {
    const FloatImage blurred = gaussian_blur(im, 1.f);
    const auto w = im.cols() / 2, h = im.rows() / 2;
    FloatImage out(h, w);
    for (Eigen::Index y = 0; y < h; ++y)
        for (Eigen::Index x = 0; x < w; ++x) out(y, x) = blurred(2 * y, 2 * x);
    return out;
}

FloatImage high_pass(const FloatImage& im, float sigma) {
    return im - gaussian_blur(im, sigma);
}

} // namespace iris
