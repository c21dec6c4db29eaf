#include "iris/imgproc.hpp"
#include "iris/rng.hpp"

#include "doctest.h"

#include <cmath>
#include <vector>

using iris::FloatImage;

namespace {

FloatImage random_image(int h, int w, std::uint64_t seed) {
    iris::Rng rng(seed);
    FloatImage im(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) im(y, x) = static_cast<float>(255.0 * rng.next_double());
    return im;
}

// Dense 2D gaussian reference with replicated borders, same radius rule as
// the separable implementation (ceil(3*sigma)).
FloatImage blur_reference(const FloatImage& im, float sigma) {
    const int radius = static_cast<int>(std::ceil(3.0f * sigma));
    std::vector<double> k(2 * radius + 1);
    double norm = 0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        norm += k[i + radius];
    }
    for (auto& v : k) v /= norm;

    const int h = static_cast<int>(im.rows()), w = static_cast<int>(im.cols());
    FloatImage out(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0;
            for (int dy = -radius; dy <= radius; ++dy)
                for (int dx = -radius; dx <= radius; ++dx) {
                    const int sy = std::clamp(y + dy, 0, h - 1);
                    const int sx = std::clamp(x + dx, 0, w - 1);
                    acc += k[dy + radius] * k[dx + radius] * im(sy, sx);
                }
            out(y, x) = static_cast<float>(acc);
        }
    return out;
}

} // namespace

TEST_CASE("bilinear_at reproduces pixel centers and midpoints") {
    FloatImage im(2, 3);
    im << 10, 20, 30, 40, 50, 60;
    CHECK(iris::bilinear_at(im, 0, 0) == doctest::Approx(10));
    CHECK(iris::bilinear_at(im, 2, 1) == doctest::Approx(60));
    CHECK(iris::bilinear_at(im, 0.5f, 0) == doctest::Approx(15));
    CHECK(iris::bilinear_at(im, 0, 0.5f) == doctest::Approx(25));
    CHECK(iris::bilinear_at(im, 0.5f, 0.5f) == doctest::Approx(30));
}

TEST_CASE("bilinear_at clamps outside the border") {
    FloatImage im(2, 2);
    im << 1, 2, 3, 4;
    CHECK(iris::bilinear_at(im, -5, -5) == doctest::Approx(1));
    CHECK(iris::bilinear_at(im, 10, 0) == doctest::Approx(2));
    CHECK(iris::bilinear_at(im, 0.5f, 10) == doctest::Approx(3.5));
}

TEST_CASE("resize_bilinear to the same size is the identity") {
    const FloatImage im = random_image(13, 17, 1);
    const FloatImage out = iris::resize_bilinear(im, 17, 13);
    CHECK(((out - im).abs().maxCoeff()) < 1e-4f);
}

TEST_CASE("resize_bilinear follows the half-pixel convention") {
    FloatImage im(1, 2);
    im << 0, 100;
    // Upscale 2 -> 4: src_x = (dst + 0.5) * 0.5 - 0.5 = {-0.25, 0.25, 0.75, 1.25}.
    const FloatImage out = iris::resize_bilinear(im, 4, 1);
    REQUIRE(out.cols() == 4);
    CHECK(out(0, 0) == doctest::Approx(0));
    CHECK(out(0, 1) == doctest::Approx(25));
    CHECK(out(0, 2) == doctest::Approx(75));
    CHECK(out(0, 3) == doctest::Approx(100));
}

TEST_CASE("flip_horizontal mirrors coordinates and is an involution") {
    const FloatImage im = random_image(5, 8, 2);
    const FloatImage f = iris::flip_horizontal(im);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 8; ++x) CHECK(f(y, x) == im(y, 7 - x));
    const FloatImage ff = iris::flip_horizontal(f);
    CHECK(((ff - im).abs().maxCoeff()) == 0.0f);
}

TEST_CASE("gaussian_blur: nonpositive sigma is the identity") {
    const FloatImage im = random_image(6, 6, 3);
    CHECK(((iris::gaussian_blur(im, 0.0f) - im).abs().maxCoeff()) == 0.0f);
    CHECK(((iris::gaussian_blur(im, -1.0f) - im).abs().maxCoeff()) == 0.0f);
}

TEST_CASE("gaussian_blur preserves constants") {
    FloatImage im(9, 9);
    im.setConstant(77.0f);
    const FloatImage out = iris::gaussian_blur(im, 2.0f);
    CHECK(((out - im).abs().maxCoeff()) < 1e-3f);
}

TEST_CASE("gaussian_blur matches a dense 2D reference") {
    const FloatImage im = random_image(14, 11, 4);
    for (float sigma : {0.8f, 1.6f, 3.0f}) {
        const FloatImage got = iris::gaussian_blur(im, sigma);
        const FloatImage want = blur_reference(im, sigma);
        CHECK(((got - want).abs().maxCoeff()) < 5e-3f);
    }
}

TEST_CASE("downsample2 halves both dimensions") {
    const FloatImage im = random_image(10, 16, 5);
    const FloatImage out = iris::downsample2(im);
    CHECK(out.rows() == 5);
    CHECK(out.cols() == 8);
}

TEST_CASE("high_pass is the blur residual and kills constants") {
    const FloatImage im = random_image(12, 12, 6);
    const float sigma = 1.5f;
    const FloatImage want = im - iris::gaussian_blur(im, sigma);
    CHECK(((iris::high_pass(im, sigma) - want).abs().maxCoeff()) == 0.0f);

    FloatImage flat(8, 8);
    flat.setConstant(42.0f);
    CHECK(iris::high_pass(flat, 2.0f).abs().maxCoeff() < 1e-3f);
}
