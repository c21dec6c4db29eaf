#pragma once

#include "iris/encoding.hpp"
#include "iris/matching.hpp"
#include "iris/rng.hpp"
#include "iris/synth.hpp"

#include "doctest.h"

#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

namespace test {

// Unique scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("irisleak_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline iris::IrisTemplate random_template(int rows, int cols, int filters, iris::Rng& rng,
                                          double valid_prob = 0.9) {
    iris::IrisTemplate tpl(rows, cols, filters);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r)
            for (int f = 0; f < filters; ++f) {
                tpl.set_code_bit(r, c, f, rng.next_u64() & 1);
                tpl.set_mask_bit(r, c, f, rng.next_double() < valid_prob);
            }
    return tpl;
}

struct NaiveScore {
    double value = 0;
    int shift = 0;
    std::int64_t overlap = 0;
    bool found = false;
};

// Reference matcher: explicit bit loops and modular column rotation. A column
// t is compared against B column (t - shift) mod cols.
inline NaiveScore naive_fractional_hd(const iris::IrisTemplate& a, const iris::IrisTemplate& b,
                                      int max_shift, std::int64_t min_overlap) {
    const int cols = a.cols();
    auto at_shift = [&](int shift, std::int64_t& diff, std::int64_t& overlap) {
        diff = 0;
        overlap = 0;
        for (int t = 0; t < cols; ++t) {
            const int tb = ((t - shift) % cols + cols) % cols;
            for (int r = 0; r < a.rows(); ++r)
                for (int f = 0; f < a.filters(); ++f) {
                    if (!a.mask_bit(r, t, f) || !b.mask_bit(r, tb, f)) continue;
                    ++overlap;
                    if (a.code_bit(r, t, f) != b.code_bit(r, tb, f)) ++diff;
                }
        }
    };
    NaiveScore best;
    auto consider = [&](int shift) {
        std::int64_t diff = 0, overlap = 0;
        at_shift(shift, diff, overlap);
        if (overlap < min_overlap) return;
        const double hd = static_cast<double>(diff) / static_cast<double>(overlap);
        if (!best.found || hd < best.value) {
            best.value = hd;
            best.shift = shift;
            best.overlap = overlap;
            best.found = true;
        }
    };
    consider(0);
    for (int m = 1; m <= max_shift; ++m) {
        consider(-m);
        consider(+m);
    }
    return best;
}

// Renders one frontal capture for a synthetic identity drawn from the
// standard parameter ranges, small enough to encode quickly.
inline iris::RenderResult render_identity(std::uint64_t seed, std::uint64_t identity_index,
                                          int frame = 0, int size = 512) {
    iris::Rng geo(iris::derive_seed(seed, "test-identity", identity_index));
    iris::IdentitySpec id;
    id.texture_seed = iris::derive_seed(seed, "test-texture", identity_index);
    id.iris_radius = 150 + 40 * geo.next_double();
    id.base_pupil_radius = 35 + 25 * geo.next_double();

    iris::Rng cap(iris::derive_seed(seed, "test-capture", identity_index * 1000 + frame));
    iris::CaptureSpec capture;
    capture.dilation_factor = 1.0 + 0.35 * cap.next_double();
    capture.rotation_deg = -2.5 + 5.0 * cap.next_double();
    capture.noise_sigma = 2 + 2 * cap.next_double();
    capture.blur_sigma = 0.6 + 0.5 * cap.next_double();
    capture.noise_seed = iris::derive_seed(seed, "test-noise", identity_index * 1000 + frame);
    return iris::render_iris(id, capture, size, size);
}

// Template from a render's exact ground-truth segmentation.
inline iris::IrisTemplate truth_encode(const iris::RenderResult& r, const iris::FilterBank& bank,
                                       int radial = 64, int angular = 512) {
    iris::PolarIris polar = iris::rubber_sheet(r.image, r.truth, radial, angular);
    return iris::encode(polar, bank);
}

} // namespace test
