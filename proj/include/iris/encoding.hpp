/*
 * encoding.hpp - polar normalization and binarized filter-bank encoding.
 *
 * The normalized iris is sampled on an R x Theta grid between the pupil
 * boundary (r = 0) and the iris boundary (r = R-1). A bank of k seeded,
 * zero-mean, orthonormal filters is convolved over the grid (wrap-around in
 * the angular dimension); each response binarizes to one code bit. Rows
 * within half a filter of the radial border are trimmed.
 *
 * Packed layout: bits are grouped by angular column. Column t occupies
 * words [t*wpc, (t+1)*wpc) with bit (r*k + f) inside the group, so a
 * rotation by c columns is a rotation by c*wpc whole words. With the default
 * geometry (R'=56, k=8) a column is exactly 7 words.
 */
#pragma once

#include "iris/corpus.hpp"
#include "iris/image.hpp"
#include "iris/segmentation.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace iris {

struct PolarIris {
    FloatImage samples;          // R x Theta
    Plane<std::uint8_t> valid;   // R x Theta, 1 = all four source pixels usable
};

struct FilterBank {
    int count = 0;               // k
    int side = 0;                // s (odd)
    std::uint64_t seed = 0;
    Eigen::MatrixXd taps;        // k x s*s, rows zero-mean and orthonormal

    double tap(int f, int dr, int dc) const { return taps(f, dr * side + dc); }
};

struct TemplateMeta {
    std::string id;
    std::string identity;
    Origin origin = Origin::Real;
    int snapshot = 0;
    std::uint64_t seed = 0;
    double quality = 0; // usable fraction recorded by the quality gate
};

class IrisTemplate {
public:
    IrisTemplate() = default;
    IrisTemplate(int rows, int cols, int filters);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int filters() const { return filters_; }
    int words_per_col() const { return words_per_col_; }
    std::int64_t bit_length() const {
        return static_cast<std::int64_t>(rows_) * cols_ * filters_;
    }

    std::span<const std::uint64_t> code() const { return code_; }
    std::span<const std::uint64_t> mask() const { return mask_; }
    std::span<std::uint64_t> code() { return code_; }
    std::span<std::uint64_t> mask() { return mask_; }

    bool code_bit(int r, int col, int f) const { return get(code_, r, col, f); }
    bool mask_bit(int r, int col, int f) const { return get(mask_, r, col, f); }
    void set_code_bit(int r, int col, int f, bool v) { put(code_, r, col, f, v); }
    void set_mask_bit(int r, int col, int f, bool v) { put(mask_, r, col, f, v); }

    std::int64_t mask_popcount() const;
    bool dims_match(const IrisTemplate& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && filters_ == other.filters_;
    }

    TemplateMeta meta;

private:
    bool get(const std::vector<std::uint64_t>& bits, int r, int col, int f) const;
    void put(std::vector<std::uint64_t>& bits, int r, int col, int f, bool v);

    int rows_ = 0, cols_ = 0, filters_ = 0, words_per_col_ = 0;
    std::vector<std::uint64_t> code_, mask_;
};

// Daugman-style rubber sheet sampling. The occlusion mask of `seg` gates
// validity; an empty occlusion mask counts every pixel as usable.
PolarIris rubber_sheet(const GrayImage& image, const Segmentation& seg, int radial_res = 64,
                       int angular_res = 512);

// k seeded pseudo-random kernels of side s, mean-removed then orthonormalized
// in generation order. Requires k <= s*s - 1.
FilterBank build_filter_bank(std::uint64_t seed, int k = 8, int s = 9);

// JSON round trip so externally trained taps can be dropped in.
void save_filter_bank(const std::filesystem::path& path, const FilterBank& bank);
FilterBank load_filter_bank(const std::filesystem::path& path);

IrisTemplate encode(const PolarIris& polar, const FilterBank& bank);

// IRT1 container: magic "IRT1", little-endian u32 {R', Theta, k}, code bits
// LSB-first in (column, row, filter) order, mask bits likewise, then a
// u32-length-prefixed JSON metadata trailer.
void save_template(const std::filesystem::path& path, const IrisTemplate& tpl);
IrisTemplate load_template(const std::filesystem::path& path);

} // namespace iris
