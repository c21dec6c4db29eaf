#include "iris/segmentation.hpp"

#include "iris/errors.hpp"
#include "iris/imgproc.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

namespace iris {

namespace {

constexpr double kPi = std::numbers::pi;

// Angle sets for contour integration. The outer boundary is integrated over
// lateral arcs only, where eyelids cannot interfere.
std::vector<double> circle_angles(int n) {
    std::vector<double> a(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) a[static_cast<size_t>(i)] = 2.0 * kPi * i / n;
    return a;
}

std::vector<double> lateral_angles(int n) {
    std::vector<double> a(static_cast<size_t>(n));
    const int half = n / 2;
    for (int i = 0; i < half; ++i) {
        const double t = -kPi / 4 + (kPi / 2) * i / (half - 1);
        a[static_cast<size_t>(i)] = t;
        a[static_cast<size_t>(i + half)] = t + kPi;
    }
    return a;
}

// Mean intensity along the circle of radius r; NaN when too many sample
// points fall outside the image.
double contour_mean(const FloatImage& im, double cx, double cy, double r,
                    const std::vector<double>& angles, bool bilinear) {
    const auto w = im.cols(), h = im.rows();
    double sum = 0;
    int used = 0;
    for (const double a : angles) {
        const double x = cx + r * std::cos(a);
        const double y = cy + r * std::sin(a);
        if (x < 0 || y < 0 || x > w - 1 || y > h - 1) continue;
        sum += bilinear ? bilinear_at(im, static_cast<float>(x), static_cast<float>(y))
                        : im(static_cast<Eigen::Index>(std::lround(y)),
                             static_cast<Eigen::Index>(std::lround(x)));
        ++used;
    }
    if (used * 4 < static_cast<int>(angles.size()) * 3) return std::numeric_limits<double>::quiet_NaN();
    return sum / used;
}

struct Candidate {
    double cx = 0, cy = 0, r = 0;
    double score = -std::numeric_limits<double>::infinity();
};

// Peak smoothed radial derivative of the contour mean over the radius range.
// Positive derivative only: both target boundaries step from dark to bright.
Candidate best_radius(const FloatImage& im, double cx, double cy, int r_lo, int r_hi,
                      const std::vector<double>& angles, bool bilinear) {
    Candidate best{cx, cy, 0};
    const int n = r_hi - r_lo + 1;
    if (n < 3) return best;
    std::vector<double> profile(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        profile[static_cast<size_t>(i)] = contour_mean(im, cx, cy, r_lo + i, angles, bilinear);

    for (int i = 1; i + 1 < n; ++i) {
        const double pm = profile[static_cast<size_t>(i - 1)];
        const double pc = profile[static_cast<size_t>(i)];
        const double pp = profile[static_cast<size_t>(i + 1)];
        if (std::isnan(pm) || std::isnan(pc) || std::isnan(pp)) continue;
        // central difference with [1 2 1]/4 smoothing folded in
        const double d = (pp - pm) / 2.0;
        const double d_smooth = 0.5 * d + 0.25 * (pc - pm) + 0.25 * (pp - pc);
        if (d_smooth > best.score) {
            best.score = d_smooth;
            best.r = r_lo + i;
        }
    }
    return best;
}

Candidate refine(const FloatImage& im, const Candidate& seed, int r_lo, int r_hi,
                 const std::vector<double>& angles, int reach) {
    Candidate best;
    for (int dy = -reach; dy <= reach; ++dy)
        for (int dx = -reach; dx <= reach; ++dx) {
            const int lo = std::max(r_lo, static_cast<int>(seed.r) - reach);
            const int hi = std::min(r_hi, static_cast<int>(seed.r) + reach);
            const Candidate c =
                best_radius(im, seed.cx + dx, seed.cy + dy, lo, hi, angles, true);
            if (c.score > best.score) best = c;
        }
    return best;
}

std::vector<FloatImage> pyramid3(const GrayImage& image) {
    std::vector<FloatImage> levels;
    levels.push_back(to_float(image));
    levels.push_back(downsample2(levels[0]));
    levels.push_back(downsample2(levels[1]));
    return levels;
}

} // namespace

BoundaryCircle locate_pupil(const GrayImage& image, const SegmentationParams& params) {
    if (std::min(image.rows(), image.cols()) < 128)
        raise(Errc::DimensionMismatch, "image too small for boundary search");

    const auto levels = pyramid3(image);
    const auto& coarse = levels[2];
    const auto angles_coarse = circle_angles(std::max(16, params.angle_samples / 2));
    const auto angles_fine = circle_angles(params.angle_samples);

    const int r_lo2 = std::max(2, static_cast<int>(params.pupil_r_min / 4));
    const int r_hi2 = std::max(r_lo2 + 2, static_cast<int>(std::ceil(params.pupil_r_max / 4)));

    Candidate best;
    for (Eigen::Index cy = 2; cy < coarse.rows() - 2; ++cy)
        for (Eigen::Index cx = 2; cx < coarse.cols() - 2; ++cx) {
            const Candidate c = best_radius(coarse, static_cast<double>(cx), static_cast<double>(cy),
                                            r_lo2, r_hi2, angles_coarse, false);
            if (c.score > best.score) best = c;
        }
    if (!(best.score > 0)) raise(Errc::NoPupilFound, "no radial contrast in coarse search");

    for (int level = 1; level >= 0; --level) {
        best.cx *= 2;
        best.cy *= 2;
        best.r *= 2;
        const int scale = 1 << level;
        const int lo = std::max(2, static_cast<int>(params.pupil_r_min / scale));
        const int hi = static_cast<int>(std::ceil(params.pupil_r_max / scale));
        best = refine(levels[static_cast<size_t>(level)], best, lo, hi, angles_fine, 4);
    }

    if (!(best.score >= params.pupil_contrast_floor))
        raise(Errc::NoPupilFound, "pupil boundary contrast below floor");
    return {best.cx, best.cy, best.r};
}

BoundaryCircle locate_iris(const GrayImage& image, const BoundaryCircle& pupil,
                           const SegmentationParams& params) {
    if (pupil.r <= 0) raise(Errc::GeometryError, "invalid pupil circle");

    const auto levels = pyramid3(image);
    const auto angles = lateral_angles(params.angle_samples);

    const double r_min = pupil.r * 1.2 + 1;
    const double r_max =
        std::min(pupil.r * 6.0, static_cast<double>(std::min(image.rows(), image.cols())) / 2.0 - 2);
    if (r_max <= r_min) raise(Errc::NoIrisFound, "no admissible iris radius range");

    const auto& coarse = levels[2];
    const int reach2 = std::max(1, static_cast<int>(params.iris_center_offset / 4));
    const int r_lo2 = std::max(2, static_cast<int>(r_min / 4));
    const int r_hi2 = std::max(r_lo2 + 2, static_cast<int>(std::ceil(r_max / 4)));

    Candidate best;
    for (int dy = -reach2; dy <= reach2; ++dy)
        for (int dx = -reach2; dx <= reach2; ++dx) {
            const Candidate c = best_radius(coarse, pupil.cx / 4 + dx, pupil.cy / 4 + dy, r_lo2,
                                            r_hi2, angles, false);
            if (c.score > best.score) best = c;
        }
    if (!(best.score > 0)) raise(Errc::NoIrisFound, "no radial contrast in coarse search");

    for (int level = 1; level >= 0; --level) {
        best.cx *= 2;
        best.cy *= 2;
        best.r *= 2;
        const int scale = 1 << level;
        const int lo = std::max(2, static_cast<int>(r_min / scale));
        const int hi = static_cast<int>(std::ceil(r_max / scale));
        best = refine(levels[static_cast<size_t>(level)], best, lo, hi, angles, 4);
    }

    if (!(best.score >= params.iris_contrast_floor))
        raise(Errc::NoIrisFound, "iris boundary contrast below floor");

    BoundaryCircle iris{best.cx, best.cy, best.r};
    const double drift = std::hypot(iris.cx - pupil.cx, iris.cy - pupil.cy);
    if (iris.r <= pupil.r * 1.2 || drift > params.iris_center_offset + 4.0)
        raise(Errc::NoIrisFound, "iris candidate violates geometry constraints");
    return iris;
}

bool in_annulus(const Segmentation& seg, double x, double y) {
    const double dp = std::hypot(x - seg.pupil.cx, y - seg.pupil.cy);
    const double di = std::hypot(x - seg.iris.cx, y - seg.iris.cy);
    return dp >= seg.pupil.r && di <= seg.iris.r;
}

namespace {

struct EyelidFit {
    // y = a*x^2 + b*x + c
    double a = 0, b = 0, c = 0;
    bool valid = false;
};

// Fit a parabola to the strongest vertical-gradient point per column within
// the given row band. Skipped when too few columns carry a strong edge.
EyelidFit fit_eyelid(const FloatImage& im, const Segmentation& seg, bool upper,
                     const SegmentationParams& params) {
    const auto w = im.cols(), h = im.rows();
    const int x0 = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(seg.iris.cx - seg.iris.r));
    const int x1 = std::min<Eigen::Index>(w - 1, static_cast<Eigen::Index>(seg.iris.cx + seg.iris.r));

    std::vector<Eigen::Vector2d> points;
    int columns = 0;
    for (int x = x0; x <= x1; ++x) {
        // row band: the annulus half above (below) the pupil center
        int best_y = -1;
        double best_mag = 0;
        for (int y = 1; y < h - 1; ++y) {
            if (upper ? (y >= seg.pupil.cy) : (y <= seg.pupil.cy)) continue;
            if (!in_annulus(seg, x, y)) continue;
            const double mag = std::abs(im(y + 1, x) - im(y - 1, x)) / 2.0;
            if (mag > best_mag) {
                best_mag = mag;
                best_y = y;
            }
        }
        if (best_y < 0) continue;
        ++columns;
        if (best_mag >= params.eyelid_edge_floor)
            points.emplace_back(static_cast<double>(x), static_cast<double>(best_y));
    }

    EyelidFit fit;
    if (columns == 0 ||
        static_cast<double>(points.size()) < params.eyelid_support * columns ||
        points.size() < 6)
        return fit;

    Eigen::MatrixXd A(static_cast<Eigen::Index>(points.size()), 3);
    Eigen::VectorXd b(static_cast<Eigen::Index>(points.size()));
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        const double x = points[static_cast<size_t>(i)].x();
        A(i, 0) = x * x;
        A(i, 1) = x;
        A(i, 2) = 1.0;
        b(i) = points[static_cast<size_t>(i)].y();
    }
    const Eigen::Vector3d sol = A.colPivHouseholderQr().solve(b);
    fit.a = sol(0);
    fit.b = sol(1);
    fit.c = sol(2);
    fit.valid = true;
    return fit;
}

} // namespace

BitMask occlusion_mask(const GrayImage& image, const BoundaryCircle& pupil,
                       const BoundaryCircle& iris, const SegmentationParams& params) {
    if (iris.r <= pupil.r) raise(Errc::GeometryError, "iris radius must exceed pupil radius");
    Segmentation seg{pupil, iris, {}};

    BitMask mask = BitMask::Zero(image.rows(), image.cols());
    const auto y0 = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(iris.cy - iris.r));
    const auto y1 = std::min<Eigen::Index>(image.rows() - 1, static_cast<Eigen::Index>(iris.cy + iris.r));
    const auto x0 = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(iris.cx - iris.r));
    const auto x1 = std::min<Eigen::Index>(image.cols() - 1, static_cast<Eigen::Index>(iris.cx + iris.r));

    for (Eigen::Index y = y0; y <= y1; ++y)
        for (Eigen::Index x = x0; x <= x1; ++x)
            if (in_annulus(seg, static_cast<double>(x), static_cast<double>(y)) &&
                image(y, x) < params.specular_threshold)
                mask(y, x) = 1;

    const FloatImage fim = to_float(image);
    const EyelidFit upper = fit_eyelid(fim, seg, true, params);
    const EyelidFit lower = fit_eyelid(fim, seg, false, params);
    if (upper.valid || lower.valid) {
        for (Eigen::Index y = y0; y <= y1; ++y)
            for (Eigen::Index x = x0; x <= x1; ++x) {
                if (!mask(y, x)) continue;
                const double xd = static_cast<double>(x), yd = static_cast<double>(y);
                if (upper.valid && yd < upper.a * xd * xd + upper.b * xd + upper.c) mask(y, x) = 0;
                if (lower.valid && yd > lower.a * xd * xd + lower.b * xd + lower.c) mask(y, x) = 0;
            }
    }
    return mask;
}

std::string_view quality_failure_name(QualityFailure f) {
    switch (f) {
        case QualityFailure::LowUsableArea: return "LowUsableArea";
        case QualityFailure::LowTexture: return "LowTexture";
        case QualityFailure::LowContrast: return "LowContrast";
    }
    return "Unknown";
}

QualityAssessment assess_quality(const GrayImage& image, const Segmentation& seg,
                                 const QualityThresholds& thresholds) {
    QualityAssessment q;

    std::int64_t annulus = 0, usable = 0;
    for (Eigen::Index y = 0; y < image.rows(); ++y)
        for (Eigen::Index x = 0; x < image.cols(); ++x) {
            if (!in_annulus(seg, static_cast<double>(x), static_cast<double>(y))) continue;
            ++annulus;
            if (seg.occlusion.size() == image.size() && seg.occlusion(y, x)) ++usable;
        }
    q.usable_fraction = annulus > 0 ? static_cast<double>(usable) / static_cast<double>(annulus) : 0.0;

    const FloatImage fim = to_float(image);
    const FloatImage hp = high_pass(fim, 2.f);
    double sum = 0, sum2 = 0;
    std::int64_t n = 0;
    for (Eigen::Index y = 0; y < image.rows(); ++y)
        for (Eigen::Index x = 0; x < image.cols(); ++x) {
            if (seg.occlusion.size() != image.size() || !seg.occlusion(y, x)) continue;
            sum += hp(y, x);
            sum2 += static_cast<double>(hp(y, x)) * hp(y, x);
            ++n;
        }
    if (n > 1) {
        const double mean = sum / n;
        q.texture_energy = std::sqrt(std::max(0.0, sum2 / n - mean * mean));
    }

    const auto angles = circle_angles(64);
    const double p_out = contour_mean(fim, seg.pupil.cx, seg.pupil.cy, seg.pupil.r * 1.25, angles, true);
    const double p_in = contour_mean(fim, seg.pupil.cx, seg.pupil.cy, seg.pupil.r * 0.75, angles, true);
    const auto lateral = lateral_angles(64);
    const double i_out = contour_mean(fim, seg.iris.cx, seg.iris.cy, seg.iris.r * 1.15, lateral, true);
    const double i_in = contour_mean(fim, seg.iris.cx, seg.iris.cy, seg.iris.r * 0.85, lateral, true);
    double contrast = 0;
    int terms = 0;
    if (!std::isnan(p_out) && !std::isnan(p_in)) {
        contrast += p_out - p_in;
        ++terms;
    }
    if (!std::isnan(i_out) && !std::isnan(i_in)) {
        contrast += i_out - i_in;
        ++terms;
    }
    q.boundary_contrast = terms > 0 ? std::max(0.0, contrast / terms) : 0.0;

    if (q.usable_fraction < thresholds.min_usable) q.reasons.push_back(QualityFailure::LowUsableArea);
    if (q.texture_energy < thresholds.texture_floor) q.reasons.push_back(QualityFailure::LowTexture);
    if (q.boundary_contrast < thresholds.contrast_floor) q.reasons.push_back(QualityFailure::LowContrast);
    q.pass = q.reasons.empty();
    return q;
}

Segmentation segment(const GrayImage& image, const SegmentationParams& params) {
    Segmentation seg;
    seg.pupil = locate_pupil(image, params);
    seg.iris = locate_iris(image, seg.pupil, params);
    seg.occlusion = occlusion_mask(image, seg.pupil, seg.iris, params);
    return seg;
}

std::string segmentation_json(const Segmentation& seg, const QualityAssessment& quality) {
    nlohmann::ordered_json j;
    j["pupil"] = {{"cx", seg.pupil.cx}, {"cy", seg.pupil.cy}, {"r", seg.pupil.r}};
    j["iris"] = {{"cx", seg.iris.cx}, {"cy", seg.iris.cy}, {"r", seg.iris.r}};
    nlohmann::ordered_json reasons = nlohmann::ordered_json::array();
    for (const auto f : quality.reasons) reasons.push_back(std::string(quality_failure_name(f)));
    j["quality"] = {{"usable_fraction", quality.usable_fraction},
                    {"texture_energy", quality.texture_energy},
                    {"boundary_contrast", quality.boundary_contrast},
                    {"pass", quality.pass},
                    {"reasons", reasons}};
    return j.dump(2);
}

} // namespace iris
