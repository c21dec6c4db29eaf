#include "iris/synth.hpp"

#include "iris/errors.hpp"
#include "iris/imgproc.hpp"
#include "iris/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace iris {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr float kPupilLevel = 28.0f;
constexpr float kIrisBase = 108.0f;
constexpr float kIrisAmplitude = 48.0f;
constexpr float kScleraLevel = 212.0f;
constexpr float kSkinLevel = 198.0f;
constexpr float kSpecularLevel = 253.0f;
constexpr double kEdgeWidth = 1.2; // boundary antialias, pixels

double lattice_value(std::uint64_t seed, int octave, std::int64_t row, std::int64_t col) {
    std::uint64_t h = seed;
    h ^= (static_cast<std::uint64_t>(octave) + 1) * 0x9e3779b97f4a7c15ULL;
    h ^= static_cast<std::uint64_t>(row) * 0xc2b2ae3d27d4eb4fULL;
    h ^= static_cast<std::uint64_t>(col) * 0x165667b19e3779f9ULL;
    SplitMix64 sm(h);
    return static_cast<double>(sm.next() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

double smooth01(double x) {
    x = std::clamp(x, 0.0, 1.0);
    return x * x * (3.0 - 2.0 * x);
}

} // namespace

double polar_noise(std::uint64_t texture_seed, const TextureSpectrum& spectrum, double rho,
                   double theta) {
    theta = std::fmod(theta, kTwoPi);
    if (theta < 0) theta += kTwoPi;
    const double turns = theta / kTwoPi;

    double sum = 0, norm = 0, amp = 1;
    double freq_theta = spectrum.base_freq_theta;
    double freq_rho = spectrum.base_freq_rho;
    for (int o = 0; o < spectrum.octaves; ++o) {
        // Integral angular period keeps every octave seamless at the wrap.
        const std::int64_t period = std::max<std::int64_t>(1, std::llround(freq_theta));
        const double u = turns * static_cast<double>(period);
        const double v = rho * freq_rho;
        const auto u0 = static_cast<std::int64_t>(std::floor(u));
        const auto v0 = static_cast<std::int64_t>(std::floor(v));
        const double su = smooth01(u - static_cast<double>(u0));
        const double sv = smooth01(v - static_cast<double>(v0));
        const auto wrap = [&](std::int64_t j) {
            const std::int64_t m = j % period;
            return m < 0 ? m + period : m;
        };
        const double a00 = lattice_value(texture_seed, o, v0, wrap(u0));
        const double a01 = lattice_value(texture_seed, o, v0, wrap(u0 + 1));
        const double a10 = lattice_value(texture_seed, o, v0 + 1, wrap(u0));
        const double a11 = lattice_value(texture_seed, o, v0 + 1, wrap(u0 + 1));
        const double val = (a00 * (1 - su) + a01 * su) * (1 - sv) +
                           (a10 * (1 - su) + a11 * su) * sv;
        sum += amp * val;
        norm += amp;
        amp *= spectrum.gain;
        freq_theta *= 2;
        freq_rho *= 2;
    }
    return sum / norm;
}

RenderResult render_iris(const IdentitySpec& identity, const CaptureSpec& capture, int width,
                         int height) {
    if (identity.base_pupil_radius <= 0 || identity.iris_radius <= identity.base_pupil_radius)
        raise(Errc::SpecError, "identity needs iris_radius > base_pupil_radius > 0");
    if (identity.spectrum.octaves < 1 || identity.spectrum.gain <= 0)
        raise(Errc::SpecError, "texture spectrum needs octaves >= 1 and gain > 0");
    if (capture.dilation_factor <= 0 || capture.noise_sigma < 0 || capture.blur_sigma < 0)
        raise(Errc::SpecError, "capture parameters out of range");
    if (capture.eyelid_closure < 0 || capture.eyelid_closure > 1)
        raise(Errc::SpecError, "eyelid_closure must lie in [0, 1]");

    const double pupil_r = identity.base_pupil_radius * capture.dilation_factor;
    const double iris_r = identity.iris_radius;
    if (pupil_r >= iris_r - 2)
        raise(Errc::SpecError, "dilated pupil radius " + std::to_string(pupil_r) +
                                   " leaves no annulus inside iris radius " +
                                   std::to_string(iris_r));
    const double cx = (width - 1) / 2.0 + capture.center_dx;
    const double cy = (height - 1) / 2.0 + capture.center_dy;
    if (cx - iris_r < 1 || cx + iris_r > width - 2 || cy - iris_r < 1 || cy + iris_r > height - 2)
        raise(Errc::SpecError, "iris circle leaves the frame");

    const double rot = capture.rotation_deg * std::numbers::pi / 180.0;
    const double w = kEdgeWidth;
    const double span = iris_r - pupil_r;
    const double y_lid = capture.eyelid_closure > 0
                             ? cy - iris_r + capture.eyelid_closure * (2 * iris_r + 2)
                             : -1e9;
    const double spec_cx = cx + 0.35 * pupil_r;
    const double spec_cy = cy - 0.25 * pupil_r;
    const double spec_r = std::max(2.5, 0.12 * pupil_r);

    FloatImage img(height, width);
    img.setConstant(kScleraLevel);
    BitMask mask(height, width);
    mask.setZero();

    for (int y = 0; y < height; ++y) {
        const double dy = y - cy;
        for (int x = 0; x < width; ++x) {
            const double dx = x - cx;
            const double d = std::hypot(dx, dy);
            float v = kScleraLevel;
            if (d <= iris_r + w) {
                const double rho = std::clamp((d - pupil_r) / span, 0.0, 1.0);
                const double theta = std::atan2(dy, dx) - rot;
                const double n = polar_noise(identity.texture_seed, identity.spectrum, rho, theta);
                const float iris_v = std::clamp(
                    kIrisBase + kIrisAmplitude * static_cast<float>(n), 30.0f, 200.0f);
                const double t_pupil = smooth01((d - (pupil_r - w)) / (2 * w));
                const double t_iris = smooth01((d - (iris_r - w)) / (2 * w));
                v = static_cast<float>(kPupilLevel + (iris_v - kPupilLevel) * t_pupil);
                v = static_cast<float>(v + (kScleraLevel - v) * t_iris);
            }
            if (capture.specular) {
                const double ds = std::hypot(x - spec_cx, y - spec_cy);
                const double f = smooth01((spec_r - ds) / 0.8 + 0.5);
                v = static_cast<float>(v + (kSpecularLevel - v) * f);
            }
            if (capture.eyelid_closure > 0) {
                const double cov = smooth01((y_lid - y) / (2 * w) + 0.5);
                v = static_cast<float>(v + (kSkinLevel - v) * cov);
            }
            img(y, x) = v;
            const bool in_ring = d > pupil_r && d <= iris_r;
            mask(y, x) = in_ring && static_cast<double>(y) >= y_lid ? 1 : 0;
        }
    }

    if (capture.blur_sigma > 0) img = gaussian_blur(img, static_cast<float>(capture.blur_sigma));
    if (capture.noise_sigma > 0) {
        Rng rng(derive_seed(capture.noise_seed, "sensor-noise"));
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
                img(y, x) += static_cast<float>(capture.noise_sigma * rng.next_gaussian());
    }

    RenderResult out;
    out.image = to_gray(img);
    out.mask = mask;
    out.truth.pupil = {cx, cy, pupil_r};
    out.truth.iris = {cx, cy, iris_r};
    out.truth.occlusion = mask;
    return out;
}

namespace {

void validate_model(const GeneratorModel& model) {
    if (model.training_corpus.empty())
        raise(Errc::ConfigError, "generator model has an empty training corpus");
    if (model.memorization_rate < 0 || model.memorization_rate > 1)
        raise(Errc::ConfigError, "memorization rate must lie in [0, 1]");
    if (model.fidelity_level < 1 || model.fidelity_level > 14)
        raise(Errc::ConfigError, "fidelity level must lie in 1..14");
}

bool draws_leak(const GeneratorModel& model, std::size_t index) {
    // The unit draw depends only on (seed, index), so the leak set for a
    // smaller lambda is a subset of the set for a larger one.
    Rng rng(derive_seed(model.seed, "leak", index));
    return rng.next_double() < model.memorization_rate;
}

} // namespace

CorpusEntry sample_generator(const GeneratorModel& model, std::size_t index, SampleTruth* truth) {
    validate_model(model);
    SampleTruth t;
    CorpusEntry out;
    if (draws_leak(model, index)) {
        Rng pick(derive_seed(model.seed, "leak-source", index));
        const std::size_t k = pick.next_below(model.training_corpus.size());
        const CorpusEntry& src = model.training_corpus[k];
        FloatImage f = to_float(src.image);
        Rng noise(derive_seed(model.seed, "leak-noise", index));
        for (Eigen::Index y = 0; y < f.rows(); ++y)
            for (Eigen::Index x = 0; x < f.cols(); ++x)
                f(y, x) += static_cast<float>(1.5 * noise.next_gaussian());
        out.image = to_gray(f);
        out.mask = src.mask;
        t.leak = true;
        t.source_index = k;
        t.source_identity = src.identity;
    } else {
        Rng g(derive_seed(model.seed, "fresh-geometry", index));
        IdentitySpec id;
        id.texture_seed = derive_seed(model.seed, "fresh-texture", index);
        id.iris_radius = 150 + 40 * g.next_double();
        id.base_pupil_radius = 35 + 25 * g.next_double();
        CaptureSpec cap;
        cap.dilation_factor = 1.0 + 0.4 * g.next_double();
        cap.rotation_deg = -8 + 16 * g.next_double();
        cap.noise_sigma = 2.0 + 2.0 * g.next_double();
        cap.blur_sigma = 0.6 + 0.5 * g.next_double();
        cap.noise_seed = derive_seed(model.seed, "fresh-noise", index);
        RenderResult r = render_iris(id, cap, 512, 512);
        out.image = std::move(r.image);
        out.mask = std::move(r.mask);
    }
    out.image = apply_fidelity(out.image, model.fidelity_level,
                               derive_seed(model.seed, "fidelity", index));
    out.identity.clear();
    out.frame_index = static_cast<int>(index);
    out.origin = Origin::Synthetic;
    out.seed = index;
    out.mirrored = false;
    if (truth) *truth = t;
    return out;
}

std::vector<std::size_t> leak_indices(const GeneratorModel& model, std::size_t count) {
    validate_model(model);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < count; ++i)
        if (draws_leak(model, i)) out.push_back(i);
    return out;
}

GrayImage apply_fidelity(const GrayImage& image, int level, std::uint64_t seed) {
    if (level < 1 || level > 14) raise(Errc::ConfigError, "fidelity level must lie in 1..14");
    if (level == 14) return image;

    const double t = (14 - level) / 13.0; // artifact strength, linear in level
    FloatImage f = gaussian_blur(to_float(image), static_cast<float>(5.5 * t));

    Rng rng(derive_seed(seed, "artifacts"));
    const auto blobs = static_cast<int>(std::lround(14 * t));
    const auto w = static_cast<double>(f.cols());
    const auto h = static_cast<double>(f.rows());
    for (int b = 0; b < blobs; ++b) {
        const double bx = rng.next_double() * (w - 1);
        const double by = rng.next_double() * (h - 1);
        const double ax = (10 + 26 * rng.next_double()) * (0.4 + 0.6 * t);
        const double ay = (10 + 26 * rng.next_double()) * (0.4 + 0.6 * t);
        const double ang = rng.next_double() * std::numbers::pi;
        const double lift = (30 + 40 * rng.next_double()) * t;
        const double ca = std::cos(ang), sa = std::sin(ang);
        const double reach = std::max(ax, ay);
        const auto x0 = static_cast<Eigen::Index>(std::max(0.0, std::floor(bx - reach)));
        const auto x1 = static_cast<Eigen::Index>(std::min(w - 1, std::ceil(bx + reach)));
        const auto y0 = static_cast<Eigen::Index>(std::max(0.0, std::floor(by - reach)));
        const auto y1 = static_cast<Eigen::Index>(std::min(h - 1, std::ceil(by + reach)));
        for (Eigen::Index y = y0; y <= y1; ++y) {
            for (Eigen::Index x = x0; x <= x1; ++x) {
                const double rx = (x - bx) * ca + (y - by) * sa;
                const double ry = -(x - bx) * sa + (y - by) * ca;
                const double e2 = (rx / ax) * (rx / ax) + (ry / ay) * (ry / ay);
                if (e2 >= 1.0) continue;
                const double fall = (1.0 - e2) * (1.0 - e2); // zero-slope rim
                f(y, x) += static_cast<float>(lift * fall);
            }
        }
    }
    return to_gray(f);
}

} // namespace iris
