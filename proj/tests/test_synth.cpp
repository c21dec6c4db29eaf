#include "iris/synth.hpp"
#include "iris/analysis.hpp"
#include "iris/errors.hpp"
#include "iris/imgproc.hpp"
#include "iris/matching.hpp"
#include "iris/rng.hpp"

#include "helpers.hpp"
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <vector>

using iris::CaptureSpec;
using iris::CorpusEntry;
using iris::Errc;
using iris::Error;
using iris::GeneratorModel;
using iris::IdentitySpec;
using iris::RenderResult;
using iris::SampleTruth;

namespace {

IdentitySpec identity_spec(std::uint64_t seed, double iris_r = 170, double pupil_r = 45) {
    IdentitySpec id;
    id.texture_seed = seed;
    id.iris_radius = iris_r;
    id.base_pupil_radius = pupil_r;
    return id;
}

// Training corpus of square crops, one frame per identity.
std::vector<CorpusEntry> training_corpus(int n, std::uint64_t seed) {
    std::vector<CorpusEntry> out;
    for (int i = 0; i < n; ++i) {
        const RenderResult r = test::render_identity(seed, i, 0, 512);
        CorpusEntry e;
        e.image = r.image;
        e.mask = r.mask;
        e.identity = "id" + std::to_string(i);
        e.frame_index = 0;
        out.push_back(std::move(e));
    }
    return out;
}

double texture_energy(const iris::GrayImage& image, const iris::BitMask& mask) {
    const iris::FloatImage hp = iris::high_pass(iris::to_float(image), 2.0f);
    double sum = 0, sum2 = 0;
    std::int64_t n = 0;
    for (Eigen::Index y = 0; y < image.rows(); ++y)
        for (Eigen::Index x = 0; x < image.cols(); ++x) {
            if (!mask(y, x)) continue;
            sum += hp(y, x);
            sum2 += hp(y, x) * hp(y, x);
            ++n;
        }
    const double mean = sum / n;
    return std::sqrt(std::max(0.0, sum2 / n - mean * mean));
}

} // namespace

TEST_CASE("render mask is exactly the eyelid-clipped annulus") {
    const IdentitySpec id = identity_spec(5);
    CaptureSpec cap;
    cap.dilation_factor = 1.2;
    cap.eyelid_closure = 0.25;
    cap.center_dx = 7;
    cap.center_dy = -4;
    const RenderResult r = iris::render_iris(id, cap, 768, 576);

    REQUIRE(r.image.rows() == 576);
    REQUIRE(r.image.cols() == 768);
    const double cx = r.truth.pupil.cx, cy = r.truth.pupil.cy;
    const double rp = r.truth.pupil.r, ri = r.truth.iris.r;
    CHECK(rp == doctest::Approx(45 * 1.2));
    CHECK(ri == doctest::Approx(170));
    CHECK(cx == doctest::Approx((768 - 1) / 2.0 + 7));
    CHECK(cy == doctest::Approx((576 - 1) / 2.0 - 4));

    const double y_lid = cy - ri + cap.eyelid_closure * (2 * ri + 2);
    for (int y = 0; y < 576; ++y)
        for (int x = 0; x < 768; ++x) {
            const double d = std::hypot(x - cx, y - cy);
            const bool expected = d > rp && d <= ri && y >= y_lid;
            if (static_cast<bool>(r.mask(y, x)) != expected) {
                CAPTURE(x);
                CAPTURE(y);
                REQUIRE(static_cast<bool>(r.mask(y, x)) == expected);
            }
        }
    CHECK((r.truth.occlusion == r.mask).all());
}

TEST_CASE("render is deterministic and responds to every seed") {
    const IdentitySpec id = identity_spec(6);
    CaptureSpec cap;
    cap.noise_sigma = 3;
    cap.noise_seed = 99;
    const RenderResult a = iris::render_iris(id, cap, 512, 512);
    const RenderResult b = iris::render_iris(id, cap, 512, 512);
    CHECK((a.image == b.image).all());
    CHECK((a.mask == b.mask).all());

    IdentitySpec other = id;
    other.texture_seed = 7;
    CHECK_FALSE((iris::render_iris(other, cap, 512, 512).image == a.image).all());

    CaptureSpec cap2 = cap;
    cap2.noise_seed = 100;
    CHECK_FALSE((iris::render_iris(id, cap2, 512, 512).image == a.image).all());
}

TEST_CASE("render rejects impossible geometry") {
    CaptureSpec cap;
    // pupil swallowing the iris
    IdentitySpec tiny = identity_spec(1, 50, 49);
    CHECK_THROWS_AS(iris::render_iris(tiny, cap, 512, 512), Error);
    // iris pushed outside the frame
    CaptureSpec off;
    off.center_dx = 300;
    CHECK_THROWS_AS(iris::render_iris(identity_spec(1), off, 512, 512), Error);
    // nonsense closure
    CaptureSpec closed;
    closed.eyelid_closure = 1.5;
    CHECK_THROWS_AS(iris::render_iris(identity_spec(1), closed, 512, 512), Error);
    try {
        iris::render_iris(tiny, cap, 512, 512);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::SpecError);
    }
}

TEST_CASE("full eyelid closure empties the mask, zero closure fills the annulus") {
    CaptureSpec open;
    const RenderResult a = iris::render_iris(identity_spec(2), open, 512, 512);
    CHECK(iris::mask_coverage(a.mask) > 50000);

    CaptureSpec shut;
    shut.eyelid_closure = 1.0;
    const RenderResult b = iris::render_iris(identity_spec(2), shut, 512, 512);
    CHECK(iris::mask_coverage(b.mask) == 0);
}

TEST_CASE("polar_noise is deterministic and wraps in theta") {
    const iris::TextureSpectrum spec;
    const double a = iris::polar_noise(11, spec, 0.4, 1.0);
    CHECK(a == iris::polar_noise(11, spec, 0.4, 1.0));
    CHECK(a != iris::polar_noise(12, spec, 0.4, 1.0));
    const double wrapped = iris::polar_noise(11, spec, 0.4, 1.0 + 2 * std::numbers::pi);
    CHECK(a == doctest::Approx(wrapped).epsilon(1e-9));
}

TEST_CASE("dilation stretches the texture instead of replacing it") {
    // the same identity at two dilations stays far closer than two identities
    const iris::FilterBank bank = iris::build_filter_bank(3, 8, 9);
    CaptureSpec base, dilated;
    dilated.dilation_factor = 1.3;
    const auto t_base = test::truth_encode(iris::render_iris(identity_spec(31), base, 512, 512), bank);
    const auto t_dila = test::truth_encode(iris::render_iris(identity_spec(31), dilated, 512, 512), bank);
    const auto t_other = test::truth_encode(iris::render_iris(identity_spec(32), base, 512, 512), bank);

    const double same = iris::fractional_hd(t_base, t_dila).value;
    const double other = iris::fractional_hd(t_base, t_other).value;
    CHECK(same < 0.30);
    CHECK(other > 0.40);
    CHECK(same < other - 0.1);
}

TEST_CASE("in-plane rotation is recovered by the shift search") {
    const iris::FilterBank bank = iris::build_filter_bank(4, 8, 9);
    CaptureSpec base, rotated;
    rotated.rotation_deg = 4.2; // about 6 columns of 512
    const auto ta = test::truth_encode(iris::render_iris(identity_spec(33), base, 512, 512), bank);
    const auto tb = test::truth_encode(iris::render_iris(identity_spec(33), rotated, 512, 512), bank);
    const iris::MatchScore s = iris::fractional_hd(ta, tb);
    CHECK(s.value < 0.15);
    const int expected = static_cast<int>(std::lround(4.2 / 360.0 * 512));
    CHECK(std::abs(std::abs(s.best_shift) - expected) <= 1);
}

TEST_CASE("genuine captures score far below impostors through the template chain") {
    const iris::FilterBank bank = iris::build_filter_bank(5, 8, 9);
    std::vector<double> genuine, impostor;
    std::vector<iris::IrisTemplate> first_frames;
    for (int i = 0; i < 6; ++i) {
        const auto ra = test::render_identity(77, i, 0);
        const auto rb = test::render_identity(77, i, 1);
        const auto ta = test::truth_encode(ra, bank);
        const auto tb = test::truth_encode(rb, bank);
        genuine.push_back(iris::fractional_hd(ta, tb).value);
        first_frames.push_back(ta);
    }
    for (size_t i = 0; i < first_frames.size(); ++i)
        for (size_t j = i + 1; j < first_frames.size(); ++j)
            impostor.push_back(iris::fractional_hd(first_frames[i], first_frames[j]).value);

    // capture noise and half-column rotation residue put genuine pairs near
    // 0.3; impostors concentrate around 0.47
    const double max_genuine = *std::max_element(genuine.begin(), genuine.end());
    const double min_impostor = *std::min_element(impostor.begin(), impostor.end());
    CHECK(max_genuine < 0.40);
    CHECK(min_impostor > 0.44);
    CHECK(min_impostor - max_genuine > 0.08);
}

TEST_CASE("apply_fidelity at the top level is byte-identical") {
    const RenderResult r = test::render_identity(8, 0);
    const iris::GrayImage out = iris::apply_fidelity(r.image, 14, 123);
    CHECK((out == r.image).all());
}

TEST_CASE("apply_fidelity degrades deterministically and rejects bad levels") {
    const RenderResult r = test::render_identity(9, 0);
    const iris::GrayImage a = iris::apply_fidelity(r.image, 3, 5);
    const iris::GrayImage b = iris::apply_fidelity(r.image, 3, 5);
    CHECK((a == b).all());
    CHECK_FALSE((a == r.image).all());
    const iris::GrayImage c = iris::apply_fidelity(r.image, 3, 6);
    CHECK_FALSE((a == c).all());

    CHECK_THROWS_AS(iris::apply_fidelity(r.image, 0, 1), Error);
    CHECK_THROWS_AS(iris::apply_fidelity(r.image, 15, 1), Error);
}

TEST_CASE("texture energy rises monotonically with fidelity level") {
    const int kImages = 50;
    const int levels[] = {1, 4, 8, 11, 14};
    double mean_energy[5] = {};
    for (int i = 0; i < kImages; ++i) {
        const RenderResult r = test::render_identity(123, i, 0, 384);
        for (int li = 0; li < 5; ++li) {
            const iris::GrayImage img = iris::apply_fidelity(r.image, levels[li], 1000 + i);
            mean_energy[li] += texture_energy(img, r.mask) / kImages;
        }
    }
    for (int li = 1; li < 5; ++li) CHECK(mean_energy[li] > mean_energy[li - 1]);
}

TEST_CASE("sample_generator replays bit-exactly for a given seed and index") {
    const auto corpus = training_corpus(3, 900);
    GeneratorModel model;
    model.training_corpus = corpus;
    model.memorization_rate = 0.5;
    model.seed = 4;

    SampleTruth t1, t2;
    const CorpusEntry a = iris::sample_generator(model, 5, &t1);
    const CorpusEntry b = iris::sample_generator(model, 5, &t2);
    CHECK((a.image == b.image).all());
    CHECK(t1.leak == t2.leak);
    CHECK(a.origin == iris::Origin::Synthetic);
    CHECK(a.identity.empty());
    CHECK(a.seed == 5);

    const CorpusEntry c = iris::sample_generator(model, 6);
    CHECK_FALSE((a.image == c.image).all());
}

TEST_CASE("leak truth follows the planted rate and nests across rates") {
    const auto corpus = training_corpus(2, 901);
    GeneratorModel model;
    model.training_corpus = corpus;
    model.seed = 77;

    model.memorization_rate = 0.0;
    CHECK(iris::leak_indices(model, 400).empty());

    model.memorization_rate = 1.0;
    CHECK(iris::leak_indices(model, 50).size() == 50);

    GeneratorModel m2 = model, m5 = model, m10 = model;
    m2.memorization_rate = 0.02;
    m5.memorization_rate = 0.05;
    m10.memorization_rate = 0.10;
    const auto l2 = iris::leak_indices(m2, 4000);
    const auto l5 = iris::leak_indices(m5, 4000);
    const auto l10 = iris::leak_indices(m10, 4000);
    CHECK(std::includes(l5.begin(), l5.end(), l2.begin(), l2.end()));
    CHECK(std::includes(l10.begin(), l10.end(), l5.begin(), l5.end()));

    // count within 4 sigma of the binomial expectation
    const double n = 4000;
    CHECK(std::abs(static_cast<double>(l5.size()) - 0.05 * n) <
          4 * std::sqrt(n * 0.05 * 0.95));

    // sampled truth agrees with leak_indices
    std::set<std::size_t> set5(l5.begin(), l5.end());
    for (std::size_t idx : {std::size_t{0}, std::size_t{7}, std::size_t{19}}) {
        SampleTruth t;
        iris::sample_generator(m5, idx, &t);
        CHECK(t.leak == (set5.count(idx) > 0));
    }
}

TEST_CASE("leaked samples are near-copies of a training image") {
    const auto corpus = training_corpus(3, 902);
    GeneratorModel model;
    model.training_corpus = corpus;
    model.memorization_rate = 1.0;
    model.seed = 5;

    SampleTruth truth;
    const CorpusEntry leak = iris::sample_generator(model, 0, &truth);
    REQUIRE(truth.leak);
    REQUIRE(truth.source_index < corpus.size());
    CHECK(truth.source_identity == corpus[truth.source_index].identity);

    iris::DiffSummary to_source, to_other;
    iris::diff_image(corpus[truth.source_index].image, leak.image, &to_source);
    iris::diff_image(corpus[(truth.source_index + 1) % 3].image, leak.image, &to_other);
    CHECK(to_source.mean_abs < 6.0);
    CHECK(to_other.mean_abs > 4 * to_source.mean_abs);
    REQUIRE(leak.mask.has_value());
    CHECK((leak.mask.value() == corpus[truth.source_index].mask.value()).all());
}

TEST_CASE("fresh samples carry no identity and differ from the corpus") {
    const auto corpus = training_corpus(2, 903);
    GeneratorModel model;
    model.training_corpus = corpus;
    model.memorization_rate = 0.0;
    model.seed = 6;

    SampleTruth truth;
    const CorpusEntry fresh = iris::sample_generator(model, 0, &truth);
    CHECK_FALSE(truth.leak);
    CHECK(fresh.identity.empty());
    REQUIRE(fresh.image.rows() == 512);
    iris::DiffSummary d;
    iris::diff_image(corpus[0].image, fresh.image, &d);
    CHECK(d.mean_abs > 10.0);
}

TEST_CASE("generator model validation") {
    GeneratorModel model; // empty corpus
    model.memorization_rate = 0.5;
    CHECK_THROWS_AS(iris::sample_generator(model, 0), Error);

    const auto corpus = training_corpus(1, 904);
    GeneratorModel bad_rate;
    bad_rate.training_corpus = corpus;
    bad_rate.memorization_rate = 1.5;
    CHECK_THROWS_AS(iris::sample_generator(bad_rate, 0), Error);

    GeneratorModel bad_level;
    bad_level.training_corpus = corpus;
    bad_level.fidelity_level = 0;
    CHECK_THROWS_AS(iris::sample_generator(bad_level, 0), Error);
}
