/*
 * synth.hpp - parametric iris renderer with exact ground truth, plus a
 * generator stand-in with a controllable memorization rate and
 * snapshot-dependent fidelity.
 */
#pragma once

#include "iris/corpus.hpp"
#include "iris/segmentation.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace iris {

struct TextureSpectrum {
    int octaves = 4;
    double base_freq_theta = 8; // lattice cells around the annulus, octave 0
    double base_freq_rho = 2;   // lattice cells across the annulus, octave 0
    double gain = 0.55;         // per-octave amplitude falloff
};

struct IdentitySpec {
    std::uint64_t texture_seed = 0;
    double iris_radius = 170;
    double base_pupil_radius = 45;
    TextureSpectrum spectrum;
};

struct CaptureSpec {
    double dilation_factor = 1.0; // multiplies the pupil radius
    double rotation_deg = 0;      // rotates iris texture, not geometry
    double noise_sigma = 0;       // additive sensor noise, intensity units
    double blur_sigma = 0;        // optical blur, pixels
    double center_dx = 0;         // eye position jitter within the frame
    double center_dy = 0;
    double eyelid_closure = 0;    // 0 open .. 1 fully covered from the top
    bool specular = true;         // small highlight inside the pupil
    std::uint64_t noise_seed = 0;
};

struct RenderResult {
    GrayImage image;
    BitMask mask;       // exact annulus ground truth, eyelid excluded
    Segmentation truth; // boundary circles + usable-pixel mask
};

// Band-limited seeded noise over normalized annulus coordinates, so pupil
// dilation stretches the texture instead of replacing it. rho in [0,1] maps
// pupil edge to iris edge; theta wraps at 2*pi.
double polar_noise(std::uint64_t texture_seed, const TextureSpectrum& spectrum, double rho,
                   double theta);

RenderResult render_iris(const IdentitySpec& identity, const CaptureSpec& capture,
                         int width = 768, int height = 576);

struct GeneratorModel {
    std::span<const CorpusEntry> training_corpus; // pupil-centered square crops
    double memorization_rate = 0;                 // lambda in [0,1]
    int fidelity_level = 14;                      // 1 worst .. 14 untouched
    std::uint64_t seed = 0;
};

struct SampleTruth {
    bool leak = false;
    std::size_t source_index = 0; // into training_corpus, when leak
    std::string source_identity;
};

// Emits sample `index` of the model: with probability lambda (decided purely
// by (seed, index), so leak sets are nested across lambda) a near-copy of a
// training image with slight noise, otherwise a fresh never-seen identity.
// Fidelity degradation applies to both branches.
CorpusEntry sample_generator(const GeneratorModel& model, std::size_t index,
                             SampleTruth* truth = nullptr);

// Leak set for samples [0, count); pure function of (model.seed, lambda).
std::vector<std::size_t> leak_indices(const GeneratorModel& model, std::size_t count);

// Snapshot-style degradation: level 14 returns the input byte-identical;
// artifact strength (smoothing + bright blob artifacts) grows as the level
// drops toward 1.
GrayImage apply_fidelity(const GrayImage& image, int level, std::uint64_t seed);

} // namespace iris
