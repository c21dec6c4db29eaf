/*
 * config.hpp - one structured config drives every pipeline stage; a global
 * seed feeds each stage through labeled derivation so stages stay
 * independently reproducible.
 */
#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace iris {

struct SynthParams {
    int identities = 47;
    int frames_per_identity = 20;
    int blink_frames = 1; // extra near-closed frames per identity
    int snapshots = 14;   // fake sets; the snapshot index is the fidelity level
    int fakes_per_snapshot = 200;
    double memorization_rate = 0.0;
    bool mirror = false; // mirror-augment the generator training corpus
};

struct CurationParams {
    double blink_threshold_fraction = 0.30; // of the corpus max mask coverage
    int crop_size = 512;
};

struct EncoderParams {
    int radial_res = 64;
    int angular_res = 512;
    int filters = 8;
    int filter_side = 9;
    std::uint64_t filter_seed = 0; // 0 = derive from the global seed
};

struct MatcherParams {
    int max_shift = 8;
    std::int64_t min_overlap = 1024;
    std::string orientation = "distance";
};

struct AnalysisParams {
    std::vector<double> far_levels = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    int bins = 100;
};

struct RunConfig {
    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 1;
    int workers = 1;
    SynthParams synth;
    CurationParams curation;
    EncoderParams encoder;
    MatcherParams matcher;
    AnalysisParams analysis;
};

// Missing keys keep their defaults; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const RunConfig& config);

// Empty path = all defaults.
RunConfig load_config(const std::filesystem::path& path);

// "dotted.key=value" with the value parsed as JSON when possible
// (e.g. synth.identities=5, matcher.orientation=distance).
void apply_override(nlohmann::json& j, const std::string& assignment);

void validate_config(const RunConfig& config);

} // namespace iris
