#include "iris/config.hpp"

#include "iris/errors.hpp"
#include "iris/matching.hpp"

#include <fstream>

namespace iris {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void check_keys(const json& j, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        bool known = false;
        for (auto a : allowed)
            if (key == a) known = true;
        if (!known) raise(Errc::ConfigError, "unknown config key '" + where + key + "'");
    }
}

template <class T> void read_into(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace

RunConfig config_from_json(const json& j) {
    RunConfig c;
    check_keys(j, {"out_dir", "seed", "workers", "synth", "curation", "encoder", "matcher",
                   "analysis"},
               "");
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
    read_into(j, "seed", c.seed);
    read_into(j, "workers", c.workers);
    if (j.contains("synth")) {
        const json& s = j.at("synth");
        check_keys(s,
                   {"identities", "frames_per_identity", "blink_frames", "snapshots",
                    "fakes_per_snapshot", "memorization_rate", "mirror"},
                   "synth.");
        read_into(s, "identities", c.synth.identities);
        read_into(s, "frames_per_identity", c.synth.frames_per_identity);
        read_into(s, "blink_frames", c.synth.blink_frames);
        read_into(s, "snapshots", c.synth.snapshots);
        read_into(s, "fakes_per_snapshot", c.synth.fakes_per_snapshot);
        read_into(s, "memorization_rate", c.synth.memorization_rate);
        read_into(s, "mirror", c.synth.mirror);
    }
    if (j.contains("curation")) {
        const json& s = j.at("curation");
        check_keys(s, {"blink_threshold_fraction", "crop_size"}, "curation.");
        read_into(s, "blink_threshold_fraction", c.curation.blink_threshold_fraction);
        read_into(s, "crop_size", c.curation.crop_size);
    }
    if (j.contains("encoder")) {
        const json& s = j.at("encoder");
        check_keys(s, {"radial_res", "angular_res", "filters", "filter_side", "filter_seed"},
                   "encoder.");
        read_into(s, "radial_res", c.encoder.radial_res);
        read_into(s, "angular_res", c.encoder.angular_res);
        read_into(s, "filters", c.encoder.filters);
        read_into(s, "filter_side", c.encoder.filter_side);
        read_into(s, "filter_seed", c.encoder.filter_seed);
    }
    if (j.contains("matcher")) {
        const json& s = j.at("matcher");
        check_keys(s, {"max_shift", "min_overlap", "orientation"}, "matcher.");
        read_into(s, "max_shift", c.matcher.max_shift);
        read_into(s, "min_overlap", c.matcher.min_overlap);
        read_into(s, "orientation", c.matcher.orientation);
    }
    if (j.contains("analysis")) {
        const json& s = j.at("analysis");
        check_keys(s, {"far_levels", "bins"}, "analysis.");
        read_into(s, "far_levels", c.analysis.far_levels);
        read_into(s, "bins", c.analysis.bins);
    }
    validate_config(c);
    return c;
}

ordered_json config_to_json(const RunConfig& c) {
    ordered_json j;
    j["out_dir"] = c.out_dir.string();
    j["seed"] = c.seed;
    j["workers"] = c.workers;
    j["synth"] = {{"identities", c.synth.identities},
                  {"frames_per_identity", c.synth.frames_per_identity},
                  {"blink_frames", c.synth.blink_frames},
                  {"snapshots", c.synth.snapshots},
                  {"fakes_per_snapshot", c.synth.fakes_per_snapshot},
                  {"memorization_rate", c.synth.memorization_rate},
                  {"mirror", c.synth.mirror}};
    j["curation"] = {{"blink_threshold_fraction", c.curation.blink_threshold_fraction},
                     {"crop_size", c.curation.crop_size}};
    j["encoder"] = {{"radial_res", c.encoder.radial_res},
                    {"angular_res", c.encoder.angular_res},
                    {"filters", c.encoder.filters},
                    {"filter_side", c.encoder.filter_side},
                    {"filter_seed", c.encoder.filter_seed}};
    j["matcher"] = {{"max_shift", c.matcher.max_shift},
                    {"min_overlap", c.matcher.min_overlap},
                    {"orientation", c.matcher.orientation}};
    j["analysis"] = {{"far_levels", c.analysis.far_levels}, {"bins", c.analysis.bins}};
    return j;
}

RunConfig load_config(const std::filesystem::path& path) {
    if (path.empty()) return config_from_json(json::object());
    std::ifstream in(path);
    if (!in) raise(Errc::IoError, "cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        raise(Errc::ConfigError, "config " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

void apply_override(json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        raise(Errc::ConfigError, "override '" + assignment + "' is not key=value");
    std::string key = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);
    for (char& ch : key)
        if (ch == '.') ch = '/';
    json parsed;
    try {
        parsed = json::parse(value);
    } catch (const json::exception&) {
        parsed = value; // bare words count as strings
    }
    j[json::json_pointer("/" + key)] = parsed;
}

void validate_config(const RunConfig& c) {
    const auto need = [](bool ok, const std::string& what) {
        if (!ok) raise(Errc::ConfigError, what);
    };
    need(c.workers >= 1, "workers must be >= 1");
    need(c.synth.identities >= 1, "synth.identities must be >= 1");
    need(c.synth.frames_per_identity >= 1, "synth.frames_per_identity must be >= 1");
    need(c.synth.blink_frames >= 0, "synth.blink_frames must be >= 0");
    need(c.synth.snapshots >= 1 && c.synth.snapshots <= 14,
         "synth.snapshots must lie in 1..14 (snapshot index = fidelity level)");
    need(c.synth.fakes_per_snapshot >= 1, "synth.fakes_per_snapshot must be >= 1");
    need(c.synth.memorization_rate >= 0 && c.synth.memorization_rate <= 1,
         "synth.memorization_rate must lie in [0, 1]");
    need(c.curation.blink_threshold_fraction >= 0 && c.curation.blink_threshold_fraction < 1,
         "curation.blink_threshold_fraction must lie in [0, 1)");
    need(c.curation.crop_size >= 64, "curation.crop_size must be >= 64");
    need(c.encoder.radial_res >= 16, "encoder.radial_res must be >= 16");
    need(c.encoder.angular_res >= 32, "encoder.angular_res must be >= 32");
    need(c.encoder.filters >= 1 && c.encoder.filters <= 64,
         "encoder.filters must lie in 1..64");
    need(c.encoder.filter_side >= 3 && c.encoder.filter_side % 2 == 1,
         "encoder.filter_side must be odd and >= 3");
    need(c.encoder.filters <= c.encoder.filter_side * c.encoder.filter_side - 1,
         "encoder.filters must be <= filter_side^2 - 1");
    need(c.matcher.max_shift >= 0, "matcher.max_shift must be >= 0");
    need(c.matcher.min_overlap >= 1, "matcher.min_overlap must be >= 1");
    orientation_from(c.matcher.orientation); // raises on unknown values
    need(!c.analysis.far_levels.empty(), "analysis.far_levels must not be empty");
    for (double level : c.analysis.far_levels)
        need(level > 0 && level < 1, "analysis.far_levels entries must lie in (0, 1)");
    need(c.analysis.bins >= 1, "analysis.bins must be >= 1");
}

} // namespace iris
