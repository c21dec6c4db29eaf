#include "iris/corpus.hpp"

#include "iris/errors.hpp"
#include "iris/imgproc.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>

namespace iris {

std::int64_t mask_coverage(const BitMask& mask) {
    std::int64_t n = 0;
    for (Eigen::Index i = 0; i < mask.size(); ++i) n += mask.data()[i] ? 1 : 0;
    return n;
}

std::pair<std::vector<CorpusEntry>, std::vector<CorpusEntry>>
blink_filter(std::vector<CorpusEntry> entries, std::int64_t threshold) {
    std::vector<CorpusEntry> kept, discarded;
    for (auto& e : entries) {
        if (!e.mask) raise(Errc::MissingMask, "entry " + e.identity + " has no segmentation mask");
        if (blink_keep(mask_coverage(*e.mask), threshold))
            kept.push_back(std::move(e));
        else
            discarded.push_back(std::move(e));
    }
    return {std::move(kept), std::move(discarded)};
}

CorpusEntry center_crop(const CorpusEntry& entry, int cx, int cy, int size) {
    const int half = size / 2;
    const int x0 = cx - half, y0 = cy - half;
    if (x0 < 0 || y0 < 0 || x0 + size > entry.image.cols() || y0 + size > entry.image.rows())
        raise(Errc::BorderViolation,
              "crop window at (" + std::to_string(cx) + "," + std::to_string(cy) +
                  ") exceeds image bounds");

    CorpusEntry out = entry;
    out.image = entry.image.block(y0, x0, size, size);
    if (entry.mask) out.mask = entry.mask->block(y0, x0, size, size).eval();
    return out;
}

std::vector<CorpusEntry> mirror_augment(std::vector<CorpusEntry> corpus) {
    const size_t n = corpus.size();
    corpus.reserve(2 * n);
    for (size_t i = 0; i < n; ++i) {
        CorpusEntry flipped = corpus[i];
        flipped.image = flip_horizontal(corpus[i].image);
        if (corpus[i].mask) flipped.mask = flip_horizontal(*corpus[i].mask);
        flipped.mirrored = true;
        corpus.push_back(std::move(flipped));
    }
    return corpus;
}

int iso_pad_columns(int size) {
    // Smallest symmetric padding that reaches at least 4:3.
    return static_cast<int>(std::ceil((size * 4.0 / 3.0 - size) / 2.0));
}

GrayImage iso_frame(const GrayImage& image, int expected_size) {
    if (image.rows() != expected_size || image.cols() != expected_size)
        raise(Errc::DimensionMismatch, "iso_frame expects a " + std::to_string(expected_size) +
                                           " square input, got " + std::to_string(image.cols()) + "x" +
                                           std::to_string(image.rows()));

    const int pad = iso_pad_columns(expected_size);
    FloatImage padded(expected_size, expected_size + 2 * pad);
    padded.setConstant(static_cast<float>(kIsoPadValue));
    padded.block(0, pad, expected_size, expected_size) = to_float(image);
    return to_gray(resize_bilinear(padded, kIsoWidth, kIsoHeight));
}

BitMask iso_frame_mask(const BitMask& mask, int expected_size) {
    if (mask.rows() != expected_size || mask.cols() != expected_size)
        raise(Errc::DimensionMismatch, "iso_frame_mask expects a " +
                                           std::to_string(expected_size) +
                                           " square input, got " + std::to_string(mask.cols()) +
                                           "x" + std::to_string(mask.rows()));

    const int pad = iso_pad_columns(expected_size);
    FloatImage padded(expected_size, expected_size + 2 * pad);
    padded.setZero();
    padded.block(0, pad, expected_size, expected_size) = mask.cast<float>();
    const FloatImage resized = resize_bilinear(padded, kIsoWidth, kIsoHeight);
    BitMask out(kIsoHeight, kIsoWidth);
    for (Eigen::Index r = 0; r < out.rows(); ++r)
        for (Eigen::Index c = 0; c < out.cols(); ++c) out(r, c) = resized(r, c) >= 0.5f ? 1 : 0;
    return out;
}

// --- manifest -------------------------------------------------------------

namespace {

std::string origin_name(Origin o) {
    return o == Origin::Real ? "real" : "synthetic";
}

Origin origin_from(const std::string& s) {
    if (s == "real") return Origin::Real;
    if (s == "synthetic") return Origin::Synthetic;
    raise(Errc::IoError, "unknown origin '" + s + "' in manifest");
}

} // namespace

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::IoError, "cannot open manifest " + path.string());
    nlohmann::json doc;
    in >> doc;

    std::vector<ManifestEntry> entries;
    entries.reserve(doc.size());
    for (const auto& rec : doc) {
        ManifestEntry e;
        e.path = rec.at("path").get<std::string>();
        e.mask_path = rec.value("mask_path", std::string());
        e.identity = rec.value("identity", std::string());
        e.frame = rec.value("frame", 0);
        e.origin = origin_from(rec.at("origin").get<std::string>());
        e.snapshot = rec.value("snapshot", 0);
        e.seed = rec.value("seed", std::uint64_t{0});
        e.mirrored = rec.value("mirrored", false);
        if (e.origin == Origin::Real && e.identity.empty())
            raise(Errc::IoError, "real manifest entry without identity: " + e.path);
        entries.push_back(std::move(e));
    }
    return entries;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& e : entries) {
        nlohmann::ordered_json rec;
        rec["path"] = e.path;
        rec["mask_path"] = e.mask_path;
        rec["identity"] = e.identity;
        rec["frame"] = e.frame;
        rec["origin"] = origin_name(e.origin);
        rec["snapshot"] = e.snapshot;
        rec["seed"] = e.seed;
        rec["mirrored"] = e.mirrored;
        doc.push_back(std::move(rec));
    }
    std::ofstream out(path);
    if (!out) raise(Errc::IoError, "cannot write manifest " + path.string());
    out << doc.dump(2) << '\n';
}

CorpusEntry load_entry(const std::filesystem::path& manifest_dir, const ManifestEntry& entry) {
    CorpusEntry e;
    e.image = read_png_gray(manifest_dir / entry.path);
    if (!entry.mask_path.empty()) {
        e.mask = read_png_mask(manifest_dir / entry.mask_path);
        if (e.mask->rows() != e.image.rows() || e.mask->cols() != e.image.cols())
            raise(Errc::DimensionMismatch, "mask dimensions differ from image: " + entry.path);
    }
    e.identity = entry.identity;
    e.frame_index = entry.frame;
    e.origin = entry.origin;
    e.snapshot = entry.snapshot;
    e.seed = entry.seed;
    e.mirrored = entry.mirrored;
    return e;
}

std::string entry_id(const ManifestEntry& entry) {
    if (entry.origin == Origin::Real) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "/f%03d", entry.frame);
        return entry.identity + buf + (entry.mirrored ? "m" : "");
    }
    char buf[48];
    std::snprintf(buf, sizeof buf, "snap%02d/seed%03llu", entry.snapshot,
                  static_cast<unsigned long long>(entry.seed));
    return buf;
}

} // namespace iris
