/*
 * corpus.hpp - corpus entries, curation steps, and the manifest format.
 *
 * Curation follows the acquisition protocol for generator training input:
 * blink rejection by mask coverage, pupil-centered square crop, optional
 * left-right mirroring, then framing to a 4:3 640x480 grayscale sample.
 */
#pragma once

#include "iris/image.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace iris {

enum class Origin { Real, Synthetic };

struct CorpusEntry {
    GrayImage image;
    std::optional<BitMask> mask; // absent for generated samples
    std::string identity;        // subject+eye label, non-empty for real entries
    int frame_index = 0;
    Origin origin = Origin::Real;
    int snapshot = 0;        // >= 1 when origin == Synthetic
    std::uint64_t seed = 0;  // generator seed when origin == Synthetic
    bool mirrored = false;
};

// Number of set pixels in the mask.
std::int64_t mask_coverage(const BitMask& mask);

// Keep rule shared by blink_filter and the streaming pipeline:
// an entry survives iff coverage >= threshold.
inline bool blink_keep(std::int64_t coverage, std::int64_t threshold) {
    return coverage >= threshold;
}

// Order-preserving partition into (kept, discarded). Entries without a mask
// raise MissingMask.
std::pair<std::vector<CorpusEntry>, std::vector<CorpusEntry>>
blink_filter(std::vector<CorpusEntry> entries, std::int64_t threshold);

// size x size crop with the pupil center mapped to (size/2, size/2).
// The window [cx-size/2, cx+size/2) x [cy-size/2, cy+size/2) must lie fully
// inside the image, otherwise BorderViolation.
CorpusEntry center_crop(const CorpusEntry& entry, int cx, int cy, int size = 512);

// Appends a left-right flipped duplicate of every entry.
std::vector<CorpusEntry> mirror_augment(std::vector<CorpusEntry> corpus);

// Pads a square crop with gray (128) side bars to 4:3 (512 -> 684x512,
// 86 columns per side) and bilinear-resizes to 640x480.
GrayImage iso_frame(const GrayImage& image, int expected_size = 512);

// Same geometry as iso_frame for masks: zero side bars, bilinear resize,
// then re-binarized at 0.5.
BitMask iso_frame_mask(const BitMask& mask, int expected_size = 512);

// Side-bar width used by iso_frame for a given square input size.
int iso_pad_columns(int size);

inline constexpr int kIsoWidth = 640;
inline constexpr int kIsoHeight = 480;
inline constexpr std::uint8_t kIsoPadValue = 128;

// --- manifest -------------------------------------------------------------

struct ManifestEntry {
    std::string path;
    std::string mask_path; // empty when there is no mask
    std::string identity;
    int frame = 0;
    Origin origin = Origin::Real;
    int snapshot = 0;
    std::uint64_t seed = 0;
    bool mirrored = false;
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

// Loads pixel data for a manifest entry; paths are resolved relative to the
// manifest's directory.
CorpusEntry load_entry(const std::filesystem::path& manifest_dir, const ManifestEntry& entry);

// Stable identifier used in score tables: "<identity>/f<frame>[m]" for real
// entries, "snap<snapshot>/seed<seed>" for generated ones.
std::string entry_id(const ManifestEntry& entry);

} // namespace iris
