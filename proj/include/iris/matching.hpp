/*
 * matching.hpp - masked fractional Hamming distance with rotation
 * compensation, and the all-pairs scoring engine.
 */
#pragma once

#include "iris/encoding.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace iris {

struct ShiftRange {
    int max_shift = 8; // applied symmetrically as -max..+max columns
};

enum class Orientation { Distance, Similarity };

std::string_view orientation_name(Orientation o);
Orientation orientation_from(std::string_view name);

struct MatchScore {
    double value = 0;
    Orientation orientation = Orientation::Distance;
    int best_shift = 0;
    std::int64_t overlap = 0;
};

enum class PairType { Genuine, ImpostorRR, ImpostorRF, ImpostorFF };

std::string_view pair_type_name(PairType t);
PairType pair_type_from(std::string_view name);

inline constexpr std::int64_t kDefaultMinOverlap = 1024;

// Minimum fractional Hamming distance over the shift range. Shifts are
// circular in the angular dimension; ties resolve to the smallest absolute
// shift, negative before positive. Shifts whose mask overlap falls below
// min_overlap are skipped; if none qualifies, InsufficientOverlap is raised.
MatchScore fractional_hd(const IrisTemplate& a, const IrisTemplate& b, ShiftRange shifts = {},
                         std::int64_t min_overlap = kDefaultMinOverlap);

// Distance <-> Similarity via v -> 1 - v; identity when already oriented.
MatchScore orient(MatchScore score, Orientation target);

PairType classify_pair(const TemplateMeta& a, const TemplateMeta& b);

enum class PairStatus { Ok, InsufficientOverlap, DimensionMismatch };

std::string_view pair_status_name(PairStatus s);

struct PairRecord {
    std::string id_a;
    std::string id_b;
    PairType type = PairType::ImpostorRR;
    PairStatus status = PairStatus::Ok;
    MatchScore score;
};

// Scores every cross pair (|A| x |B| records), or every unordered pair
// (n(n-1)/2 records) when both spans reference the same data. Per-pair
// failures become records; the batch never aborts. Output is sorted by
// (id_a, id_b) and is identical for any worker count.
std::vector<PairRecord> all_pairs(std::span<const IrisTemplate> set_a,
                                  std::span<const IrisTemplate> set_b, ShiftRange shifts = {},
                                  std::int64_t min_overlap = kDefaultMinOverlap, int workers = 1);

// Score table CSV: header
// id_a,id_b,pair_type,orientation,score,best_shift,overlap,status
// with scores printed to six decimals.
void write_score_csv(const std::filesystem::path& path, std::span<const PairRecord> records);
std::vector<PairRecord> read_score_csv(const std::filesystem::path& path);

// Name of the popcount kernel picked for this CPU ("scalar" or an ISA tag).
std::string_view hd_backend_name();

} // namespace iris
