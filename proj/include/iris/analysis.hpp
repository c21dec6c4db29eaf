/*
 * analysis.hpp - score-table statistics: distribution summaries, ROC/AUC,
 * FAR-calibrated thresholds, leakage heatmaps, leak flagging, difference
 * images, and degrees-of-freedom estimates.
 */
#pragma once

#include "iris/image.hpp"
#include "iris/matching.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace iris {

struct ScoreDistribution {
    PairType pair_type = PairType::ImpostorRR;
    Orientation orientation = Orientation::Distance;
    std::vector<double> scores; // sorted ascending
    double mean = 0;
    double stddev = 0; // population
    std::vector<std::pair<double, double>> quantiles; // (level, value)
    std::vector<double> bin_edges;                    // bins + 1 entries
    std::vector<std::int64_t> counts;

    std::size_t size() const { return scores.size(); }
    double quantile(double q) const; // linear interpolation on order statistics
};

inline constexpr double kDefaultQuantiles[] = {0.001, 0.01, 0.05, 0.25, 0.5,
                                               0.75,  0.95, 0.99, 0.999};

ScoreDistribution summarize(std::span<const double> scores, PairType pair_type,
                            Orientation orientation, int bins = 100,
                            std::span<const double> quantile_levels = kDefaultQuantiles);

struct RocCurve {
    std::vector<std::pair<double, double>> points; // (FPR, TPR), sorted by FPR
    double auc = 0;
};

// Positive class = genuine. Distance orientation accepts score <= t,
// Similarity accepts score >= t. Swept over all distinct scores plus
// sentinels; AUC by the trapezoidal rule.
RocCurve roc(const ScoreDistribution& genuine, const ScoreDistribution& impostor);

struct FarThreshold {
    double level = 0;
    double threshold = 0;
    bool attainable = false; // false when level < 1/|scores|
};

inline constexpr double kDefaultFarLevels[] = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};

// Accept-side empirical quantile of the impostor R-R distribution at each
// level: lower tail for Distance, upper tail for Similarity.
std::vector<FarThreshold> far_thresholds(const ScoreDistribution& impostor_rr,
                                         std::span<const double> far_levels = kDefaultFarLevels);

struct LeakageHeatmap {
    std::vector<double> levels;  // attainable FAR levels, one per row
    std::vector<int> snapshots;  // one per column
    std::vector<double> percent; // row-major, levels x snapshots
    std::vector<std::uint8_t> empty_cell; // 1 where a snapshot had no scores

    double cell(std::size_t row, std::size_t col) const {
        return percent[row * snapshots.size() + col];
    }
};

// cell(level, snapshot) = 100 * |{R-F scores on or beyond threshold}| / |R-F
// scores at snapshot|. Unattainable thresholds contribute no row.
LeakageHeatmap leakage_heatmap(const std::map<int, std::vector<double>>& rf_by_snapshot,
                               std::span<const FarThreshold> thresholds,
                               Orientation orientation);

struct FlaggedPair {
    std::string id_a;
    std::string id_b;
    double score = 0;
    double margin = 0; // how far past the threshold, accepting side positive
};

// Pairs at or beyond the threshold (inclusive), most severe first.
std::vector<FlaggedPair> flag_leaks(std::span<const PairRecord> rf_records, double threshold,
                                    Orientation orientation);

struct DiffSummary {
    double mean_abs = 0;
    double max_abs = 0;
};

GrayImage diff_image(const GrayImage& real, const GrayImage& fake, DiffSummary* summary = nullptr);

struct DofEstimate {
    double p = 0;     // mean impostor score
    double sigma = 0; // population std
    double n_dof = 0; // p(1-p)/sigma^2
};

DofEstimate estimate_dof(const ScoreDistribution& impostor);

struct ShiftSummary {
    double ks_statistic = 0;
    // Positive when the R-F tail leans toward the genuine side: lower 0.1%
    // quantile for Distance, upper 99.9% for Similarity.
    double extreme_quantile_delta = 0;
};

ShiftSummary distribution_shift(const ScoreDistribution& rr, const ScoreDistribution& rf);

} // namespace iris
