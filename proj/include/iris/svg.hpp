/*
 * svg.hpp - self-contained SVG/CSV artifact rendering for reports.
 */
#pragma once

#include "iris/analysis.hpp"

#include <span>
#include <string>

namespace iris {

// Overlaid per-pair-type histograms (bin fractions) on shared axes.
std::string histogram_svg(std::span<const ScoreDistribution> distributions,
                          const std::string& title);

std::string roc_svg(const RocCurve& curve, const std::string& title);

// One row per FAR level, one column per snapshot; empty cells stay blank.
std::string heatmap_csv(const LeakageHeatmap& heatmap);

} // namespace iris
