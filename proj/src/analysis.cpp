#include "iris/analysis.hpp"

#include "iris/errors.hpp"

#include <algorithm>
#include <cmath>

namespace iris {

double ScoreDistribution::quantile(double q) const {
    if (scores.empty()) raise(Errc::InsufficientData, "quantile of empty distribution");
    q = std::clamp(q, 0.0, 1.0);
    const double h = q * static_cast<double>(scores.size() - 1);
    const std::size_t i = static_cast<std::size_t>(h);
    if (i + 1 >= scores.size()) return scores.back();
    const double frac = h - static_cast<double>(i);
    return scores[i] + frac * (scores[i + 1] - scores[i]);
}

ScoreDistribution summarize(std::span<const double> scores, PairType pair_type,
                            Orientation orientation, int bins,
                            std::span<const double> quantile_levels) {
    if (scores.size() < 2)
        raise(Errc::InsufficientData,
              "need at least 2 scores, got " + std::to_string(scores.size()));
    if (bins < 1) raise(Errc::ConfigError, "histogram needs at least 1 bin");

    ScoreDistribution d;
    d.pair_type = pair_type;
    d.orientation = orientation;
    d.scores.assign(scores.begin(), scores.end());
    std::sort(d.scores.begin(), d.scores.end());

    const double n = static_cast<double>(d.scores.size());
    double sum = 0;
    for (double s : d.scores) sum += s;
    d.mean = sum / n;
    double sq = 0;
    for (double s : d.scores) sq += (s - d.mean) * (s - d.mean);
    d.stddev = std::sqrt(sq / n);

    d.quantiles.reserve(quantile_levels.size());
    for (double q : quantile_levels) d.quantiles.emplace_back(q, d.quantile(q));

    const double lo = d.scores.front();
    double hi = d.scores.back();
    if (hi == lo) hi = lo + 1.0; // all-equal scores land in bin 0
    d.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b)
        d.bin_edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * b / bins;
    d.counts.assign(static_cast<std::size_t>(bins), 0);
    for (double s : d.scores) {
        auto b = static_cast<std::int64_t>((s - lo) / (hi - lo) * bins);
        b = std::clamp<std::int64_t>(b, 0, bins - 1);
        ++d.counts[static_cast<std::size_t>(b)];
    }
    return d;
}

RocCurve roc(const ScoreDistribution& genuine, const ScoreDistribution& impostor) {
    if (genuine.orientation != impostor.orientation)
        raise(Errc::OrientationError, "genuine and impostor orientations differ");
    if (genuine.scores.empty() || impostor.scores.empty())
        raise(Errc::InsufficientData, "roc needs scores on both sides");

    // Map Similarity onto the Distance sweep by negating scores; accepting
    // score >= t becomes -score <= -t.
    const bool flip = genuine.orientation == Orientation::Similarity;
    auto prep = [&](const std::vector<double>& in) {
        std::vector<double> v(in);
        if (flip) {
            for (double& x : v) x = -x;
            std::reverse(v.begin(), v.end()); // keep ascending order
        }
        return v;
    };
    const std::vector<double> gen = prep(genuine.scores);
    const std::vector<double> imp = prep(impostor.scores);

    std::vector<double> thresholds;
    thresholds.reserve(gen.size() + imp.size());
    thresholds.insert(thresholds.end(), gen.begin(), gen.end());
    thresholds.insert(thresholds.end(), imp.begin(), imp.end());
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    RocCurve curve;
    curve.points.reserve(thresholds.size() + 1);
    curve.points.emplace_back(0.0, 0.0); // t = -inf sentinel
    std::size_t gi = 0, ii = 0;
    for (double t : thresholds) {
        while (gi < gen.size() && gen[gi] <= t) ++gi;
        while (ii < imp.size() && imp[ii] <= t) ++ii;
        curve.points.emplace_back(static_cast<double>(ii) / static_cast<double>(imp.size()),
                                  static_cast<double>(gi) / static_cast<double>(gen.size()));
    }
    double auc = 0;
    for (std::size_t k = 1; k < curve.points.size(); ++k) {
        const auto& [x0, y0] = curve.points[k - 1];
        const auto& [x1, y1] = curve.points[k];
        auc += (x1 - x0) * (y0 + y1) / 2.0;
    }
    curve.auc = auc;
    return curve;
}

std::vector<FarThreshold> far_thresholds(const ScoreDistribution& impostor_rr,
                                         std::span<const double> far_levels) {
    if (impostor_rr.scores.empty())
        raise(Errc::InsufficientData, "far_thresholds needs impostor scores");
    const double n = static_cast<double>(impostor_rr.scores.size());
    std::vector<FarThreshold> out;
    out.reserve(far_levels.size());
    for (double level : far_levels) {
        FarThreshold ft;
        ft.level = level;
        ft.attainable = level >= 1.0 / n;
        const double q = impostor_rr.orientation == Orientation::Distance ? level : 1.0 - level;
        ft.threshold = impostor_rr.quantile(q);
        out.push_back(ft);
    }
    return out;
}

namespace {

bool accepts(double score, double threshold, Orientation o) {
    return o == Orientation::Distance ? score <= threshold : score >= threshold;
}

} // namespace

LeakageHeatmap leakage_heatmap(const std::map<int, std::vector<double>>& rf_by_snapshot,
                               std::span<const FarThreshold> thresholds,
                               Orientation orientation) {
    LeakageHeatmap hm;
    for (const auto& [snap, scores] : rf_by_snapshot) {
        (void)scores;
        hm.snapshots.push_back(snap);
    }
    for (const FarThreshold& ft : thresholds) {
        if (!ft.attainable) continue;
        hm.levels.push_back(ft.level);
        for (const auto& [snap, scores] : rf_by_snapshot) {
            (void)snap;
            if (scores.empty()) {
                hm.percent.push_back(0.0);
                hm.empty_cell.push_back(1);
                continue;
            }
            std::int64_t beyond = 0;
            for (double s : scores)
                if (accepts(s, ft.threshold, orientation)) ++beyond;
            hm.percent.push_back(100.0 * static_cast<double>(beyond) /
                                 static_cast<double>(scores.size()));
            hm.empty_cell.push_back(0);
        }
    }
    return hm;
}

std::vector<FlaggedPair> flag_leaks(std::span<const PairRecord> rf_records, double threshold,
                                    Orientation orientation) {
    std::vector<FlaggedPair> flagged;
    for (const PairRecord& rec : rf_records) {
        if (rec.status != PairStatus::Ok) continue;
        const double v = orient(rec.score, orientation).value;
        const double margin = orientation == Orientation::Distance ? threshold - v : v - threshold;
        if (margin < 0) continue; // inclusive at the threshold
        flagged.push_back({rec.id_a, rec.id_b, v, margin});
    }
    std::sort(flagged.begin(), flagged.end(), [](const FlaggedPair& a, const FlaggedPair& b) {
        if (a.margin != b.margin) return a.margin > b.margin;
        if (a.id_a != b.id_a) return a.id_a < b.id_a;
        return a.id_b < b.id_b;
    });
    return flagged;
}

GrayImage diff_image(const GrayImage& real, const GrayImage& fake, DiffSummary* summary) {
    if (real.rows() != fake.rows() || real.cols() != fake.cols())
        raise(Errc::DimensionMismatch, "diff_image inputs are " + std::to_string(real.rows()) +
                                           "x" + std::to_string(real.cols()) + " vs " +
                                           std::to_string(fake.rows()) + "x" +
                                           std::to_string(fake.cols()));
    GrayImage diff(real.rows(), real.cols());
    double total = 0;
    double max_abs = 0;
    for (Eigen::Index r = 0; r < real.rows(); ++r) {
        for (Eigen::Index c = 0; c < real.cols(); ++c) {
            const int d = std::abs(static_cast<int>(real(r, c)) - static_cast<int>(fake(r, c)));
            diff(r, c) = static_cast<std::uint8_t>(d);
            total += d;
            max_abs = std::max(max_abs, static_cast<double>(d));
        }
    }
    if (summary) {
        summary->mean_abs = total / static_cast<double>(real.size());
        summary->max_abs = max_abs;
    }
    return diff;
}

DofEstimate estimate_dof(const ScoreDistribution& impostor) {
    if (impostor.orientation != Orientation::Distance)
        raise(Errc::OrientationError, "degrees of freedom are defined on Distance scores");
    if (impostor.stddev == 0)
        raise(Errc::DegenerateDistribution, "zero score variance, DOF undefined");
    DofEstimate est;
    est.p = impostor.mean;
    est.sigma = impostor.stddev;
    est.n_dof = est.p * (1.0 - est.p) / (est.sigma * est.sigma);
    return est;
}

ShiftSummary distribution_shift(const ScoreDistribution& rr, const ScoreDistribution& rf) {
    if (rr.orientation != rf.orientation)
        raise(Errc::OrientationError, "distribution_shift orientations differ");
    if (rr.size() < 100 || rf.size() < 100)
        raise(Errc::InsufficientData, "distribution_shift needs >= 100 scores per side, got " +
                                          std::to_string(rr.size()) + " and " +
                                          std::to_string(rf.size()));
    // Two-sample KS over the merged support; both score lists are sorted.
    double ks = 0;
    std::size_t i = 0, j = 0;
    const auto& a = rr.scores;
    const auto& b = rf.scores;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        const double fa = static_cast<double>(i) / static_cast<double>(a.size());
        const double fb = static_cast<double>(j) / static_cast<double>(b.size());
        ks = std::max(ks, std::abs(fa - fb));
    }
    ShiftSummary s;
    s.ks_statistic = ks;
    if (rr.orientation == Orientation::Distance)
        s.extreme_quantile_delta = rr.quantile(0.001) - rf.quantile(0.001);
    else
        s.extreme_quantile_delta = rf.quantile(0.999) - rr.quantile(0.999);
    return s;
}

} // namespace iris
