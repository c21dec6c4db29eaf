#include "iris/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace iris {
namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 400;
constexpr int kMarginLeft = 56;
constexpr int kMarginRight = 16;
constexpr int kMarginTop = 32;
constexpr int kMarginBottom = 44;

const char* pair_color(PairType t) {
    switch (t) {
    case PairType::Genuine: return "#2e8b57";
    case PairType::ImpostorRR: return "#1f77b4";
    case PairType::ImpostorRF: return "#ff7f0e";
    case PairType::ImpostorFF: return "#9467bd";
    }
    return "#000000";
}

std::string fmt(double v, const char* spec = "%.4g") {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

struct Frame {
    double x_lo, x_hi, y_lo, y_hi;

    double px(double x) const {
        return kMarginLeft + (x - x_lo) / (x_hi - x_lo) * (kWidth - kMarginLeft - kMarginRight);
    }
    double py(double y) const {
        return kHeight - kMarginBottom -
               (y - y_lo) / (y_hi - y_lo) * (kHeight - kMarginTop - kMarginBottom);
    }
};

void open_svg(std::ostringstream& s, const std::string& title) {
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
}

void draw_axes(std::ostringstream& s, const Frame& f, const std::string& x_label,
               const std::string& y_label) {
    s << "<g stroke=\"#333\" stroke-width=\"1\" fill=\"none\">\n"
      << "<path d=\"M" << f.px(f.x_lo) << ' ' << f.py(f.y_hi) << " L" << f.px(f.x_lo) << ' '
      << f.py(f.y_lo) << " L" << f.px(f.x_hi) << ' ' << f.py(f.y_lo) << "\"/>\n</g>\n";
    s << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
    for (int k = 0; k <= 5; ++k) {
        const double x = f.x_lo + (f.x_hi - f.x_lo) * k / 5;
        const double y = f.y_lo + (f.y_hi - f.y_lo) * k / 5;
        s << "<text x=\"" << f.px(x) << "\" y=\"" << kHeight - kMarginBottom + 16
          << "\" text-anchor=\"middle\">" << fmt(x, "%.3g") << "</text>\n";
        s << "<text x=\"" << kMarginLeft - 6 << "\" y=\"" << f.py(y) + 4
          << "\" text-anchor=\"end\">" << fmt(y, "%.3g") << "</text>\n";
    }
    s << "<text x=\"" << (kMarginLeft + kWidth - kMarginRight) / 2 << "\" y=\"" << kHeight - 8
      << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
    s << "<text x=\"14\" y=\"" << (kMarginTop + kHeight - kMarginBottom) / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << (kMarginTop + kHeight - kMarginBottom) / 2 << ")\">" << y_label << "</text>\n</g>\n";
}

} // namespace

std::string histogram_svg(std::span<const ScoreDistribution> distributions,
                          const std::string& title) {
    std::ostringstream s;
    open_svg(s, title);
    if (distributions.empty()) {
        s << "</svg>\n";
        return s.str();
    }

    double x_lo = distributions[0].bin_edges.front();
    double x_hi = distributions[0].bin_edges.back();
    double y_hi = 0;
    for (const auto& d : distributions) {
        x_lo = std::min(x_lo, d.bin_edges.front());
        x_hi = std::max(x_hi, d.bin_edges.back());
        const double n = static_cast<double>(d.size());
        for (auto c : d.counts) y_hi = std::max(y_hi, static_cast<double>(c) / n);
    }
    if (x_hi == x_lo) x_hi = x_lo + 1;
    if (y_hi == 0) y_hi = 1;
    const Frame f{x_lo, x_hi, 0, y_hi * 1.05};
    draw_axes(s, f, "score", "bin fraction");

    for (const auto& d : distributions) {
        const double n = static_cast<double>(d.size());
        s << "<path fill=\"" << pair_color(d.pair_type) << "\" fill-opacity=\"0.25\" stroke=\""
          << pair_color(d.pair_type) << "\" stroke-width=\"1.2\" d=\"M"
          << f.px(d.bin_edges.front()) << ' ' << f.py(0);
        for (std::size_t b = 0; b < d.counts.size(); ++b) {
            const double frac = static_cast<double>(d.counts[b]) / n;
            s << " L" << f.px(d.bin_edges[b]) << ' ' << f.py(frac) << " L"
              << f.px(d.bin_edges[b + 1]) << ' ' << f.py(frac);
        }
        s << " L" << f.px(d.bin_edges.back()) << ' ' << f.py(0) << " Z\"/>\n";
    }

    double ly = kMarginTop + 8;
    for (const auto& d : distributions) {
        s << "<rect x=\"" << kWidth - 170 << "\" y=\"" << ly - 9
          << "\" width=\"12\" height=\"12\" fill=\"" << pair_color(d.pair_type) << "\"/>\n"
          << "<text x=\"" << kWidth - 152 << "\" y=\"" << ly + 2
          << "\" font-family=\"sans-serif\" font-size=\"11\">" << pair_type_name(d.pair_type)
          << " (n=" << d.size() << ")</text>\n";
        ly += 16;
    }
    s << "</svg>\n";
    return s.str();
}

std::string roc_svg(const RocCurve& curve, const std::string& title) {
    std::ostringstream s;
    open_svg(s, title);
    const Frame f{0, 1, 0, 1};
    draw_axes(s, f, "false positive rate", "true positive rate");
    s << "<line x1=\"" << f.px(0) << "\" y1=\"" << f.py(0) << "\" x2=\"" << f.px(1) << "\" y2=\""
      << f.py(1) << "\" stroke=\"#bbb\" stroke-dasharray=\"4 3\"/>\n";
    s << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.6\" points=\"";
    for (const auto& [fpr, tpr] : curve.points) s << f.px(fpr) << ',' << f.py(tpr) << ' ';
    s << "\"/>\n<text x=\"" << kWidth - 160 << "\" y=\"" << kHeight - kMarginBottom - 12
      << "\" font-family=\"sans-serif\" font-size=\"12\">AUC = " << fmt(curve.auc, "%.6f")
      << "</text>\n</svg>\n";
    return s.str();
}

std::string heatmap_csv(const LeakageHeatmap& heatmap) {
    std::ostringstream s;
    s << "far_level";
    for (int snap : heatmap.snapshots) s << ",snap" << snap;
    s << '\n';
    for (std::size_t row = 0; row < heatmap.levels.size(); ++row) {
        s << fmt(heatmap.levels[row], "%.0e");
        for (std::size_t col = 0; col < heatmap.snapshots.size(); ++col) {
            s << ',';
            if (!heatmap.empty_cell[row * heatmap.snapshots.size() + col])
                s << fmt(heatmap.cell(row, col), "%.4f");
        }
        s << '\n';
    }
    return s.str();
}

} // namespace iris
