#include "iris/matching.hpp"

#include "hd_kernels.hpp"
#include "iris/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

namespace iris {
namespace {

using detail::HdAccum;
using detail::HdCodeFn;
using detail::HdMaskedFn;

struct ShiftBest {
    bool found = false;
    double value = 0;
    int shift = 0;
    std::int64_t overlap = 0;
};

// Columns are stored as contiguous word groups, so comparing A against B
// rotated by `shift` columns reduces to at most two contiguous segment
// comparisons; no rotated copy is ever built.
ShiftBest best_over_shifts(const IrisTemplate& a, const IrisTemplate& b, int max_shift,
                           std::int64_t min_overlap, bool both_full, HdMaskedFn masked,
                           HdCodeFn code_only) {
    const int cols = a.cols();
    const int wpc = a.words_per_col();
    const std::uint64_t* ac = a.code().data();
    const std::uint64_t* am = a.mask().data();
    const std::uint64_t* bc = b.code().data();
    const std::uint64_t* bm = b.mask().data();

    const auto eval = [&](int shift) -> HdAccum {
        const int s = ((shift % cols) + cols) % cols;
        HdAccum acc;
        const auto segment = [&](int a_col, int b_col, int ncols) {
            const std::size_t ao = static_cast<std::size_t>(a_col) * wpc;
            const std::size_t bo = static_cast<std::size_t>(b_col) * wpc;
            const std::size_t n = static_cast<std::size_t>(ncols) * wpc;
            if (both_full) {
                acc.diff += code_only(ac + ao, bc + bo, n);
            } else {
                const HdAccum part = masked(ac + ao, am + ao, bc + bo, bm + bo, n);
                acc.diff += part.diff;
                acc.overlap += part.overlap;
            }
        };
        if (s == 0) {
            segment(0, 0, cols);
        } else {
            segment(0, cols - s, s);
            segment(s, 0, cols - s);
        }
        if (both_full) acc.overlap = a.bit_length();
        return acc;
    };

    ShiftBest best;
    const auto consider = [&](int shift) {
        const HdAccum acc = eval(shift);
        if (acc.overlap < min_overlap) return;
        const double hd = static_cast<double>(acc.diff) / static_cast<double>(acc.overlap);
        if (!best.found || hd < best.value) {
            best.found = true;
            best.value = hd;
            best.shift = shift;
            best.overlap = acc.overlap;
        }
    };
    // Enumerating 0, -1, +1, -2, +2, ... with a strict improvement test bakes
    // in the tie rule: smallest magnitude wins, negative before positive.
    consider(0);
    for (int m = 1; m <= max_shift; ++m) {
        consider(-m);
        consider(m);
    }
    return best;
}

bool mask_full(const IrisTemplate& t) { return t.mask_popcount() == t.bit_length(); }

void validate_shift_range(ShiftRange shifts) {
    if (shifts.max_shift < 0)
        raise(Errc::ConfigError, "max_shift must be non-negative, got " +
                                     std::to_string(shifts.max_shift));
}

} // namespace

std::string_view orientation_name(Orientation o) {
    return o == Orientation::Distance ? "distance" : "similarity";
}

Orientation orientation_from(std::string_view name) {
    if (name == "distance") return Orientation::Distance;
    if (name == "similarity") return Orientation::Similarity;
    raise(Errc::ConfigError, "unknown orientation '" + std::string(name) + "'");
}

std::string_view pair_type_name(PairType t) {
    switch (t) {
    case PairType::Genuine: return "genuine";
    case PairType::ImpostorRR: return "impostor_rr";
    case PairType::ImpostorRF: return "impostor_rf";
    case PairType::ImpostorFF: return "impostor_ff";
    }
    return "genuine";
}

PairType pair_type_from(std::string_view name) {
    if (name == "genuine") return PairType::Genuine;
    if (name == "impostor_rr") return PairType::ImpostorRR;
    if (name == "impostor_rf") return PairType::ImpostorRF;
    if (name == "impostor_ff") return PairType::ImpostorFF;
    raise(Errc::ConfigError, "unknown pair type '" + std::string(name) + "'");
}

std::string_view pair_status_name(PairStatus s) {
    switch (s) {
    case PairStatus::Ok: return "ok";
    case PairStatus::InsufficientOverlap: return "insufficient_overlap";
    case PairStatus::DimensionMismatch: return "dimension_mismatch";
    }
    return "ok";
}

std::string_view hd_backend_name() { return detail::hd_kernel_name(); }

MatchScore fractional_hd(const IrisTemplate& a, const IrisTemplate& b, ShiftRange shifts,
                         std::int64_t min_overlap) {
    validate_shift_range(shifts);
    if (!a.dims_match(b))
        raise(Errc::DimensionMismatch, "template dimensions differ: " + std::to_string(a.rows()) +
                                           "x" + std::to_string(a.cols()) + "x" +
                                           std::to_string(a.filters()) + " vs " +
                                           std::to_string(b.rows()) + "x" +
                                           std::to_string(b.cols()) + "x" +
                                           std::to_string(b.filters()));
    const std::int64_t min_ov = std::max<std::int64_t>(1, min_overlap);
    const bool both_full = mask_full(a) && mask_full(b);
    const ShiftBest best = best_over_shifts(a, b, shifts.max_shift, min_ov, both_full,
                                            detail::select_hd_masked(), detail::select_hd_code());
    if (!best.found)
        raise(Errc::InsufficientOverlap,
              "no shift reaches " + std::to_string(min_ov) + " overlapping bits");
    return {best.value, Orientation::Distance, best.shift, best.overlap};
}

MatchScore orient(MatchScore score, Orientation target) {
    if (score.orientation == target) return score;
    score.value = 1.0 - score.value;
    score.orientation = target;
    return score;
}

PairType classify_pair(const TemplateMeta& a, const TemplateMeta& b) {
    const bool real_a = a.origin == Origin::Real;
    const bool real_b = b.origin == Origin::Real;
    if (real_a && real_b)
        return a.identity == b.identity ? PairType::Genuine : PairType::ImpostorRR;
    if (!real_a && !real_b) return PairType::ImpostorFF;
    return PairType::ImpostorRF;
}

namespace {

// Pairs preceding row i of the strict upper triangle of an n x n grid.
std::size_t tri_offset(std::size_t i, std::size_t n) { return i * (2 * n - i - 1) / 2; }

void tri_unrank(std::size_t p, std::size_t n, std::size_t& i, std::size_t& j) {
    const double nn = static_cast<double>(n);
    double guess = std::floor((2 * nn - 1 - std::sqrt((2 * nn - 1) * (2 * nn - 1) - 8.0 * static_cast<double>(p))) / 2.0);
    std::size_t gi = guess < 0 ? 0 : static_cast<std::size_t>(guess);
    if (gi >= n - 1) gi = n - 2;
    while (gi > 0 && tri_offset(gi, n) > p) --gi;
    while (tri_offset(gi + 1, n) <= p) ++gi;
    i = gi;
    j = p - tri_offset(gi, n) + gi + 1;
}

struct PairJob {
    std::span<const IrisTemplate> set_a;
    std::span<const IrisTemplate> set_b;
    bool self = false;
    int max_shift = 8;
    std::int64_t min_overlap = 1;
    const std::vector<std::uint8_t>* full_a = nullptr;
    const std::vector<std::uint8_t>* full_b = nullptr;
    HdMaskedFn masked = nullptr;
    HdCodeFn code_only = nullptr;
};

PairRecord score_one(const PairJob& job, const IrisTemplate& ta, const IrisTemplate& tb,
                     bool full_ab) {
    PairRecord rec;
    rec.type = classify_pair(ta.meta, tb.meta);
    // Order operands so id_a <= id_b; best_shift is reported for that order.
    const bool swapped = tb.meta.id < ta.meta.id;
    const IrisTemplate& x = swapped ? tb : ta;
    const IrisTemplate& y = swapped ? ta : tb;
    rec.id_a = x.meta.id;
    rec.id_b = y.meta.id;
    if (!x.dims_match(y)) {
        rec.status = PairStatus::DimensionMismatch;
        return rec;
    }
    const ShiftBest best = best_over_shifts(x, y, job.max_shift, job.min_overlap, full_ab,
                                            job.masked, job.code_only);
    if (!best.found) {
        rec.status = PairStatus::InsufficientOverlap;
        return rec;
    }
    rec.status = PairStatus::Ok;
    rec.score = {best.value, Orientation::Distance, best.shift, best.overlap};
    return rec;
}

void run_jobs(const PairJob& job, std::vector<PairRecord>& out, int workers) {
    const std::size_t total = out.size();
    const std::size_t n_a = job.set_a.size();
    const std::size_t n_b = job.set_b.size();
    std::atomic<std::size_t> cursor{0};
    constexpr std::size_t kChunk = 1024;

    const auto worker_fn = [&] {
        for (;;) {
            const std::size_t begin = cursor.fetch_add(kChunk);
            if (begin >= total) return;
            const std::size_t end = std::min(begin + kChunk, total);
            for (std::size_t p = begin; p < end; ++p) {
                std::size_t i = 0, j = 0;
                if (job.self) {
                    tri_unrank(p, n_a, i, j);
                } else {
                    i = p / n_b;
                    j = p % n_b;
                }
                const bool full_ab = (*job.full_a)[i] && (*job.full_b)[j];
                out[p] = score_one(job, job.set_a[i], job.set_b[j], full_ab);
            }
        }
    };

    const int n_threads = std::max(1, workers);
    if (n_threads == 1) {
        worker_fn();
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker_fn);
    for (auto& th : pool) th.join();
}

} // namespace

std::vector<PairRecord> all_pairs(std::span<const IrisTemplate> set_a,
                                  std::span<const IrisTemplate> set_b, ShiftRange shifts,
                                  std::int64_t min_overlap, int workers) {
    validate_shift_range(shifts);
    const bool self = set_a.data() == set_b.data() && set_a.size() == set_b.size();
    if (self && set_a.size() < 2) return {};
    if (!self && (set_a.empty() || set_b.empty())) return {};

    const auto full_flags = [](std::span<const IrisTemplate> set) {
        std::vector<std::uint8_t> flags(set.size());
        for (std::size_t i = 0; i < set.size(); ++i) flags[i] = mask_full(set[i]) ? 1 : 0;
        return flags;
    };
    const std::vector<std::uint8_t> full_a = full_flags(set_a);
    const std::vector<std::uint8_t> full_b = self ? full_a : full_flags(set_b);

    PairJob job;
    job.set_a = set_a;
    job.set_b = set_b;
    job.self = self;
    job.max_shift = shifts.max_shift;
    job.min_overlap = std::max<std::int64_t>(1, min_overlap);
    job.full_a = &full_a;
    job.full_b = &full_b;
    job.masked = detail::select_hd_masked();
    job.code_only = detail::select_hd_code();

    const std::size_t total = self ? set_a.size() * (set_a.size() - 1) / 2
                                   : set_a.size() * set_b.size();
    std::vector<PairRecord> records(total);
    run_jobs(job, records, workers);

    // The pre-sort order is the deterministic pair enumeration, so a stable
    // sort keeps the result identical for any worker count even if ids repeat.
    std::stable_sort(records.begin(), records.end(), [](const PairRecord& l, const PairRecord& r) {
        if (l.id_a != r.id_a) return l.id_a < r.id_a;
        return l.id_b < r.id_b;
    });
    return records;
}

void write_score_csv(const std::filesystem::path& path, std::span<const PairRecord> records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Errc::IoError, "cannot open " + path.string() + " for writing");
    out << "id_a,id_b,pair_type,orientation,score,best_shift,overlap,status\n";
    char buf[32];
    for (const PairRecord& rec : records) {
        out << rec.id_a << ',' << rec.id_b << ',' << pair_type_name(rec.type) << ',';
        if (rec.status == PairStatus::Ok) {
            std::snprintf(buf, sizeof buf, "%.6f", rec.score.value);
            out << orientation_name(rec.score.orientation) << ',' << buf << ','
                << rec.score.best_shift << ',' << rec.score.overlap;
        } else {
            out << orientation_name(rec.score.orientation) << ",,,";
        }
        out << ',' << pair_status_name(rec.status) << '\n';
    }
    if (!out) raise(Errc::IoError, "failed writing " + path.string());
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t pos = 0; pos <= line.size(); ++pos) {
        if (pos == line.size() || line[pos] == ',') {
            fields.push_back(line.substr(start, pos - start));
            start = pos + 1;
        }
    }
    return fields;
}

template <class T> T parse_num(std::string_view s, const std::string& what) {
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        raise(Errc::IoError, "bad " + what + " field '" + std::string(s) + "'");
    return v;
}

} // namespace

std::vector<PairRecord> read_score_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::IoError, "cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) raise(Errc::IoError, path.string() + " is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "id_a,id_b,pair_type,orientation,score,best_shift,overlap,status")
        raise(Errc::IoError, "unexpected score CSV header in " + path.string());
    std::vector<PairRecord> records;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 8) raise(Errc::IoError, "expected 8 fields, got " +
                                                    std::to_string(f.size()) + " in " +
                                                    path.string());
        PairRecord rec;
        rec.id_a = std::string(f[0]);
        rec.id_b = std::string(f[1]);
        rec.type = pair_type_from(f[2]);
        rec.score.orientation = orientation_from(f[3]);
        rec.status = [&] {
            if (f[7] == "ok") return PairStatus::Ok;
            if (f[7] == "insufficient_overlap") return PairStatus::InsufficientOverlap;
            if (f[7] == "dimension_mismatch") return PairStatus::DimensionMismatch;
            raise(Errc::IoError, "unknown status '" + std::string(f[7]) + "'");
        }();
        if (rec.status == PairStatus::Ok) {
            rec.score.value = parse_num<double>(f[4], "score");
            rec.score.best_shift = parse_num<int>(f[5], "best_shift");
            rec.score.overlap = parse_num<std::int64_t>(f[6], "overlap");
        }
        records.push_back(std::move(rec));
    }
    return records;
}

} // namespace iris
