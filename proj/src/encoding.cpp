#include "iris/encoding.hpp"

#include "iris/errors.hpp"
#include "iris/rng.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

namespace iris {

IrisTemplate::IrisTemplate(int rows, int cols, int filters)
    : rows_(rows), cols_(cols), filters_(filters),
      words_per_col_((rows * filters + 63) / 64),
      code_(static_cast<size_t>(cols) * words_per_col_, 0),
      mask_(static_cast<size_t>(cols) * words_per_col_, 0) {}

bool IrisTemplate::get(const std::vector<std::uint64_t>& bits, int r, int col, int f) const {
    const int idx = r * filters_ + f;
    return (bits[static_cast<size_t>(col) * words_per_col_ + idx / 64] >> (idx % 64)) & 1;
}

void IrisTemplate::put(std::vector<std::uint64_t>& bits, int r, int col, int f, bool v) {
    const int idx = r * filters_ + f;
    auto& word = bits[static_cast<size_t>(col) * words_per_col_ + idx / 64];
    const std::uint64_t bit = 1ULL << (idx % 64);
    word = v ? (word | bit) : (word & ~bit);
}

std::int64_t IrisTemplate::mask_popcount() const {
    std::int64_t n = 0;
    for (const auto w : mask_) n += std::popcount(w);
    return n;
}

PolarIris rubber_sheet(const GrayImage& image, const Segmentation& seg, int radial_res,
                       int angular_res) {
    if (seg.iris.r <= seg.pupil.r)
        raise(Errc::GeometryError, "iris radius must exceed pupil radius");
    if (radial_res < 2 || angular_res < 2)
        raise(Errc::GeometryError, "degenerate polar resolution");

    const bool has_occlusion = seg.occlusion.size() == image.size();
    const FloatImage fim = to_float(image);
    const auto w = image.cols(), h = image.rows();

    PolarIris polar;
    polar.samples = FloatImage::Zero(radial_res, angular_res);
    polar.valid = Plane<std::uint8_t>::Zero(radial_res, angular_res);

    for (int j = 0; j < angular_res; ++j) {
        const double a = 2.0 * std::numbers::pi * j / angular_res;
        const double ca = std::cos(a), sa = std::sin(a);
        const double px = seg.pupil.cx + seg.pupil.r * ca;
        const double py = seg.pupil.cy + seg.pupil.r * sa;
        const double ix = seg.iris.cx + seg.iris.r * ca;
        const double iy = seg.iris.cy + seg.iris.r * sa;
        for (int i = 0; i < radial_res; ++i) {
            const double t = static_cast<double>(i) / (radial_res - 1);
            const double x = px + t * (ix - px);
            const double y = py + t * (iy - py);

            const auto x0 = static_cast<Eigen::Index>(std::floor(x));
            const auto y0 = static_cast<Eigen::Index>(std::floor(y));
            if (x0 < 0 || y0 < 0 || x0 + 1 >= w || y0 + 1 >= h) continue;

            bool usable = true;
            if (has_occlusion)
                usable = seg.occlusion(y0, x0) && seg.occlusion(y0, x0 + 1) &&
                         seg.occlusion(y0 + 1, x0) && seg.occlusion(y0 + 1, x0 + 1);

            const float fx = static_cast<float>(x - static_cast<double>(x0));
            const float fy = static_cast<float>(y - static_cast<double>(y0));
            const float top = fim(y0, x0) + fx * (fim(y0, x0 + 1) - fim(y0, x0));
            const float bot = fim(y0 + 1, x0) + fx * (fim(y0 + 1, x0 + 1) - fim(y0 + 1, x0));
            polar.samples(i, j) = top + fy * (bot - top);
            polar.valid(i, j) = usable ? 1 : 0;
        }
    }
    return polar;
}

FilterBank build_filter_bank(std::uint64_t seed, int k, int s) {
    if (k < 1 || s < 3 || s % 2 == 0)
        raise(Errc::RankError, "filter bank needs k >= 1 and odd s >= 3");
    if (k > s * s - 1)
        raise(Errc::RankError, "at most s*s-1 zero-mean kernels can be orthogonal");

    const int n = s * s;
    Rng rng(seed);
    FilterBank bank;
    bank.count = k;
    bank.side = s;
    bank.seed = seed;
    bank.taps.resize(k, n);

    for (int f = 0; f < k; ++f) {
        Eigen::RowVectorXd v(n);
        for (;;) {
            for (int i = 0; i < n; ++i) v(i) = rng.next_gaussian();
            v.array() -= v.mean();
            // two orthogonalization passes keep residuals near machine epsilon
            for (int pass = 0; pass < 2; ++pass)
                for (int g = 0; g < f; ++g) v -= (v * bank.taps.row(g).transpose()) * bank.taps.row(g);
            v.array() -= v.mean();
            const double norm = v.norm();
            if (norm > 1e-8) {
                bank.taps.row(f) = v / norm;
                break;
            }
        }
    }
    return bank;
}

void save_filter_bank(const std::filesystem::path& path, const FilterBank& bank) {
    nlohmann::ordered_json j;
    j["count"] = bank.count;
    j["side"] = bank.side;
    j["seed"] = bank.seed;
    auto taps = nlohmann::ordered_json::array();
    for (int f = 0; f < bank.count; ++f) {
        auto row = nlohmann::ordered_json::array();
        for (int i = 0; i < bank.side * bank.side; ++i) row.push_back(bank.taps(f, i));
        taps.push_back(std::move(row));
    }
    j["taps"] = std::move(taps);
    std::ofstream out(path);
    if (!out) raise(Errc::IoError, "cannot write filter bank " + path.string());
    out << j.dump() << '\n';
}

FilterBank load_filter_bank(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::IoError, "cannot open filter bank " + path.string());
    nlohmann::json j;
    in >> j;

    FilterBank bank;
    bank.count = j.at("count").get<int>();
    bank.side = j.at("side").get<int>();
    bank.seed = j.value("seed", std::uint64_t{0});
    const int n = bank.side * bank.side;
    bank.taps.resize(bank.count, n);
    const auto& taps = j.at("taps");
    if (static_cast<int>(taps.size()) != bank.count)
        raise(Errc::IoError, "filter bank tap count mismatch in " + path.string());
    for (int f = 0; f < bank.count; ++f)
        for (int i = 0; i < n; ++i) bank.taps(f, i) = taps[f][i].get<double>();
    return bank;
}

IrisTemplate encode(const PolarIris& polar, const FilterBank& bank) {
    const int R = static_cast<int>(polar.samples.rows());
    const int T = static_cast<int>(polar.samples.cols());
    const int s = bank.side;
    const int trim = s / 2;
    const int out_rows = R - 2 * trim;
    if (out_rows < 1) raise(Errc::GeometryError, "polar grid shorter than the filter side");

    IrisTemplate tpl(out_rows, T, bank.count);

    std::vector<float> patch(static_cast<size_t>(s) * s);
    for (int o = 0; o < out_rows; ++o) {
        for (int t = 0; t < T; ++t) {
            bool all_valid = true;
            for (int dr = 0; dr < s; ++dr)
                for (int dc = 0; dc < s; ++dc) {
                    int col = t + dc - trim;
                    col = col < 0 ? col + T : (col >= T ? col - T : col);
                    patch[static_cast<size_t>(dr) * s + dc] = polar.samples(o + dr, col);
                    all_valid = all_valid && polar.valid(o + dr, col);
                }
            // Responses are taken against the offset-removed patch so constant
            // regions produce exactly zero and binarize to 0 under strict >.
            const float ref = patch[static_cast<size_t>(trim) * s + trim];
            for (int f = 0; f < bank.count; ++f) {
                double acc = 0;
                for (int i = 0; i < s * s; ++i)
                    acc += bank.taps(f, i) * (static_cast<double>(patch[static_cast<size_t>(i)]) - ref);
                if (acc > 0.0) tpl.set_code_bit(o, t, f, true);
                if (all_valid) tpl.set_mask_bit(o, t, f, true);
            }
        }
    }
    return tpl;
}

// --- IRT1 container ---------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'I', 'R', 'T', '1'};

void put_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

// Bit p of the stream is (column, row, filter) lexicographic:
// p = col * rows * filters + r * filters + f, LSB-first within each byte.
std::vector<std::uint8_t> pack_bits(const IrisTemplate& tpl, bool mask) {
    const std::int64_t nbits = tpl.bit_length();
    std::vector<std::uint8_t> bytes(static_cast<size_t>((nbits + 7) / 8), 0);
    const int group = tpl.rows() * tpl.filters();
    const auto words = mask ? tpl.mask() : tpl.code();
    std::int64_t p = 0;
    for (int col = 0; col < tpl.cols(); ++col) {
        const std::uint64_t* w = words.data() + static_cast<size_t>(col) * tpl.words_per_col();
        for (int idx = 0; idx < group; ++idx, ++p)
            if ((w[idx / 64] >> (idx % 64)) & 1)
                bytes[static_cast<size_t>(p / 8)] |= static_cast<std::uint8_t>(1u << (p % 8));
    }
    return bytes;
}

void unpack_bits(IrisTemplate& tpl, bool mask, const std::vector<std::uint8_t>& bytes) {
    const int group = tpl.rows() * tpl.filters();
    auto words = mask ? tpl.mask() : tpl.code();
    std::int64_t p = 0;
    for (int col = 0; col < tpl.cols(); ++col) {
        std::uint64_t* w = words.data() + static_cast<size_t>(col) * tpl.words_per_col();
        for (int idx = 0; idx < group; ++idx, ++p)
            if (bytes[static_cast<size_t>(p / 8)] & (1u << (p % 8)))
                w[idx / 64] |= 1ULL << (idx % 64);
    }
}

} // namespace

void save_template(const std::filesystem::path& path, const IrisTemplate& tpl) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Errc::IoError, "cannot write template " + path.string());
    out.write(kMagic, 4);
    put_u32(out, static_cast<std::uint32_t>(tpl.rows()));
    put_u32(out, static_cast<std::uint32_t>(tpl.cols()));
    put_u32(out, static_cast<std::uint32_t>(tpl.filters()));

    const auto code = pack_bits(tpl, false);
    const auto mask = pack_bits(tpl, true);
    out.write(reinterpret_cast<const char*>(code.data()), static_cast<std::streamsize>(code.size()));
    out.write(reinterpret_cast<const char*>(mask.data()), static_cast<std::streamsize>(mask.size()));

    nlohmann::ordered_json meta;
    meta["id"] = tpl.meta.id;
    meta["identity"] = tpl.meta.identity;
    meta["origin"] = tpl.meta.origin == Origin::Real ? "real" : "synthetic";
    meta["snapshot"] = tpl.meta.snapshot;
    meta["seed"] = tpl.meta.seed;
    meta["quality"] = tpl.meta.quality;
    const std::string blob = meta.dump();
    put_u32(out, static_cast<std::uint32_t>(blob.size()));
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) raise(Errc::IoError, "short write on template " + path.string());
}

IrisTemplate load_template(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::IoError, "cannot open template " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        raise(Errc::IoError, "bad template magic in " + path.string());

    const auto rows = get_u32(in);
    const auto cols = get_u32(in);
    const auto filters = get_u32(in);
    if (!in || rows == 0 || cols == 0 || filters == 0 || rows > 4096 || cols > 65536 || filters > 256)
        raise(Errc::IoError, "implausible template header in " + path.string());

    IrisTemplate tpl(static_cast<int>(rows), static_cast<int>(cols), static_cast<int>(filters));
    const size_t nbytes = static_cast<size_t>((tpl.bit_length() + 7) / 8);
    std::vector<std::uint8_t> code(nbytes), mask(nbytes);
    in.read(reinterpret_cast<char*>(code.data()), static_cast<std::streamsize>(nbytes));
    in.read(reinterpret_cast<char*>(mask.data()), static_cast<std::streamsize>(nbytes));
    unpack_bits(tpl, false, code);
    unpack_bits(tpl, true, mask);

    const auto meta_len = get_u32(in);
    std::string blob(meta_len, '\0');
    in.read(blob.data(), meta_len);
    if (!in) raise(Errc::IoError, "truncated template " + path.string());

    const auto meta = nlohmann::json::parse(blob);
    tpl.meta.id = meta.value("id", std::string());
    tpl.meta.identity = meta.value("identity", std::string());
    tpl.meta.origin = meta.value("origin", std::string("real")) == "real" ? Origin::Real : Origin::Synthetic;
    tpl.meta.snapshot = meta.value("snapshot", 0);
    tpl.meta.seed = meta.value("seed", std::uint64_t{0});
    tpl.meta.quality = meta.value("quality", 0.0);
    return tpl;
}

} // namespace iris
