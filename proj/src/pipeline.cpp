#include "iris/pipeline.hpp"

#include "iris/analysis.hpp"
#include "iris/corpus.hpp"
#include "iris/encoding.hpp"
#include "iris/errors.hpp"
#include "iris/matching.hpp"
#include "iris/rng.hpp"
#include "iris/segmentation.hpp"
#include "iris/svg.hpp"
#include "iris/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

namespace iris {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

RunPaths RunPaths::under(const fs::path& out_dir) {
    RunPaths p;
    p.out = out_dir;
    p.manifests = out_dir / "manifests";
    p.images = out_dir / "images";
    p.masks = out_dir / "masks";
    p.templates = out_dir / "templates";
    p.scores = out_dir / "scores";
    p.reports = out_dir / "reports";
    p.plots = out_dir / "plots";
    return p;
}

void RunPaths::create() const {
    for (const fs::path* dir : {&out, &manifests, &images, &masks, &templates, &scores, &reports,
                                &plots})
        fs::create_directories(*dir);
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    const std::size_t n_threads = std::min<std::size_t>(std::max(1, workers), count);
    if (n_threads == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> cursor{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    const auto body = [&] {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

namespace {

constexpr int kTrainingCropSize = 512; // generator input/output side
constexpr std::size_t kBatch = 64;     // bounds in-flight images per stage
constexpr std::size_t kFlagListCap = 500;

// Process `count` items in slot batches: parallel work, then an in-order
// sequential commit so file output is deterministic.
template <class Slot, class Work, class Commit>
void batched(std::size_t count, int workers, Work&& work, Commit&& commit) {
    std::vector<Slot> slots;
    for (std::size_t start = 0; start < count; start += kBatch) {
        const std::size_t n = std::min(kBatch, count - start);
        slots.assign(n, Slot{});
        parallel_for(n, workers, [&](std::size_t k) { work(start + k, slots[k]); });
        for (std::size_t k = 0; k < n; ++k) commit(start + k, slots[k]);
    }
}

std::string id_label(int identity_index) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "id%03d", identity_index + 1);
    return buf;
}

std::string frame_name(int frame) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "f%03d", frame);
    return buf;
}

std::string snap_label(int snapshot) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "snap%02d", snapshot);
    return buf;
}

std::string seed_name(std::size_t index) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "seed%03zu", index);
    return buf;
}

void ensure_parent(const fs::path& path) { fs::create_directories(path.parent_path()); }

void write_text(const fs::path& path, const std::string& text) {
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Errc::IoError, "cannot open " + path.string() + " for writing");
    out << text;
    if (!out) raise(Errc::IoError, "failed writing " + path.string());
}

void write_json(const fs::path& path, const ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

void require_artifact(const fs::path& path, const std::string& producing_stage) {
    if (!fs::exists(path))
        raise(Errc::IoError,
              "missing " + path.string() + "; run the " + producing_stage + " stage first");
}

// Fidelity level for snapshot s of k: spread linearly so the last snapshot is
// always pristine (level 14) and the first is the worst the run covers.
int snapshot_fidelity(int snapshot, int snapshots) {
    if (snapshots <= 1) return 14;
    const double t = static_cast<double>(snapshot - 1) / (snapshots - 1);
    return static_cast<int>(std::lround(1 + 13 * t));
}

IdentitySpec make_identity(std::uint64_t base_seed, int identity_index) {
    Rng g(derive_seed(base_seed, "identity-geometry", identity_index));
    IdentitySpec spec;
    spec.texture_seed = derive_seed(base_seed, "identity-texture", identity_index);
    spec.iris_radius = 150 + 40 * g.next_double();
    spec.base_pupil_radius = 35 + 25 * g.next_double();
    return spec;
}

CaptureSpec make_capture(std::uint64_t base_seed, int identity_index, int frame,
                         const SynthParams& sp) {
    const std::uint64_t idx =
        static_cast<std::uint64_t>(identity_index) * 100000 + static_cast<std::uint64_t>(frame);
    Rng c(derive_seed(base_seed, "capture", idx));
    CaptureSpec cap;
    const int regular = sp.frames_per_identity;
    const double phase = regular > 1 ? static_cast<double>(std::min(frame, regular - 1)) /
                                           (regular - 1)
                                     : 0.0;
    cap.dilation_factor = 1.0 + 0.4 * phase + 0.05 * c.next_double();
    // +/-2.5 deg keeps the worst genuine-pair delta within the default
    // +/-8 column shift search (8/512 of a turn is 5.6 deg)
    cap.rotation_deg = -2.5 + 5.0 * c.next_double();
    cap.noise_sigma = 2.0 + 2.0 * c.next_double();
    cap.blur_sigma = 0.6 + 0.5 * c.next_double();
    cap.center_dx = -12 + 24 * c.next_double();
    cap.center_dy = -12 + 24 * c.next_double();
    cap.noise_seed = derive_seed(base_seed, "capture-noise", idx);
    if (frame >= regular) cap.eyelid_closure = 0.86 + 0.08 * c.next_double();
    return cap;
}

int clamp_crop_center(double center, int image_extent, int crop) {
    const int lo = crop / 2;
    const int hi = image_extent - crop + crop / 2;
    return std::clamp(static_cast<int>(std::lround(center)), lo, hi);
}

std::string png_rel(const std::string& sub) { return "../images/" + sub + ".png"; }
std::string mask_rel(const std::string& sub) { return "../masks/" + sub + ".png"; }

} // namespace

ordered_json cmd_synth(const RunConfig& config) {
    const RunPaths p = RunPaths::under(config.out_dir);
    p.create();
    const SynthParams& sp = config.synth;
    const int frames_total = sp.frames_per_identity + sp.blink_frames;

    std::vector<ManifestEntry> real_entries;
    std::vector<CorpusEntry> training;
    training.reserve(static_cast<std::size_t>(sp.identities) * sp.frames_per_identity);

    for (int id = 0; id < sp.identities; ++id) {
        const IdentitySpec spec = make_identity(config.seed, id);
        const std::string label = id_label(id);
        std::vector<RenderResult> rendered(static_cast<std::size_t>(frames_total));
        parallel_for(static_cast<std::size_t>(frames_total), config.workers, [&](std::size_t f) {
            rendered[f] =
                render_iris(spec, make_capture(config.seed, id, static_cast<int>(f), sp));
        });
        for (int f = 0; f < frames_total; ++f) {
            RenderResult& rr = rendered[static_cast<std::size_t>(f)];
            const std::string sub = "real/" + label + "/" + frame_name(f);
            const fs::path img_path = p.images / ("real/" + label) / (frame_name(f) + ".png");
            const fs::path msk_path = p.masks / ("real/" + label) / (frame_name(f) + ".png");
            ensure_parent(img_path);
            ensure_parent(msk_path);
            write_png_gray(img_path, rr.image);
            write_png_mask(msk_path, rr.mask);
            ManifestEntry me;
            me.path = png_rel(sub);
            me.mask_path = mask_rel(sub);
            me.identity = label;
            me.frame = f;
            real_entries.push_back(me);

            const bool blink = f >= sp.frames_per_identity;
            if (!blink) {
                CorpusEntry entry;
                entry.image = std::move(rr.image);
                entry.mask = std::move(rr.mask);
                entry.identity = label;
                entry.frame_index = f;
                const int cx = clamp_crop_center(rr.truth.pupil.cx, 768, kTrainingCropSize);
                const int cy = clamp_crop_center(rr.truth.pupil.cy, 576, kTrainingCropSize);
                training.push_back(center_crop(entry, cx, cy, kTrainingCropSize));
            }
        }
    }
    write_manifest(p.manifests / "real.json", real_entries);

    if (sp.mirror) training = mirror_augment(std::move(training));

    ordered_json ledger;
    ledger["lambda"] = sp.memorization_rate;
    ledger["snapshots"] = ordered_json::object();
    std::size_t total_leaks = 0;

    for (int snap = 1; snap <= sp.snapshots; ++snap) {
        GeneratorModel model;
        model.training_corpus = training;
        model.memorization_rate = sp.memorization_rate;
        model.fidelity_level = snapshot_fidelity(snap, sp.snapshots);
        model.seed = derive_seed(config.seed, "generator", snap);

        std::vector<ManifestEntry> fake_entries;
        ordered_json leaks = ordered_json::array();
        struct FakeSlot {
            CorpusEntry entry;
            SampleTruth truth;
        };
        const std::string snap_dir = snap_label(snap);
        batched<FakeSlot>(
            static_cast<std::size_t>(sp.fakes_per_snapshot), config.workers,
            [&](std::size_t idx, FakeSlot& slot) {
                slot.entry = sample_generator(model, idx, &slot.truth);
                slot.entry.snapshot = snap;
            },
            [&](std::size_t idx, FakeSlot& slot) {
                const std::string sub = snap_dir + "/" + seed_name(idx);
                const fs::path img_path = p.images / snap_dir / (seed_name(idx) + ".png");
                const fs::path msk_path = p.masks / snap_dir / (seed_name(idx) + ".png");
                ensure_parent(img_path);
                ensure_parent(msk_path);
                write_png_gray(img_path, slot.entry.image);
                write_png_mask(msk_path, *slot.entry.mask);
                ManifestEntry me;
                me.path = png_rel(sub);
                me.mask_path = mask_rel(sub);
                me.frame = static_cast<int>(idx);
                me.origin = Origin::Synthetic;
                me.snapshot = snap;
                me.seed = idx;
                fake_entries.push_back(me);
                if (slot.truth.leak) {
                    const CorpusEntry& src = model.training_corpus[slot.truth.source_index];
                    leaks.push_back({{"index", idx},
                                     {"source_identity", slot.truth.source_identity},
                                     {"source_frame", src.frame_index},
                                     {"source_mirrored", src.mirrored}});
                    ++total_leaks;
                }
            });
        write_manifest(p.manifests / (snap_dir + ".json"), fake_entries);
        ledger["snapshots"][std::to_string(snap)] = std::move(leaks);
    }
    write_json(p.out / "leak_truth.json", ledger);

    ordered_json summary;
    summary["stage"] = "synth";
    summary["identities"] = sp.identities;
    summary["real_frames"] = static_cast<int>(real_entries.size());
    summary["training_corpus"] = training.size();
    summary["snapshots"] = sp.snapshots;
    summary["fakes_per_snapshot"] = sp.fakes_per_snapshot;
    summary["planted_leaks"] = total_leaks;
    summary["real_manifest"] = (p.manifests / "real.json").string();
    return summary;
}

namespace {

struct CurationCounts {
    std::size_t input = 0, kept = 0, blink = 0, missing_mask = 0, border = 0;
};

ordered_json curate_set(const RunPaths& p, const std::string& manifest_name,
                        const std::string& set_label, const RunConfig& config) {
    const fs::path manifest_path = p.manifests / manifest_name;
    require_artifact(manifest_path, "synth");
    const std::vector<ManifestEntry> entries = read_manifest(manifest_path);
    const int crop = config.curation.crop_size;

    std::vector<std::int64_t> coverage(entries.size(), -1);
    parallel_for(entries.size(), config.workers, [&](std::size_t i) {
        if (entries[i].mask_path.empty()) return;
        coverage[i] = mask_coverage(read_png_mask(p.manifests / entries[i].mask_path));
    });
    std::int64_t max_cov = 0;
    for (std::int64_t c : coverage) max_cov = std::max(max_cov, c);
    const auto threshold = static_cast<std::int64_t>(
        std::llround(config.curation.blink_threshold_fraction * static_cast<double>(max_cov)));

    CurationCounts counts;
    counts.input = entries.size();
    std::vector<ManifestEntry> curated;

    enum class Verdict { Kept, Blink, MissingMask, Border };
    struct Slot {
        Verdict verdict = Verdict::MissingMask;
        GrayImage image;
        BitMask mask;
    };
    batched<Slot>(
        entries.size(), config.workers,
        [&](std::size_t i, Slot& slot) {
            const ManifestEntry& me = entries[i];
            if (me.mask_path.empty()) {
                slot.verdict = Verdict::MissingMask;
                return;
            }
            if (coverage[i] <= 0 || !blink_keep(coverage[i], threshold)) {
                slot.verdict = Verdict::Blink;
                return;
            }
            CorpusEntry entry = load_entry(p.manifests, me);
            if (entry.image.cols() < crop || entry.image.rows() < crop) {
                slot.verdict = Verdict::Border;
                return;
            }
            const BitMask& m = *entry.mask;
            double sx = 0, sy = 0, n = 0;
            for (Eigen::Index y = 0; y < m.rows(); ++y)
                for (Eigen::Index x = 0; x < m.cols(); ++x)
                    if (m(y, x)) {
                        sx += static_cast<double>(x);
                        sy += static_cast<double>(y);
                        n += 1;
                    }
            const int cx = clamp_crop_center(sx / n, static_cast<int>(m.cols()), crop);
            const int cy = clamp_crop_center(sy / n, static_cast<int>(m.rows()), crop);
            const CorpusEntry cropped = center_crop(entry, cx, cy, crop);
            slot.image = iso_frame(cropped.image, crop);
            slot.mask = iso_frame_mask(*cropped.mask, crop);
            slot.verdict = Verdict::Kept;
        },
        [&](std::size_t i, Slot& slot) {
            switch (slot.verdict) {
            case Verdict::Blink: ++counts.blink; return;
            case Verdict::MissingMask: ++counts.missing_mask; return;
            case Verdict::Border: ++counts.border; return;
            case Verdict::Kept: break;
            }
            ++counts.kept;
            const std::string id = entry_id(entries[i]);
            const std::string sub = "curated/" + id;
            const fs::path img_path = p.images / ("curated/" + id + ".png");
            const fs::path msk_path = p.masks / ("curated/" + id + ".png");
            ensure_parent(img_path);
            ensure_parent(msk_path);
            write_png_gray(img_path, slot.image);
            write_png_mask(msk_path, slot.mask);
            ManifestEntry me = entries[i];
            me.path = png_rel(sub);
            me.mask_path = mask_rel(sub);
            curated.push_back(me);
        });

    write_manifest(p.manifests / ("curated_" + set_label + ".json"), curated);
    ordered_json report;
    report["set"] = set_label;
    report["input"] = counts.input;
    report["kept"] = counts.kept;
    report["rejected"] = {{"blink", counts.blink},
                          {"missing_mask", counts.missing_mask},
                          {"border", counts.border}};
    write_json(p.reports / ("curation_" + set_label + ".json"), report);
    return report;
}

} // namespace

ordered_json cmd_curate(const RunConfig& config) {
    const RunPaths p = RunPaths::under(config.out_dir);
    p.create();
    ordered_json summary;
    summary["stage"] = "curate";
    summary["sets"] = ordered_json::array();
    summary["sets"].push_back(curate_set(p, "real.json", "real", config));
    for (int snap = 1; snap <= config.synth.snapshots; ++snap)
        summary["sets"].push_back(
            curate_set(p, snap_label(snap) + ".json", snap_label(snap), config));
    return summary;
}

namespace {

ordered_json extract_set(const RunPaths& p, const std::string& set_label, const RunConfig& config,
                         const FilterBank& bank) {
    const fs::path manifest_path = p.manifests / ("curated_" + set_label + ".json");
    require_artifact(manifest_path, "curate");
    const std::vector<ManifestEntry> entries = read_manifest(manifest_path);

    struct Slot {
        bool ok = false;
        IrisTemplate tpl;
        std::string stage;
        std::string detail;
    };
    std::size_t encoded = 0;
    ordered_json failures = ordered_json::array();

    batched<Slot>(
        entries.size(), config.workers,
        [&](std::size_t i, Slot& slot) {
            const ManifestEntry& me = entries[i];
            const CorpusEntry entry = load_entry(p.manifests, me);
            Segmentation seg;
            try {
                seg = segment(entry.image);
            } catch (const Error& e) {
                slot.stage = "segmentation";
                slot.detail = e.what();
                return;
            }
            const QualityAssessment qa = assess_quality(entry.image, seg);
            if (!qa.pass) {
                slot.stage = "quality";
                std::string reasons;
                for (QualityFailure f : qa.reasons) {
                    if (!reasons.empty()) reasons += ",";
                    reasons += quality_failure_name(f);
                }
                slot.detail = reasons;
                return;
            }
            try {
                const PolarIris polar = rubber_sheet(entry.image, seg, config.encoder.radial_res,
                                                     config.encoder.angular_res);
                slot.tpl = encode(polar, bank);
            } catch (const Error& e) {
                slot.stage = "encoding";
                slot.detail = e.what();
                return;
            }
            slot.tpl.meta.id = entry_id(me);
            slot.tpl.meta.identity = me.identity;
            slot.tpl.meta.origin = me.origin;
            slot.tpl.meta.snapshot = me.snapshot;
            slot.tpl.meta.seed = me.seed;
            slot.tpl.meta.quality = qa.usable_fraction;
            slot.ok = true;
        },
        [&](std::size_t i, Slot& slot) {
            if (!slot.ok) {
                failures.push_back({{"id", entry_id(entries[i])},
                                    {"stage", slot.stage},
                                    {"detail", slot.detail}});
                return;
            }
            const fs::path path = p.templates / (slot.tpl.meta.id + ".irt1");
            ensure_parent(path);
            save_template(path, slot.tpl);
            ++encoded;
        });

    ordered_json report;
    report["set"] = set_label;
    report["input"] = entries.size();
    report["encoded"] = encoded;
    report["failures"] = std::move(failures);
    write_json(p.reports / ("extract_" + set_label + ".json"), report);
    return report;
}

} // namespace

ordered_json cmd_extract(const RunConfig& config) {
    const RunPaths p = RunPaths::under(config.out_dir);
    p.create();
    const std::uint64_t bank_seed = config.encoder.filter_seed != 0
                                        ? config.encoder.filter_seed
                                        : derive_seed(config.seed, "filter-bank");
    const FilterBank bank =
        build_filter_bank(bank_seed, config.encoder.filters, config.encoder.filter_side);
    save_filter_bank(p.templates / "filterbank.json", bank);

    ordered_json summary;
    summary["stage"] = "extract";
    summary["filter_bank"] = {{"seed", bank_seed},
                              {"filters", config.encoder.filters},
                              {"side", config.encoder.filter_side}};
    summary["sets"] = ordered_json::array();
    summary["sets"].push_back(extract_set(p, "real", config, bank));
    for (int snap = 1; snap <= config.synth.snapshots; ++snap)
        summary["sets"].push_back(extract_set(p, snap_label(snap), config, bank));
    return summary;
}

namespace {

std::vector<IrisTemplate> load_set_templates(const RunPaths& p, const std::string& set_label) {
    const fs::path manifest_path = p.manifests / ("curated_" + set_label + ".json");
    require_artifact(manifest_path, "curate");
    std::vector<IrisTemplate> out;
    for (const ManifestEntry& me : read_manifest(manifest_path)) {
        const fs::path path = p.templates / (entry_id(me) + ".irt1");
        if (!fs::exists(path)) continue; // rejected at extract time
        out.push_back(load_template(path));
    }
    return out;
}

void orient_records(std::vector<PairRecord>& records, Orientation target) {
    for (PairRecord& rec : records)
        if (rec.status == PairStatus::Ok) rec.score = orient(rec.score, target);
        else rec.score.orientation = target;
}

std::size_t count_ok(const std::vector<PairRecord>& records) {
    std::size_t n = 0;
    for (const auto& r : records)
        if (r.status == PairStatus::Ok) ++n;
    return n;
}

} // namespace

ordered_json cmd_match(const RunConfig& config) {
    const RunPaths p = RunPaths::under(config.out_dir);
    p.create();
    require_artifact(p.templates / "filterbank.json", "extract");
    const Orientation target = orientation_from(config.matcher.orientation);
    const ShiftRange shifts{config.matcher.max_shift};

    const std::vector<IrisTemplate> reals = load_set_templates(p, "real");
    std::vector<PairRecord> self =
        all_pairs(reals, reals, shifts, config.matcher.min_overlap, config.workers);
    orient_records(self, target);
    std::vector<PairRecord> genuine, impostor_rr;
    for (PairRecord& rec : self) {
        (rec.type == PairType::Genuine ? genuine : impostor_rr).push_back(std::move(rec));
    }
    write_score_csv(p.scores / "genuine.csv", genuine);
    write_score_csv(p.scores / "impostor_rr.csv", impostor_rr);

    ordered_json summary;
    summary["stage"] = "match";
    summary["backend"] = std::string(hd_backend_name());
    summary["real_templates"] = reals.size();
    summary["genuine_pairs"] = genuine.size();
    summary["impostor_rr_pairs"] = impostor_rr.size();
    summary["snapshots"] = ordered_json::array();

    for (int snap = 1; snap <= config.synth.snapshots; ++snap) {
        const std::string label = snap_label(snap);
        const std::vector<IrisTemplate> fakes = load_set_templates(p, label);
        std::vector<PairRecord> rf =
            all_pairs(reals, fakes, shifts, config.matcher.min_overlap, config.workers);
        orient_records(rf, target);
        write_score_csv(p.scores / (label + "_rf.csv"), rf);
        std::vector<PairRecord> ff =
            all_pairs(fakes, fakes, shifts, config.matcher.min_overlap, config.workers);
        orient_records(ff, target);
        write_score_csv(p.scores / (label + "_ff.csv"), ff);
        summary["snapshots"].push_back({{"snapshot", snap},
                                        {"fake_templates", fakes.size()},
                                        {"rf_pairs", rf.size()},
                                        {"rf_scored", count_ok(rf)},
                                        {"ff_pairs", ff.size()}});
    }
    return summary;
}

namespace {

std::vector<double> ok_values(const std::vector<PairRecord>& records) {
    std::vector<double> v;
    v.reserve(records.size());
    for (const auto& r : records)
        if (r.status == PairStatus::Ok) v.push_back(r.score.value);
    return v;
}

std::vector<double> as_distance(const std::vector<double>& values, Orientation o) {
    if (o == Orientation::Distance) return values;
    std::vector<double> v(values);
    for (double& x : v) x = 1.0 - x;
    return v;
}

ordered_json dist_json(const ScoreDistribution& d) {
    ordered_json q = ordered_json::object();
    for (const auto& [level, value] : d.quantiles) {
        char key[24];
        std::snprintf(key, sizeof key, "%g", level);
        q[key] = value;
    }
    return {{"pair_type", std::string(pair_type_name(d.pair_type))},
            {"orientation", std::string(orientation_name(d.orientation))},
            {"count", d.size()},
            {"mean", d.mean},
            {"std", d.stddev},
            {"quantiles", std::move(q)}};
}

ordered_json dof_json(const DofEstimate& e) {
    return {{"p", e.p}, {"sigma", e.sigma}, {"n_dof", e.n_dof}};
}

} // namespace

ReportOutcome cmd_report(const RunConfig& config) {
    const RunPaths p = RunPaths::under(config.out_dir);
    p.create();
    const Orientation orientation = orientation_from(config.matcher.orientation);
    const int bins = config.analysis.bins;

    require_artifact(p.scores / "genuine.csv", "match");
    require_artifact(p.scores / "impostor_rr.csv", "match");
    const std::vector<PairRecord> genuine_records = read_score_csv(p.scores / "genuine.csv");
    const std::vector<PairRecord> rr_records = read_score_csv(p.scores / "impostor_rr.csv");
    const std::vector<double> genuine_vals = ok_values(genuine_records);
    const std::vector<double> rr_vals = ok_values(rr_records);

    const ScoreDistribution genuine_dist =
        summarize(genuine_vals, PairType::Genuine, orientation, bins);
    const ScoreDistribution rr_dist = summarize(rr_vals, PairType::ImpostorRR, orientation, bins);
    const std::vector<FarThreshold> thresholds =
        far_thresholds(rr_dist, config.analysis.far_levels);
    const RocCurve roc_rr = roc(genuine_dist, rr_dist);
    const ScoreDistribution rr_distance = summarize(
        as_distance(rr_vals, orientation), PairType::ImpostorRR, Orientation::Distance, bins);
    const DofEstimate rr_dof = estimate_dof(rr_distance);

    // The audit verdict is judged at the strictest FAR the R-R sample size
    // can support.
    const FarThreshold* verdict_level = nullptr;
    for (const FarThreshold& ft : thresholds)
        if (ft.attainable && (!verdict_level || ft.level < verdict_level->level))
            verdict_level = &ft;

    ordered_json report;
    report["far_levels"] = config.analysis.far_levels;
    report["thresholds"] = ordered_json::array();
    for (const FarThreshold& ft : thresholds)
        report["thresholds"].push_back(
            {{"level", ft.level}, {"threshold", ft.threshold}, {"attainable", ft.attainable}});
    report["genuine"] = dist_json(genuine_dist);
    report["impostor_rr"] = dist_json(rr_dist);
    report["rr_dof"] = dof_json(rr_dof);
    report["roc_rr_auc"] = roc_rr.auc;
    write_text(p.plots / "roc.svg", roc_svg(roc_rr, "genuine vs impostor R-R"));

    std::map<int, std::vector<double>> rf_by_snapshot;
    std::size_t flagged_total = 0;
    std::size_t rf_total = 0;
    report["snapshots"] = ordered_json::array();

    for (int snap = 1; snap <= config.synth.snapshots; ++snap) {
        const std::string label = snap_label(snap);
        require_artifact(p.scores / (label + "_rf.csv"), "match");
        require_artifact(p.scores / (label + "_ff.csv"), "match");
        const std::vector<PairRecord> rf_records = read_score_csv(p.scores / (label + "_rf.csv"));
        const std::vector<PairRecord> ff_records = read_score_csv(p.scores / (label + "_ff.csv"));
        const std::vector<double> rf_vals = ok_values(rf_records);
        const std::vector<double> ff_vals = ok_values(ff_records);
        rf_by_snapshot[snap] = rf_vals;

        ordered_json section;
        section["snapshot"] = snap;
        std::vector<ScoreDistribution> to_plot{genuine_dist, rr_dist};
        if (rf_vals.size() >= 2) {
            const ScoreDistribution rf_dist =
                summarize(rf_vals, PairType::ImpostorRF, orientation, bins);
            section["impostor_rf"] = dist_json(rf_dist);
            section["roc_rf_auc"] = roc(genuine_dist, rf_dist).auc;
            if (rr_dist.size() >= 100 && rf_dist.size() >= 100) {
                const ShiftSummary shift = distribution_shift(rr_dist, rf_dist);
                section["shift_vs_rr"] = {{"ks_statistic", shift.ks_statistic},
                                          {"extreme_quantile_delta",
                                           shift.extreme_quantile_delta}};
            } else {
                section["shift_vs_rr"] = nullptr;
            }
            to_plot.push_back(rf_dist);
        } else {
            section["impostor_rf"] = nullptr;
            section["roc_rf_auc"] = nullptr;
            section["shift_vs_rr"] = nullptr;
        }
        if (ff_vals.size() >= 2) {
            const ScoreDistribution ff_dist =
                summarize(ff_vals, PairType::ImpostorFF, orientation, bins);
            section["impostor_ff"] = dist_json(ff_dist);
            const ScoreDistribution ff_distance =
                summarize(as_distance(ff_vals, orientation), PairType::ImpostorFF,
                          Orientation::Distance, bins);
            section["ff_dof"] =
                ff_distance.stddev > 0 ? dof_json(estimate_dof(ff_distance)) : ordered_json();
            to_plot.push_back(ff_dist);
        } else {
            section["impostor_ff"] = nullptr;
            section["ff_dof"] = nullptr;
        }
        write_text(p.plots / (label + "_hist.svg"),
                   histogram_svg(to_plot, label + " score distributions"));

        ordered_json flag_counts = ordered_json::object();
        for (const FarThreshold& ft : thresholds) {
            if (!ft.attainable) continue;
            char key[24];
            std::snprintf(key, sizeof key, "%g", ft.level);
            flag_counts[key] = flag_leaks(rf_records, ft.threshold, orientation).size();
        }
        section["flag_counts"] = std::move(flag_counts);

        if (verdict_level) {
            const std::vector<FlaggedPair> flags =
                flag_leaks(rf_records, verdict_level->threshold, orientation);
            flagged_total += flags.size();
            rf_total += rf_vals.size();
            section["flagged_count"] = flags.size();
            ordered_json listed = ordered_json::array();
            for (std::size_t i = 0; i < flags.size() && i < kFlagListCap; ++i)
                listed.push_back({{"id_a", flags[i].id_a},
                                  {"id_b", flags[i].id_b},
                                  {"score", flags[i].score},
                                  {"margin", flags[i].margin}});
            section["flagged_pairs"] = std::move(listed);
        } else {
            section["flagged_count"] = nullptr;
            section["flagged_pairs"] = ordered_json::array();
        }
        report["snapshots"].push_back(std::move(section));
    }

    const LeakageHeatmap heatmap = leakage_heatmap(rf_by_snapshot, thresholds, orientation);
    write_text(p.plots / "heatmap.csv", heatmap_csv(heatmap));
    ordered_json hm;
    hm["levels"] = heatmap.levels;
    hm["snapshots"] = heatmap.snapshots;
    hm["percent"] = ordered_json::array();
    for (std::size_t row = 0; row < heatmap.levels.size(); ++row) {
        ordered_json r = ordered_json::array();
        for (std::size_t col = 0; col < heatmap.snapshots.size(); ++col)
            r.push_back(heatmap.cell(row, col));
        hm["percent"].push_back(std::move(r));
    }
    report["heatmap"] = std::move(hm);

    ordered_json verdict;
    int exit_code = 0;
    if (verdict_level) {
        const double expected = static_cast<double>(rf_total) * verdict_level->level;
        const double sigma = std::sqrt(static_cast<double>(rf_total) * verdict_level->level *
                                       (1.0 - verdict_level->level));
        const bool exceeded = static_cast<double>(flagged_total) > expected + 3.0 * sigma;
        verdict["far_level"] = verdict_level->level;
        verdict["threshold"] = verdict_level->threshold;
        verdict["flagged"] = flagged_total;
        verdict["expected_false_flags"] = expected;
        verdict["band_3sigma"] = 3.0 * sigma;
        verdict["leak_detected"] = exceeded;
        exit_code = exceeded ? 1 : 0;
    } else {
        verdict["leak_detected"] = nullptr;
        verdict["note"] = "no requested FAR level is attainable with this many impostor pairs";
    }
    report["verdict"] = verdict;

    write_json(p.reports / "report.json", report);
    return {std::move(report), exit_code};
}

ReportOutcome cmd_run_all(const RunConfig& config) {
    ordered_json summary;
    summary["synth"] = cmd_synth(config);
    summary["curate"] = cmd_curate(config);
    summary["extract"] = cmd_extract(config);
    summary["match"] = cmd_match(config);
    ReportOutcome outcome = cmd_report(config);
    summary["report"] = std::move(outcome.summary);
    return {std::move(summary), outcome.exit_code};
}

} // namespace iris
