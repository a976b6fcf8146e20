#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pgtk/dtp.hpp"
#include "pgtk/encoder.hpp"
#include "pgtk/metrics.hpp"
#include "pgtk/pmp.hpp"

namespace pgtk {

inline constexpr const char* kToolkitVersion = "0.1.0";

struct ManifestEntry {
    std::string id;
    std::string image_path;
    std::string mask_path;
    std::string caption;
    std::string task;  // color | classification | counting
    std::vector<std::string> deceptive_texts;
    // Retrieval decoys for the surrogate ASR oracle; when empty the
    // deceptive_texts double as decoys.
    std::vector<std::string> decoy_captions;
};

// JSON-lines, one entry per line, blank lines skipped. Errors carry the
// 1-based line number and the offending field; duplicate ids are rejected.
std::vector<ManifestEntry> load_manifest(const std::string& path);

struct RunConfig {
    PmpConfig pmp;
    DtpConfig dtp;  // texts field is ignored; per-entry texts come from the manifest
    SsimParams ssim;
    double alpha = 0.5;
    std::uint64_t model_seed = 7;
    std::string output_dir;
    int workers = 1;
    bool phase_pmp = true;
    bool phase_dtp = true;
    std::string font_path;  // echo only; empty means the builtin font

    void validate() const;
};

struct EntryRecord {
    std::string id;
    bool ok = false;
    std::string error;  // set when !ok
    double seconds = 0.0;
    std::string output_path;
    PerImageScore score;
    double loss_clean = 0.0;
    double loss_final = 0.0;   // semantic-distance loss of the written image
    double final_linf = 0.0;   // perturbation-only, before any text overlay
    std::vector<std::string> warnings;
};

struct RunReport {
    std::vector<EntryRecord> entries;  // manifest order
    ScoreReport score;                 // aggregated over succeeded entries
    double total_seconds = 0.0;
    std::string version = kToolkitVersion;
    RunConfig config;

    bool all_ok() const;
    std::string to_json() const;
};

struct EntryOutcome {
    ImageBuffer adv;  // meaningful only when record.ok
    EntryRecord record;
};

// One manifest entry through the enabled phases: PMP perturbation, text
// overlay, both SSIMs, the retrieval-oracle ASR, and the output PNG at
// <output_dir>/<id>.png. Failures are recorded, not thrown.
EntryOutcome run_entry(const ManifestEntry& entry, const ToyDualEncoder& model, const RunConfig& cfg);

// Batch over the manifest with up to cfg.workers concurrent entries. Report
// order is manifest order and content is worker-count invariant. Throws only
// when output_dir cannot be created.
RunReport run_batch(const std::vector<ManifestEntry>& manifest, const RunConfig& cfg);

enum class SweepAxis { eps, text_color, text_quantity, font };

SweepAxis parse_sweep_axis(const std::string& name);

struct SweepRow {
    std::string value;
    int entries_ok = 0;
    int entries_failed = 0;
    double mean_asr = 0.0;
    double mean_ssim = 0.0;  // post-text, over succeeded entries
    std::optional<double> score;
};

struct SweepReport {
    std::string axis;
    std::vector<SweepRow> rows;
    std::vector<RunReport> runs;

    std::string to_json() const;
};

// Runs run_batch once per axis value, each into its own subdirectory of
// cfg.output_dir. Values are parsed per axis: eps as a real, text_color as
// "r,g,b", text_quantity as an integer, font as a PGTF path.
SweepReport ablation_sweep(const std::vector<ManifestEntry>& manifest, const RunConfig& cfg,
                           SweepAxis axis, const std::vector<std::string>& values);

}  // namespace pgtk
