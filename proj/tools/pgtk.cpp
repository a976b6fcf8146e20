#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pgtk/errors.hpp"
#include "pgtk/pipeline.hpp"
#include "pgtk/png_io.hpp"

namespace {

struct AttackOpts {
    std::string manifest;
    std::string out;
    std::string phases = "pmp,dtp";
    std::string font;
    std::uint64_t seed = 7;
    pgtk::RunConfig cfg;
};

void add_attack_options(CLI::App* cmd, AttackOpts& o) {
    cmd->add_option("--manifest", o.manifest, "JSON-lines dataset manifest")->required();
    cmd->add_option("--out", o.out, "output directory")->required();
    cmd->add_option("--eps", o.cfg.pmp.eps, "Linf perturbation budget");
    cmd->add_option("--alpha", o.cfg.pmp.step_alpha, "attack step size");
    cmd->add_option("--steps-t", o.cfg.pmp.steps_t, "multi-scale iterations");
    cmd->add_option("--steps-n", o.cfg.pmp.steps_n, "warm-up iterations");
    cmd->add_option("--lambda", o.cfg.pmp.momentum_lambda, "momentum decay");
    cmd->add_option("--workers", o.cfg.workers, "concurrent manifest entries");
    cmd->add_option("--phases", o.phases, "comma list from {pmp,dtp}");
    cmd->add_option("--seed", o.seed, "model and text placement seed");
    cmd->add_option("--font", o.font, "PGTF font file (default builtin)");
}

// Turns the raw option values into a validated RunConfig. The loaded font is
// handed to the caller so it outlives the run.
void resolve(AttackOpts& o, std::optional<pgtk::GlyphFont>& font_storage) {
    o.cfg.output_dir = o.out;
    o.cfg.model_seed = o.seed;
    o.cfg.dtp.placement_seed = o.seed;
    o.cfg.phase_pmp = false;
    o.cfg.phase_dtp = false;
    std::size_t begin = 0;
    while (begin <= o.phases.size()) {
        std::size_t end = o.phases.find(',', begin);
        if (end == std::string::npos) end = o.phases.size();
        const std::string phase = o.phases.substr(begin, end - begin);
        if (phase == "pmp")
            o.cfg.phase_pmp = true;
        else if (phase == "dtp")
            o.cfg.phase_dtp = true;
        else
            throw pgtk::ConfigError("unknown phase: " + phase);
        begin = end + 1;
    }
    if (!o.font.empty()) {
        font_storage = pgtk::load_font(o.font);
        o.cfg.dtp.font = &*font_storage;
        o.cfg.font_path = o.font;
    }
    o.cfg.validate();
}

void print_entries(const pgtk::RunReport& report) {
    for (const pgtk::EntryRecord& r : report.entries) {
        if (r.ok)
            std::printf("[ok]   %-16s asr=%d ssim_pre=%.4f ssim_post=%.4f (%.1fs)\n", r.id.c_str(),
                        r.score.asr, r.score.ssim_pre_text.value_or(0.0), r.score.ssim_post_text,
                        r.seconds);
        else
            std::printf("[fail] %-16s %s\n", r.id.c_str(), r.error.c_str());
    }
}

int run_attack(AttackOpts& o) {
    std::optional<pgtk::GlyphFont> font_storage;
    resolve(o, font_storage);
    const std::vector<pgtk::ManifestEntry> manifest = pgtk::load_manifest(o.manifest);
    const pgtk::RunReport report = pgtk::run_batch(manifest, o.cfg);
    print_entries(report);
    int ok = 0;
    for (const pgtk::EntryRecord& r : report.entries) ok += r.ok ? 1 : 0;
    std::printf("batch: %d/%zu ok", ok, report.entries.size());
    if (report.score.score) std::printf(", final_score=%.4f", *report.score.score);
    std::printf(", report: %s/report.json\n", o.cfg.output_dir.c_str());
    return report.all_ok() ? 0 : 2;
}

int run_sweep(AttackOpts& o, const std::string& axis_name, const std::string& values_csv) {
    std::optional<pgtk::GlyphFont> font_storage;
    resolve(o, font_storage);
    std::vector<std::string> values;
    std::size_t begin = 0;
    while (begin <= values_csv.size()) {
        std::size_t end = values_csv.find(',', begin);
        if (end == std::string::npos) end = values_csv.size();
        values.push_back(values_csv.substr(begin, end - begin));
        begin = end + 1;
    }
    // text_color values contain commas themselves; they arrive as repeated
    // triples, so regroup r,g,b runs of three.
    const pgtk::SweepAxis axis = pgtk::parse_sweep_axis(axis_name);
    if (axis == pgtk::SweepAxis::text_color) {
        if (values.size() % 3 != 0)
            throw pgtk::ConfigError("text_color sweep needs r,g,b triples");
        std::vector<std::string> grouped;
        for (std::size_t i = 0; i < values.size(); i += 3)
            grouped.push_back(values[i] + "," + values[i + 1] + "," + values[i + 2]);
        values = std::move(grouped);
    }

    const std::vector<pgtk::ManifestEntry> manifest = pgtk::load_manifest(o.manifest);
    const pgtk::SweepReport sweep = pgtk::ablation_sweep(manifest, o.cfg, axis, values);

    std::printf("axis: %s\n", sweep.axis.c_str());
    std::printf("%-14s %4s %4s %9s %10s %8s\n", "value", "ok", "fail", "mean_asr", "mean_ssim", "score");
    bool all_ok = true;
    for (const pgtk::SweepRow& row : sweep.rows) {
        std::printf("%-14s %4d %4d %9.4f %10.4f ", row.value.c_str(), row.entries_ok,
                    row.entries_failed, row.mean_asr, row.mean_ssim);
        if (row.score)
            std::printf("%8.4f\n", *row.score);
        else
            std::printf("%8s\n", "-");
        all_ok = all_ok && row.entries_failed == 0;
    }

    std::filesystem::create_directories(o.cfg.output_dir);
    const std::string report_path =
        (std::filesystem::path(o.cfg.output_dir) / "report.json").string();
    std::ofstream rep(report_path);
    rep << sweep.to_json() << '\n';
    if (!rep) throw pgtk::IoError("cannot write " + report_path);
    std::printf("report: %s\n", report_path.c_str());
    return all_ok ? 0 : 2;
}

int run_score(const std::string& manifest_path, const std::string& adv_dir, std::uint64_t seed) {
    const std::vector<pgtk::ManifestEntry> manifest = pgtk::load_manifest(manifest_path);
    const pgtk::ToyDualEncoder model = pgtk::init_model(seed);

    pgtk::ScoreReport report;
    std::vector<pgtk::ScoreEntry> scored;
    int failed = 0;
    for (const pgtk::ManifestEntry& entry : manifest) {
        try {
            const pgtk::ImageBuffer img = pgtk::load_png(entry.image_path);
            const std::string adv_path =
                (std::filesystem::path(adv_dir) / (entry.id + ".png")).string();
            const pgtk::ImageBuffer adv = pgtk::load_png(adv_path);
            if (!img.same_dims(adv))
                throw pgtk::DimensionError("original and adversarial dimensions disagree");

            const std::vector<std::string>& decoy_src =
                entry.decoy_captions.empty() ? entry.deceptive_texts : entry.decoy_captions;
            if (decoy_src.empty())
                throw pgtk::ConfigError("no decoys: decoy_captions and deceptive_texts both empty");
            std::vector<pgtk::Caption> decoys;
            for (const std::string& d : decoy_src) decoys.push_back(pgtk::Caption{d, 1});
            const pgtk::SurrogateRetrievalOracle oracle(model, pgtk::Caption{entry.caption, 1}, decoys);

            pgtk::PerImageScore s;
            s.id = entry.id;
            s.asr = oracle.evaluate(adv);
            // The PMP-only intermediate is gone by scoring time.
            s.ssim_pre_text = std::nullopt;
            s.ssim_post_text = pgtk::ssim(img, adv, report.ssim_params);
            s.contribution = s.asr * (report.alpha + (1.0 - report.alpha) * s.ssim_post_text);
            report.images.push_back(s);
            scored.push_back({s.asr, s.ssim_post_text});
            std::printf("[ok]   %-16s asr=%d ssim=%.4f\n", entry.id.c_str(), s.asr, s.ssim_post_text);
        } catch (const std::exception& e) {
            ++failed;
            std::fprintf(stderr, "[fail] %s: %s\n", entry.id.c_str(), e.what());
        }
    }
    if (!scored.empty()) report.score = pgtk::final_score(scored, report.alpha);

    const std::string report_path = (std::filesystem::path(adv_dir) / "report.json").string();
    std::ofstream rep(report_path);
    rep << report.to_json() << '\n';
    if (!rep) throw pgtk::IoError("cannot write " + report_path);
    if (report.score)
        std::printf("final_score=%.4f over %zu image(s), report: %s\n", *report.score,
                    report.images.size(), report_path.c_str());
    else
        std::printf("no image scored, report: %s\n", report_path.c_str());
    return failed == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mask-constrained perturbation + deceptive text patch attack toolkit"};
    app.require_subcommand(1);

    AttackOpts attack_opts;
    CLI::App* attack = app.add_subcommand("attack", "run the attack over a manifest");
    add_attack_options(attack, attack_opts);

    AttackOpts sweep_opts;
    std::string axis, values_csv;
    CLI::App* sweep = app.add_subcommand("sweep", "run one ablation axis");
    add_attack_options(sweep, sweep_opts);
    sweep->add_option("--axis", axis, "one of eps, text_color, text_quantity, font")->required();
    sweep->add_option("--values", values_csv, "comma-separated axis values")->required();

    std::string score_manifest, adv_dir;
    std::uint64_t score_seed = 7;
    CLI::App* score = app.add_subcommand("score", "re-score existing adversarial outputs");
    score->add_option("--manifest", score_manifest, "JSON-lines dataset manifest")->required();
    score->add_option("--adv-dir", adv_dir, "directory holding <id>.png outputs")->required();
    score->add_option("--seed", score_seed, "model seed used for the attack");

    try {
        app.parse(argc, argv);
        if (attack->parsed()) return run_attack(attack_opts);
        if (sweep->parsed()) return run_sweep(sweep_opts, axis, values_csv);
        return run_score(score_manifest, adv_dir, score_seed);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
