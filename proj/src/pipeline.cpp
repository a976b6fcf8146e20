#include "pgtk/pipeline.hpp"

#include <cctype>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "pgtk/errors.hpp"
#include "pgtk/png_io.hpp"
#include "pgtk/rng.hpp"

namespace pgtk {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_id(const std::string& id, int line) {
    if (id.empty()) throw DecodeError("manifest line " + std::to_string(line) + ": empty id");
    if (id.find('/') != std::string::npos || id.find('\\') != std::string::npos ||
        id.find("..") != std::string::npos)
        throw DecodeError("manifest line " + std::to_string(line) + ": id is not filename-safe: " + id);
}

std::string require_string(const nlohmann::json& j, const char* field, int line) {
    if (!j.contains(field) || !j[field].is_string() || j[field].get<std::string>().empty())
        throw DecodeError("manifest line " + std::to_string(line) + ": missing or empty field " + field);
    return j[field].get<std::string>();
}

std::vector<std::string> optional_string_list(const nlohmann::json& j, const char* field, int line) {
    if (!j.contains(field)) return {};
    if (!j[field].is_array())
        throw DecodeError("manifest line " + std::to_string(line) + ": field " + field + " must be a list");
    std::vector<std::string> out;
    for (const auto& v : j[field]) {
        if (!v.is_string())
            throw DecodeError("manifest line " + std::to_string(line) + ": field " + field +
                              " must hold strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

bool blank(const std::string& s) {
    return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

nlohmann::json config_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["pmp"] = {{"step_alpha", cfg.pmp.step_alpha},
                {"steps_t", cfg.pmp.steps_t},
                {"steps_n", cfg.pmp.steps_n},
                {"momentum_lambda", cfg.pmp.momentum_lambda},
                {"eps", cfg.pmp.eps},
                {"scale_factors", cfg.pmp.scale_factors},
                {"caption_replication", cfg.pmp.caption_replication}};
    j["dtp"] = {{"color", cfg.dtp.color},
                {"size", cfg.dtp.size},
                {"quantity", cfg.dtp.quantity},
                {"placement_seed", cfg.dtp.placement_seed},
                {"font", cfg.font_path.empty() ? "builtin" : cfg.font_path}};
    if (cfg.dtp.outline)
        j["dtp"]["outline"] = *cfg.dtp.outline;
    else
        j["dtp"]["outline"] = nullptr;
    j["ssim"] = {{"window_size", cfg.ssim.window_size},
                 {"sigma", cfg.ssim.sigma},
                 {"k1", cfg.ssim.k1},
                 {"k2", cfg.ssim.k2},
                 {"dynamic_range", cfg.ssim.dynamic_range},
                 {"luminance", "rec601"}};
    j["alpha"] = cfg.alpha;
    j["model_seed"] = cfg.model_seed;
    j["output_dir"] = cfg.output_dir;
    j["workers"] = cfg.workers;
    j["phases"] = nlohmann::json::array();
    if (cfg.phase_pmp) j["phases"].push_back("pmp");
    if (cfg.phase_dtp) j["phases"].push_back("dtp");
    return j;
}

nlohmann::json record_json(const EntryRecord& r) {
    nlohmann::json j;
    j["id"] = r.id;
    j["ok"] = r.ok;
    j["error"] = r.ok ? nlohmann::json() : nlohmann::json(r.error);
    j["seconds"] = r.seconds;
    j["warnings"] = r.warnings;
    if (r.ok) {
        j["output_path"] = r.output_path;
        j["asr"] = r.score.asr;
        j["ssim_pre_text"] = r.score.ssim_pre_text ? nlohmann::json(*r.score.ssim_pre_text) : nlohmann::json();
        j["ssim_post_text"] = r.score.ssim_post_text;
        j["contribution"] = r.score.contribution;
        j["loss_clean"] = r.loss_clean;
        j["loss_final"] = r.loss_final;
        j["final_linf"] = r.final_linf;
    } else {
        for (const char* k : {"output_path", "asr", "ssim_pre_text", "ssim_post_text", "contribution",
                              "loss_clean", "loss_final", "final_linf"})
            j[k] = nullptr;
    }
    return j;
}

std::string sanitize_component(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '_' && c != '-') c = '-';
    return out.empty() ? std::string("value") : out;
}

double parse_real(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(std::string("sweep: bad ") + what + " value: " + s);
    }
}

int parse_int(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(std::string("sweep: bad ") + what + " value: " + s);
    }
}

std::array<double, 3> parse_rgb(const std::string& s) {
    std::array<double, 3> rgb{};
    std::size_t begin = 0;
    for (int c = 0; c < 3; ++c) {
        const std::size_t end = c < 2 ? s.find(',', begin) : s.size();
        if (end == std::string::npos) throw ConfigError("sweep: text_color needs r,g,b: " + s);
        rgb[c] = parse_real(s.substr(begin, end - begin), "text_color");
        begin = end + 1;
    }
    return rgb;
}

}  // namespace

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("manifest: cannot open " + path);

    std::vector<ManifestEntry> out;
    std::unordered_set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DecodeError("manifest line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!j.is_object())
            throw DecodeError("manifest line " + std::to_string(lineno) + ": entry must be an object");

        ManifestEntry e;
        e.id = require_string(j, "id", lineno);
        check_id(e.id, lineno);
        e.image_path = require_string(j, "image_path", lineno);
        e.mask_path = require_string(j, "mask_path", lineno);
        e.caption = require_string(j, "caption", lineno);
        e.task = require_string(j, "task", lineno);
        if (e.task != "color" && e.task != "classification" && e.task != "counting")
            throw DecodeError("manifest line " + std::to_string(lineno) + ": unknown task " + e.task);
        e.deceptive_texts = optional_string_list(j, "deceptive_texts", lineno);
        e.decoy_captions = optional_string_list(j, "decoy_captions", lineno);
        if (!seen.insert(e.id).second)
            throw DecodeError("manifest line " + std::to_string(lineno) + ": duplicate id " + e.id);
        out.push_back(std::move(e));
    }
    return out;
}

void RunConfig::validate() const {
    pmp.validate();
    // The texts placeholder lets the shared DtpConfig checks run; real texts
    // arrive per manifest entry.
    DtpConfig probe = dtp;
    probe.texts = {"probe"};
    probe.validate();
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("run config: alpha must be in [0,1]");
    if (workers < 1) throw ConfigError("run config: workers must be >= 1");
    if (!phase_pmp && !phase_dtp) throw ConfigError("run config: phases must be non-empty");
    if (output_dir.empty()) throw ConfigError("run config: output_dir must be set");
    if (ssim.window_size < 3 || ssim.window_size % 2 == 0)
        throw ConfigError("run config: ssim window must be odd and >= 3");
    if (!(ssim.sigma > 0.0) || !(ssim.dynamic_range > 0.0))
        throw ConfigError("run config: ssim sigma and dynamic range must be positive");
}

EntryOutcome run_entry(const ManifestEntry& entry, const ToyDualEncoder& model, const RunConfig& cfg) {
    EntryOutcome out;
    out.record.id = entry.id;
    const auto t0 = Clock::now();
    try {
        cfg.validate();
        const ImageBuffer img = load_png(entry.image_path);
        const MaskImage mask = load_mask(entry.mask_path);
        if (mask.height != img.height || mask.width != img.width)
            throw DimensionError("image and mask dimensions disagree");

        const Caption caption{entry.caption, 1};
        ImageBuffer adv = img;
        if (cfg.phase_pmp) {
            PmpResult r = pmp_attack(model, img, caption, mask, cfg.pmp);
            adv = std::move(r.adv);
            out.record.final_linf = r.trace.final_linf;
        }
        out.record.score.id = entry.id;
        out.record.score.ssim_pre_text = cfg.phase_pmp ? ssim(img, adv, cfg.ssim) : 1.0;

        if (cfg.phase_dtp) {
            DtpConfig local = cfg.dtp;
            local.texts = entry.deceptive_texts;
            local.placement_seed = cfg.dtp.placement_seed ^ fnv1a64(entry.id);
            adv = dtp_attack(adv, local, &out.record.warnings);
        }
        out.record.score.ssim_post_text = ssim(img, adv, cfg.ssim);

        const std::vector<std::string>& decoy_src =
            entry.decoy_captions.empty() ? entry.deceptive_texts : entry.decoy_captions;
        if (decoy_src.empty())
            throw ConfigError("no decoys for the ASR oracle: decoy_captions and deceptive_texts both empty");
        std::vector<Caption> decoys;
        decoys.reserve(decoy_src.size());
        for (const std::string& d : decoy_src) decoys.push_back(Caption{d, 1});
        const SurrogateRetrievalOracle oracle(model, caption, decoys);
        out.record.score.asr = oracle.evaluate(adv);
        out.record.score.contribution =
            out.record.score.asr * (cfg.alpha + (1.0 - cfg.alpha) * out.record.score.ssim_post_text);

        const Embedding txt = embed_text(model, caption);
        out.record.loss_clean = loss(embed_image(model, img), txt);
        out.record.loss_final = loss(embed_image(model, adv), txt);

        const std::string out_path =
            (std::filesystem::path(cfg.output_dir) / (entry.id + ".png")).string();
        save_png(adv, out_path);
        out.record.output_path = out_path;
        out.adv = std::move(adv);
        out.record.ok = true;
    } catch (const std::exception& e) {
        out.record.ok = false;
        out.record.error = e.what();
    }
    out.record.seconds = seconds_since(t0);
    return out;
}

bool RunReport::all_ok() const {
    for (const EntryRecord& r : entries)
        if (!r.ok) return false;
    return true;
}

std::string RunReport::to_json() const {
    nlohmann::json j;
    j["version"] = version;
    j["total_seconds"] = total_seconds;
    j["config"] = config_json(config);
    j["entries"] = nlohmann::json::array();
    for (const EntryRecord& r : entries) j["entries"].push_back(record_json(r));
    j["score"] = nlohmann::json::parse(score.to_json());
    return j.dump(2);
}

RunReport run_batch(const std::vector<ManifestEntry>& manifest, const RunConfig& cfg) {
    cfg.validate();
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec || !std::filesystem::is_directory(cfg.output_dir))
        throw IoError("run_batch: cannot create output directory " + cfg.output_dir);

    const ToyDualEncoder model = init_model(cfg.model_seed);
    RunReport report;
    report.config = cfg;
    report.entries.resize(manifest.size());

    const auto t0 = Clock::now();
    const std::int64_t n = static_cast<std::int64_t>(manifest.size());
// Entry-level work pool; kernel regions nested below an active pool stay
// serial, so worker count never changes any arithmetic.
#pragma omp parallel for num_threads(cfg.workers) schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i)
        report.entries[static_cast<std::size_t>(i)] =
            run_entry(manifest[static_cast<std::size_t>(i)], model, cfg).record;
    report.total_seconds = seconds_since(t0);

    report.score.alpha = cfg.alpha;
    report.score.ssim_params = cfg.ssim;
    std::vector<ScoreEntry> scored;
    for (const EntryRecord& r : report.entries) {
        if (!r.ok) continue;
        report.score.images.push_back(r.score);
        scored.push_back({r.score.asr, r.score.ssim_post_text});
    }
    if (!scored.empty()) report.score.score = final_score(scored, cfg.alpha);

    std::ofstream rep(std::filesystem::path(cfg.output_dir) / "report.json");
    rep << report.to_json() << '\n';
    if (!rep) throw IoError("run_batch: cannot write report.json in " + cfg.output_dir);
    return report;
}

SweepAxis parse_sweep_axis(const std::string& name) {
    if (name == "eps") return SweepAxis::eps;
    if (name == "text_color") return SweepAxis::text_color;
    if (name == "text_quantity") return SweepAxis::text_quantity;
    if (name == "font") return SweepAxis::font;
    throw ConfigError("unknown sweep axis: " + name);
}

namespace {

const char* axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::eps: return "eps";
        case SweepAxis::text_color: return "text_color";
        case SweepAxis::text_quantity: return "text_quantity";
        case SweepAxis::font: return "font";
    }
    throw ConfigError("unknown sweep axis");
}

}  // namespace

SweepReport ablation_sweep(const std::vector<ManifestEntry>& manifest, const RunConfig& cfg,
                           SweepAxis axis, const std::vector<std::string>& values) {
    cfg.validate();
    if (values.empty()) throw ConfigError("sweep: need at least one value");

    SweepReport rep;
    rep.axis = axis_name(axis);
    std::vector<GlyphFont> fonts;
    fonts.reserve(values.size());

    for (const std::string& v : values) {
        RunConfig run_cfg = cfg;
        run_cfg.output_dir = (std::filesystem::path(cfg.output_dir) /
                              (rep.axis + "_" + sanitize_component(v)))
                                 .string();
        switch (axis) {
            case SweepAxis::eps: {
                const double eps = parse_real(v, "eps");
                run_cfg.pmp.eps = eps;
                break;
            }
            case SweepAxis::text_color:
                run_cfg.dtp.color = parse_rgb(v);
                break;
            case SweepAxis::text_quantity:
                run_cfg.dtp.quantity = parse_int(v, "text_quantity");
                break;
            case SweepAxis::font:
                fonts.push_back(load_font(v));
                run_cfg.dtp.font = &fonts.back();
                run_cfg.font_path = v;
                break;
        }
        RunReport rr = run_batch(manifest, run_cfg);

        SweepRow row;
        row.value = v;
        double asr_sum = 0.0, ssim_sum = 0.0;
        for (const EntryRecord& r : rr.entries) {
            if (r.ok) {
                ++row.entries_ok;
                asr_sum += r.score.asr;
                ssim_sum += r.score.ssim_post_text;
            } else {
                ++row.entries_failed;
            }
        }
        if (row.entries_ok > 0) {
            row.mean_asr = asr_sum / row.entries_ok;
            row.mean_ssim = ssim_sum / row.entries_ok;
        }
        row.score = rr.score.score;
        rep.rows.push_back(std::move(row));
        rep.runs.push_back(std::move(rr));
    }
    return rep;
}

std::string SweepReport::to_json() const {
    nlohmann::json j;
    j["axis"] = axis;
    j["rows"] = nlohmann::json::array();
    for (const SweepRow& r : rows) {
        nlohmann::json row;
        row["value"] = r.value;
        row["entries_ok"] = r.entries_ok;
        row["entries_failed"] = r.entries_failed;
        row["mean_asr"] = r.mean_asr;
        row["mean_ssim"] = r.mean_ssim;
        row["score"] = r.score ? nlohmann::json(*r.score) : nlohmann::json();
        j["rows"].push_back(row);
    }
    j["runs"] = nlohmann::json::array();
    for (const RunReport& r : runs) j["runs"].push_back(nlohmann::json::parse(r.to_json()));
    return j.dump(2);
}

}  // namespace pgtk
