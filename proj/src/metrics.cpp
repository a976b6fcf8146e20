#include "pgtk/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace pgtk {

std::vector<double> SsimParams::gaussian_window() const {
    const int win = window_size;
    std::vector<double> k1d(static_cast<std::size_t>(win));
    const int half = win / 2;
    double sum = 0.0;
    for (int i = 0; i < win; ++i) {
        double d = (i - half) / sigma;
        k1d[i] = std::exp(-0.5 * d * d);
        sum += k1d[i];
    }
    for (double& v : k1d)
        v /= sum;
    std::vector<double> k2d(static_cast<std::size_t>(win) * win);
    for (int y = 0; y < win; ++y)
        for (int x = 0; x < win; ++x)
            k2d[static_cast<std::size_t>(y) * win + x] = k1d[y] * k1d[x];
    return k2d;
}

namespace {

std::vector<double> luminance_plane(const ImageBuffer& img) {
    const std::int64_t n = static_cast<std::int64_t>(img.height) * img.width;
    std::vector<double> luma(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < n; ++p)
        luma[p] = 0.299 * img.data[p * 3] + 0.587 * img.data[p * 3 + 1] + 0.114 * img.data[p * 3 + 2];
    return luma;
}

// Valid-region separable Gaussian filter; output is (h-win+1) x (w-win+1).
void filter_valid(const std::vector<double>& in, int h, int w, const std::vector<double>& k1d,
                  std::vector<double>& out) {
    const int win = static_cast<int>(k1d.size());
    const int vw = w - win + 1;
    const int vh = h - win + 1;
    std::vector<double> horiz(static_cast<std::size_t>(h) * vw);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < vw; ++x) {
            double s = 0.0;
            for (int k = 0; k < win; ++k)
                s += k1d[k] * in[static_cast<std::size_t>(y) * w + x + k];
            horiz[static_cast<std::size_t>(y) * vw + x] = s;
        }
    }
    out.assign(static_cast<std::size_t>(vh) * vw, 0.0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < vh; ++y) {
        for (int x = 0; x < vw; ++x) {
            double s = 0.0;
            for (int k = 0; k < win; ++k)
                s += k1d[k] * horiz[static_cast<std::size_t>(y + k) * vw + x];
            out[static_cast<std::size_t>(y) * vw + x] = s;
        }
    }
}

} // namespace

double ssim(const ImageBuffer& x, const ImageBuffer& y, const SsimParams& params) {
    if (x.height != y.height || x.width != y.width)
        throw DimensionError("ssim: dimensions disagree");
    const int win = params.window_size;
    if (x.height < win || x.width < win)
        throw DimensionError("ssim: image smaller than the window");

    const std::vector<double> lx = luminance_plane(x);
    const std::vector<double> ly = luminance_plane(y);
    const int h = x.height, w = x.width;

    std::vector<double> k1d(static_cast<std::size_t>(win));
    {
        const int half = win / 2;
        double sum = 0.0;
        for (int i = 0; i < win; ++i) {
            double d = (i - half) / params.sigma;
            k1d[i] = std::exp(-0.5 * d * d);
            sum += k1d[i];
        }
        for (double& v : k1d)
            v /= sum;
    }

    const std::int64_t n = static_cast<std::int64_t>(h) * w;
    std::vector<double> xx(static_cast<std::size_t>(n)), yy(static_cast<std::size_t>(n)), xy(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < n; ++p) {
        xx[p] = lx[p] * lx[p];
        yy[p] = ly[p] * ly[p];
        xy[p] = lx[p] * ly[p];
    }

    std::vector<double> mx, my, mxx, myy, mxy;
    filter_valid(lx, h, w, k1d, mx);
    filter_valid(ly, h, w, k1d, my);
    filter_valid(xx, h, w, k1d, mxx);
    filter_valid(yy, h, w, k1d, myy);
    filter_valid(xy, h, w, k1d, mxy);

    const int vh = h - win + 1, vw = w - win + 1;
    const double c1 = params.c1(), c2 = params.c2();
    std::vector<double> row_sums(static_cast<std::size_t>(vh), 0.0);
#pragma omp parallel for schedule(static)
    for (int ry = 0; ry < vh; ++ry) {
        double s = 0.0;
        for (int rx = 0; rx < vw; ++rx) {
            const std::size_t p = static_cast<std::size_t>(ry) * vw + rx;
            const double vx = mxx[p] - mx[p] * mx[p];
            const double vy = myy[p] - my[p] * my[p];
            const double cov = mxy[p] - mx[p] * my[p];
            const double num = (2.0 * mx[p] * my[p] + c1) * (2.0 * cov + c2);
            const double den = (mx[p] * mx[p] + my[p] * my[p] + c1) * (vx + vy + c2);
            s += num / den;
        }
        row_sums[ry] = s;
    }
    double total = 0.0;
    for (int ry = 0; ry < vh; ++ry)
        total += row_sums[ry];
    return total / (static_cast<double>(vh) * vw);
}

double final_score(const std::vector<ScoreEntry>& entries, double alpha) {
    if (entries.empty())
        throw ConfigError("final_score: no entries");
    if (alpha < 0.0 || alpha > 1.0)
        throw ConfigError("final_score: alpha must be in [0,1]");
    double sum = 0.0;
    for (const ScoreEntry& e : entries) {
        if (e.asr != 0 && e.asr != 1)
            throw ConfigError("final_score: asr must be 0 or 1");
        if (e.ssim < -1.0 - 1e-9 || e.ssim > 1.0 + 1e-9)
            throw ConfigError("final_score: ssim out of [-1,1]");
        sum += e.asr * (alpha + (1.0 - alpha) * e.ssim);
    }
    return sum / static_cast<double>(entries.size());
}

std::string ScoreReport::to_json() const {
    nlohmann::json j;
    j["images"] = nlohmann::json::array();
    for (const PerImageScore& s : images) {
        nlohmann::json e;
        e["id"] = s.id;
        e["asr"] = s.asr;
        if (s.ssim_pre_text)
            e["ssim_pre_text"] = *s.ssim_pre_text;
        else
            e["ssim_pre_text"] = nullptr;
        e["ssim_post_text"] = s.ssim_post_text;
        e["contribution"] = s.contribution;
        j["images"].push_back(e);
    }
    j["alpha"] = alpha;
    if (score)
        j["final_score"] = *score;
    else
        j["final_score"] = nullptr;
    j["ssim_params"] = {{"window_size", ssim_params.window_size},
                        {"sigma", ssim_params.sigma},
                        {"k1", ssim_params.k1},
                        {"k2", ssim_params.k2},
                        {"dynamic_range", ssim_params.dynamic_range},
                        {"luminance", "rec601"}};
    return j.dump(2);
}

namespace {

std::string trimmed(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

SurrogateRetrievalOracle::SurrogateRetrievalOracle(const ToyDualEncoder& model, Caption true_caption,
                                                   std::vector<Caption> decoys)
    : model_(&model) {
    if (decoys.empty())
        throw ConfigError("retrieval oracle: need at least one decoy caption");
    const std::string truth = trimmed(true_caption.text);
    for (const Caption& d : decoys) {
        if (trimmed(d.text) == truth)
            throw ConfigError("retrieval oracle: decoy equals the true caption");
    }
    true_emb_ = embed_text(model, true_caption);
    decoy_embs_.reserve(decoys.size());
    for (const Caption& d : decoys)
        decoy_embs_.push_back(embed_text(model, d));
}

int SurrogateRetrievalOracle::evaluate(const ImageBuffer& adv) const {
    const Embedding e = embed_image(*model_, adv);
    const double cos_true = e.dot(true_emb_);
    double best_decoy = -2.0;
    for (const Embedding& d : decoy_embs_)
        best_decoy = std::max(best_decoy, e.dot(d));
    return cos_true < best_decoy ? 1 : 0;
}

} // namespace pgtk
