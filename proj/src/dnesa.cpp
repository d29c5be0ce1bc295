#include "aqua/dnesa.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

#include "aqua/codecs.hpp"
#include "aqua/image_ops.hpp"

namespace aqua::dnesa {

namespace {

void require_same_size(const ImageGrid& a, const ImageGrid& b, const char* what) {
    if (a.height != b.height || a.width != b.width)
        throw DimensionError(std::string(what) + ": grids differ in size");
}

double masked_overlap_ratio(const Mask& pred_edges, const Mask& rgb_edges) {
    size_t both = 0, rgb = 0;
    for (size_t i = 0; i < rgb_edges.data.size(); ++i) {
        if (rgb_edges.data[i]) {
            ++rgb;
            if (pred_edges.data[i]) ++both;
        }
    }
    return rgb == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(rgb);
}

}  // namespace

DepthQuality evaluate_depth_map(const DepthGrid& d, const ImageGrid& rgb) {
    require_same_size(d, rgb, "evaluate_depth_map");

    const DepthGrid dn = minmax_normalize(d);
    const SobelResult dg = sobel_gradients(dn);
    const SobelResult ig = sobel_gradients(luminance(rgb));

    DepthQuality q;
    q.edge_consistency = masked_overlap_ratio(edge_mask(dg.magnitude, kEdgePercentile),
                                              edge_mask(ig.magnitude, kEdgePercentile));

    const ImageGrid var = box_local_variance(dn, kVarianceWindow);
    double vsum = 0.0, csum = 0.0, smax = 0.0;
    for (size_t i = 0; i < var.data.size(); ++i) {
        vsum += var.data[i];
        csum += dg.magnitude.data[i];
        smax = std::max(smax, static_cast<double>(dg.magnitude.data[i]));
    }
    const double n = static_cast<double>(dn.pixels());
    q.local_variance = vsum / n;
    q.complexity = csum / n;
    q.sharpness = smax;
    return q;
}

NormalQuality evaluate_normal_map(const NormalGrid& n, const ImageGrid& rgb) {
    require_same_size(n, rgb, "evaluate_normal_map");
    if (n.channels != 3) throw DimensionError("evaluate_normal_map: expected 3 channels");

    // Angular-change proxy: sum of per-channel Sobel magnitudes.
    ImageGrid edge(n.height, n.width, 1);
    for (int c = 0; c < 3; ++c) {
        ImageGrid chan(n.height, n.width, 1);
        for (size_t p = 0; p < n.pixels(); ++p) chan.data[p] = n.data[p * 3 + c];
        const SobelResult sg = sobel_gradients(chan);
        for (size_t p = 0; p < edge.data.size(); ++p) edge.data[p] += sg.magnitude.data[p];
    }

    const SobelResult ig = sobel_gradients(luminance(rgb));

    NormalQuality q;
    q.edge_consistency = masked_overlap_ratio(edge_mask(edge, kEdgePercentile),
                                              edge_mask(ig.magnitude, kEdgePercentile));

    double mx = 0.0, my = 0.0, mz = 0.0;
    const double count = static_cast<double>(n.pixels());
    for (size_t p = 0; p < n.pixels(); ++p) {
        mx += n.data[p * 3];
        my += n.data[p * 3 + 1];
        mz += n.data[p * 3 + 2];
    }
    mx /= count;
    my /= count;
    mz /= count;
    double vo = 0.0;
    for (size_t p = 0; p < n.pixels(); ++p)
        vo += 1.0 - (n.data[p * 3] * mx + n.data[p * 3 + 1] * my + n.data[p * 3 + 2] * mz);
    q.orientation_variance = vo / count;

    double smax = 0.0;
    for (float v : edge.data) smax = std::max(smax, static_cast<double>(v));
    q.sharpness = smax;
    return q;
}

Scores combined_score(const DepthQuality& dq, const NormalQuality& nq, const ScoreWeights& w) {
    Scores s;
    s.depth_score = dq.edge_consistency * w.depth_edge_consistency +
                    dq.local_variance * w.depth_local_variance +
                    dq.complexity * w.depth_complexity + dq.sharpness * w.depth_sharpness;
    s.normal_score = nq.edge_consistency * w.normal_edge_consistency +
                     nq.orientation_variance * w.normal_orientation_variance +
                     nq.sharpness * w.normal_sharpness;
    s.combined = s.depth_score + s.normal_score;
    return s;
}

size_t find_best_pair(const std::vector<std::pair<DepthQuality, NormalQuality>>& candidates,
                      const ScoreWeights& w) {
    if (candidates.empty())
        throw ParameterError("find_best_pair: no candidates");
    size_t best = 0;
    double best_score = combined_score(candidates[0].first, candidates[0].second, w).combined;
    for (size_t i = 1; i < candidates.size(); ++i) {
        const double s = combined_score(candidates[i].first, candidates[i].second, w).combined;
        if (s > best_score) {
            best = i;
            best_score = s;
        }
    }
    return best;
}

std::vector<CandidateSet> discover_pairs(const std::filesystem::path& rgb_dir,
                                         const std::vector<std::filesystem::path>& model_dirs) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(rgb_dir))
        throw IoError("rgb dir not readable: " + rgb_dir.string());
    for (const auto& m : model_dirs)
        if (!fs::is_directory(m))
            throw IoError("model dir not readable: " + m.string());

    std::vector<fs::path> rgb_files;
    for (const auto& e : fs::directory_iterator(rgb_dir)) {
        if (!e.is_regular_file()) continue;
        std::string ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
        if (ext == ".png" || ext == ".jpg" || ext == ".jpeg")
            rgb_files.push_back(e.path());
    }
    std::sort(rgb_files.begin(), rgb_files.end());

    std::vector<CandidateSet> out;
    out.reserve(rgb_files.size());
    for (const auto& rgb : rgb_files) {
        CandidateSet set;
        set.rgb_path = rgb;
        const std::string stem = rgb.stem().string();
        for (const auto& mdir : model_dirs) {
            CandidateFiles c;
            c.model = mdir.filename().string();
            if (c.model.empty()) c.model = mdir.parent_path().filename().string();
            // PFM preferred over PNG16 when both exist.
            const fs::path pfm = mdir / (stem + "_depth.pfm");
            const fs::path png = mdir / (stem + "_depth.png");
            if (fs::exists(pfm))
                c.depth_path = pfm;
            else if (fs::exists(png))
                c.depth_path = png;
            const fs::path normal = mdir / (stem + "_normal.png");
            if (fs::exists(normal)) c.normal_path = normal;
            set.candidates.push_back(std::move(c));
        }
        out.push_back(std::move(set));
    }
    return out;
}

namespace {

ImageRecord curate_one(const CandidateSet& set, const ScoreWeights& w,
                       const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    ImageRecord rec;
    rec.rgb = set.rgb_path.filename().string();

    ImageGrid rgb;
    try {
        rgb = read_png_rgb8(set.rgb_path);
    } catch (const Error& e) {
        rec.skipped = true;
        rec.warnings.push_back(std::string("unreadable rgb: ") + e.what());
        return rec;
    }

    for (const auto& cand : set.candidates) {
        if (!cand.complete()) continue;  // a candidate needs both maps
        CandidateRecord cr;
        cr.model = cand.model;
        cr.depth_path = cand.depth_path;
        cr.normal_path = cand.normal_path;
        try {
            const DepthGrid d = read_depth_any(cand.depth_path);
            const NormalGrid n = read_normal_png(cand.normal_path);
            cr.depth_quality = evaluate_depth_map(d, rgb);
            cr.normal_quality = evaluate_normal_map(n, rgb);
        } catch (const Error& e) {
            rec.warnings.push_back("excluded " + cand.model + ": " + e.what());
            continue;
        }
        cr.scores = combined_score(cr.depth_quality, cr.normal_quality, w);
        rec.candidates.push_back(std::move(cr));
    }

    if (rec.candidates.empty()) {
        rec.skipped = true;
        return rec;
    }

    size_t best = 0;
    for (size_t i = 1; i < rec.candidates.size(); ++i)
        if (rec.candidates[i].scores.combined > rec.candidates[best].scores.combined) best = i;
    const CandidateRecord& sel = rec.candidates[best];
    rec.selected_model = sel.model;

    std::error_code ec;
    fs::copy_file(sel.depth_path, out_dir / (sel.model + "_" + sel.depth_path.filename().string()),
                  fs::copy_options::overwrite_existing, ec);
    if (ec) throw IoError("cannot write to " + out_dir.string() + ": " + ec.message());
    fs::copy_file(sel.normal_path,
                  out_dir / (sel.model + "_" + sel.normal_path.filename().string()),
                  fs::copy_options::overwrite_existing, ec);
    if (ec) throw IoError("cannot write to " + out_dir.string() + ": " + ec.message());
    return rec;
}

}  // namespace

CurationReport curate(const std::filesystem::path& rgb_dir,
                      const std::vector<std::filesystem::path>& model_dirs,
                      const std::filesystem::path& out_dir, const ScoreWeights& w, int workers) {
    namespace fs = std::filesystem;
    if (workers < 1) throw ParameterError("curate: workers must be >= 1");

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir))
        throw IoError("cannot create output dir: " + out_dir.string());

    const std::vector<CandidateSet> sets = discover_pairs(rgb_dir, model_dirs);

    CurationReport report;
    report.weights = w;
    report.images.resize(sets.size());

    // Static partition over images; the report slot order is fixed by the
    // sorted discovery order, so any worker count yields identical output.
    std::exception_ptr first_error;
    std::mutex err_mutex;
    auto run_range = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            try {
                report.images[i] = curate_one(sets[i], w, out_dir);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    const size_t n = sets.size();
    const size_t nthreads = std::min<size_t>(workers, std::max<size_t>(n, 1));
    if (nthreads <= 1) {
        run_range(0, n);
    } else {
        std::vector<std::thread> threads;
        const size_t chunk = (n + nthreads - 1) / nthreads;
        for (size_t t = 0; t < nthreads; ++t) {
            const size_t b = t * chunk;
            if (b >= n) break;
            threads.emplace_back(run_range, b, std::min(b + chunk, n));
        }
        for (auto& th : threads) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return report;
}

}  // namespace aqua::dnesa
