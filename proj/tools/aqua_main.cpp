// Command-line front end: curation, scoring, evaluation, loss inspection
// and the desk-scale network forward pass.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "aqua/aquanet.hpp"
#include "aqua/codecs.hpp"
#include "aqua/dnesa.hpp"
#include "aqua/eval_metrics.hpp"
#include "aqua/image_ops.hpp"
#include "aqua/losses.hpp"
#include "aqua/report.hpp"

namespace fs = std::filesystem;
using aqua::report::Json;
using aqua::report::round9;

namespace {

aqua::dnesa::ScoreWeights load_weights_file(const fs::path& path) {
    aqua::dnesa::ScoreWeights w;
    if (path.empty()) return w;
    std::ifstream in(path);
    if (!in) throw aqua::IoError("cannot open weights file: " + path.string());
    std::string line;
    std::map<std::string, double*> keys{
        {"depth_edge_consistency", &w.depth_edge_consistency},
        {"depth_local_variance", &w.depth_local_variance},
        {"depth_complexity", &w.depth_complexity},
        {"depth_sharpness", &w.depth_sharpness},
        {"normal_edge_consistency", &w.normal_edge_consistency},
        {"normal_orientation_variance", &w.normal_orientation_variance},
        {"normal_sharpness", &w.normal_sharpness},
    };
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = strip(line.substr(0, eq));
        const auto it = keys.find(key);
        if (it == keys.end())
            throw aqua::FormatError("weights file: unknown key '" + key + "'");
        *it->second = std::stod(strip(line.substr(eq + 1)));
    }
    return w;
}

aqua::Mask load_mask(const fs::path& path, int h, int w) {
    if (path.empty()) return aqua::Mask::all_true(h, w);
    const aqua::DepthGrid g = aqua::read_depth_any(path);
    if (g.height != h || g.width != w)
        throw aqua::DimensionError("mask size mismatch: " + path.string());
    aqua::Mask m(h, w, false);
    for (size_t i = 0; i < g.data.size(); ++i) m.data[i] = g.data[i] > 0.5f;
    return m;
}

aqua::metrics::AlignMode parse_align(const std::string& s) {
    if (s == "none") return aqua::metrics::AlignMode::None;
    if (s == "lstsq") return aqua::metrics::AlignMode::Lstsq;
    if (s == "median") return aqua::metrics::AlignMode::Median;
    throw aqua::ParameterError("unknown align mode: " + s);
}

std::vector<fs::path> list_dir_sorted(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw aqua::IoError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    return files;
}

int run_curate(const std::string& rgb_dir, const std::vector<std::string>& model_dirs,
               const std::string& out_dir, const std::string& weights_file, int workers,
               const std::string& report_name) {
    const aqua::dnesa::ScoreWeights w = load_weights_file(weights_file);
    const aqua::dnesa::CurationReport report =
        aqua::dnesa::curate(rgb_dir, std::vector<fs::path>(model_dirs.begin(), model_dirs.end()),
                            out_dir, w, workers);

    Json j = aqua::report::to_json(report);
    Json run_config{{"subcommand", "curate"},
                    {"rgb_dir", rgb_dir},
                    {"model_dirs", model_dirs},
                    {"out_dir", out_dir},
                    {"weights_file", weights_file},
                    {"workers", workers}};
    j["run_config"] = std::move(run_config);
    aqua::report::write_report(j, fs::path(out_dir) / report_name, "json");

    if (report.images.empty())
        std::cerr << "warning: no RGB images found in " << rgb_dir << "\n";
    size_t selected = 0;
    for (const auto& img : report.images) selected += !img.skipped;
    std::cout << "curated " << selected << "/" << report.images.size() << " images into "
              << out_dir << "\n";
    return 0;
}

int run_score(const std::string& rgb_path, const std::string& depth_path,
              const std::string& normal_path, const std::string& weights_file) {
    const aqua::dnesa::ScoreWeights w = load_weights_file(weights_file);
    const aqua::ImageGrid rgb = aqua::read_png_rgb8(rgb_path);
    const aqua::DepthGrid d = aqua::read_depth_any(depth_path);
    const aqua::NormalGrid n = aqua::read_normal_png(normal_path);

    const auto dq = aqua::dnesa::evaluate_depth_map(d, rgb);
    const auto nq = aqua::dnesa::evaluate_normal_map(n, rgb);
    const auto s = aqua::dnesa::combined_score(dq, nq, w);

    Json j{{"depth_quality", aqua::report::to_json(dq)},
           {"normal_quality", aqua::report::to_json(nq)},
           {"depth_score", round9(s.depth_score)},
           {"normal_score", round9(s.normal_score)},
           {"combined_score", round9(s.combined)}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_eval_depth(const std::string& pred_dir, const std::string& gt_dir,
                   const std::string& mask_dir, const std::string& align,
                   const std::string& format, bool per_pixel, const std::string& report_path) {
    const auto mode = parse_align(align);
    std::vector<aqua::metrics::DepthMetricRecord> records;
    std::vector<aqua::metrics::DepthSums> sums;
    Json rows = Json::array();

    for (const auto& pred_file : list_dir_sorted(pred_dir)) {
        const fs::path gt_file = fs::path(gt_dir) / pred_file.filename();
        if (!fs::exists(gt_file)) {
            std::cerr << "warning: no ground truth for " << pred_file.filename() << "\n";
            continue;
        }
        aqua::DepthGrid pred = aqua::read_depth_any(pred_file);
        const aqua::DepthGrid gt = aqua::read_depth_any(gt_file);
        const aqua::Mask mask =
            load_mask(mask_dir.empty() ? fs::path()
                                       : fs::path(mask_dir) / pred_file.filename(),
                      gt.height, gt.width);
        pred = aqua::metrics::align_for_eval(pred, gt, mask, mode);
        const auto s = aqua::metrics::depth_sums(pred, gt, mask);
        const auto rec = aqua::metrics::record_from_sums(s);
        sums.push_back(s);
        records.push_back(rec);
        Json row = aqua::report::to_json(rec);
        row["image"] = pred_file.filename().string();
        rows.push_back(std::move(row));
    }

    const auto agg = per_pixel ? aqua::metrics::aggregate_depth_pooled(sums)
                               : aqua::metrics::aggregate_depth(records);
    Json agg_row = aqua::report::to_json(agg);
    agg_row["image"] = "aggregate";
    rows.push_back(agg_row);

    Json out{{"rows", rows},
             {"run_config",
              {{"subcommand", "eval-depth"},
               {"pred_dir", pred_dir},
               {"gt_dir", gt_dir},
               {"mask_dir", mask_dir},
               {"align", align},
               {"format", format},
               {"per_pixel", per_pixel}}},
             {"version", aqua::report::kToolVersion}};
    if (report_path.empty())
        std::cout << (format == "csv" ? aqua::report::to_csv(rows) : out.dump(2) + "\n");
    else
        aqua::report::write_report(out, report_path, format);
    return 0;
}

int run_eval_normals(const std::string& pred_dir, const std::string& gt_dir,
                     const std::string& mask_dir, const std::string& format, bool per_pixel,
                     const std::string& report_path) {
    std::vector<aqua::metrics::NormalMetricRecord> records;
    std::vector<aqua::metrics::NormalSums> sums;
    Json rows = Json::array();

    for (const auto& pred_file : list_dir_sorted(pred_dir)) {
        const fs::path gt_file = fs::path(gt_dir) / pred_file.filename();
        if (!fs::exists(gt_file)) {
            std::cerr << "warning: no ground truth for " << pred_file.filename() << "\n";
            continue;
        }
        const aqua::NormalGrid pred = aqua::read_normal_png(pred_file);
        const aqua::NormalGrid gt = aqua::read_normal_png(gt_file);
        const aqua::Mask mask =
            load_mask(mask_dir.empty() ? fs::path()
                                       : fs::path(mask_dir) / pred_file.filename(),
                      gt.height, gt.width);
        const auto s = aqua::metrics::normal_sums(pred, gt, mask);
        const auto rec = aqua::metrics::record_from_sums(s);
        sums.push_back(s);
        records.push_back(rec);
        Json row = aqua::report::to_json(rec);
        row["image"] = pred_file.filename().string();
        rows.push_back(std::move(row));
    }

    const auto agg = per_pixel ? aqua::metrics::aggregate_normals_pooled(sums)
                               : aqua::metrics::aggregate_normals(records);
    Json agg_row = aqua::report::to_json(agg);
    agg_row["image"] = "aggregate";
    rows.push_back(agg_row);

    Json out{{"rows", rows},
             {"run_config",
              {{"subcommand", "eval-normals"},
               {"pred_dir", pred_dir},
               {"gt_dir", gt_dir},
               {"mask_dir", mask_dir},
               {"format", format},
               {"per_pixel", per_pixel}}},
             {"version", aqua::report::kToolVersion}};
    if (report_path.empty())
        std::cout << (format == "csv" ? aqua::report::to_csv(rows) : out.dump(2) + "\n");
    else
        aqua::report::write_report(out, report_path, format);
    return 0;
}

int run_loss(const std::string& pred_path, const std::string& gt_path,
             const std::string& mask_path, const std::string& rho_name, int k, double alpha,
             bool grad_check) {
    const aqua::DepthGrid pred = aqua::read_depth_any(pred_path);
    const aqua::DepthGrid gt = aqua::read_depth_any(gt_path);
    const aqua::Mask mask =
        load_mask(mask_path.empty() ? fs::path() : fs::path(mask_path), gt.height, gt.width);
    const aqua::losses::Rho rho =
        rho_name == "l2" ? aqua::losses::Rho::L2 : aqua::losses::Rho::L1;

    const auto report = aqua::losses::total_loss(pred, gt, mask, rho, k, alpha);
    Json j = aqua::report::to_json(report);
    j["run_config"] = Json{{"subcommand", "loss"}, {"pred", pred_path},     {"gt", gt_path},
                           {"mask", mask_path},    {"rho", rho_name},       {"k", k},
                           {"alpha", alpha},       {"grad_check", grad_check}};
    if (grad_check)
        j["fd_max_rel_error"] = round9(aqua::losses::fd_check(pred, gt, mask, rho, k, alpha));
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_net_forward(const std::string& input_path, const std::string& config_path,
                    uint64_t seed, const std::string& out_dir, int threads) {
    const aqua::net::NetConfig cfg = config_path.empty()
                                         ? aqua::net::NetConfig{}
                                         : aqua::net::NetConfig::from_file(config_path);
    const aqua::ImageGrid input = aqua::read_png_rgb8(input_path);
    const aqua::net::NetWeights weights(cfg, seed);

    fs::create_directories(out_dir);
    aqua::net::ForwardStats stats;
    const auto pyramid = aqua::net::encoder_forward(input, cfg, weights, threads, &stats);
    const auto outputs = aqua::net::decoder_forward(pyramid, cfg, weights, threads);

    Json scales = Json::array();
    for (const auto& [scale, out] : outputs) {
        const std::string tag = "scale" + std::to_string(scale);
        aqua::write_png_gray16(fs::path(out_dir) / ("disparity_" + tag + ".png"), out.disparity);
        aqua::write_pfm(fs::path(out_dir) / ("disparity_" + tag + ".pfm"), out.disparity);
        aqua::write_normal_png(fs::path(out_dir) / ("normals_" + tag + ".png"), out.normals);

        float dmin = 1.0f, dmax = 0.0f;
        for (float v : out.disparity.data) {
            dmin = std::min(dmin, v);
            dmax = std::max(dmax, v);
        }
        double max_norm_dev = 0.0;
        for (size_t p = 0; p < out.normals.pixels(); ++p) {
            const double nx = out.normals.data[p * 3], ny = out.normals.data[p * 3 + 1],
                         nz = out.normals.data[p * 3 + 2];
            max_norm_dev = std::max(
                max_norm_dev, std::abs(std::sqrt(nx * nx + ny * ny + nz * nz) - 1.0));
        }
        scales.push_back(Json{{"scale", scale},
                              {"height", out.disparity.height},
                              {"width", out.disparity.width},
                              {"disparity_min", round9(dmin)},
                              {"disparity_max", round9(dmax)},
                              {"max_normal_norm_deviation", round9(max_norm_dev)}});
    }

    Json j{{"input", {{"height", input.height}, {"width", input.width}}},
           {"pyramid",
            {{"f1", {{"channels", pyramid.f1.c}, {"height", pyramid.f1.h}, {"width", pyramid.f1.w}}},
             {"f2", {{"channels", pyramid.f2.c}, {"height", pyramid.f2.h}, {"width", pyramid.f2.w}}},
             {"f3", {{"channels", pyramid.f3.c}, {"height", pyramid.f3.h}, {"width", pyramid.f3.w}}}}},
           {"scales", std::move(scales)},
           {"attention_row_sum_min", round9(stats.attn_row_sum_min)},
           {"attention_row_sum_max", round9(stats.attn_row_sum_max)},
           {"parameter_count", weights.parameter_count()},
           {"run_config",
            {{"subcommand", "net-forward"},
             {"input", input_path},
             {"config", config_path},
             {"seed", seed},
             {"threads", threads},
             {"out_dir", out_dir}}},
           {"version", aqua::report::kToolVersion}};
    aqua::report::write_report(j, fs::path(out_dir) / "net_report.json", "json");
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Depth/normal pseudo-label curation and evaluation toolkit"};
    app.require_subcommand(1);

    // curate
    auto* curate = app.add_subcommand("curate", "Select the best depth/normal pair per image");
    std::string rgb_dir, out_dir, weights_file, report_name = "dnesa_report.json";
    std::vector<std::string> model_dirs;
    int workers = 1;
    curate->add_option("--rgb-dir", rgb_dir)->required();
    curate->add_option("--model-dir", model_dirs, "Teacher model dir (repeatable, ordered)")
        ->required();
    curate->add_option("--out-dir", out_dir)->required();
    curate->add_option("--weights-file", weights_file);
    curate->add_option("--workers", workers)->check(CLI::PositiveNumber);
    curate->add_option("--report", report_name, "Report file name inside --out-dir");

    // score
    auto* score = app.add_subcommand("score", "Score a single depth/normal candidate");
    std::string s_rgb, s_depth, s_normal, s_weights;
    score->add_option("--rgb", s_rgb)->required();
    score->add_option("--depth", s_depth)->required();
    score->add_option("--normal", s_normal)->required();
    score->add_option("--weights-file", s_weights);

    // eval-depth / eval-normals
    auto* evald = app.add_subcommand("eval-depth", "Depth benchmark metrics");
    std::string ed_pred, ed_gt, ed_mask, ed_align = "lstsq", ed_format = "json", ed_report;
    bool ed_per_pixel = false;
    evald->add_option("--pred-dir", ed_pred)->required();
    evald->add_option("--gt-dir", ed_gt)->required();
    evald->add_option("--mask-dir", ed_mask);
    evald->add_option("--align", ed_align)->check(CLI::IsMember({"none", "lstsq", "median"}));
    evald->add_option("--format", ed_format)->check(CLI::IsMember({"json", "csv"}));
    evald->add_flag("--per-pixel", ed_per_pixel, "Pixel-pooled aggregation");
    evald->add_option("--report", ed_report, "Write to file instead of stdout");

    auto* evaln = app.add_subcommand("eval-normals", "Surface normal benchmark metrics");
    std::string en_pred, en_gt, en_mask, en_format = "json", en_report;
    bool en_per_pixel = false;
    evaln->add_option("--pred-dir", en_pred)->required();
    evaln->add_option("--gt-dir", en_gt)->required();
    evaln->add_option("--mask-dir", en_mask);
    evaln->add_option("--format", en_format)->check(CLI::IsMember({"json", "csv"}));
    evaln->add_flag("--per-pixel", en_per_pixel, "Pixel-pooled aggregation");
    evaln->add_option("--report", en_report, "Write to file instead of stdout");

    // loss
    auto* loss = app.add_subcommand("loss", "Training-loss report for a depth pair");
    std::string l_pred, l_gt, l_mask, l_rho = "l1";
    int l_k = 4;
    double l_alpha = 0.5;
    bool l_grad_check = false;
    loss->add_option("--pred", l_pred)->required();
    loss->add_option("--gt", l_gt)->required();
    loss->add_option("--mask", l_mask);
    loss->add_option("--rho", l_rho)->check(CLI::IsMember({"l1", "l2"}));
    loss->add_option("--k", l_k)->check(CLI::PositiveNumber);
    loss->add_option("--alpha", l_alpha);
    loss->add_flag("--grad-check", l_grad_check, "Run the finite-difference verifier");

    // net-forward
    auto* net = app.add_subcommand("net-forward", "Seeded forward pass of the hybrid network");
    std::string n_input, n_config, n_out = "net_out";
    uint64_t n_seed = 0;
    int n_threads = 1;
    net->add_option("--input", n_input)->required();
    net->add_option("--config", n_config, "Key=value config file");
    net->add_option("--seed", n_seed);
    net->add_option("--out-dir", n_out);
    net->add_option("--threads", n_threads)->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Collapse CLI11's per-error exit codes: 0 for --help, 1 for usage errors.
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*curate)
            return run_curate(rgb_dir, model_dirs, out_dir, weights_file, workers, report_name);
        if (*score) return run_score(s_rgb, s_depth, s_normal, s_weights);
        if (*evald)
            return run_eval_depth(ed_pred, ed_gt, ed_mask, ed_align, ed_format, ed_per_pixel,
                                  ed_report);
        if (*evaln)
            return run_eval_normals(en_pred, en_gt, en_mask, en_format, en_per_pixel, en_report);
        if (*loss) return run_loss(l_pred, l_gt, l_mask, l_rho, l_k, l_alpha, l_grad_check);
        if (*net) return run_net_forward(n_input, n_config, n_seed, n_out, n_threads);
    } catch (const aqua::DegenerateMathError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const aqua::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
