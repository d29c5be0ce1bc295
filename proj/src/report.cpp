#include "aqua/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace aqua::report {

double round9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return std::strtod(buf, nullptr);
}

Json to_json(const dnesa::DepthQuality& q) {
    return Json{{"edge_consistency", round9(q.edge_consistency)},
                {"local_variance", round9(q.local_variance)},
                {"complexity", round9(q.complexity)},
                {"sharpness", round9(q.sharpness)}};
}

Json to_json(const dnesa::NormalQuality& q) {
    return Json{{"edge_consistency", round9(q.edge_consistency)},
                {"orientation_variance", round9(q.orientation_variance)},
                {"sharpness", round9(q.sharpness)}};
}

Json to_json(const dnesa::ScoreWeights& w) {
    return Json{{"depth",
                 {{"edge_consistency", w.depth_edge_consistency},
                  {"local_variance", w.depth_local_variance},
                  {"complexity", w.depth_complexity},
                  {"sharpness", w.depth_sharpness}}},
                {"normal",
                 {{"edge_consistency", w.normal_edge_consistency},
                  {"orientation_variance", w.normal_orientation_variance},
                  {"sharpness", w.normal_sharpness}}}};
}

Json to_json(const dnesa::CurationReport& r) {
    Json images = Json::array();
    for (const auto& img : r.images) {
        Json candidates = Json::array();
        for (const auto& c : img.candidates) {
            candidates.push_back(Json{{"model", c.model},
                                      {"depth_path", c.depth_path.string()},
                                      {"normal_path", c.normal_path.string()},
                                      {"depth_quality", to_json(c.depth_quality)},
                                      {"normal_quality", to_json(c.normal_quality)},
                                      {"depth_score", round9(c.scores.depth_score)},
                                      {"normal_score", round9(c.scores.normal_score)},
                                      {"combined_score", round9(c.scores.combined)}});
        }
        Json rec{{"rgb", img.rgb},
                 {"candidates", std::move(candidates)},
                 {"selected_model", img.selected_model},
                 {"skipped", img.skipped}};
        if (!img.warnings.empty()) rec["warnings"] = img.warnings;
        images.push_back(std::move(rec));
    }
    return Json{{"images", std::move(images)},
                {"weights", to_json(r.weights)},
                {"version", kToolVersion}};
}

Json to_json(const metrics::DepthMetricRecord& r) {
    return Json{{"abs_rel", round9(r.abs_rel)},   {"sq_rel", round9(r.sq_rel)},
                {"rmse", round9(r.rmse)},         {"log10", round9(r.log10)},
                {"delta1", round9(r.delta1)},     {"delta2", round9(r.delta2)},
                {"delta3", round9(r.delta3)},     {"pixel_count", r.pixel_count}};
}

Json to_json(const metrics::NormalMetricRecord& r) {
    return Json{{"mean_deg", round9(r.mean_deg)},     {"median_deg", round9(r.median_deg)},
                {"rms_deg", round9(r.rms_deg)},       {"acc_11_25", round9(r.acc_11_25)},
                {"acc_22_5", round9(r.acc_22_5)},     {"acc_30", round9(r.acc_30)},
                {"pixel_count", r.pixel_count}};
}

Json to_json(const losses::LossReport& r) {
    return Json{{"ssi", round9(r.ssi)},
                {"reg", round9(r.reg)},
                {"total", round9(r.total)},
                {"alignment", {{"s", round9(r.alignment.s)}, {"t", round9(r.alignment.t)}}},
                {"k", r.k},
                {"alpha", round9(r.alpha)}};
}

std::string to_csv(const Json& rows) {
    std::ostringstream out;
    if (!rows.is_array() || rows.empty()) return "";
    bool first = true;
    for (auto it = rows[0].begin(); it != rows[0].end(); ++it) {
        if (!first) out << ",";
        out << it.key();
        first = false;
    }
    out << "\n";
    for (const auto& row : rows) {
        first = true;
        for (auto it = row.begin(); it != row.end(); ++it) {
            if (!first) out << ",";
            if (it.value().is_string())
                out << it.value().get<std::string>();
            else
                out << it.value().dump();
            first = false;
        }
        out << "\n";
    }
    return out.str();
}

void write_report(const Json& report, const std::filesystem::path& path,
                  const std::string& format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write report: " + path.string());
    if (format == "csv") {
        out << to_csv(report.contains("rows") ? report["rows"] : report);
    } else {
        out << report.dump(2) << "\n";
    }
    if (!out) throw IoError("report write failed: " + path.string());
}

}  // namespace aqua::report
