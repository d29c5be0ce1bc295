#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aqua/grid.hpp"

namespace aqua::dnesa {

struct DepthQuality {
    double edge_consistency = 0.0;  // fraction of RGB edges matched, in [0,1]
    double local_variance = 0.0;
    double complexity = 0.0;
    double sharpness = 0.0;
};

struct NormalQuality {
    double edge_consistency = 0.0;
    double orientation_variance = 0.0;  // 1 - |mean normal|^2, in [0,1]
    double sharpness = 0.0;
};

struct ScoreWeights {
    double depth_edge_consistency = 0.3;
    double depth_local_variance = -0.2;
    double depth_complexity = 0.2;
    double depth_sharpness = 0.3;
    double normal_edge_consistency = 0.4;
    double normal_orientation_variance = 0.4;
    double normal_sharpness = 0.2;
};

struct Scores {
    double depth_score = 0.0;
    double normal_score = 0.0;
    double combined = 0.0;
};

// Percentile used for edge binarization and window used for local variance.
inline constexpr double kEdgePercentile = 90.0;
inline constexpr int kVarianceWindow = 11;

/// Depth quality metrics. The map is minmax-normalized first; edge
/// consistency compares percentile-90 gradient masks of the depth map and
/// the RGB luminance.
DepthQuality evaluate_depth_map(const DepthGrid& d, const ImageGrid& rgb);

/// Normal quality metrics. The edge map of the normal field is the sum of
/// the three channels' Sobel magnitudes; orientation variance is
/// (1/N) sum(1 - n_i . n_mean) with the un-renormalized mean vector.
NormalQuality evaluate_normal_map(const NormalGrid& n, const ImageGrid& rgb);

Scores combined_score(const DepthQuality& dq, const NormalQuality& nq,
                      const ScoreWeights& w = {});

/// Argmax of combined scores; ties break to the lowest index.
size_t find_best_pair(const std::vector<std::pair<DepthQuality, NormalQuality>>& candidates,
                      const ScoreWeights& w = {});

struct CandidateRecord {
    std::string model;
    std::filesystem::path depth_path;
    std::filesystem::path normal_path;
    DepthQuality depth_quality;
    NormalQuality normal_quality;
    Scores scores;
};

struct ImageRecord {
    std::string rgb;  // file name of the RGB image
    std::vector<CandidateRecord> candidates;
    std::string selected_model;  // empty when skipped
    bool skipped = false;
    std::vector<std::string> warnings;  // per-candidate load failures etc.
};

struct CurationReport {
    std::vector<ImageRecord> images;
    ScoreWeights weights;
};

/// One candidate pair per teacher model, discovered on disk.
struct CandidateFiles {
    std::string model;
    std::filesystem::path depth_path;   // empty if missing
    std::filesystem::path normal_path;  // empty if missing
    bool complete() const { return !depth_path.empty() && !normal_path.empty(); }
};

struct CandidateSet {
    std::filesystem::path rgb_path;
    std::vector<CandidateFiles> candidates;
};

/// Matches `name.png` against `name_depth.{pfm,png}` and `name_normal.png`
/// in each model dir; PFM wins when both depth extensions exist. Output is
/// sorted lexicographically by RGB file name.
std::vector<CandidateSet> discover_pairs(const std::filesystem::path& rgb_dir,
                                         const std::vector<std::filesystem::path>& model_dirs);

/// Full curation pass: evaluates every complete candidate of every RGB
/// image, selects the best pair, and copies the winning files (prefixed by
/// model name) into out_dir. Unreadable candidates are excluded and logged
/// in the per-image warnings; they never abort the run.
CurationReport curate(const std::filesystem::path& rgb_dir,
                      const std::vector<std::filesystem::path>& model_dirs,
                      const std::filesystem::path& out_dir,
                      const ScoreWeights& w = {}, int workers = 1);

}  // namespace aqua::dnesa
