#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "aqua/grid.hpp"

namespace aqua::net {

/// Channel-major feature map (C x H x W).
struct Tensor {
    int c = 0, h = 0, w = 0;
    std::vector<float> v;

    Tensor() = default;
    Tensor(int c_, int h_, int w_, float fill = 0.0f)
        : c(c_), h(h_), w(w_), v(static_cast<size_t>(c_) * h_ * w_, fill) {}

    float& at(int ch, int y, int x) {
        return v[(static_cast<size_t>(ch) * h + y) * w + x];
    }
    float at(int ch, int y, int x) const {
        return v[(static_cast<size_t>(ch) * h + y) * w + x];
    }
};

struct NetConfig {
    std::array<int, 3> dims{32, 64, 128};
    std::array<int, 3> depth{3, 3, 6};
    std::array<int, 3> transformer_blocks{1, 1, 2};
    std::vector<std::vector<int>> dilations{{1, 2}, {1, 2}, {1, 2, 3, 1}};
    std::array<int, 3> decoder_channels{16, 32, 64};
    std::vector<int> scales{0, 1, 2};
    int head_dim = 32;  // heads = dim / head_dim, at least 1
    double mlp_ratio = 4.0;
    double eps = 1e-7;  // normal-normalization constant
    std::array<double, 3> input_mean{0.485, 0.456, 0.406};
    std::array<double, 3> input_std{0.229, 0.224, 0.225};
    bool use_skips = true;

    void validate() const;

    /// Plain key=value schema used by the CLI --config flag.
    static NetConfig from_file(const std::filesystem::path& path);
};

struct Conv2d {
    int in_ch = 0, out_ch = 0, kernel = 3, stride = 1, dilation = 1;
    std::vector<float> weight;  // [out][in][k][k]
    std::vector<float> bias;    // [out]
};

struct Linear {
    int in_dim = 0, out_dim = 0;
    std::vector<float> weight;  // [out][in]
    std::vector<float> bias;
};

struct LayerNorm {
    std::vector<float> gamma, beta;
};

struct TransformerWeights {
    LayerNorm ln1, ln2;
    Linear q, k, v, proj;
    Linear mlp1, mlp2;
};

struct StageWeights {
    std::vector<Conv2d> conv_blocks;             // dilated residual blocks
    std::vector<TransformerWeights> tf_blocks;   // trailing attention blocks
};

struct DecoderLevelWeights {
    Conv2d upconv1, upconv2;
    Conv2d disp_head, normal_head;  // present only for emitted scales
    bool has_heads = false;
};

/// All parameters, fully determined by (config, seed): two constructions
/// with equal inputs are bit-identical. Init is uniform(-1/sqrt(fan_in),
/// +1/sqrt(fan_in)) from a seeded generator.
struct NetWeights {
    NetWeights(const NetConfig& cfg, uint64_t seed);

    std::array<Conv2d, 4> stem;     // s2, s1, s1, concat+s2
    std::array<StageWeights, 3> stages;
    std::array<Conv2d, 2> transitions;  // between stages, stride 2
    std::array<DecoderLevelWeights, 3> decoder;  // index = level i
    uint64_t seed = 0;

    size_t parameter_count() const;
};

/// Hierarchical encoder output at strides 4, 8, 16.
struct FeaturePyramid {
    Tensor f1, f2, f3;
};

/// Softmax row-sum range observed across every attention block, for the
/// normalization invariant check.
struct ForwardStats {
    double attn_row_sum_min = 1.0;
    double attn_row_sum_max = 1.0;
    bool saw_attention = false;
};

/// Runs the three-stage hybrid encoder. H and W must be divisible by 16;
/// the input must have 3 channels. Pure given (config, weights, input);
/// `threads` only partitions the per-row work.
FeaturePyramid encoder_forward(const ImageGrid& x, const NetConfig& cfg, const NetWeights& w,
                               int threads = 1, ForwardStats* stats = nullptr);

struct ScaleOutput {
    ImageGrid disparity;  // single channel, sigmoid-bounded in (0,1)
    NormalGrid normals;   // unit vectors
};

/// Decodes the pyramid top-down, emitting disparity and unit normals at
/// each configured scale i with resolution input/(2^i).
std::map<int, ScaleOutput> decoder_forward(const FeaturePyramid& f, const NetConfig& cfg,
                                           const NetWeights& w, int threads = 1);

/// (k - 1) * d + 1.
int receptive_field(int kernel, int dilation);

/// Empirical check of the formula: impulse response span of one dilated
/// 3x3 conv with all-positive weights.
int measure_dilated_receptive_field(int dilation);

}  // namespace aqua::net
