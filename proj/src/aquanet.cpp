#include "aqua/aquanet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace aqua::net {

namespace {

void parallel_for(int n, int threads, const std::function<void(int, int)>& fn);

inline float relu(float x) { return x > 0.0f ? x : 0.0f; }

inline float gelu(float x) {
    return 0.5f * x * (1.0f + std::erf(x * 0.70710678f));
}

inline float sigmoid(float x) { return 1.0f / (1.0f + std::exp(-x)); }

// ---- weight init -----------------------------------------------------------

struct Init {
    std::mt19937_64 gen;
    explicit Init(uint64_t seed) : gen(seed) {}

    // Fixed 53-bit mapping; uniform_real_distribution is not portable
    // bit-for-bit across standard libraries.
    double uniform() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

    float sample(double bound) {
        return static_cast<float>((2.0 * uniform() - 1.0) * bound);
    }

    Conv2d conv(int in_ch, int out_ch, int kernel, int stride, int dilation) {
        Conv2d c;
        c.in_ch = in_ch;
        c.out_ch = out_ch;
        c.kernel = kernel;
        c.stride = stride;
        c.dilation = dilation;
        const double bound = 1.0 / std::sqrt(static_cast<double>(in_ch) * kernel * kernel);
        c.weight.resize(static_cast<size_t>(out_ch) * in_ch * kernel * kernel);
        for (auto& v : c.weight) v = sample(bound);
        c.bias.resize(out_ch);
        for (auto& v : c.bias) v = sample(bound);
        return c;
    }

    Linear linear(int in_dim, int out_dim) {
        Linear l;
        l.in_dim = in_dim;
        l.out_dim = out_dim;
        const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
        l.weight.resize(static_cast<size_t>(out_dim) * in_dim);
        for (auto& v : l.weight) v = sample(bound);
        l.bias.resize(out_dim);
        for (auto& v : l.bias) v = sample(bound);
        return l;
    }

    LayerNorm layer_norm(int dim) {
        LayerNorm ln;
        ln.gamma.assign(dim, 1.0f);
        ln.beta.assign(dim, 0.0f);
        return ln;
    }

    TransformerWeights transformer(int dim, double mlp_ratio) {
        TransformerWeights t;
        t.ln1 = layer_norm(dim);
        t.q = linear(dim, dim);
        t.k = linear(dim, dim);
        t.v = linear(dim, dim);
        t.proj = linear(dim, dim);
        t.ln2 = layer_norm(dim);
        const int hidden = std::max(1, static_cast<int>(dim * mlp_ratio));
        t.mlp1 = linear(dim, hidden);
        t.mlp2 = linear(hidden, dim);
        return t;
    }
};

// ---- primitives ------------------------------------------------------------

Tensor conv2d(const Tensor& x, const Conv2d& c, int threads) {
    const int pad = c.dilation * (c.kernel - 1) / 2;
    const int oh = (x.h + 2 * pad - ((c.kernel - 1) * c.dilation + 1)) / c.stride + 1;
    const int ow = (x.w + 2 * pad - ((c.kernel - 1) * c.dilation + 1)) / c.stride + 1;
    Tensor out(c.out_ch, oh, ow);

    parallel_for(c.out_ch * oh, threads, [&](int begin, int end) {
        for (int job = begin; job < end; ++job) {
            const int oc = job / oh;
            const int oy = job % oh;
            const float* wbase =
                c.weight.data() + static_cast<size_t>(oc) * c.in_ch * c.kernel * c.kernel;
            for (int ox = 0; ox < ow; ++ox) {
                double acc = c.bias[oc];
                for (int ic = 0; ic < c.in_ch; ++ic) {
                    for (int ky = 0; ky < c.kernel; ++ky) {
                        const int y = oy * c.stride - pad + ky * c.dilation;
                        if (y < 0 || y >= x.h) continue;
                        for (int kx = 0; kx < c.kernel; ++kx) {
                            const int xx = ox * c.stride - pad + kx * c.dilation;
                            if (xx < 0 || xx >= x.w) continue;
                            acc += static_cast<double>(x.at(ic, y, xx)) *
                                   wbase[(static_cast<size_t>(ic) * c.kernel + ky) * c.kernel + kx];
                        }
                    }
                }
                out.at(oc, oy, ox) = static_cast<float>(acc);
            }
        }
    });
    return out;
}

Tensor relu_inplace(Tensor t) {
    for (auto& v : t.v) v = relu(v);
    return t;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    if (a.h != b.h || a.w != b.w)
        throw DimensionError("aquanet: concat of mismatched spatial sizes");
    Tensor out(a.c + b.c, a.h, a.w);
    std::copy(a.v.begin(), a.v.end(), out.v.begin());
    std::copy(b.v.begin(), b.v.end(), out.v.begin() + a.v.size());
    return out;
}

Tensor upsample2x(const Tensor& x) {
    Tensor out(x.c, x.h * 2, x.w * 2);
    for (int c = 0; c < x.c; ++c)
        for (int y = 0; y < out.h; ++y)
            for (int xx = 0; xx < out.w; ++xx)
                out.at(c, y, xx) = x.at(c, y / 2, xx / 2);
    return out;
}

Tensor avg_pool_tensor(const Tensor& x, int factor) {
    const int oh = (x.h + factor - 1) / factor;
    const int ow = (x.w + factor - 1) / factor;
    Tensor out(x.c, oh, ow);
    for (int c = 0; c < x.c; ++c) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                const int y0 = oy * factor, y1 = std::min(y0 + factor, x.h);
                const int x0 = ox * factor, x1 = std::min(x0 + factor, x.w);
                double sum = 0.0;
                for (int y = y0; y < y1; ++y)
                    for (int xx = x0; xx < x1; ++xx) sum += x.at(c, y, xx);
                out.at(c, oy, ox) = static_cast<float>(sum / ((y1 - y0) * (x1 - x0)));
            }
        }
    }
    return out;
}

/// Dilated residual block: x + gelu(conv(x)).
Tensor conv_block(const Tensor& x, const Conv2d& c, int threads) {
    Tensor y = conv2d(x, c, threads);
    for (size_t i = 0; i < y.v.size(); ++i) y.v[i] = x.v[i] + gelu(y.v[i]);
    return y;
}

/// Pre-norm multi-head self-attention + MLP over flattened spatial tokens.
Tensor transformer_block(const Tensor& x, const TransformerWeights& tw, int head_dim,
                         int threads, ForwardStats* stats) {
    const int dim = x.c;
    const int tokens = x.h * x.w;
    const int heads = std::max(1, dim / head_dim);
    const int dh = dim / heads;

    // Token-major copy [T][C].
    std::vector<float> tok(static_cast<size_t>(tokens) * dim);
    for (int c = 0; c < dim; ++c)
        for (int t = 0; t < tokens; ++t)
            tok[static_cast<size_t>(t) * dim + c] = x.v[static_cast<size_t>(c) * tokens + t];

    auto layer_norm = [&](const std::vector<float>& in, const LayerNorm& ln) {
        std::vector<float> out(in.size());
        for (int t = 0; t < tokens; ++t) {
            const float* row = in.data() + static_cast<size_t>(t) * dim;
            double mean = 0.0;
            for (int c = 0; c < dim; ++c) mean += row[c];
            mean /= dim;
            double var = 0.0;
            for (int c = 0; c < dim; ++c) var += (row[c] - mean) * (row[c] - mean);
            var /= dim;
            const double inv = 1.0 / std::sqrt(var + 1e-5);
            float* orow = out.data() + static_cast<size_t>(t) * dim;
            for (int c = 0; c < dim; ++c)
                orow[c] = static_cast<float>((row[c] - mean) * inv * ln.gamma[c] + ln.beta[c]);
        }
        return out;
    };

    auto apply_linear = [&](const std::vector<float>& in, const Linear& l) {
        std::vector<float> out(static_cast<size_t>(tokens) * l.out_dim);
        parallel_for(tokens, threads, [&](int begin, int end) {
            for (int t = begin; t < end; ++t) {
                const float* row = in.data() + static_cast<size_t>(t) * l.in_dim;
                float* orow = out.data() + static_cast<size_t>(t) * l.out_dim;
                for (int o = 0; o < l.out_dim; ++o) {
                    double acc = l.bias[o];
                    const float* wrow = l.weight.data() + static_cast<size_t>(o) * l.in_dim;
                    for (int i = 0; i < l.in_dim; ++i) acc += static_cast<double>(row[i]) * wrow[i];
                    orow[o] = static_cast<float>(acc);
                }
            }
        });
        return out;
    };

    // Attention.
    const std::vector<float> normed = layer_norm(tok, tw.ln1);
    const std::vector<float> q = apply_linear(normed, tw.q);
    const std::vector<float> k = apply_linear(normed, tw.k);
    const std::vector<float> v = apply_linear(normed, tw.v);

    std::vector<float> attn_out(static_cast<size_t>(tokens) * dim, 0.0f);
    const float scale = 1.0f / std::sqrt(static_cast<float>(dh));

    std::mutex stats_mutex;
    double rs_min = 1.0, rs_max = 1.0;
    bool saw = false;

    parallel_for(tokens, threads, [&](int begin, int end) {
        std::vector<float> scores(tokens);
        double local_min = 2.0, local_max = -1.0;
        for (int t = begin; t < end; ++t) {
            for (int head = 0; head < heads; ++head) {
                const int off = head * dh;
                float maxv = -std::numeric_limits<float>::infinity();
                for (int u = 0; u < tokens; ++u) {
                    double dot = 0.0;
                    const float* qr = q.data() + static_cast<size_t>(t) * dim + off;
                    const float* kr = k.data() + static_cast<size_t>(u) * dim + off;
                    for (int c = 0; c < dh; ++c) dot += static_cast<double>(qr[c]) * kr[c];
                    scores[u] = static_cast<float>(dot) * scale;
                    maxv = std::max(maxv, scores[u]);
                }
                double total = 0.0;
                for (int u = 0; u < tokens; ++u) {
                    scores[u] = std::exp(scores[u] - maxv);
                    total += scores[u];
                }
                double prob_sum = 0.0;
                float* orow = attn_out.data() + static_cast<size_t>(t) * dim + off;
                for (int u = 0; u < tokens; ++u) {
                    const float p = static_cast<float>(scores[u] / total);
                    prob_sum += p;
                    const float* vr = v.data() + static_cast<size_t>(u) * dim + off;
                    for (int c = 0; c < dh; ++c) orow[c] += p * vr[c];
                }
                local_min = std::min(local_min, prob_sum);
                local_max = std::max(local_max, prob_sum);
            }
        }
        if (stats && end > begin) {
            std::lock_guard<std::mutex> lock(stats_mutex);
            rs_min = std::min(rs_min, local_min);
            rs_max = std::max(rs_max, local_max);
            saw = true;
        }
    });
    if (stats && saw) {
        stats->attn_row_sum_min = std::min(stats->attn_row_sum_min, rs_min);
        stats->attn_row_sum_max = std::max(stats->attn_row_sum_max, rs_max);
        stats->saw_attention = true;
    }

    std::vector<float> projected = apply_linear(attn_out, tw.proj);
    for (size_t i = 0; i < tok.size(); ++i) tok[i] += projected[i];

    // MLP.
    std::vector<float> normed2 = layer_norm(tok, tw.ln2);
    std::vector<float> hidden = apply_linear(normed2, tw.mlp1);
    for (auto& h : hidden) h = gelu(h);
    std::vector<float> mlp_out = apply_linear(hidden, tw.mlp2);
    for (size_t i = 0; i < tok.size(); ++i) tok[i] += mlp_out[i];

    Tensor out(x.c, x.h, x.w);
    for (int c = 0; c < dim; ++c)
        for (int t = 0; t < tokens; ++t)
            out.v[static_cast<size_t>(c) * tokens + t] = tok[static_cast<size_t>(t) * dim + c];
    return out;
}

void parallel_for(int n, int threads, const std::function<void(int, int)>& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1 || n == 0) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    const int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int begin = t * chunk;
        if (begin >= n) break;
        pool.emplace_back(fn, begin, std::min(begin + chunk, n));
    }
    for (auto& th : pool) th.join();
}

}  // namespace

// ---- config ----------------------------------------------------------------

void NetConfig::validate() const {
    for (int i = 0; i < 3; ++i) {
        if (dims[i] < 1 || depth[i] < 1 || decoder_channels[i] < 1)
            throw ParameterError("NetConfig: dims/depth/decoder_channels must be positive");
        if (transformer_blocks[i] < 0 || transformer_blocks[i] > depth[i])
            throw ParameterError("NetConfig: transformer_blocks[i] must be in [0, depth[i]]");
    }
    if (dilations.size() != 3)
        throw ParameterError("NetConfig: dilations must list 3 stages");
    for (int i = 0; i < 3; ++i) {
        if (static_cast<int>(dilations[i].size()) != depth[i] - transformer_blocks[i])
            throw ParameterError(
                "NetConfig: dilations[i] must have depth[i] - transformer_blocks[i] entries");
        for (int d : dilations[i])
            if (d < 1) throw ParameterError("NetConfig: dilation factors must be >= 1");
    }
    if (scales.empty()) throw ParameterError("NetConfig: scales must be non-empty");
    for (int s : scales)
        if (s < 0 || s > 2) throw ParameterError("NetConfig: scales must lie in {0,1,2}");
    if (head_dim < 1) throw ParameterError("NetConfig: head_dim must be >= 1");
    if (mlp_ratio <= 0.0) throw ParameterError("NetConfig: mlp_ratio must be positive");
    for (double s : input_std)
        if (s <= 0.0) throw ParameterError("NetConfig: input_std must be positive");
}

namespace {

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stoi(tok));
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stod(tok));
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

NetConfig NetConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path.string());

    NetConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("config " + path.string() + ":" + std::to_string(lineno) +
                              ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "dims" || key == "depth" || key == "transformer_blocks" ||
                key == "decoder_channels") {
                const auto v = parse_int_list(value);
                if (v.size() != 3)
                    throw FormatError("config: " + key + " needs exactly 3 values");
                auto& target = key == "dims"                 ? cfg.dims
                               : key == "depth"              ? cfg.depth
                               : key == "transformer_blocks" ? cfg.transformer_blocks
                                                             : cfg.decoder_channels;
                std::copy(v.begin(), v.end(), target.begin());
            } else if (key == "dilations") {
                // Stages separated by ';', factors by ','.
                cfg.dilations.clear();
                std::stringstream ss(value);
                std::string stage;
                while (std::getline(ss, stage, ';'))
                    cfg.dilations.push_back(parse_int_list(stage));
            } else if (key == "scales") {
                cfg.scales = parse_int_list(value);
            } else if (key == "head_dim") {
                cfg.head_dim = std::stoi(value);
            } else if (key == "mlp_ratio") {
                cfg.mlp_ratio = std::stod(value);
            } else if (key == "eps") {
                cfg.eps = std::stod(value);
            } else if (key == "input_mean" || key == "input_std") {
                const auto v = parse_double_list(value);
                if (v.size() != 3)
                    throw FormatError("config: " + key + " needs exactly 3 values");
                auto& target = key == "input_mean" ? cfg.input_mean : cfg.input_std;
                std::copy(v.begin(), v.end(), target.begin());
            } else if (key == "use_skips") {
                cfg.use_skips = (value == "true" || value == "1");
            } else {
                throw FormatError("config: unknown key '" + key + "'");
            }
        } catch (const std::invalid_argument&) {
            throw FormatError("config " + path.string() + ":" + std::to_string(lineno) +
                              ": malformed value for " + key);
        }
    }
    cfg.validate();
    return cfg;
}

// ---- weights ---------------------------------------------------------------

NetWeights::NetWeights(const NetConfig& cfg, uint64_t seed_) : seed(seed_) {
    cfg.validate();
    Init init(seed_);

    stem[0] = init.conv(3, cfg.dims[0], 3, 2, 1);
    stem[1] = init.conv(cfg.dims[0], cfg.dims[0], 3, 1, 1);
    stem[2] = init.conv(cfg.dims[0], cfg.dims[0], 3, 1, 1);
    stem[3] = init.conv(cfg.dims[0] + 3, cfg.dims[0], 3, 2, 1);

    for (int i = 0; i < 3; ++i) {
        StageWeights& st = stages[i];
        const int n_conv = cfg.depth[i] - cfg.transformer_blocks[i];
        for (int j = 0; j < n_conv; ++j)
            st.conv_blocks.push_back(
                init.conv(cfg.dims[i], cfg.dims[i], 3, 1, cfg.dilations[i][j]));
        for (int j = 0; j < cfg.transformer_blocks[i]; ++j)
            st.tf_blocks.push_back(init.transformer(cfg.dims[i], cfg.mlp_ratio));
        if (i < 2) transitions[i] = init.conv(cfg.dims[i] + 3, cfg.dims[i + 1], 3, 2, 1);
    }

    for (int i = 2; i >= 0; --i) {
        DecoderLevelWeights& lvl = decoder[i];
        const int in1 = (i == 2) ? cfg.dims[2] : cfg.decoder_channels[i + 1];
        lvl.upconv1 = init.conv(in1, cfg.decoder_channels[i], 3, 1, 1);
        const int in2 = cfg.decoder_channels[i] +
                        ((cfg.use_skips && i > 0) ? cfg.dims[i - 1] : 0);
        lvl.upconv2 = init.conv(in2, cfg.decoder_channels[i], 3, 1, 1);
        if (std::find(cfg.scales.begin(), cfg.scales.end(), i) != cfg.scales.end()) {
            lvl.disp_head = init.conv(cfg.decoder_channels[i], 1, 3, 1, 1);
            lvl.normal_head = init.conv(cfg.decoder_channels[i], 3, 3, 1, 1);
            lvl.has_heads = true;
        }
    }
}

size_t NetWeights::parameter_count() const {
    size_t n = 0;
    auto add_conv = [&n](const Conv2d& c) { n += c.weight.size() + c.bias.size(); };
    auto add_linear = [&n](const Linear& l) { n += l.weight.size() + l.bias.size(); };
    for (const auto& c : stem) add_conv(c);
    for (const auto& st : stages) {
        for (const auto& c : st.conv_blocks) add_conv(c);
        for (const auto& t : st.tf_blocks) {
            n += t.ln1.gamma.size() + t.ln1.beta.size() + t.ln2.gamma.size() + t.ln2.beta.size();
            add_linear(t.q);
            add_linear(t.k);
            add_linear(t.v);
            add_linear(t.proj);
            add_linear(t.mlp1);
            add_linear(t.mlp2);
        }
    }
    for (const auto& c : transitions) add_conv(c);
    for (const auto& lvl : decoder) {
        add_conv(lvl.upconv1);
        add_conv(lvl.upconv2);
        if (lvl.has_heads) {
            add_conv(lvl.disp_head);
            add_conv(lvl.normal_head);
        }
    }
    return n;
}

// ---- forward ---------------------------------------------------------------

FeaturePyramid encoder_forward(const ImageGrid& x, const NetConfig& cfg, const NetWeights& w,
                               int threads, ForwardStats* stats) {
    cfg.validate();
    if (x.channels != 3) throw DimensionError("encoder_forward: input must have 3 channels");
    if (x.height % 16 != 0 || x.width % 16 != 0)
        throw DimensionError("encoder_forward: H and W must be divisible by 16");
    if (threads < 1) throw ParameterError("encoder_forward: threads must be >= 1");

    // (x - mu) / sigma, into channel-major layout.
    Tensor xn(3, x.height, x.width);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < x.height; ++y)
            for (int xx = 0; xx < x.width; ++xx)
                xn.at(c, y, xx) = static_cast<float>(
                    (x.at(y, xx, c) - cfg.input_mean[c]) / cfg.input_std[c]);

    // Four pooled levels at 1/2 .. 1/16; the last is computed per the
    // architecture but consumed nowhere.
    std::array<Tensor, 4> pooled;
    for (int i = 0; i < 4; ++i) pooled[i] = avg_pool_tensor(xn, 1 << (i + 1));

    // Stem: stride 2, two stride-1 convs, concat with the 1/2 pooled input,
    // stride 2 again. Net stride 4.
    Tensor t = relu_inplace(conv2d(xn, w.stem[0], threads));
    t = relu_inplace(conv2d(t, w.stem[1], threads));
    t = relu_inplace(conv2d(t, w.stem[2], threads));
    t = relu_inplace(conv2d(concat_channels(t, pooled[0]), w.stem[3], threads));

    FeaturePyramid out;
    for (int i = 0; i < 3; ++i) {
        const StageWeights& st = w.stages[i];
        for (const auto& cb : st.conv_blocks) t = conv_block(t, cb, threads);
        for (const auto& tb : st.tf_blocks)
            t = transformer_block(t, tb, cfg.head_dim, threads, stats);
        (i == 0 ? out.f1 : i == 1 ? out.f2 : out.f3) = t;
        if (i < 2)
            t = relu_inplace(
                conv2d(concat_channels(t, pooled[i + 1]), w.transitions[i], threads));
    }
    return out;
}

std::map<int, ScaleOutput> decoder_forward(const FeaturePyramid& f, const NetConfig& cfg,
                                           const NetWeights& w, int threads) {
    cfg.validate();
    if (f.f3.c != cfg.dims[2] || f.f2.c != cfg.dims[1] || f.f1.c != cfg.dims[0])
        throw DimensionError("decoder_forward: pyramid does not match config");
    if (threads < 1) throw ParameterError("decoder_forward: threads must be >= 1");

    std::map<int, ScaleOutput> outputs;
    Tensor x = f.f3;
    for (int i = 2; i >= 0; --i) {
        const DecoderLevelWeights& lvl = w.decoder[i];
        x = upsample2x(relu_inplace(conv2d(x, lvl.upconv1, threads)));
        if (cfg.use_skips && i > 0) x = concat_channels(x, i == 2 ? f.f2 : f.f1);
        x = relu_inplace(conv2d(x, lvl.upconv2, threads));

        if (!lvl.has_heads) continue;

        Tensor disp = upsample2x(conv2d(x, lvl.disp_head, threads));
        ImageGrid disparity(disp.h, disp.w, 1);
        for (int y = 0; y < disp.h; ++y)
            for (int xx = 0; xx < disp.w; ++xx)
                disparity.at(y, xx) = sigmoid(disp.at(0, y, xx));

        Tensor nrm = upsample2x(conv2d(x, lvl.normal_head, threads));
        NormalGrid normals(nrm.h, nrm.w, 3);
        for (int y = 0; y < nrm.h; ++y) {
            for (int xx = 0; xx < nrm.w; ++xx) {
                const double nx = nrm.at(0, y, xx), ny = nrm.at(1, y, xx), nz = nrm.at(2, y, xx);
                const double norm = std::sqrt(nx * nx + ny * ny + nz * nz);
                if (norm <= cfg.eps) {
                    // Degenerate raw vector: fall back to the canonical up
                    // direction rather than amplifying noise.
                    normals.at(y, xx, 0) = 0.0f;
                    normals.at(y, xx, 1) = 0.0f;
                    normals.at(y, xx, 2) = 1.0f;
                } else {
                    normals.at(y, xx, 0) = static_cast<float>(nx / norm);
                    normals.at(y, xx, 1) = static_cast<float>(ny / norm);
                    normals.at(y, xx, 2) = static_cast<float>(nz / norm);
                }
            }
        }
        outputs[i] = ScaleOutput{std::move(disparity), std::move(normals)};
    }
    return outputs;
}

int receptive_field(int kernel, int dilation) {
    if (kernel < 1 || dilation < 1)
        throw ParameterError("receptive_field: kernel and dilation must be >= 1");
    return (kernel - 1) * dilation + 1;
}

int measure_dilated_receptive_field(int dilation) {
    if (dilation < 1) throw ParameterError("measure_dilated_receptive_field: dilation >= 1");
    const int size = 4 * dilation + 9;
    Tensor impulse(1, size, size);
    impulse.at(0, size / 2, size / 2) = 1.0f;

    Conv2d c;
    c.in_ch = 1;
    c.out_ch = 1;
    c.kernel = 3;
    c.stride = 1;
    c.dilation = dilation;
    c.weight.assign(9, 1.0f);
    c.bias.assign(1, 0.0f);

    const Tensor resp = conv2d(impulse, c, 1);
    int first = -1, last = -1;
    const int row = size / 2;
    for (int x = 0; x < size; ++x) {
        if (resp.at(0, row, x) != 0.0f) {
            if (first < 0) first = x;
            last = x;
        }
    }
    return first < 0 ? 0 : last - first + 1;
}

}  // namespace aqua::net
