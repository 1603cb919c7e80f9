#include "sassseg/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "sassseg/rng.hpp"

namespace sass {

namespace {

// ---- convolution (zero padding, stride 1, "same" output) -------------------

void conv_forward(const ConvLayer& L, const FeatureMap& in, FeatureMap& out) {
    const int H = in.height;
    const int W = in.width;
    const int pad = L.kernel / 2;
    out = FeatureMap(L.out_ch, H, W);
    for (int o = 0; o < L.out_ch; ++o) {
        double* dst_plane = out.channel(o);
        std::fill(dst_plane, dst_plane + out.plane(), L.bias[static_cast<std::size_t>(o)]);
        for (int i = 0; i < L.in_ch; ++i) {
            const double* src_plane = in.channel(i);
            for (int ky = 0; ky < L.kernel; ++ky) {
                const int dy = ky - pad;
                const int y0 = std::max(0, -dy);
                const int y1 = std::min(H, H - dy);
                for (int kx = 0; kx < L.kernel; ++kx) {
                    const int dx = kx - pad;
                    const int x0 = std::max(0, -dx);
                    const int x1 = std::min(W, W - dx);
                    const double w =
                        L.weight[((static_cast<std::size_t>(o) * L.in_ch + i) * L.kernel + ky) * L.kernel + kx];
                    for (int y = y0; y < y1; ++y) {
                        const double* src = src_plane + static_cast<std::size_t>(y + dy) * W + dx;
                        double* dst = dst_plane + static_cast<std::size_t>(y) * W;
                        for (int x = x0; x < x1; ++x) dst[x] += w * src[x];
                    }
                }
            }
        }
    }
}

// Accumulates dW, db into `grad`; accumulates dIn into `din` when non-null.
void conv_backward(const ConvLayer& L, const FeatureMap& in, const FeatureMap& dout, ConvLayer& grad,
                   FeatureMap* din) {
    const int H = in.height;
    const int W = in.width;
    const int pad = L.kernel / 2;
    for (int o = 0; o < L.out_ch; ++o) {
        const double* g_plane = dout.channel(o);
        double bsum = 0.0;
        for (std::size_t k = 0; k < dout.plane(); ++k) bsum += g_plane[k];
        grad.bias[static_cast<std::size_t>(o)] += bsum;
        for (int i = 0; i < L.in_ch; ++i) {
            const double* src_plane = in.channel(i);
            double* din_plane = din ? din->channel(i) : nullptr;
            for (int ky = 0; ky < L.kernel; ++ky) {
                const int dy = ky - pad;
                const int y0 = std::max(0, -dy);
                const int y1 = std::min(H, H - dy);
                for (int kx = 0; kx < L.kernel; ++kx) {
                    const int dx = kx - pad;
                    const int x0 = std::max(0, -dx);
                    const int x1 = std::min(W, W - dx);
                    const std::size_t widx =
                        ((static_cast<std::size_t>(o) * L.in_ch + i) * L.kernel + ky) * L.kernel + kx;
                    const double w = L.weight[widx];
                    double acc = 0.0;
                    for (int y = y0; y < y1; ++y) {
                        const double* src = src_plane + static_cast<std::size_t>(y + dy) * W + dx;
                        const double* g = g_plane + static_cast<std::size_t>(y) * W;
                        for (int x = x0; x < x1; ++x) acc += g[x] * src[x];
                        if (din_plane) {
                            double* d = din_plane + static_cast<std::size_t>(y + dy) * W + dx;
                            for (int x = x0; x < x1; ++x) d[x] += w * g[x];
                        }
                    }
                    grad.weight[widx] += acc;
                }
            }
        }
    }
}

void relu_inplace(FeatureMap& f) {
    for (auto& v : f.data) v = v > 0.0 ? v : 0.0;
}

// Zeroes gradient where the forward activation was clipped.
void relu_backward(const FeatureMap& activation, FeatureMap& grad) {
    for (std::size_t k = 0; k < grad.data.size(); ++k)
        if (!(activation.data[k] > 0.0)) grad.data[k] = 0.0;
}

// ---- 2x2 max pooling --------------------------------------------------------

void maxpool_forward(const FeatureMap& in, FeatureMap& out, std::vector<std::uint32_t>& argmax) {
    const int Ho = in.height / 2;
    const int Wo = in.width / 2;
    out = FeatureMap(in.channels, Ho, Wo);
    argmax.assign(out.data.size(), 0);
    for (int c = 0; c < in.channels; ++c) {
        const double* src = in.channel(c);
        double* dst = out.channel(c);
        std::uint32_t* idx = argmax.data() + static_cast<std::size_t>(c) * out.plane();
        for (int y = 0; y < Ho; ++y) {
            for (int x = 0; x < Wo; ++x) {
                // scan order (0,0) (0,1) (1,0) (1,1); strict '>' keeps the first maximum
                auto best = static_cast<std::uint32_t>((2 * y) * in.width + 2 * x);
                double best_v = src[best];
                for (int k = 1; k < 4; ++k) {
                    const auto cand = static_cast<std::uint32_t>((2 * y + k / 2) * in.width + 2 * x + k % 2);
                    if (src[cand] > best_v) {
                        best_v = src[cand];
                        best = cand;
                    }
                }
                dst[static_cast<std::size_t>(y) * Wo + x] = best_v;
                idx[static_cast<std::size_t>(y) * Wo + x] = best;
            }
        }
    }
}

void maxpool_backward(const FeatureMap& dout, const std::vector<std::uint32_t>& argmax, FeatureMap& din) {
    for (int c = 0; c < dout.channels; ++c) {
        const double* g = dout.channel(c);
        const std::uint32_t* idx = argmax.data() + static_cast<std::size_t>(c) * dout.plane();
        double* d = din.channel(c);
        for (std::size_t k = 0; k < dout.plane(); ++k) d[idx[k]] += g[k];
    }
}

// ---- bilinear x2 upsampling, half-pixel centres ------------------------------

struct Tap {
    int lo;
    int hi;
    double w_hi;
};

std::vector<Tap> upsample_taps(int in_size) {
    const int out_size = 2 * in_size;
    std::vector<Tap> taps(static_cast<std::size_t>(out_size));
    for (int o = 0; o < out_size; ++o) {
        const double src = std::clamp((o + 0.5) / 2.0 - 0.5, 0.0, static_cast<double>(in_size - 1));
        const int lo = static_cast<int>(std::floor(src));
        taps[static_cast<std::size_t>(o)] = {lo, std::min(lo + 1, in_size - 1), src - lo};
    }
    return taps;
}

// Writes the upsampled channels of `in` into channels [offset, offset+C) of `out`.
void upsample_forward(const FeatureMap& in, FeatureMap& out, int offset) {
    const auto ty = upsample_taps(in.height);
    const auto tx = upsample_taps(in.width);
    const int Wo = out.width;
    for (int c = 0; c < in.channels; ++c) {
        const double* src = in.channel(c);
        double* dst = out.channel(offset + c);
        for (int y = 0; y < out.height; ++y) {
            const Tap& a = ty[static_cast<std::size_t>(y)];
            const double* r0 = src + static_cast<std::size_t>(a.lo) * in.width;
            const double* r1 = src + static_cast<std::size_t>(a.hi) * in.width;
            for (int x = 0; x < Wo; ++x) {
                const Tap& b = tx[static_cast<std::size_t>(x)];
                const double top = r0[b.lo] * (1.0 - b.w_hi) + r0[b.hi] * b.w_hi;
                const double bot = r1[b.lo] * (1.0 - b.w_hi) + r1[b.hi] * b.w_hi;
                dst[static_cast<std::size_t>(y) * Wo + x] = top * (1.0 - a.w_hi) + bot * a.w_hi;
            }
        }
    }
}

// Transpose of upsample_forward: scatters channels [offset, offset+C) of dout.
void upsample_backward(const FeatureMap& dout, int offset, FeatureMap& din) {
    const auto ty = upsample_taps(din.height);
    const auto tx = upsample_taps(din.width);
    const int Wo = dout.width;
    for (int c = 0; c < din.channels; ++c) {
        const double* g = dout.channel(offset + c);
        double* d = din.channel(c);
        for (int y = 0; y < dout.height; ++y) {
            const Tap& a = ty[static_cast<std::size_t>(y)];
            double* r0 = d + static_cast<std::size_t>(a.lo) * din.width;
            double* r1 = d + static_cast<std::size_t>(a.hi) * din.width;
            for (int x = 0; x < Wo; ++x) {
                const Tap& b = tx[static_cast<std::size_t>(x)];
                const double gv = g[static_cast<std::size_t>(y) * Wo + x];
                const double gt = gv * (1.0 - a.w_hi);
                const double gb = gv * a.w_hi;
                r0[b.lo] += gt * (1.0 - b.w_hi);
                r0[b.hi] += gt * b.w_hi;
                r1[b.lo] += gb * (1.0 - b.w_hi);
                r1[b.hi] += gb * b.w_hi;
            }
        }
    }
}

// Overflow-free logistic, kept strictly inside (0,1).
double sigmoid(double z) {
    double s;
    if (z >= 0.0) {
        s = 1.0 / (1.0 + std::exp(-z));
    } else {
        const double e = std::exp(z);
        s = e / (1.0 + e);
    }
    constexpr double lo = std::numeric_limits<double>::min();
    constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
    return std::clamp(s, lo, hi);
}

// Copies channels [offset, offset+C) of src into a standalone map.
FeatureMap slice_channels(const FeatureMap& src, int offset, int count) {
    FeatureMap out(count, src.height, src.width);
    std::copy(src.channel(offset), src.channel(offset) + out.data.size(), out.data.begin());
    return out;
}

}  // namespace

FeatureMap normalize(const GrayImage& img) {
    FeatureMap f(1, img.height, img.width);
    for (std::size_t i = 0; i < img.data.size(); ++i) f.data[i] = img.data[i] / 255.0;
    return f;
}

ConvLayer::ConvLayer(int in, int out, int k)
    : in_ch(in), out_ch(out), kernel(k),
      weight(static_cast<std::size_t>(in) * static_cast<std::size_t>(out) * static_cast<std::size_t>(k * k), 0.0),
      bias(static_cast<std::size_t>(out), 0.0) {}

std::size_t SegmenterParams::size() const noexcept {
    std::size_t n = 0;
    for (const auto* l : layers()) n += l->param_count();
    return n;
}

std::vector<double> SegmenterParams::flatten() const {
    std::vector<double> flat;
    flat.reserve(size());
    for (const auto* l : layers()) {
        flat.insert(flat.end(), l->weight.begin(), l->weight.end());
        flat.insert(flat.end(), l->bias.begin(), l->bias.end());
    }
    return flat;
}

void SegmenterParams::unflatten(std::span<const double> flat) {
    if (flat.size() != size()) {
        throw std::invalid_argument("flat parameter vector has " + std::to_string(flat.size()) + " entries, expected " +
                                    std::to_string(size()));
    }
    std::size_t pos = 0;
    for (auto* l : layers()) {
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), l->weight.size(), l->weight.begin());
        pos += l->weight.size();
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), l->bias.size(), l->bias.begin());
        pos += l->bias.size();
    }
}

SegmenterParams SegmenterParams::from_flat(std::span<const double> flat) {
    SegmenterParams p;
    p.unflatten(flat);
    return p;
}

SegmenterParams& SegmenterParams::operator+=(const SegmenterParams& other) {
    auto mine = layers();
    auto theirs = other.layers();
    for (std::size_t l = 0; l < mine.size(); ++l) {
        for (std::size_t k = 0; k < mine[l]->weight.size(); ++k) mine[l]->weight[k] += theirs[l]->weight[k];
        for (std::size_t k = 0; k < mine[l]->bias.size(); ++k) mine[l]->bias[k] += theirs[l]->bias[k];
    }
    return *this;
}

SegmenterParams init_params(std::uint64_t seed) {
    SegmenterParams p;
    Rng rng(derive_seed({seed}));
    for (auto* l : p.layers()) {
        const double stddev = std::sqrt(2.0 / l->fan_in());
        for (auto& w : l->weight) w = rng.normal(0.0, stddev);
    }
    return p;
}

SampleCache forward_sample(const SegmenterParams& params, const FeatureMap& input) {
    if (input.channels != 1) throw std::invalid_argument("segmenter expects single-channel input");
    if (input.height < 2 || input.width < 2 || input.height % 2 != 0 || input.width % 2 != 0) {
        throw std::invalid_argument("segmenter input dimensions must be even (got " + std::to_string(input.width) +
                                    "x" + std::to_string(input.height) + ")");
    }
    SampleCache c;
    c.input = input;
    const int H = input.height;
    const int W = input.width;

    FeatureMap act1;
    conv_forward(params.conv1, input, act1);
    relu_inplace(act1);
    maxpool_forward(act1, c.pooled, c.argmax);

    conv_forward(params.conv2, c.pooled, c.act2);
    relu_inplace(c.act2);

    c.concat = FeatureMap(params.conv1.out_ch + params.conv2.out_ch, H, W);
    std::copy(act1.data.begin(), act1.data.end(), c.concat.data.begin());
    upsample_forward(c.act2, c.concat, params.conv1.out_ch);

    conv_forward(params.conv3, c.concat, c.act3);
    relu_inplace(c.act3);

    FeatureMap logits;
    conv_forward(params.conv4, c.act3, logits);
    c.prob = ProbMask(W, H);
    for (std::size_t k = 0; k < logits.data.size(); ++k) c.prob.data[k] = sigmoid(logits.data[k]);
    return c;
}

ForwardResult forward(const SegmenterParams& params, std::span<const FeatureMap> batch) {
    ForwardResult r;
    r.cache.samples.reserve(batch.size());
    r.probs.reserve(batch.size());
    for (const auto& x : batch) {
        r.cache.samples.push_back(forward_sample(params, x));
        r.probs.push_back(r.cache.samples.back().prob);
    }
    return r;
}

ProbMask predict(const SegmenterParams& params, const FeatureMap& input) {
    return forward_sample(params, input).prob;
}

SegmenterParams backward_sample(const SegmenterParams& params, const SampleCache& cache,
                                std::span<const double> dloss_dprob) {
    if (dloss_dprob.size() != cache.prob.size()) {
        throw std::invalid_argument("gradient length does not match the cached prediction");
    }
    SegmenterParams grad;  // zero-initialised, same shapes
    const int H = cache.input.height;
    const int W = cache.input.width;

    FeatureMap dlogits(1, H, W);
    for (std::size_t k = 0; k < dlogits.data.size(); ++k) {
        const double p = cache.prob.data[k];
        dlogits.data[k] = dloss_dprob[k] * p * (1.0 - p);
    }

    FeatureMap dact3(params.conv3.out_ch, H, W);
    conv_backward(params.conv4, cache.act3, dlogits, grad.conv4, &dact3);
    relu_backward(cache.act3, dact3);

    FeatureMap dconcat(cache.concat.channels, H, W);
    conv_backward(params.conv3, cache.concat, dact3, grad.conv3, &dconcat);

    FeatureMap dact2(params.conv2.out_ch, H / 2, W / 2);
    upsample_backward(dconcat, params.conv1.out_ch, dact2);
    relu_backward(cache.act2, dact2);

    FeatureMap dpooled(params.conv1.out_ch, H / 2, W / 2);
    conv_backward(params.conv2, cache.pooled, dact2, grad.conv2, &dpooled);

    // Skip branch gradient plus the pooled branch routed to its argmax.
    FeatureMap dact1 = slice_channels(dconcat, 0, params.conv1.out_ch);
    maxpool_backward(dpooled, cache.argmax, dact1);
    relu_backward(slice_channels(cache.concat, 0, params.conv1.out_ch), dact1);

    conv_backward(params.conv1, cache.input, dact1, grad.conv1, nullptr);
    return grad;
}

std::vector<double> backward(const SegmenterParams& params, const ForwardCache& cache,
                             std::span<const std::vector<double>> dloss_dprob) {
    if (dloss_dprob.size() != cache.samples.size()) {
        throw std::invalid_argument("batch size of gradients does not match the forward cache");
    }
    SegmenterParams total;
    for (std::size_t s = 0; s < cache.samples.size(); ++s) {
        total += backward_sample(params, cache.samples[s], dloss_dprob[s]);
    }
    return total.flatten();
}

AdamOptimizer::AdamOptimizer(AdamConfig cfg, std::size_t n) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

void AdamOptimizer::step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) {
        throw std::invalid_argument("optimizer state, parameters and gradient must have equal length");
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        m_[k] = cfg_.beta1 * m_[k] + (1.0 - cfg_.beta1) * grad[k];
        v_[k] = cfg_.beta2 * v_[k] + (1.0 - cfg_.beta2) * grad[k] * grad[k];
        const double m_hat = m_[k] / bc1;
        const double v_hat = v_[k] / bc2;
        params[k] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
}

void AdamOptimizer::step(SegmenterParams& params, std::span<const double> grad) {
    std::vector<double> flat = params.flatten();
    step(std::span<double>(flat), grad);
    params.unflatten(flat);
}

}  // namespace sass
