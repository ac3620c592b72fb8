// Copyright 2026 The gqml Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "gqml/adam.hpp"
#include "gqml/core.hpp"
#include "gqml/dataset.hpp"

namespace gqml {

// ---------------------------------------------------------------------------
// Layers

enum class LayerKind { dense, relu, conv3x3, maxpool2 };

struct Shape3 {
    int c = 1, h = 1, w = 1;
    std::size_t size() const noexcept { return static_cast<std::size_t>(c) * h * w; }
    friend bool operator==(const Shape3&, const Shape3&) = default;
};

struct Layer {
    LayerKind kind;
    std::string name;
    Shape3 in, out;
    int pad = 0;           ///< conv3x3 only
    bool ceil_mode = false; ///< maxpool2 only
    std::size_t offset = 0; ///< first parameter in the flat vector
    std::size_t weights = 0;
    std::size_t biases = 0;
    std::size_t fan_in = 0;

    std::size_t param_count() const noexcept { return weights + biases; }
};

/// Activations of one forward pass, kept for backpropagation.
struct Trace {
    std::vector<std::vector<real>> acts;              ///< acts[0] is the input
    std::vector<std::vector<std::uint32_t>> argmax; ///< per maxpool layer
    std::vector<std::vector<real>> cols;            ///< unfolded input per conv layer
};

enum class Padding { automatic, valid, same };

inline std::string to_string(Padding p) {
    switch (p) {
    case Padding::valid: return "valid";
    case Padding::same: return "same";
    default: return "auto";
    }
}

inline Padding parse_padding(std::string_view s) {
    if (s == "auto") return Padding::automatic;
    if (s == "valid") return Padding::valid;
    if (s == "same") return Padding::same;
    throw ValidationError("unknown padding '" + std::string(s) + "' (expected auto, valid or same)");
}

struct MlpSpec {
    std::vector<int> widths{128, 64, 32}; ///< hidden widths then embedding width
};

struct CnnSpec {
    int channels1 = 8;
    int channels2 = 16;
    int embedding = 32;
    /// automatic: valid padding when the image is at least kMinValidSide on both
    /// sides, otherwise same padding with ceil-mode pooling.
    Padding padding = Padding::automatic;
};

inline constexpr int kMinValidSide = 10;

/// Image geometry for an N = 2^n pixel barcode: square when n is even,
/// otherwise 2^ceil(n/2) rows by 2^floor(n/2) columns. Pixel k sits at
/// row k / W, column k % W.
inline std::pair<int, int> image_shape(int n) {
    require(n >= 1 && n <= kMaxQubitsPerRegister, "image_shape: bad qubit count");
    return {1 << ((n + 1) / 2), 1 << (n / 2)};
}

/// Structure of a feed-forward encoder over a flat parameter vector.
class Encoder {
  public:
    static Encoder mlp(std::size_t input, const MlpSpec& spec) {
        require(input >= 1 && !spec.widths.empty(), "mlp: empty architecture");
        Encoder e;
        e.input_ = {static_cast<int>(input), 1, 1};
        Shape3 cur = e.input_;
        for (std::size_t i = 0; i < spec.widths.size(); ++i) {
            require(spec.widths[i] >= 1, "mlp: widths must be positive");
            cur = e.add_dense(cur, spec.widths[i], "dense" + std::to_string(i));
            if (i + 1 < spec.widths.size()) e.add_relu(cur);
        }
        return e;
    }

    static Encoder cnn(int n, const CnnSpec& spec) {
        require(spec.channels1 >= 1 && spec.channels2 >= 1 && spec.embedding >= 1, "cnn: sizes must be positive");
        const auto [H, W] = image_shape(n);
        Padding pad = spec.padding;
        if (pad == Padding::automatic) pad = std::min(H, W) >= kMinValidSide ? Padding::valid : Padding::same;
        const int p = pad == Padding::same ? 1 : 0;
        const bool ceil = pad == Padding::same;
        Encoder e;
        e.input_ = {1, H, W};
        Shape3 cur = e.input_;
        cur = e.add_conv(cur, spec.channels1, p, "conv0");
        e.add_relu(cur);
        cur = e.add_pool(cur, ceil);
        cur = e.add_conv(cur, spec.channels2, p, "conv1");
        e.add_relu(cur);
        cur = e.add_pool(cur, ceil);
        e.add_dense(cur, spec.embedding, "dense0");
        return e;
    }

    std::size_t input_size() const noexcept { return input_.size(); }
    std::size_t output_size() const noexcept { return layers_.empty() ? input_.size() : layers_.back().out.size(); }
    std::size_t param_count() const noexcept { return params_; }
    const std::vector<Layer>& layers() const noexcept { return layers_; }

    /// He-uniform weights, zero biases.
    void init(std::span<real> params, Rng& rng) const {
        require(params.size() >= params_, "encoder init: parameter vector too short");
        for (const auto& l : layers_) {
            if (l.param_count() == 0) continue;
            const real limit = std::sqrt(6.0 / static_cast<real>(l.fan_in));
            std::uniform_real_distribution<real> u(-limit, limit);
            for (std::size_t i = 0; i < l.weights; ++i) params[l.offset + i] = u(rng);
            for (std::size_t i = 0; i < l.biases; ++i) params[l.offset + l.weights + i] = 0.0;
        }
    }

    void forward(std::span<const real> params, std::span<const real> x, Trace& t) const {
        require(x.size() == input_.size(), "encoder: input has " + std::to_string(x.size()) + " values, expected " +
                                                std::to_string(input_.size()));
        t.acts.resize(layers_.size() + 1);
        t.argmax.resize(layers_.size());
        t.cols.resize(layers_.size());
        t.acts[0].assign(x.begin(), x.end());
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            const auto& l = layers_[i];
            const auto& in = t.acts[i];
            auto& out = t.acts[i + 1];
            out.assign(l.out.size(), 0.0);
            switch (l.kind) {
            case LayerKind::dense: dense_forward(l, params, in, out); break;
            case LayerKind::relu:
                for (std::size_t j = 0; j < in.size(); ++j) out[j] = in[j] > 0.0 ? in[j] : 0.0;
                break;
            case LayerKind::conv3x3: conv_forward(l, params, in, out, t.cols[i]); break;
            case LayerKind::maxpool2: pool_forward(l, in, out, t.argmax[i]); break;
            }
        }
    }

    /// Accumulates dLoss/dparams into grad given dLoss/doutput.
    void backward(std::span<const real> params, const Trace& t, std::span<const real> grad_out,
                  std::span<real> grad) const {
        std::vector<real> g(grad_out.begin(), grad_out.end());
        std::vector<real> gin;
        for (std::size_t i = layers_.size(); i-- > 0;) {
            const auto& l = layers_[i];
            const auto& in = t.acts[i];
            const bool need_input = i > 0;
            gin.assign(need_input ? l.in.size() : 0, 0.0);
            switch (l.kind) {
            case LayerKind::dense: dense_backward(l, params, in, g, grad, gin, need_input); break;
            case LayerKind::relu:
                for (std::size_t j = 0; j < gin.size(); ++j) gin[j] = in[j] > 0.0 ? g[j] : 0.0;
                break;
            case LayerKind::conv3x3: conv_backward(l, params, t.cols[i], g, grad, gin, need_input); break;
            case LayerKind::maxpool2:
                for (std::size_t j = 0; j < g.size() && need_input; ++j) gin[t.argmax[i][j]] += g[j];
                break;
            }
            g.swap(gin);
        }
    }

    std::vector<real> embed(std::span<const real> params, std::span<const real> x) const {
        Trace t;
        forward(params, x, t);
        return t.acts.back();
    }

  private:
    Shape3 add_dense(Shape3 in, int width, std::string name) {
        Layer l{LayerKind::dense, std::move(name), in, {width, 1, 1}};
        l.weights = in.size() * static_cast<std::size_t>(width);
        l.biases = static_cast<std::size_t>(width);
        l.fan_in = in.size();
        return push(l);
    }

    void add_relu(Shape3 s) { push(Layer{LayerKind::relu, "relu", s, s}); }

    Shape3 add_conv(Shape3 in, int channels, int pad, std::string name) {
        Shape3 out{channels, in.h + 2 * pad - 2, in.w + 2 * pad - 2};
        if (out.h < 1 || out.w < 1)
            throw ValidationError("cnn: " + std::to_string(in.h) + "x" + std::to_string(in.w) +
                                  " input is too small for a 3x3 convolution without padding");
        Layer l{LayerKind::conv3x3, std::move(name), in, out, pad};
        l.weights = static_cast<std::size_t>(channels) * in.c * 9;
        l.biases = static_cast<std::size_t>(channels);
        l.fan_in = static_cast<std::size_t>(in.c) * 9;
        return push(l);
    }

    Shape3 add_pool(Shape3 in, bool ceil_mode) {
        Shape3 out{in.c, ceil_mode ? (in.h + 1) / 2 : in.h / 2, ceil_mode ? (in.w + 1) / 2 : in.w / 2};
        if (out.h < 1 || out.w < 1)
            throw ValidationError("cnn: " + std::to_string(in.h) + "x" + std::to_string(in.w) +
                                  " feature map is too small for 2x2 pooling");
        Layer l{LayerKind::maxpool2, "maxpool", in, out};
        l.ceil_mode = ceil_mode;
        return push(l);
    }

    Shape3 push(Layer l) {
        l.offset = params_;
        params_ += l.param_count();
        layers_.push_back(l);
        return l.out;
    }

    // Dense weights are stored input-major: W[i * out + o].
    static void dense_forward(const Layer& l, std::span<const real> p, const std::vector<real>& in,
                              std::vector<real>& out) {
        const std::size_t O = out.size();
        const real* W = p.data() + l.offset;
        const real* b = W + l.weights;
        std::copy(b, b + O, out.begin());
        for (std::size_t i = 0; i < in.size(); ++i) {
            const real x = in[i];
            if (x == 0.0) continue;
            const real* row = W + i * O;
            for (std::size_t o = 0; o < O; ++o) out[o] += x * row[o];
        }
    }

    static void dense_backward(const Layer& l, std::span<const real> p, const std::vector<real>& in,
                               const std::vector<real>& g, std::span<real> grad, std::vector<real>& gin,
                               bool need_input) {
        const std::size_t O = g.size();
        const real* W = p.data() + l.offset;
        real* gW = grad.data() + l.offset;
        real* gb = gW + l.weights;
        for (std::size_t o = 0; o < O; ++o) gb[o] += g[o];
        for (std::size_t i = 0; i < in.size(); ++i) {
            const real x = in[i];
            if (x != 0.0) {
                real* row = gW + i * O;
                for (std::size_t o = 0; o < O; ++o) row[o] += x * g[o];
            }
            if (need_input) {
                const real* row = W + i * O;
                real s = 0.0;
                for (std::size_t o = 0; o < O; ++o) s += row[o] * g[o];
                gin[i] = s;
            }
        }
    }

    // Conv weights: W[co * K + k] with k = (ci * 3 + ky) * 3 + kx and K = Cin * 9.
    // cols holds the unfolded input, cols[k * P + pixel] with P = Hout * Wout.
    static void im2col(const Layer& l, const std::vector<real>& in, std::vector<real>& cols) {
        const int H = l.in.h, Wd = l.in.w, Ho = l.out.h, Wo = l.out.w;
        const std::size_t P = static_cast<std::size_t>(Ho) * Wo;
        cols.assign(static_cast<std::size_t>(l.in.c) * 9 * P, 0.0);
        for (int ci = 0; ci < l.in.c; ++ci)
            for (int ky = 0; ky < 3; ++ky)
                for (int kx = 0; kx < 3; ++kx) {
                    real* dst = cols.data() + (static_cast<std::size_t>(ci) * 9 + ky * 3 + kx) * P;
                    const real* src = in.data() + static_cast<std::size_t>(ci) * H * Wd;
                    const int x0 = std::max(0, l.pad - kx);
                    const int x1 = std::min(Wo, Wd + l.pad - kx);
                    for (int oy = 0; oy < Ho; ++oy) {
                        const int y = oy + ky - l.pad;
                        if (y < 0 || y >= H) continue;
                        const real* srow = src + static_cast<std::size_t>(y) * Wd + (kx - l.pad);
                        real* drow = dst + static_cast<std::size_t>(oy) * Wo;
                        for (int ox = x0; ox < x1; ++ox) drow[ox] = srow[ox];
                    }
                }
    }

    static real dot(const real* a, const real* b, std::size_t n) {
        real s0 = 0, s1 = 0, s2 = 0, s3 = 0;
        std::size_t i = 0;
        for (; i + 4 <= n; i += 4) {
            s0 += a[i] * b[i];
            s1 += a[i + 1] * b[i + 1];
            s2 += a[i + 2] * b[i + 2];
            s3 += a[i + 3] * b[i + 3];
        }
        for (; i < n; ++i) s0 += a[i] * b[i];
        return (s0 + s1) + (s2 + s3);
    }

    static void conv_forward(const Layer& l, std::span<const real> p, const std::vector<real>& in,
                             std::vector<real>& out, std::vector<real>& cols) {
        im2col(l, in, cols);
        const real* W = p.data() + l.offset;
        const real* b = W + l.weights;
        const std::size_t K = static_cast<std::size_t>(l.in.c) * 9;
        const std::size_t P = static_cast<std::size_t>(l.out.h) * l.out.w;
        for (int co = 0; co < l.out.c; ++co) {
            real* o = out.data() + co * P;
            std::fill(o, o + P, b[co]);
            for (std::size_t k = 0; k < K; ++k) {
                const real w = W[co * K + k];
                const real* c = cols.data() + k * P;
                for (std::size_t i = 0; i < P; ++i) o[i] += w * c[i];
            }
        }
    }

    static void conv_backward(const Layer& l, std::span<const real> p, const std::vector<real>& cols,
                              const std::vector<real>& g, std::span<real> grad, std::vector<real>& gin,
                              bool need_input) {
        const real* W = p.data() + l.offset;
        real* gW = grad.data() + l.offset;
        real* gb = gW + l.weights;
        const std::size_t K = static_cast<std::size_t>(l.in.c) * 9;
        const std::size_t P = static_cast<std::size_t>(l.out.h) * l.out.w;
        std::vector<real> gcols(need_input ? K * P : 0, 0.0);
        for (int co = 0; co < l.out.c; ++co) {
            const real* go = g.data() + co * P;
            gb[co] += std::accumulate(go, go + P, 0.0);
            for (std::size_t k = 0; k < K; ++k) {
                gW[co * K + k] += dot(go, cols.data() + k * P, P);
                if (!need_input) continue;
                const real w = W[co * K + k];
                real* gc = gcols.data() + k * P;
                for (std::size_t i = 0; i < P; ++i) gc[i] += w * go[i];
            }
        }
        if (!need_input) return;
        const int H = l.in.h, Wd = l.in.w, Ho = l.out.h, Wo = l.out.w;
        for (int ci = 0; ci < l.in.c; ++ci)
            for (int ky = 0; ky < 3; ++ky)
                for (int kx = 0; kx < 3; ++kx) {
                    const real* gc = gcols.data() + (static_cast<std::size_t>(ci) * 9 + ky * 3 + kx) * P;
                    real* dst = gin.data() + static_cast<std::size_t>(ci) * H * Wd;
                    const int x0 = std::max(0, l.pad - kx);
                    const int x1 = std::min(Wo, Wd + l.pad - kx);
                    for (int oy = 0; oy < Ho; ++oy) {
                        const int y = oy + ky - l.pad;
                        if (y < 0 || y >= H) continue;
                        real* drow = dst + static_cast<std::size_t>(y) * Wd + (kx - l.pad);
                        const real* grow = gc + static_cast<std::size_t>(oy) * Wo;
                        for (int ox = x0; ox < x1; ++ox) drow[ox] += grow[ox];
                    }
                }
    }

    static void pool_forward(const Layer& l, const std::vector<real>& in, std::vector<real>& out,
                             std::vector<std::uint32_t>& arg) {
        arg.assign(out.size(), 0);
        const int H = l.in.h, Wd = l.in.w, Ho = l.out.h, Wo = l.out.w;
        for (int c = 0; c < l.in.c; ++c)
            for (int oy = 0; oy < Ho; ++oy)
                for (int ox = 0; ox < Wo; ++ox) {
                    real best = -std::numeric_limits<real>::infinity();
                    std::uint32_t where = 0;
                    for (int dy = 0; dy < 2; ++dy)
                        for (int dx = 0; dx < 2; ++dx) {
                            const int y = 2 * oy + dy, x = 2 * ox + dx;
                            if (y >= H || x >= Wd) continue;
                            const auto idx = static_cast<std::uint32_t>((c * H + y) * Wd + x);
                            if (in[idx] > best) best = in[idx], where = idx;
                        }
                    const std::size_t o = (static_cast<std::size_t>(c) * Ho + oy) * Wo + ox;
                    out[o] = best;
                    arg[o] = where;
                }
    }

    Shape3 input_;
    std::vector<Layer> layers_;
    std::size_t params_ = 0;
};

// ---------------------------------------------------------------------------
// Siamese model

enum class Arch { dnn, cnn };
enum class Head { logistic, exponential };

inline std::string to_string(Arch a) { return a == Arch::dnn ? "DNN" : "CNN"; }
inline std::string to_string(Head h) { return h == Head::logistic ? "logistic" : "exponential"; }

inline Arch parse_arch(std::string_view s) {
    if (s == "DNN" || s == "dnn") return Arch::dnn;
    if (s == "CNN" || s == "cnn") return Arch::cnn;
    throw ValidationError("unknown architecture '" + std::string(s) + "'");
}

inline Head parse_head(std::string_view s) {
    if (s == "logistic") return Head::logistic;
    if (s == "exponential") return Head::exponential;
    throw ValidationError("unknown head '" + std::string(s) + "' (expected logistic or exponential)");
}

struct SiameseSpec {
    Arch arch = Arch::dnn;
    MlpSpec mlp;
    CnnSpec cnn;
    Head head = Head::logistic;
};

inline std::vector<real> pixels(const Barcode& b) {
    std::vector<real> x(b.size());
    for (std::size_t k = 0; k < b.size(); ++k) x[k] = b[k] ? 1.0 : 0.0;
    return x;
}

inline real distance(std::span<const real> h1, std::span<const real> h2) {
    require(h1.size() == h2.size(), "distance: dimension mismatch");
    real d = 0.0;
    for (std::size_t i = 0; i < h1.size(); ++i) d += (h1[i] - h2[i]) * (h1[i] - h2[i]);
    return d;
}

inline real logistic(real z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Twin encoders sharing one parameter set. The flat vector holds the
/// encoder parameters followed by the head weight w and bias c.
class SiameseModel {
  public:
    SiameseModel(int n, SiameseSpec spec) : n_(n), spec_(std::move(spec)) {
        encoder_ = spec_.arch == Arch::dnn ? Encoder::mlp(std::size_t{1} << n, spec_.mlp) : Encoder::cnn(n, spec_.cnn);
        params_.assign(encoder_.param_count() + 2, 0.0);
        params_[encoder_.param_count()] = 1.0;
        params_[encoder_.param_count() + 1] = -1.0;
    }

    int n() const noexcept { return n_; }
    const SiameseSpec& spec() const noexcept { return spec_; }
    const Encoder& encoder() const noexcept { return encoder_; }
    std::vector<real>& params() noexcept { return params_; }
    const std::vector<real>& params() const noexcept { return params_; }
    real& w() { return params_[encoder_.param_count()]; }
    real& c() { return params_[encoder_.param_count() + 1]; }
    real w() const { return params_[encoder_.param_count()]; }
    real c() const { return params_[encoder_.param_count() + 1]; }

    /// He-uniform encoder, w = 1, c = -1.
    void initialize(Rng& rng) {
        encoder_.init(params_, rng);
        w() = 1.0;
        c() = -1.0;
    }

    std::vector<real> encode(const Barcode& b) const {
        require(b.qubits() == n_, "encode: barcode size does not match model");
        return encoder_.embed(params_, pixels(b));
    }

    real head(real d) const { return spec_.head == Head::logistic ? logistic(w() * d + c()) : 1.0 - std::exp(-d); }

    real score(const SamplePair& p) const { return head(distance(encode(p.x1), encode(p.x2))); }

    int predict(const SamplePair& p) const { return score(p) > 0.5 ? 1 : 0; }

  private:
    int n_;
    SiameseSpec spec_;
    Encoder encoder_;
    std::vector<real> params_;
};

struct SiameseBatch {
    std::vector<std::vector<real>> x1, x2;
    std::vector<real> y;

    explicit SiameseBatch(std::span<const SamplePair> samples) {
        for (const auto& s : samples) {
            x1.push_back(pixels(s.x1));
            x2.push_back(pixels(s.x2));
            y.push_back(static_cast<real>(s.label));
        }
    }
    std::size_t size() const noexcept { return y.size(); }
};

struct LossEval {
    real loss = 0.0;
    real accuracy = 0.0;
};

/// MSE loss over the selected rows; when grad is non-empty it receives the
/// gradient (overwritten). Both branches backpropagate into the same slots.
inline LossEval siamese_loss(const SiameseModel& model, const SiameseBatch& batch, std::span<const std::size_t> rows,
                             std::span<real> grad = {}) {
    require(!rows.empty(), "siamese_loss: empty batch");
    const auto& enc = model.encoder();
    const auto& p = model.params();
    const std::size_t E = enc.param_count();
    const bool want = !grad.empty();
    if (want) {
        require(grad.size() == p.size(), "siamese_loss: gradient size mismatch");
        std::fill(grad.begin(), grad.end(), 0.0);
    }
    const real M = static_cast<real>(rows.size());
    LossEval out;
    Trace t1, t2;
    std::vector<real> g1, g2;
    int hit = 0;
    for (std::size_t r : rows) {
        enc.forward(p, batch.x1[r], t1);
        enc.forward(p, batch.x2[r], t2);
        const auto& h1 = t1.acts.back();
        const auto& h2 = t2.acts.back();
        const real d = distance(h1, h2);
        const real yt = model.head(d);
        const real err = yt - batch.y[r];
        out.loss += err * err / M;
        hit += (yt > 0.5 ? 1 : 0) == static_cast<int>(batch.y[r]);
        if (!want) continue;
        const real dy = 2.0 * err / M;
        real dd;
        if (model.spec().head == Head::logistic) {
            const real dz = dy * yt * (1.0 - yt);
            grad[E] += dz * d;
            grad[E + 1] += dz;
            dd = dz * model.w();
        } else {
            dd = dy * std::exp(-d);
        }
        g1.resize(h1.size());
        g2.resize(h1.size());
        for (std::size_t i = 0; i < h1.size(); ++i) {
            g1[i] = 2.0 * (h1[i] - h2[i]) * dd;
            g2[i] = -g1[i];
        }
        enc.backward(p, t1, g1, grad);
        enc.backward(p, t2, g2, grad);
    }
    out.accuracy = static_cast<real>(hit) / M;
    return out;
}

inline LossEval siamese_loss(const SiameseModel& model, const SiameseBatch& batch, std::span<real> grad = {}) {
    std::vector<std::size_t> rows(batch.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return siamese_loss(model, batch, rows, grad);
}

struct SiameseConfig {
    real lr = 1e-3;
    int epochs = 300;
    int batch_size = 0;          ///< 0 means full batch
    real loss_tolerance = 1e-5;  ///< stop once the full training loss falls below this
    std::uint64_t seed = 0;
    /// Start the logistic head at w = 1 / (mean initial training distance)
    /// instead of w = 1, so large initial distances do not saturate it.
    bool calibrate_head = true;
};

struct SiameseTrainResult {
    SiameseModel model;
    std::vector<EpochStat> history; ///< epoch 0 is the initial model
};

using SiameseEpochCallback = std::function<void(int epoch, const SiameseModel&)>;

inline SiameseTrainResult train_siamese(const Dataset& train, const SiameseSpec& spec, const SiameseConfig& cfg,
                                        const SiameseEpochCallback& on_epoch = {}) {
    require(cfg.epochs >= 0 && cfg.lr >= 0.0 && cfg.batch_size >= 0, "train_siamese: bad config");
    require(!train.samples.empty(), "train_siamese: empty training set");
    Rng rng(cfg.seed);
    SiameseTrainResult out{SiameseModel(train.n, spec), {}};
    auto& model = out.model;
    model.initialize(rng);
    const SiameseBatch batch(train.samples);
    std::vector<real> grad(model.params().size());
    AdamState adam(grad.size(), cfg.lr);
    std::vector<std::size_t> order(batch.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t bs = cfg.batch_size == 0 ? batch.size() : static_cast<std::size_t>(cfg.batch_size);

    auto record = [&](int epoch, LossEval e) {
        if (!std::isfinite(e.loss))
            throw NumericalError("train_siamese: non-finite loss at epoch " + std::to_string(epoch));
        out.history.push_back({epoch, e.loss, e.accuracy});
        if (on_epoch) on_epoch(epoch, model);
    };

    if (cfg.calibrate_head && spec.head == Head::logistic) {
        real mean_d = 0.0;
        for (std::size_t r = 0; r < batch.size(); ++r)
            mean_d += distance(model.encoder().embed(model.params(), batch.x1[r]),
                               model.encoder().embed(model.params(), batch.x2[r])) /
                      static_cast<real>(batch.size());
        if (mean_d > 0.0) model.w() = 1.0 / mean_d;
    }

    const bool full = bs >= batch.size();
    LossEval current = full ? siamese_loss(model, batch, grad) : siamese_loss(model, batch);
    record(0, current);
    for (int e = 1; e <= cfg.epochs && current.loss >= cfg.loss_tolerance; ++e) {
        if (full) {
            adam_step(adam, grad, model.params());
            current = siamese_loss(model, batch, grad); // gradient reused by the next step
        } else {
            std::shuffle(order.begin(), order.end(), rng);
            for (std::size_t start = 0; start < batch.size(); start += bs) {
                const auto rows = std::span<const std::size_t>(order).subspan(start, std::min(bs, batch.size() - start));
                siamese_loss(model, batch, rows, grad);
                adam_step(adam, grad, model.params());
            }
            current = siamese_loss(model, batch);
        }
        record(e, current);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Weights file: [u64 LE header length][JSON header][f64 LE parameters]

inline nlohmann::json spec_to_json(const SiameseSpec& s, int n) {
    return {{"arch", to_string(s.arch)},
            {"n", n},
            {"head", to_string(s.head)},
            {"mlp_widths", s.mlp.widths},
            {"cnn", {{"channels1", s.cnn.channels1},
                     {"channels2", s.cnn.channels2},
                     {"embedding", s.cnn.embedding},
                     {"padding", to_string(s.cnn.padding)}}}};
}

inline std::pair<SiameseSpec, int> spec_from_json(const nlohmann::json& j) {
    SiameseSpec s;
    s.arch = parse_arch(detail::json_field<std::string>(j, "arch", "weights.spec"));
    s.head = parse_head(detail::json_field<std::string>(j, "head", "weights.spec"));
    s.mlp.widths = detail::json_field<std::vector<int>>(j, "mlp_widths", "weights.spec");
    const auto c = detail::json_field<nlohmann::json>(j, "cnn", "weights.spec");
    s.cnn.channels1 = detail::json_field<int>(c, "channels1", "weights.spec.cnn");
    s.cnn.channels2 = detail::json_field<int>(c, "channels2", "weights.spec.cnn");
    s.cnn.embedding = detail::json_field<int>(c, "embedding", "weights.spec.cnn");
    s.cnn.padding = parse_padding(detail::json_field<std::string>(c, "padding", "weights.spec.cnn"));
    return {s, detail::json_field<int>(j, "n", "weights.spec")};
}

inline nlohmann::json tensor_manifest(const SiameseModel& m) {
    auto list = nlohmann::json::array();
    for (const auto& l : m.encoder().layers()) {
        if (l.param_count() == 0) continue;
        nlohmann::json wshape = l.kind == LayerKind::dense
                                    ? nlohmann::json{l.in.size(), l.out.size()}
                                    : nlohmann::json{l.out.c, l.in.c, 3, 3};
        list.push_back({{"name", l.name + ".weight"}, {"shape", wshape}, {"offset", l.offset}});
        list.push_back({{"name", l.name + ".bias"}, {"shape", {l.biases}}, {"offset", l.offset + l.weights}});
    }
    const auto E = m.encoder().param_count();
    list.push_back({{"name", "head.w"}, {"shape", {1}}, {"offset", E}});
    list.push_back({{"name", "head.c"}, {"shape", {1}}, {"offset", E + 1}});
    return list;
}

namespace detail {

inline void put_u64(std::string& s, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

} // namespace detail

inline std::string serialize_weights(const SiameseModel& m) {
    const nlohmann::json header{{"format", "gqml-siamese"},
                                {"version", 1},
                                {"dtype", "float64-le"},
                                {"count", m.params().size()},
                                {"spec", spec_to_json(m.spec(), m.n())},
                                {"tensors", tensor_manifest(m)}};
    const std::string h = header.dump();
    std::string out;
    detail::put_u64(out, h.size());
    out += h;
    for (real v : m.params()) detail::put_u64(out, std::bit_cast<std::uint64_t>(v));
    return out;
}

inline SiameseModel deserialize_weights(const std::string& bytes) {
    const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.size() < 8) throw ParseError("weights: file too short for header length");
    const std::uint64_t hlen = detail::get_u64(raw);
    if (hlen > bytes.size() - 8) throw ParseError("weights: header length exceeds file size");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.substr(8, hlen));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("weights: bad JSON header: ") + e.what());
    }
    if (header.value("format", "") != "gqml-siamese") throw ParseError("weights: unknown format");
    const auto [spec, n] = spec_from_json(detail::json_field<nlohmann::json>(header, "spec", "weights"));
    SiameseModel m(n, spec);
    const auto count = detail::json_field<std::size_t>(header, "count", "weights");
    if (count != m.params().size())
        throw ValidationError("weights: header declares " + std::to_string(count) + " parameters, architecture has " +
                              std::to_string(m.params().size()));
    if (header.at("tensors") != tensor_manifest(m)) throw ValidationError("weights: tensor manifest mismatch");
    if (bytes.size() != 8 + hlen + 8 * count) throw ParseError("weights: data section has the wrong length");
    const unsigned char* data = raw + 8 + hlen;
    for (std::size_t i = 0; i < count; ++i) m.params()[i] = std::bit_cast<real>(detail::get_u64(data + 8 * i));
    return m;
}

inline void save_weights(const SiameseModel& m, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    const auto s = serialize_weights(m);
    f.write(s.data(), static_cast<std::streamsize>(s.size()));
    if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

inline SiameseModel load_weights(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "'");
    std::string s((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return deserialize_weights(s);
}

} // namespace gqml
