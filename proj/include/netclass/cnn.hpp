#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "netclass/parallel.hpp"
#include "netclass/rasterize.hpp"
#include "netclass/rng.hpp"
#include "netclass/tensor.hpp"

namespace netclass {

enum class Activation { kRelu, kTanh };

inline std::string to_string(Activation a) { return a == Activation::kRelu ? "relu" : "tanh"; }

inline Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::kRelu;
    if (s == "tanh") return Activation::kTanh;
    throw std::invalid_argument("unknown activation: " + s);
}

struct CnnConfig {
    std::size_t conv1_filters = 3;
    std::size_t conv2_filters = 5;
    std::size_t kernel = 5;
    std::size_t pool = 2;
    std::size_t fc_units = 50;
    std::size_t classes = 2;
    double lr = 0.01;
    std::size_t batch = 100;
    std::size_t epochs = 30;
    std::size_t patience = 5;  // early stopping on validation error
    Activation activation = Activation::kRelu;
    std::uint64_t seed = 0;

    // 15/30 filters and 300 fully-connected units for the trade networks.
    CnnConfig trade_variant() const {
        CnnConfig c = *this;
        c.conv1_filters = 15;
        c.conv2_filters = 30;
        c.fc_units = 300;
        return c;
    }

    void validate() const {
        if (conv1_filters < 1 || conv2_filters < 1 || fc_units < 1 || classes < 2 || batch < 1 || epochs < 1 ||
            pool < 1 || patience < 1)
            throw std::invalid_argument("cnn: all size fields must be positive");
        if (kernel % 2 == 0 || kernel < 1) throw std::invalid_argument("cnn: kernel must be odd");
        if (!(lr > 0.0)) throw std::invalid_argument("cnn: lr must be > 0");
    }
};

// Valid convolutions (side -> side-kernel+1) and non-overlapping pooling
// (side -> side/pool) twice. Every intermediate side must stay positive and
// divisible where pooled; grid 48 with kernel 5, pool 2 gives
// 48 -> 44 -> 22 -> 18 -> 9 and a flatten width of conv2_filters * 81.
struct CnnGeometry {
    std::size_t grid = 0;
    std::size_t conv1_out = 0;
    std::size_t pool1_out = 0;
    std::size_t conv2_out = 0;
    std::size_t pool2_out = 0;
    std::size_t flatten = 0;

    static CnnGeometry derive(const CnnConfig& cfg, std::size_t grid) {
        cfg.validate();
        auto conv = [&](std::size_t side, const char* what) {
            if (side < cfg.kernel)
                throw std::invalid_argument(std::string("cnn: ") + what + " input smaller than kernel");
            return side - cfg.kernel + 1;
        };
        auto pooled = [&](std::size_t side, const char* what) {
            if (side % cfg.pool != 0)
                throw std::invalid_argument(std::string("cnn: ") + what + " side " + std::to_string(side) +
                                            " not divisible by pool " + std::to_string(cfg.pool));
            return side / cfg.pool;
        };
        CnnGeometry g;
        g.grid = grid;
        g.conv1_out = conv(grid, "conv1");
        g.pool1_out = pooled(g.conv1_out, "pool1");
        g.conv2_out = conv(g.pool1_out, "conv2");
        g.pool2_out = pooled(g.conv2_out, "pool2");
        if (g.pool2_out < 1) throw std::invalid_argument("cnn: derived feature size is zero");
        g.flatten = cfg.conv2_filters * g.pool2_out * g.pool2_out;
        return g;
    }
};

// The trainable tensors in their declared (checkpoint) order.
struct ParamBlock {
    Tensor conv1_w, conv1_b, conv2_w, conv2_b, fc1_w, fc1_b, fc2_w, fc2_b;

    static ParamBlock shaped(const CnnConfig& cfg, const CnnGeometry& geom) {
        ParamBlock p;
        p.conv1_w = Tensor({cfg.conv1_filters, 1, cfg.kernel, cfg.kernel});
        p.conv1_b = Tensor({cfg.conv1_filters});
        p.conv2_w = Tensor({cfg.conv2_filters, cfg.conv1_filters, cfg.kernel, cfg.kernel});
        p.conv2_b = Tensor({cfg.conv2_filters});
        p.fc1_w = Tensor({cfg.fc_units, geom.flatten});
        p.fc1_b = Tensor({cfg.fc_units});
        p.fc2_w = Tensor({cfg.classes, cfg.fc_units});
        p.fc2_b = Tensor({cfg.classes});
        return p;
    }

    std::array<Tensor*, 8> tensors() {
        return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &fc1_w, &fc1_b, &fc2_w, &fc2_b};
    }
    std::array<const Tensor*, 8> tensors() const {
        return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &fc1_w, &fc1_b, &fc2_w, &fc2_b};
    }
    static std::array<const char*, 8> tensor_names() {
        return {"conv1_w", "conv1_b", "conv2_w", "conv2_b", "fc1_w", "fc1_b", "fc2_w", "fc2_b"};
    }

    void add_scaled(const ParamBlock& other, double s) {
        auto mine = tensors();
        auto theirs = other.tensors();
        for (std::size_t i = 0; i < mine.size(); ++i) mine[i]->add_scaled(*theirs[i], s);
    }

    void fill(double v) {
        for (Tensor* t : tensors()) t->fill(v);
    }
};

struct CnnModel {
    CnnConfig cfg;
    CnnGeometry geom;
    ParamBlock params;
};

using CnnGrads = ParamBlock;

// Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases, drawn
// from cfg.seed in declared tensor order.
inline CnnModel init_model(const CnnConfig& cfg, std::size_t grid) {
    CnnModel m;
    m.cfg = cfg;
    m.geom = CnnGeometry::derive(cfg, grid);
    m.params = ParamBlock::shaped(cfg, m.geom);

    RngStream rng(cfg.seed, /*stream_id=*/0x1217);
    auto glorot = [&](Tensor& t, std::size_t fan_in, std::size_t fan_out) {
        double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (double& x : t.data) x = rng.next_uniform(-bound, bound);
    };
    std::size_t k2 = cfg.kernel * cfg.kernel;
    glorot(m.params.conv1_w, 1 * k2, cfg.conv1_filters * k2);
    glorot(m.params.conv2_w, cfg.conv1_filters * k2, cfg.conv2_filters * k2);
    glorot(m.params.fc1_w, m.geom.flatten, cfg.fc_units);
    glorot(m.params.fc2_w, cfg.fc_units, cfg.classes);
    return m;
}

// ---------------------------------------------------------------------------
// Layer primitives. Double precision, fixed accumulation order: the conv
// inner sum runs over (in_channel, kernel_row, kernel_col) with the bias
// added after, which is the contract the direct-convolution oracle checks
// bit-for-bit.
// ---------------------------------------------------------------------------
namespace nn {

inline void conv_forward(const double* in, std::size_t in_ch, std::size_t in_side, const double* w,
                         const double* b, std::size_t out_ch, std::size_t kernel, double* out) {
    const std::size_t out_side = in_side - kernel + 1;
    for (std::size_t oc = 0; oc < out_ch; ++oc)
        for (std::size_t r = 0; r < out_side; ++r)
            for (std::size_t c = 0; c < out_side; ++c) {
                double acc = 0.0;
                for (std::size_t ic = 0; ic < in_ch; ++ic)
                    for (std::size_t kr = 0; kr < kernel; ++kr)
                        for (std::size_t kc = 0; kc < kernel; ++kc)
                            acc += in[(ic * in_side + r + kr) * in_side + c + kc] *
                                   w[((oc * in_ch + ic) * kernel + kr) * kernel + kc];
                out[(oc * out_side + r) * out_side + c] = acc + b[oc];
            }
}

// d_out -> (dW, dB) and optionally d_in (accumulated; caller zero-fills).
inline void conv_backward(const double* in, std::size_t in_ch, std::size_t in_side, const double* w,
                          std::size_t out_ch, std::size_t kernel, const double* d_out, double* d_w,
                          double* d_b, double* d_in) {
    const std::size_t out_side = in_side - kernel + 1;
    for (std::size_t oc = 0; oc < out_ch; ++oc)
        for (std::size_t r = 0; r < out_side; ++r)
            for (std::size_t c = 0; c < out_side; ++c) {
                const double g = d_out[(oc * out_side + r) * out_side + c];
                d_b[oc] += g;
                for (std::size_t ic = 0; ic < in_ch; ++ic)
                    for (std::size_t kr = 0; kr < kernel; ++kr)
                        for (std::size_t kc = 0; kc < kernel; ++kc) {
                            const std::size_t in_idx = (ic * in_side + r + kr) * in_side + c + kc;
                            d_w[((oc * in_ch + ic) * kernel + kr) * kernel + kc] += g * in[in_idx];
                            if (d_in) d_in[in_idx] += g * w[((oc * in_ch + ic) * kernel + kr) * kernel + kc];
                        }
            }
}

// Non-overlapping max pooling; argmax keeps the first maximum in row-major
// window order, and backward routes gradient only to those positions.
inline void maxpool_forward(const double* in, std::size_t ch, std::size_t in_side, std::size_t pool,
                            double* out, std::uint32_t* argmax) {
    const std::size_t out_side = in_side / pool;
    for (std::size_t c = 0; c < ch; ++c)
        for (std::size_t r = 0; r < out_side; ++r)
            for (std::size_t q = 0; q < out_side; ++q) {
                std::size_t base = (c * in_side + r * pool) * in_side + q * pool;
                double best = in[base];
                std::size_t best_idx = base;
                for (std::size_t pr = 0; pr < pool; ++pr)
                    for (std::size_t pc = 0; pc < pool; ++pc) {
                        std::size_t idx = (c * in_side + r * pool + pr) * in_side + q * pool + pc;
                        if (in[idx] > best) {
                            best = in[idx];
                            best_idx = idx;
                        }
                    }
                out[(c * out_side + r) * out_side + q] = best;
                argmax[(c * out_side + r) * out_side + q] = static_cast<std::uint32_t>(best_idx);
            }
}

inline void maxpool_backward(const double* d_out, std::size_t ch, std::size_t in_side, std::size_t pool,
                             const std::uint32_t* argmax, double* d_in) {
    const std::size_t out_side = in_side / pool;
    for (std::size_t i = 0; i < ch * out_side * out_side; ++i) d_in[argmax[i]] += d_out[i];
}

inline void dense_forward(const double* in, const double* w, const double* b, std::size_t out_dim,
                          std::size_t in_dim, double* out) {
    for (std::size_t o = 0; o < out_dim; ++o) {
        double acc = 0.0;
        for (std::size_t i = 0; i < in_dim; ++i) acc += w[o * in_dim + i] * in[i];
        out[o] = acc + b[o];
    }
}

inline void dense_backward(const double* in, const double* w, std::size_t out_dim, std::size_t in_dim,
                           const double* d_out, double* d_w, double* d_b, double* d_in) {
    for (std::size_t o = 0; o < out_dim; ++o) {
        const double g = d_out[o];
        d_b[o] += g;
        for (std::size_t i = 0; i < in_dim; ++i) d_w[o * in_dim + i] += g * in[i];
    }
    if (d_in)
        for (std::size_t i = 0; i < in_dim; ++i) {
            double acc = 0.0;
            for (std::size_t o = 0; o < out_dim; ++o) acc += w[o * in_dim + i] * d_out[o];
            d_in[i] = acc;
        }
}

inline void activate(double* x, std::size_t n, Activation a) {
    if (a == Activation::kRelu) {
        for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
    } else {
        for (std::size_t i = 0; i < n; ++i) x[i] = std::tanh(x[i]);
    }
}

// In-place: d_act becomes d_pre, given the pre-activation values.
inline void activate_backward(double* d_act, const double* pre, std::size_t n, Activation a) {
    if (a == Activation::kRelu) {
        for (std::size_t i = 0; i < n; ++i)
            if (!(pre[i] > 0.0)) d_act[i] = 0.0;
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            double t = std::tanh(pre[i]);
            d_act[i] *= 1.0 - t * t;
        }
    }
}

// Numerically stable softmax; sums to 1 and is invariant under adding a
// constant to all logits.
inline std::vector<double> softmax(std::span<const double> logits) {
    double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - m);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

}  // namespace nn

// ---------------------------------------------------------------------------
// Whole-network forward / backward.
// ---------------------------------------------------------------------------

struct ForwardCache {
    std::vector<double> input;
    std::vector<double> conv1_pre, conv1_act;  // post-activation = pre-pool feature maps
    std::vector<std::uint32_t> pool1_argmax;
    std::vector<double> pool1_out;
    std::vector<double> conv2_pre, conv2_act;
    std::vector<std::uint32_t> pool2_argmax;
    std::vector<double> pool2_out;  // == flatten input
    std::vector<double> fc1_pre, fc1_act;
    std::vector<double> logits;
};

inline std::vector<double> forward(const CnnModel& model, const GrayImage& image, ForwardCache* cache = nullptr) {
    const CnnConfig& cfg = model.cfg;
    const CnnGeometry& g = model.geom;
    if (image.grid != g.grid)
        throw std::invalid_argument("forward: image grid " + std::to_string(image.grid) + " does not match model grid " +
                                    std::to_string(g.grid));

    ForwardCache local;
    ForwardCache& cc = cache ? *cache : local;
    const std::size_t f1 = cfg.conv1_filters, f2 = cfg.conv2_filters;

    cc.input = image.pixels;
    cc.conv1_pre.assign(f1 * g.conv1_out * g.conv1_out, 0.0);
    nn::conv_forward(cc.input.data(), 1, g.grid, model.params.conv1_w.data.data(), model.params.conv1_b.data.data(),
                     f1, cfg.kernel, cc.conv1_pre.data());
    cc.conv1_act = cc.conv1_pre;
    nn::activate(cc.conv1_act.data(), cc.conv1_act.size(), cfg.activation);

    cc.pool1_out.assign(f1 * g.pool1_out * g.pool1_out, 0.0);
    cc.pool1_argmax.assign(f1 * g.pool1_out * g.pool1_out, 0);
    nn::maxpool_forward(cc.conv1_act.data(), f1, g.conv1_out, cfg.pool, cc.pool1_out.data(), cc.pool1_argmax.data());

    cc.conv2_pre.assign(f2 * g.conv2_out * g.conv2_out, 0.0);
    nn::conv_forward(cc.pool1_out.data(), f1, g.pool1_out, model.params.conv2_w.data.data(),
                     model.params.conv2_b.data.data(), f2, cfg.kernel, cc.conv2_pre.data());
    cc.conv2_act = cc.conv2_pre;
    nn::activate(cc.conv2_act.data(), cc.conv2_act.size(), cfg.activation);

    cc.pool2_out.assign(f2 * g.pool2_out * g.pool2_out, 0.0);
    cc.pool2_argmax.assign(f2 * g.pool2_out * g.pool2_out, 0);
    nn::maxpool_forward(cc.conv2_act.data(), f2, g.conv2_out, cfg.pool, cc.pool2_out.data(), cc.pool2_argmax.data());

    cc.fc1_pre.assign(cfg.fc_units, 0.0);
    nn::dense_forward(cc.pool2_out.data(), model.params.fc1_w.data.data(), model.params.fc1_b.data.data(),
                      cfg.fc_units, g.flatten, cc.fc1_pre.data());
    cc.fc1_act = cc.fc1_pre;
    nn::activate(cc.fc1_act.data(), cc.fc1_act.size(), cfg.activation);

    cc.logits.assign(cfg.classes, 0.0);
    nn::dense_forward(cc.fc1_act.data(), model.params.fc2_w.data.data(), model.params.fc2_b.data.data(), cfg.classes,
                      cfg.fc_units, cc.logits.data());
    return cc.logits;
}

struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LossAndGrads {
    double loss = 0.0;
    CnnGrads grads;
};

// Softmax cross-entropy loss and full backpropagation for one sample.
inline LossAndGrads loss_and_grads(const CnnModel& model, const GrayImage& image, std::size_t label) {
    const CnnConfig& cfg = model.cfg;
    const CnnGeometry& g = model.geom;
    if (label >= cfg.classes) throw std::invalid_argument("loss_and_grads: label out of range");

    ForwardCache cc;
    forward(model, image, &cc);
    std::vector<double> probs = nn::softmax(cc.logits);

    LossAndGrads out;
    out.loss = -std::log(std::max(probs[label], std::numeric_limits<double>::min()));
    if (!std::isfinite(out.loss)) {
        std::ostringstream diag;
        diag << "loss_and_grads: non-finite loss; layer max-abs:";
        auto max_abs = [](const std::vector<double>& v) {
            double m = 0.0;
            for (double x : v) m = std::max(m, std::abs(x));
            return m;
        };
        diag << " conv1=" << max_abs(cc.conv1_act) << " conv2=" << max_abs(cc.conv2_act)
             << " fc1=" << max_abs(cc.fc1_act) << " logits=" << max_abs(cc.logits);
        throw DivergenceError(diag.str());
    }
    out.grads = ParamBlock::shaped(cfg, g);

    // dL/dlogits = softmax - onehot
    std::vector<double> d_logits = probs;
    d_logits[label] -= 1.0;

    std::vector<double> d_fc1(cfg.fc_units, 0.0);
    nn::dense_backward(cc.fc1_act.data(), model.params.fc2_w.data.data(), cfg.classes, cfg.fc_units, d_logits.data(),
                       out.grads.fc2_w.data.data(), out.grads.fc2_b.data.data(), d_fc1.data());
    nn::activate_backward(d_fc1.data(), cc.fc1_pre.data(), cfg.fc_units, cfg.activation);

    std::vector<double> d_flatten(g.flatten, 0.0);
    nn::dense_backward(cc.pool2_out.data(), model.params.fc1_w.data.data(), cfg.fc_units, g.flatten, d_fc1.data(),
                       out.grads.fc1_w.data.data(), out.grads.fc1_b.data.data(), d_flatten.data());

    std::vector<double> d_conv2(cfg.conv2_filters * g.conv2_out * g.conv2_out, 0.0);
    nn::maxpool_backward(d_flatten.data(), cfg.conv2_filters, g.conv2_out, cfg.pool, cc.pool2_argmax.data(),
                         d_conv2.data());
    nn::activate_backward(d_conv2.data(), cc.conv2_pre.data(), d_conv2.size(), cfg.activation);

    std::vector<double> d_pool1(cfg.conv1_filters * g.pool1_out * g.pool1_out, 0.0);
    nn::conv_backward(cc.pool1_out.data(), cfg.conv1_filters, g.pool1_out, model.params.conv2_w.data.data(),
                      cfg.conv2_filters, cfg.kernel, d_conv2.data(), out.grads.conv2_w.data.data(),
                      out.grads.conv2_b.data.data(), d_pool1.data());

    std::vector<double> d_conv1(cfg.conv1_filters * g.conv1_out * g.conv1_out, 0.0);
    nn::maxpool_backward(d_pool1.data(), cfg.conv1_filters, g.conv1_out, cfg.pool, cc.pool1_argmax.data(),
                         d_conv1.data());
    nn::activate_backward(d_conv1.data(), cc.conv1_pre.data(), d_conv1.size(), cfg.activation);

    nn::conv_backward(cc.input.data(), 1, g.grid, model.params.conv1_w.data.data(), cfg.conv1_filters, cfg.kernel,
                      d_conv1.data(), out.grads.conv1_w.data.data(), out.grads.conv1_b.data.data(),
                      /*d_in=*/nullptr);
    return out;
}

inline void sgd_step(CnnModel& model, const CnnGrads& grads, double lr) {
    model.params.add_scaled(grads, -lr);
}

// ---------------------------------------------------------------------------
// Training and evaluation.
// ---------------------------------------------------------------------------

// Non-owning view used by the training and evaluation loops.
struct SampleView {
    const GrayImage* image;
    int label;
};
using SampleViews = std::vector<SampleView>;

struct EvalResult {
    double error_rate = 0.0;
    std::vector<std::size_t> confusion;  // classes x classes, row = true class
    std::size_t classes = 0;

    std::size_t at(std::size_t truth, std::size_t predicted) const { return confusion[truth * classes + predicted]; }
};

// Prediction = argmax logits, ties broken by the lowest class index.
inline std::size_t predict(const CnnModel& model, const GrayImage& image) {
    std::vector<double> logits = forward(model, image);
    std::size_t best = 0;
    for (std::size_t k = 1; k < logits.size(); ++k)
        if (logits[k] > logits[best]) best = k;
    return best;
}

inline EvalResult evaluate(const CnnModel& model, const SampleViews& dataset, std::size_t threads = 1) {
    if (dataset.empty()) throw std::invalid_argument("evaluate: empty dataset");
    const std::size_t classes = model.cfg.classes;
    std::vector<std::size_t> predictions(dataset.size());
    parallel_for(dataset.size(), threads, [&](std::size_t i) {
        predictions[i] = predict(model, *dataset[i].image);
    });

    EvalResult r;
    r.classes = classes;
    r.confusion.assign(classes * classes, 0);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        auto truth = static_cast<std::size_t>(dataset[i].label);
        ++r.confusion[truth * classes + predictions[i]];
        if (predictions[i] != truth) ++wrong;
    }
    r.error_rate = static_cast<double>(wrong) / static_cast<double>(dataset.size());
    return r;
}

struct HistoryRow {
    std::size_t epoch;
    double train_loss;
    double val_error;
};

struct TrainResult {
    std::vector<HistoryRow> history;
    bool diverged = false;
    std::size_t best_epoch = 0;
    double best_val_error = 1.0;
};

namespace detail {

inline std::vector<std::size_t> shuffled_indices(std::size_t n, RngStream rng) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = n; i > 1; --i) {  // Fisher-Yates, platform-stable
        std::size_t j = rng.next_below(i);
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

}  // namespace detail

// Mini-batch SGD: seeded shuffle each epoch, partial final batch kept,
// mean-over-batch gradients, early stopping on validation error with the
// configured patience, best-validation parameters restored on return.
// Per-sample gradients are always reduced in sample order, so any thread
// count reproduces the single-threaded parameters bit-for-bit. A diverged
// run (non-finite loss) stops immediately with the history preserved.
inline TrainResult train(CnnModel& model, const SampleViews& train_set, const SampleViews& val_set,
                         std::size_t threads = 1) {
    if (train_set.empty() || val_set.empty()) throw std::invalid_argument("train: empty train or validation set");
    const CnnConfig& cfg = model.cfg;
    for (const SampleView& s : train_set)
        if (s.label < 0 || static_cast<std::size_t>(s.label) >= cfg.classes)
            throw std::invalid_argument("train: label out of range");

    TrainResult result;
    ParamBlock best_params = model.params;
    std::size_t since_best = 0;

    RngStream shuffle_base(cfg.seed, /*stream_id=*/0x5A5A);
    std::vector<LossAndGrads> slots(std::min(cfg.batch, train_set.size()));

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::vector<std::size_t> order = detail::shuffled_indices(train_set.size(), shuffle_base.substream(epoch));
        double loss_sum = 0.0;
        bool diverged = false;

        for (std::size_t start = 0; start < order.size() && !diverged; start += cfg.batch) {
            const std::size_t count = std::min(cfg.batch, order.size() - start);
            try {
                parallel_for(count, threads, [&](std::size_t i) {
                    const SampleView& s = train_set[order[start + i]];
                    slots[i] = loss_and_grads(model, *s.image, static_cast<std::size_t>(s.label));
                });
            } catch (const DivergenceError&) {
                diverged = true;
                break;
            }

            CnnGrads batch_grads = ParamBlock::shaped(cfg, model.geom);
            for (std::size_t i = 0; i < count; ++i) {  // fixed-order reduction
                batch_grads.add_scaled(slots[i].grads, 1.0);
                loss_sum += slots[i].loss;
            }
            sgd_step(model, batch_grads, cfg.lr / static_cast<double>(count));
        }

        if (diverged) {
            result.diverged = true;
            break;
        }

        double train_loss = loss_sum / static_cast<double>(order.size());
        double val_error = evaluate(model, val_set, threads).error_rate;
        result.history.push_back({epoch, train_loss, val_error});

        if (val_error < result.best_val_error) {
            result.best_val_error = val_error;
            result.best_epoch = epoch;
            best_params = model.params;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }

    model.params = best_params;
    return result;
}

inline void write_history(const std::vector<HistoryRow>& history, std::ostream& out) {
    out << "epoch,train_loss,val_error\n";
    char buf[64];
    for (const HistoryRow& row : history) {
        out << row.epoch << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", row.train_loss);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", row.val_error);
        out << buf << '\n';
    }
}

inline void write_history(const std::vector<HistoryRow>& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write history: " + path);
    write_history(history, out);
}

// ---------------------------------------------------------------------------
// Checkpoints: versioned text header + config block, then the parameter
// tensors in declared order as little-endian 64-bit floats.
// ---------------------------------------------------------------------------
namespace detail {

inline void write_le_doubles(std::ostream& out, const std::vector<double>& v) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * 8));
    } else {
        for (double d : v) {
            std::uint64_t bits;
            std::memcpy(&bits, &d, 8);
            char b[8];
            for (int i = 0; i < 8; ++i) b[i] = static_cast<char>(bits >> (8 * i));
            out.write(b, 8);
        }
    }
}

inline void read_le_doubles(std::istream& in, std::vector<double>& v) {
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * 8));
    } else {
        for (double& d : v) {
            char b[8];
            in.read(b, 8);
            std::uint64_t bits = 0;
            for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
            std::memcpy(&d, &bits, 8);
        }
    }
    if (!in) throw std::runtime_error("checkpoint: truncated tensor data");
}

}  // namespace detail

inline void save_checkpoint(const CnnModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    const CnnConfig& c = model.cfg;
    out << "netclass-checkpoint v1\n";
    out << "grid=" << model.geom.grid << '\n';
    out << "conv1_filters=" << c.conv1_filters << '\n';
    out << "conv2_filters=" << c.conv2_filters << '\n';
    out << "kernel=" << c.kernel << '\n';
    out << "pool=" << c.pool << '\n';
    out << "fc_units=" << c.fc_units << '\n';
    out << "classes=" << c.classes << '\n';
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", c.lr);
    out << "lr=" << buf << '\n';
    out << "batch=" << c.batch << '\n';
    out << "epochs=" << c.epochs << '\n';
    out << "patience=" << c.patience << '\n';
    out << "activation=" << to_string(c.activation) << '\n';
    out << "seed=" << c.seed << '\n';
    out << "end-config\n";

    auto tensors = model.params.tensors();
    auto names = ParamBlock::tensor_names();
    out << "tensors " << tensors.size() << '\n';
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        out << names[i];
        for (std::size_t d : tensors[i]->shape) out << ' ' << d;
        out << '\n';
        detail::write_le_doubles(out, tensors[i]->data);
    }
}

inline CnnModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "netclass-checkpoint v1")
        throw std::runtime_error("checkpoint: bad magic/version in " + path);

    CnnConfig cfg;
    std::size_t grid = 0;
    while (std::getline(in, line) && line != "end-config") {
        auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("checkpoint: malformed config line `" + line + "`");
        std::string key = line.substr(0, eq), value = line.substr(eq + 1);
        if (key == "grid") grid = std::stoull(value);
        else if (key == "conv1_filters") cfg.conv1_filters = std::stoull(value);
        else if (key == "conv2_filters") cfg.conv2_filters = std::stoull(value);
        else if (key == "kernel") cfg.kernel = std::stoull(value);
        else if (key == "pool") cfg.pool = std::stoull(value);
        else if (key == "fc_units") cfg.fc_units = std::stoull(value);
        else if (key == "classes") cfg.classes = std::stoull(value);
        else if (key == "lr") cfg.lr = std::stod(value);
        else if (key == "batch") cfg.batch = std::stoull(value);
        else if (key == "epochs") cfg.epochs = std::stoull(value);
        else if (key == "patience") cfg.patience = std::stoull(value);
        else if (key == "activation") cfg.activation = activation_from_string(value);
        else if (key == "seed") cfg.seed = std::stoull(value);
        else throw std::runtime_error("checkpoint: unknown config key `" + key + "`");
    }

    CnnModel model;
    model.cfg = cfg;
    model.geom = CnnGeometry::derive(cfg, grid);
    model.params = ParamBlock::shaped(cfg, model.geom);

    if (!std::getline(in, line)) throw std::runtime_error("checkpoint: missing tensor count");
    std::istringstream hdr(line);
    std::string word;
    std::size_t tensor_count = 0;
    hdr >> word >> tensor_count;
    auto tensors = model.params.tensors();
    auto names = ParamBlock::tensor_names();
    if (word != "tensors" || tensor_count != tensors.size())
        throw std::runtime_error("checkpoint: unexpected tensor table");

    for (std::size_t i = 0; i < tensors.size(); ++i) {
        if (!std::getline(in, line)) throw std::runtime_error("checkpoint: missing tensor header");
        std::istringstream ts(line);
        std::string name;
        ts >> name;
        if (name != names[i]) throw std::runtime_error("checkpoint: tensor order mismatch at `" + name + "`");
        std::vector<std::size_t> shape;
        std::size_t d;
        while (ts >> d) shape.push_back(d);
        if (shape != tensors[i]->shape) throw std::runtime_error("checkpoint: shape mismatch for `" + name + "`");
        detail::read_le_doubles(in, tensors[i]->data);
    }
    return model;
}

}  // namespace netclass
