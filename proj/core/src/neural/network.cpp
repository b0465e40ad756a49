#include "epicast/neural/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "epicast/error.hpp"

namespace epicast::neural {

namespace {

using Eigen::Index;
using Mat = Eigen::MatrixXd;  // features x batch
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMat>;
using RowMap = Eigen::Map<RowMat>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;

constexpr double kInitRange = 0.05;

Index as_index(std::size_t n) { return static_cast<Index>(n); }

Mat sigmoid(const Mat& x) { return (1.0 / (1.0 + (-x.array()).exp())).matrix(); }

ConstRowMap matrix_view(const NamedTensor& t, std::size_t rows, std::size_t cols) {
    return {t.values.data(), as_index(rows), as_index(cols)};
}
RowMap matrix_view(NamedTensor& t, std::size_t rows, std::size_t cols) {
    return {t.values.data(), as_index(rows), as_index(cols)};
}
ConstVecMap vector_view(const NamedTensor& t) { return {t.values.data(), as_index(t.values.size())}; }
VecMap vector_view(NamedTensor& t) { return {t.values.data(), as_index(t.values.size())}; }

// ---------------------------------------------------------------------------
// Dense LSTM layer

struct LstmStep {
    Mat i, f, g, o, c, tanh_c, h;
};

template <typename WxMap, typename WhMap, typename BMap>
LstmStep lstm_step(const WxMap& wx, const WhMap& wh, const BMap& b, const Mat& x,
                   const Mat& h_prev, const Mat& c_prev) {
    const Index hidden = wh.cols();
    Mat pre = wx * x + wh * h_prev;
    pre.colwise() += b;
    LstmStep s;
    s.i = sigmoid(pre.topRows(hidden));
    s.f = sigmoid(pre.middleRows(hidden, hidden));
    s.g = pre.middleRows(2 * hidden, hidden).array().tanh().matrix();
    s.o = sigmoid(pre.bottomRows(hidden));
    s.c = s.f.cwiseProduct(c_prev) + s.i.cwiseProduct(s.g);
    s.tanh_c = s.c.array().tanh().matrix();
    s.h = s.o.cwiseProduct(s.tanh_c);
    return s;
}

struct LstmLayer {
    const NamedTensor* wx;
    const NamedTensor* wh;
    const NamedTensor* b;
    std::size_t input_dim;
    std::size_t hidden;
};

LstmLayer bind_lstm(const ParameterSet& weights, const std::string& prefix) {
    const auto& wx = find_tensor(weights, prefix + ".input_weights");
    const auto& wh = find_tensor(weights, prefix + ".recurrent_weights");
    const auto& b = find_tensor(weights, prefix + ".bias");
    return {&wx, &wh, &b, wx.shape.at(2), wh.shape.at(1)};
}

struct LstmCache {
    std::vector<Mat> inputs;
    std::vector<LstmStep> steps;

    [[nodiscard]] const Mat& last_h() const { return steps.back().h; }
};

LstmCache lstm_forward(const LstmLayer& layer, std::vector<Mat> xs) {
    const auto wx = matrix_view(*layer.wx, 4 * layer.hidden, layer.input_dim);
    const auto wh = matrix_view(*layer.wh, 4 * layer.hidden, layer.hidden);
    const auto b = vector_view(*layer.b);
    const Index batch = xs.front().cols();
    LstmCache cache;
    cache.inputs = std::move(xs);
    Mat h = Mat::Zero(as_index(layer.hidden), batch);
    Mat c = Mat::Zero(as_index(layer.hidden), batch);
    for (const auto& x : cache.inputs) {
        cache.steps.push_back(lstm_step(wx, wh, b, x, h, c));
        h = cache.steps.back().h;
        c = cache.steps.back().c;
    }
    return cache;
}

// Backpropagation through time. d_hidden[t] is dL/dh_t from above (may be empty = zero).
std::vector<Mat> lstm_backward(const LstmLayer& layer, const LstmCache& cache,
                               const std::vector<Mat>& d_hidden, ParameterSet& grads,
                               const std::string& prefix, bool want_input_grads) {
    const std::size_t hidden = layer.hidden;
    const auto wx = matrix_view(*layer.wx, 4 * hidden, layer.input_dim);
    const auto wh = matrix_view(*layer.wh, 4 * hidden, hidden);
    auto gwx = matrix_view(find_tensor(grads, prefix + ".input_weights"), 4 * hidden,
                           layer.input_dim);
    auto gwh = matrix_view(find_tensor(grads, prefix + ".recurrent_weights"), 4 * hidden, hidden);
    auto gb = vector_view(find_tensor(grads, prefix + ".bias"));

    const std::size_t steps = cache.steps.size();
    const Index batch = cache.inputs.front().cols();
    const Index h_rows = as_index(hidden);
    Mat dh_next = Mat::Zero(h_rows, batch);
    Mat dc_next = Mat::Zero(h_rows, batch);
    const Mat zeros = Mat::Zero(h_rows, batch);
    std::vector<Mat> d_inputs(want_input_grads ? steps : 0);
    Mat d_pre(4 * h_rows, batch);

    for (std::size_t t = steps; t-- > 0;) {
        const auto& s = cache.steps[t];
        const Mat& c_prev = t > 0 ? cache.steps[t - 1].c : zeros;
        const Mat& h_prev = t > 0 ? cache.steps[t - 1].h : zeros;
        Mat dh = dh_next;
        if (t < d_hidden.size() && d_hidden[t].size() > 0) dh += d_hidden[t];

        const Mat d_o = dh.cwiseProduct(s.tanh_c);
        const Mat dc = dh.cwiseProduct(s.o).cwiseProduct(
                           (1.0 - s.tanh_c.array().square()).matrix()) +
                       dc_next;
        d_pre.topRows(h_rows) =
            dc.cwiseProduct(s.g).cwiseProduct(s.i.cwiseProduct((1.0 - s.i.array()).matrix()));
        d_pre.middleRows(h_rows, h_rows) =
            dc.cwiseProduct(c_prev).cwiseProduct(s.f.cwiseProduct((1.0 - s.f.array()).matrix()));
        d_pre.middleRows(2 * h_rows, h_rows) =
            dc.cwiseProduct(s.i).cwiseProduct((1.0 - s.g.array().square()).matrix());
        d_pre.bottomRows(h_rows) =
            d_o.cwiseProduct(s.o.cwiseProduct((1.0 - s.o.array()).matrix()));
        dc_next = dc.cwiseProduct(s.f);

        gwx.noalias() += d_pre * cache.inputs[t].transpose();
        gwh.noalias() += d_pre * h_prev.transpose();
        gb += d_pre.rowwise().sum();
        dh_next.noalias() = wh.transpose() * d_pre;
        if (want_input_grads) d_inputs[t].noalias() = wx.transpose() * d_pre;
    }
    return d_inputs;
}

// ---------------------------------------------------------------------------
// Conv1d + ReLU + max pool (CnnLstm front end)

struct ConvPoolCache {
    Mat input;                     // L x B
    std::vector<Mat> activation;   // per conv position: n_f x B, pre-ReLU
    std::vector<Eigen::MatrixXi> argmax;  // per pooled position: n_f x B conv position
    Mat features;                  // R * n_f x B
};

std::vector<Mat> conv_preactivation(const ConstRowMap& kernels, const ConstVecMap& bias,
                                    const Mat& input) {
    const Index width = kernels.cols();
    const Index positions = input.rows() - width + 1;
    std::vector<Mat> out;
    out.reserve(static_cast<std::size_t>(positions));
    for (Index j = 0; j < positions; ++j) {
        Mat a = kernels * input.middleRows(j, width);
        a.colwise() += bias;
        out.push_back(std::move(a));
    }
    return out;
}

ConvPoolCache conv_pool_forward(const NetworkConfig& config, const ParameterSet& weights,
                                Mat input) {
    const auto& k = find_tensor(weights, "conv.kernels");
    const auto kernels = matrix_view(k, config.n_f, config.kernel_size);
    const auto bias = vector_view(find_tensor(weights, "conv.bias"));
    ConvPoolCache cache;
    cache.input = std::move(input);
    cache.activation = conv_preactivation(kernels, bias, cache.input);
    const Index filters = as_index(config.n_f);
    const Index batch = cache.input.cols();
    const std::size_t conv_len = cache.activation.size();
    const std::size_t pooled = (conv_len + config.pool_size - 1) / config.pool_size;
    cache.features.resize(as_index(pooled) * filters, batch);
    for (std::size_t r = 0; r < pooled; ++r) {
        Eigen::MatrixXi arg(filters, batch);
        const std::size_t begin = r * config.pool_size;
        const std::size_t end = std::min(begin + config.pool_size, conv_len);
        for (Index f = 0; f < filters; ++f) {
            for (Index b = 0; b < batch; ++b) {
                std::size_t best = begin;
                for (std::size_t j = begin + 1; j < end; ++j) {
                    if (cache.activation[j](f, b) > cache.activation[best](f, b)) best = j;
                }
                arg(f, b) = static_cast<int>(best);
                cache.features(as_index(r) * filters + f, b) =
                    std::max(0.0, cache.activation[best](f, b));
            }
        }
        cache.argmax.push_back(std::move(arg));
    }
    return cache;
}

void conv_pool_backward(const NetworkConfig& config, const ConvPoolCache& cache,
                        const Mat& d_features, ParameterSet& grads) {
    auto gk = matrix_view(find_tensor(grads, "conv.kernels"), config.n_f, config.kernel_size);
    auto gb = vector_view(find_tensor(grads, "conv.bias"));
    const Index filters = as_index(config.n_f);
    const Index batch = cache.input.cols();
    std::vector<Mat> d_act(cache.activation.size(), Mat::Zero(filters, batch));
    for (std::size_t r = 0; r < cache.argmax.size(); ++r) {
        for (Index f = 0; f < filters; ++f) {
            for (Index b = 0; b < batch; ++b) {
                const auto j = static_cast<std::size_t>(cache.argmax[r](f, b));
                if (cache.activation[j](f, b) > 0.0) {
                    d_act[j](f, b) += d_features(as_index(r) * filters + f, b);
                }
            }
        }
    }
    const Index width = as_index(config.kernel_size);
    for (std::size_t j = 0; j < d_act.size(); ++j) {
        gk.noalias() += d_act[j] * cache.input.middleRows(as_index(j), width).transpose();
        gb += d_act[j].rowwise().sum();
    }
}

// ---------------------------------------------------------------------------
// ConvLSTM layer: per-position state, gate pre-activations by same-padded convolution.

struct ConvLstmTaps {
    std::size_t in_channels = 0;
    std::size_t filters = 0;
    std::size_t kernel_size = 0;
    std::vector<Mat> input;      // per tap: 4F x Cin
    std::vector<Mat> recurrent;  // per tap: 4F x F
    Eigen::VectorXd bias;        // 4F

    [[nodiscard]] Index pad_left() const { return (as_index(kernel_size) - 1) / 2; }
};

std::vector<Mat> unpack_taps(std::span<const double> values, std::size_t rows, std::size_t cols,
                             std::size_t kernel_size) {
    std::vector<Mat> taps(kernel_size, Mat(as_index(rows), as_index(cols)));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            for (std::size_t k = 0; k < kernel_size; ++k)
                taps[k](as_index(r), as_index(c)) = values[(r * cols + c) * kernel_size + k];
    return taps;
}

void accumulate_taps(const std::vector<Mat>& taps, std::span<double> values) {
    const auto kernel_size = taps.size();
    const auto rows = static_cast<std::size_t>(taps.front().rows());
    const auto cols = static_cast<std::size_t>(taps.front().cols());
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            for (std::size_t k = 0; k < kernel_size; ++k)
                values[(r * cols + c) * kernel_size + k] += taps[k](as_index(r), as_index(c));
}

ConvLstmTaps make_taps(std::size_t in_channels, std::size_t filters, std::size_t kernel_size,
                       std::span<const double> input_kernels,
                       std::span<const double> recurrent_kernels, std::span<const double> bias) {
    ConvLstmTaps taps;
    taps.in_channels = in_channels;
    taps.filters = filters;
    taps.kernel_size = kernel_size;
    taps.input = unpack_taps(input_kernels, 4 * filters, in_channels, kernel_size);
    taps.recurrent = unpack_taps(recurrent_kernels, 4 * filters, filters, kernel_size);
    taps.bias = Eigen::Map<const Eigen::VectorXd>(bias.data(), as_index(bias.size()));
    return taps;
}

struct ConvLstmStep {
    std::vector<LstmStep> positions;
};

// x, h_prev, c_prev: one matrix per frame position (channels x batch).
ConvLstmStep convlstm_step(const ConvLstmTaps& taps, const std::vector<Mat>& x,
                           const std::vector<Mat>& h_prev, const std::vector<Mat>& c_prev) {
    const Index width = as_index(x.size());
    const Index hidden = as_index(taps.filters);
    const Index pad = taps.pad_left();
    const Index batch = x.front().cols();
    ConvLstmStep out;
    for (Index p = 0; p < width; ++p) {
        Mat pre = Mat::Zero(4 * hidden, batch);
        for (Index k = 0; k < as_index(taps.kernel_size); ++k) {
            const Index q = p + k - pad;
            if (q < 0 || q >= width) continue;
            pre.noalias() += taps.input[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(q)];
            pre.noalias() +=
                taps.recurrent[static_cast<std::size_t>(k)] * h_prev[static_cast<std::size_t>(q)];
        }
        pre.colwise() += taps.bias;
        LstmStep s;
        s.i = sigmoid(pre.topRows(hidden));
        s.f = sigmoid(pre.middleRows(hidden, hidden));
        s.g = pre.middleRows(2 * hidden, hidden).array().tanh().matrix();
        s.o = sigmoid(pre.bottomRows(hidden));
        s.c = s.f.cwiseProduct(c_prev[static_cast<std::size_t>(p)]) + s.i.cwiseProduct(s.g);
        s.tanh_c = s.c.array().tanh().matrix();
        s.h = s.o.cwiseProduct(s.tanh_c);
        out.positions.push_back(std::move(s));
    }
    return out;
}

struct ConvLstmCache {
    ConvLstmTaps taps;
    std::vector<std::vector<Mat>> inputs;  // per frame, per position
    std::vector<ConvLstmStep> steps;
};

ConvLstmTaps bind_convlstm(const NetworkConfig& config, const ParameterSet& weights) {
    return make_taps(1, config.n_f, config.kernel_size,
                     find_tensor(weights, "convlstm.input_kernels").values,
                     find_tensor(weights, "convlstm.recurrent_kernels").values,
                     find_tensor(weights, "convlstm.bias").values);
}

ConvLstmCache convlstm_forward(ConvLstmTaps taps, std::vector<std::vector<Mat>> frames) {
    ConvLstmCache cache;
    cache.taps = std::move(taps);
    cache.inputs = std::move(frames);
    const std::size_t width = cache.inputs.front().size();
    const Index batch = cache.inputs.front().front().cols();
    const Index hidden = as_index(cache.taps.filters);
    std::vector<Mat> h(width, Mat::Zero(hidden, batch));
    std::vector<Mat> c(width, Mat::Zero(hidden, batch));
    for (const auto& frame : cache.inputs) {
        cache.steps.push_back(convlstm_step(cache.taps, frame, h, c));
        for (std::size_t p = 0; p < width; ++p) {
            h[p] = cache.steps.back().positions[p].h;
            c[p] = cache.steps.back().positions[p].c;
        }
    }
    return cache;
}

// d_last_hidden: dL/dh of the final frame, one matrix per position.
void convlstm_backward(const ConvLstmCache& cache, const std::vector<Mat>& d_last_hidden,
                       ParameterSet& grads) {
    const auto& taps = cache.taps;
    const std::size_t width = d_last_hidden.size();
    const Index hidden = as_index(taps.filters);
    const Index batch = d_last_hidden.front().cols();
    const Index pad = taps.pad_left();
    const Mat zeros = Mat::Zero(hidden, batch);

    std::vector<Mat> g_input(taps.kernel_size, Mat::Zero(4 * hidden, as_index(taps.in_channels)));
    std::vector<Mat> g_recurrent(taps.kernel_size, Mat::Zero(4 * hidden, hidden));
    Eigen::VectorXd g_bias = Eigen::VectorXd::Zero(4 * hidden);

    std::vector<Mat> dh_next = d_last_hidden;
    std::vector<Mat> dc_next(width, zeros);
    std::vector<Mat> d_pre(width, Mat(4 * hidden, batch));
    for (std::size_t t = cache.steps.size(); t-- > 0;) {
        const auto& step = cache.steps[t];
        for (std::size_t p = 0; p < width; ++p) {
            const auto& s = step.positions[p];
            const Mat& c_prev = t > 0 ? cache.steps[t - 1].positions[p].c : zeros;
            const Mat& dh = dh_next[p];
            const Mat d_o = dh.cwiseProduct(s.tanh_c);
            const Mat dc = dh.cwiseProduct(s.o).cwiseProduct(
                               (1.0 - s.tanh_c.array().square()).matrix()) +
                           dc_next[p];
            auto& dp = d_pre[p];
            dp.topRows(hidden) =
                dc.cwiseProduct(s.g).cwiseProduct(s.i.cwiseProduct((1.0 - s.i.array()).matrix()));
            dp.middleRows(hidden, hidden) = dc.cwiseProduct(c_prev).cwiseProduct(
                s.f.cwiseProduct((1.0 - s.f.array()).matrix()));
            dp.middleRows(2 * hidden, hidden) =
                dc.cwiseProduct(s.i).cwiseProduct((1.0 - s.g.array().square()).matrix());
            dp.bottomRows(hidden) =
                d_o.cwiseProduct(s.o.cwiseProduct((1.0 - s.o.array()).matrix()));
            dc_next[p] = dc.cwiseProduct(s.f);
            g_bias += dp.rowwise().sum();
        }
        std::vector<Mat> dh_prev(width, zeros);
        for (std::size_t p = 0; p < width; ++p) {
            for (Index k = 0; k < as_index(taps.kernel_size); ++k) {
                const Index q = as_index(p) + k - pad;
                if (q < 0 || q >= as_index(width)) continue;
                const auto kk = static_cast<std::size_t>(k);
                const auto qq = static_cast<std::size_t>(q);
                g_input[kk].noalias() += d_pre[p] * cache.inputs[t][qq].transpose();
                if (t > 0) {
                    g_recurrent[kk].noalias() +=
                        d_pre[p] * cache.steps[t - 1].positions[qq].h.transpose();
                    dh_prev[qq].noalias() += taps.recurrent[kk].transpose() * d_pre[p];
                }
            }
        }
        dh_next = std::move(dh_prev);
    }
    accumulate_taps(g_input, find_tensor(grads, "convlstm.input_kernels").values);
    accumulate_taps(g_recurrent, find_tensor(grads, "convlstm.recurrent_kernels").values);
    vector_view(find_tensor(grads, "convlstm.bias")) += g_bias;
}

// ---------------------------------------------------------------------------
// Whole-network forward/backward

struct ForwardCache {
    Mat input;  // n_s x B, scaled
    std::vector<LstmCache> lstm;
    std::vector<ConvPoolCache> conv;
    std::optional<ConvLstmCache> convlstm;
    Mat features;  // head input
    Mat output;    // 1 x B
};

std::vector<Mat> rows_as_steps(const Mat& input) {
    std::vector<Mat> xs;
    for (Index t = 0; t < input.rows(); ++t) xs.emplace_back(input.row(t));
    return xs;
}

ForwardCache network_forward(const NetworkModel& model, Mat input) {
    const auto& config = model.config;
    const auto& w = model.weights;
    ForwardCache cache;
    cache.input = std::move(input);
    switch (config.architecture) {
        case Architecture::Vanilla: {
            cache.lstm.push_back(lstm_forward(bind_lstm(w, "lstm0"), rows_as_steps(cache.input)));
            cache.features = cache.lstm[0].last_h();
            break;
        }
        case Architecture::Stacked: {
            cache.lstm.push_back(lstm_forward(bind_lstm(w, "lstm0"), rows_as_steps(cache.input)));
            std::vector<Mat> hs;
            for (const auto& s : cache.lstm[0].steps) hs.push_back(s.h);
            cache.lstm.push_back(lstm_forward(bind_lstm(w, "lstm1"), std::move(hs)));
            cache.features = cache.lstm[1].last_h();
            break;
        }
        case Architecture::Bidirectional: {
            auto xs = rows_as_steps(cache.input);
            cache.lstm.push_back(lstm_forward(bind_lstm(w, "forward"), xs));
            std::reverse(xs.begin(), xs.end());
            cache.lstm.push_back(lstm_forward(bind_lstm(w, "backward"), std::move(xs)));
            const Index hidden = cache.lstm[0].last_h().rows();
            cache.features.resize(2 * hidden, cache.input.cols());
            cache.features.topRows(hidden) = cache.lstm[0].last_h();
            cache.features.bottomRows(hidden) = cache.lstm[1].last_h();
            break;
        }
        case Architecture::CnnLstm: {
            const Index length = as_index(config.n_s / config.subsequences);
            std::vector<Mat> sequence;
            for (std::size_t s = 0; s < config.subsequences; ++s) {
                cache.conv.push_back(conv_pool_forward(
                    config, w, cache.input.middleRows(as_index(s) * length, length)));
                sequence.push_back(cache.conv.back().features);
            }
            cache.lstm.push_back(lstm_forward(bind_lstm(w, "lstm0"), std::move(sequence)));
            cache.features = cache.lstm[0].last_h();
            break;
        }
        case Architecture::ConvLstm: {
            const std::size_t width = config.n_s / config.subsequences;
            std::vector<std::vector<Mat>> frames;
            for (std::size_t s = 0; s < config.subsequences; ++s) {
                std::vector<Mat> frame;
                for (std::size_t p = 0; p < width; ++p) {
                    frame.emplace_back(cache.input.row(as_index(s * width + p)));
                }
                frames.push_back(std::move(frame));
            }
            cache.convlstm = convlstm_forward(bind_convlstm(config, w), std::move(frames));
            const auto& last = cache.convlstm->steps.back().positions;
            const Index hidden = as_index(config.n_f);
            cache.features.resize(as_index(width) * hidden, cache.input.cols());
            for (std::size_t p = 0; p < width; ++p) {
                cache.features.middleRows(as_index(p) * hidden, hidden) = last[p].h;
            }
            break;
        }
    }
    const auto& head_w = find_tensor(w, "output.weights");
    const auto head = matrix_view(head_w, 1, head_w.values.size());
    cache.output = head * cache.features;
    cache.output.array() += find_tensor(w, "output.bias").values.front();
    return cache;
}

void network_backward(const NetworkModel& model, const ForwardCache& cache, const Mat& d_output,
                      ParameterSet& grads) {
    const auto& config = model.config;
    const auto& w = model.weights;
    const auto& head_w = find_tensor(w, "output.weights");
    const auto head = matrix_view(head_w, 1, head_w.values.size());
    auto g_head = matrix_view(find_tensor(grads, "output.weights"), 1, head_w.values.size());
    g_head.noalias() += d_output * cache.features.transpose();
    find_tensor(grads, "output.bias").values.front() += d_output.sum();
    const Mat d_features = head.transpose() * d_output;

    const auto last_only = [](std::size_t steps, const Mat& d_last) {
        std::vector<Mat> d(steps);
        d.back() = d_last;
        return d;
    };

    switch (config.architecture) {
        case Architecture::Vanilla: {
            const auto& c = cache.lstm[0];
            lstm_backward(bind_lstm(w, "lstm0"), c, last_only(c.steps.size(), d_features), grads,
                          "lstm0", false);
            break;
        }
        case Architecture::Stacked: {
            const auto& top = cache.lstm[1];
            const auto d_lower = lstm_backward(bind_lstm(w, "lstm1"), top,
                                               last_only(top.steps.size(), d_features), grads,
                                               "lstm1", true);
            lstm_backward(bind_lstm(w, "lstm0"), cache.lstm[0], d_lower, grads, "lstm0", false);
            break;
        }
        case Architecture::Bidirectional: {
            const Index hidden = cache.lstm[0].last_h().rows();
            const auto& fwd = cache.lstm[0];
            const auto& bwd = cache.lstm[1];
            lstm_backward(bind_lstm(w, "forward"), fwd,
                          last_only(fwd.steps.size(), d_features.topRows(hidden)), grads,
                          "forward", false);
            lstm_backward(bind_lstm(w, "backward"), bwd,
                          last_only(bwd.steps.size(), d_features.bottomRows(hidden)), grads,
                          "backward", false);
            break;
        }
        case Architecture::CnnLstm: {
            const auto& c = cache.lstm[0];
            const auto d_sequence = lstm_backward(bind_lstm(w, "lstm0"), c,
                                                  last_only(c.steps.size(), d_features), grads,
                                                  "lstm0", true);
            for (std::size_t s = 0; s < cache.conv.size(); ++s) {
                conv_pool_backward(config, cache.conv[s], d_sequence[s], grads);
            }
            break;
        }
        case Architecture::ConvLstm: {
            const Index hidden = as_index(config.n_f);
            const std::size_t width = config.n_s / config.subsequences;
            std::vector<Mat> d_last;
            for (std::size_t p = 0; p < width; ++p) {
                d_last.emplace_back(d_features.middleRows(as_index(p) * hidden, hidden));
            }
            convlstm_backward(*cache.convlstm, d_last, grads);
            break;
        }
    }
}

struct ScaledBatch {
    Mat inputs;   // n_s x B
    Mat targets;  // 1 x B
};

ScaledBatch scale_batch(const NetworkModel& model, std::span<const TrainingExample> batch) {
    const std::size_t n_s = model.config.n_s;
    ScaledBatch out{Mat(as_index(n_s), as_index(batch.size())), Mat(1, as_index(batch.size()))};
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto& ex = batch[b];
        if (ex.window.size() != n_s) {
            throw Error(ErrorKind::WindowLengthMismatch,
                        fmt::format("window of {} for a network with n_s = {}", ex.window.size(),
                                    n_s));
        }
        const double scale = window_scale(ex.window, model.scaling);
        for (std::size_t t = 0; t < n_s; ++t) {
            out.inputs(as_index(t), as_index(b)) = ex.window[t] / scale;
        }
        out.targets(0, as_index(b)) = ex.target / scale;
    }
    return out;
}

void append_lstm(ParameterSet& set, const std::string& prefix, std::size_t input_dim,
                 std::size_t hidden) {
    set.push_back({prefix + ".input_weights", {4, hidden, input_dim}, {}});
    set.push_back({prefix + ".recurrent_weights", {4, hidden, hidden}, {}});
    set.push_back({prefix + ".bias", {4, hidden}, {}});
}

std::size_t element_count(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

void require_size(std::size_t actual, std::size_t expected, std::string_view what) {
    if (actual != expected) {
        throw Error(ErrorKind::ShapeMismatch,
                    fmt::format("{} has {} values, expected {}", what, actual, expected));
    }
}

}  // namespace

std::string_view to_string(Architecture architecture) noexcept {
    switch (architecture) {
        case Architecture::Vanilla: return "vanilla";
        case Architecture::Stacked: return "stacked";
        case Architecture::Bidirectional: return "bidirectional";
        case Architecture::CnnLstm: return "cnn_lstm";
        case Architecture::ConvLstm: return "conv_lstm";
    }
    return "unknown";
}

std::optional<Architecture> parse_architecture(std::string_view name) noexcept {
    for (auto a : {Architecture::Vanilla, Architecture::Stacked, Architecture::Bidirectional,
                   Architecture::CnnLstm, Architecture::ConvLstm}) {
        if (to_string(a) == name) return a;
    }
    return std::nullopt;
}

NetworkConfig NetworkConfig::for_architecture(Architecture architecture, std::size_t n_s) {
    NetworkConfig config;
    config.architecture = architecture;
    config.n_s = n_s;
    config.n_n = architecture == Architecture::Vanilla ? 100 : 50;
    config.n_f = 64;
    if (architecture == Architecture::CnnLstm) {
        config.subsequences = n_s % 2 == 0 ? 2 : 1;
        const std::size_t length = n_s / config.subsequences;
        config.kernel_size = std::min<std::size_t>(2, length);
        config.pool_size = std::min<std::size_t>(2, length - config.kernel_size + 1);
    } else if (architecture == Architecture::ConvLstm) {
        config.subsequences = 1;
        config.kernel_size = std::min<std::size_t>(3, n_s);
        config.pool_size = 1;
    }
    return config;
}

void NetworkConfig::validate() const {
    if (n_s == 0 || n_n == 0 || n_f == 0 || kernel_size == 0 || pool_size == 0 ||
        subsequences == 0 || epochs == 0 || !(learning_rate > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "network sizes and learning rate must be positive");
    }
    if (architecture == Architecture::CnnLstm || architecture == Architecture::ConvLstm) {
        if (n_s % subsequences != 0) {
            throw Error(ErrorKind::InvalidArgument,
                        fmt::format("{} subsequences do not divide n_s = {}", subsequences, n_s));
        }
        if (kernel_size > n_s / subsequences) {
            throw Error(ErrorKind::KernelTooWide,
                        fmt::format("kernel of {} exceeds subsequence length {}", kernel_size,
                                    n_s / subsequences));
        }
    }
}

const NamedTensor& find_tensor(const ParameterSet& set, std::string_view name) {
    for (const auto& t : set) {
        if (t.name == name) return t;
    }
    throw Error(ErrorKind::ShapeMismatch, fmt::format("no tensor named '{}'", name));
}

NamedTensor& find_tensor(ParameterSet& set, std::string_view name) {
    for (auto& t : set) {
        if (t.name == name) return t;
    }
    throw Error(ErrorKind::ShapeMismatch, fmt::format("no tensor named '{}'", name));
}

ParameterSet zeros_like(const ParameterSet& set) {
    ParameterSet out = set;
    for (auto& t : out) std::fill(t.values.begin(), t.values.end(), 0.0);
    return out;
}

bool same_layout(const ParameterSet& a, const ParameterSet& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].name != b[i].name || a[i].shape != b[i].shape ||
            a[i].values.size() != b[i].values.size()) {
            return false;
        }
    }
    return true;
}

ParameterSet parameter_layout(const NetworkConfig& config) {
    config.validate();
    ParameterSet set;
    std::size_t head_inputs = config.n_n;
    switch (config.architecture) {
        case Architecture::Vanilla:
            append_lstm(set, "lstm0", 1, config.n_n);
            break;
        case Architecture::Stacked:
            append_lstm(set, "lstm0", 1, config.n_n);
            append_lstm(set, "lstm1", config.n_n, config.n_n);
            break;
        case Architecture::Bidirectional:
            append_lstm(set, "forward", 1, config.n_n);
            append_lstm(set, "backward", 1, config.n_n);
            head_inputs = 2 * config.n_n;
            break;
        case Architecture::CnnLstm: {
            const std::size_t conv_len = config.n_s / config.subsequences - config.kernel_size + 1;
            const std::size_t pooled = (conv_len + config.pool_size - 1) / config.pool_size;
            set.push_back({"conv.kernels", {config.n_f, config.kernel_size}, {}});
            set.push_back({"conv.bias", {config.n_f}, {}});
            append_lstm(set, "lstm0", pooled * config.n_f, config.n_n);
            break;
        }
        case Architecture::ConvLstm:
            set.push_back({"convlstm.input_kernels", {4, config.n_f, 1, config.kernel_size}, {}});
            set.push_back(
                {"convlstm.recurrent_kernels", {4, config.n_f, config.n_f, config.kernel_size}, {}});
            set.push_back({"convlstm.bias", {4, config.n_f}, {}});
            head_inputs = config.n_s / config.subsequences * config.n_f;
            break;
    }
    set.push_back({"output.weights", {1, head_inputs}, {}});
    set.push_back({"output.bias", {1}, {}});
    for (auto& t : set) t.values.assign(element_count(t.shape), 0.0);
    return set;
}

NetworkModel initialize_model(const NetworkConfig& config) {
    NetworkModel model{config, parameter_layout(config), Scaling::LastValue};
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> dist(-kInitRange, kInitRange);
    for (auto& t : model.weights) {
        for (auto& v : t.values) v = dist(rng);
    }
    return model;
}

double window_scale(std::span<const double> window, Scaling scaling) noexcept {
    if (scaling == Scaling::None || window.empty()) return 1.0;
    const double last = window.back();
    return last > 0.0 && std::isfinite(last) ? last : 1.0;
}

double model_forward(const NetworkModel& model, std::span<const double> window) {
    if (window.size() != model.config.n_s) {
        throw Error(ErrorKind::WindowLengthMismatch,
                    fmt::format("window of {} for a network with n_s = {}", window.size(),
                                model.config.n_s));
    }
    const double scale = window_scale(window, model.scaling);
    Mat input(as_index(window.size()), 1);
    for (std::size_t t = 0; t < window.size(); ++t) input(as_index(t), 0) = window[t] / scale;
    const auto cache = network_forward(model, std::move(input));
    return cache.output(0, 0) * scale;
}

double mse_loss(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size() || predictions.empty()) {
        throw Error(ErrorKind::LengthMismatch,
                    fmt::format("{} predictions vs {} targets", predictions.size(),
                                targets.size()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double diff = predictions[i] - targets[i];
        sum += diff * diff;
    }
    return sum / static_cast<double>(predictions.size());
}

LossGradients backward(const NetworkModel& model, std::span<const TrainingExample> batch) {
    if (batch.empty()) {
        throw Error(ErrorKind::InvalidArgument, "empty training batch");
    }
    auto scaled = scale_batch(model, batch);
    const auto cache = network_forward(model, std::move(scaled.inputs));
    const Mat residual = cache.output - scaled.targets;
    const double count = static_cast<double>(batch.size());
    LossGradients out;
    out.loss = residual.squaredNorm() / count;
    out.gradients = zeros_like(model.weights);
    network_backward(model, cache, (2.0 / count) * residual, out.gradients);
    return out;
}

double batch_loss(const NetworkModel& model, std::span<const TrainingExample> batch) {
    if (batch.empty()) {
        throw Error(ErrorKind::InvalidArgument, "empty training batch");
    }
    auto scaled = scale_batch(model, batch);
    const auto cache = network_forward(model, std::move(scaled.inputs));
    return (cache.output - scaled.targets).squaredNorm() / static_cast<double>(batch.size());
}

CellState lstm_cell_forward(std::span<const double> x, std::span<const double> h_prev,
                            std::span<const double> c_prev, const LstmWeights& weights) {
    const std::size_t hidden = weights.hidden;
    const std::size_t input_dim = weights.input_dim;
    require_size(x.size(), input_dim, "input");
    require_size(h_prev.size(), hidden, "previous hidden state");
    require_size(c_prev.size(), hidden, "previous cell state");
    require_size(weights.input_weights.size(), 4 * hidden * input_dim, "input weights");
    require_size(weights.recurrent_weights.size(), 4 * hidden * hidden, "recurrent weights");
    require_size(weights.bias.size(), 4 * hidden, "bias");
    const ConstRowMap wx(weights.input_weights.data(), as_index(4 * hidden), as_index(input_dim));
    const ConstRowMap wh(weights.recurrent_weights.data(), as_index(4 * hidden), as_index(hidden));
    const ConstVecMap b(weights.bias.data(), as_index(4 * hidden));
    const Mat xm = Eigen::Map<const Eigen::VectorXd>(x.data(), as_index(x.size()));
    const Mat hm = Eigen::Map<const Eigen::VectorXd>(h_prev.data(), as_index(hidden));
    const Mat cm = Eigen::Map<const Eigen::VectorXd>(c_prev.data(), as_index(hidden));
    const auto s = lstm_step(wx, wh, b, xm, hm, cm);
    return {{s.h.data(), s.h.data() + s.h.size()}, {s.c.data(), s.c.data() + s.c.size()}};
}

std::vector<std::vector<double>> conv1d_forward(std::span<const double> x,
                                                std::span<const double> kernels,
                                                std::span<const double> biases,
                                                std::size_t kernel_size) {
    if (kernel_size == 0 || kernels.size() % kernel_size != 0 ||
        kernels.size() / kernel_size != biases.size()) {
        throw Error(ErrorKind::ShapeMismatch, "kernels must be n_f x kernel_size with n_f biases");
    }
    if (x.size() < kernel_size) {
        throw Error(ErrorKind::KernelTooWide,
                    fmt::format("kernel of {} wider than input of {}", kernel_size, x.size()));
    }
    const ConstRowMap k(kernels.data(), as_index(biases.size()), as_index(kernel_size));
    const ConstVecMap b(biases.data(), as_index(biases.size()));
    const Mat input = Eigen::Map<const Eigen::VectorXd>(x.data(), as_index(x.size()));
    const auto activations = conv_preactivation(k, b, input);
    std::vector<std::vector<double>> out(biases.size());
    for (const auto& a : activations) {
        for (std::size_t f = 0; f < biases.size(); ++f) {
            out[f].push_back(std::max(0.0, a(as_index(f), 0)));
        }
    }
    return out;
}

std::vector<double> maxpool1d(std::span<const double> x, std::size_t pool_size) {
    if (pool_size == 0) {
        throw Error(ErrorKind::InvalidArgument, "pool size must be >= 1");
    }
    std::vector<double> out;
    for (std::size_t begin = 0; begin < x.size(); begin += pool_size) {
        const auto window = x.subspan(begin, std::min(pool_size, x.size() - begin));
        out.push_back(*std::max_element(window.begin(), window.end()));
    }
    return out;
}

ConvCellState convlstm_cell_forward(const Frame& x, const Frame& h_prev, const Frame& c_prev,
                                    const ConvLstmWeights& weights) {
    const std::size_t width = x.width;
    const std::size_t filters = weights.filters;
    const std::size_t k = weights.kernel_size;
    require_size(x.channels, weights.in_channels, "input channels");
    require_size(x.values.size(), x.channels * width, "input frame");
    require_size(h_prev.values.size(), filters * width, "previous hidden frame");
    require_size(c_prev.values.size(), filters * width, "previous cell frame");
    require_size(weights.input_kernels.size(), 4 * filters * weights.in_channels * k,
                 "input kernels");
    require_size(weights.recurrent_kernels.size(), 4 * filters * filters * k, "recurrent kernels");
    require_size(weights.bias.size(), 4 * filters, "bias");
    if (k == 0 || k > width) {
        throw Error(ErrorKind::KernelTooWide,
                    fmt::format("kernel of {} for a frame of width {}", k, width));
    }
    const auto taps = make_taps(weights.in_channels, filters, k, weights.input_kernels,
                                weights.recurrent_kernels, weights.bias);
    const auto column = [width](const Frame& frame, std::size_t p) {
        Mat m(as_index(frame.channels), 1);
        for (std::size_t ch = 0; ch < frame.channels; ++ch) {
            m(as_index(ch), 0) = frame.values[ch * width + p];
        }
        return m;
    };
    std::vector<Mat> xs, hs, cs;
    for (std::size_t p = 0; p < width; ++p) {
        xs.push_back(column(x, p));
        hs.push_back(column(h_prev, p));
        cs.push_back(column(c_prev, p));
    }
    const auto step = convlstm_step(taps, xs, hs, cs);
    ConvCellState out{{filters, width, std::vector<double>(filters * width)},
                      {filters, width, std::vector<double>(filters * width)}};
    for (std::size_t p = 0; p < width; ++p) {
        for (std::size_t f = 0; f < filters; ++f) {
            out.h.values[f * width + p] = step.positions[p].h(as_index(f), 0);
            out.c.values[f * width + p] = step.positions[p].c(as_index(f), 0);
        }
    }
    return out;
}

}  // namespace epicast::neural
