#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace epicast::neural {

enum class Architecture { Vanilla, Stacked, Bidirectional, CnnLstm, ConvLstm };

[[nodiscard]] std::string_view to_string(Architecture architecture) noexcept;
/// Accepts vanilla, stacked, bidirectional, cnn_lstm, conv_lstm.
[[nodiscard]] std::optional<Architecture> parse_architecture(std::string_view name) noexcept;

/**
 * @brief Hyperparameters of one network.
 *
 * for_architecture fills in the default sizes (100 units for the vanilla
 * LSTM, 50 otherwise, 64 filters) and the window-dependent conv shapes.
 */
struct NetworkConfig {
    Architecture architecture = Architecture::Vanilla;
    std::size_t n_s = 3;
    std::size_t n_n = 100;
    std::size_t n_f = 64;
    /// CnnLstm: conv kernel width. ConvLstm: gate convolution width.
    std::size_t kernel_size = 2;
    /// CnnLstm only.
    std::size_t pool_size = 2;
    /// CnnLstm: subsequences the window is cut into. ConvLstm: frames fed to the recurrent cell.
    std::size_t subsequences = 1;
    double learning_rate = 0.1;
    std::size_t epochs = 200;
    std::uint64_t seed = 0;

    [[nodiscard]] static NetworkConfig for_architecture(Architecture architecture,
                                                        std::size_t n_s);
    /// Throws Error(InvalidArgument) / Error(KernelTooWide) on inconsistent sizes.
    void validate() const;

    friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// Row-major array with a name; the unit of storage for weights, gradients and moments.
struct NamedTensor {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> values;

    friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

using ParameterSet = std::vector<NamedTensor>;

[[nodiscard]] const NamedTensor& find_tensor(const ParameterSet& set, std::string_view name);
[[nodiscard]] NamedTensor& find_tensor(ParameterSet& set, std::string_view name);
/// Same names and shapes, all values zero.
[[nodiscard]] ParameterSet zeros_like(const ParameterSet& set);
[[nodiscard]] bool same_layout(const ParameterSet& a, const ParameterSet& b);

enum class Scaling {
    /// Divide each window by its last value; multiply predictions back.
    LastValue,
    None,
};

struct NetworkModel {
    NetworkConfig config;
    ParameterSet weights;
    Scaling scaling = Scaling::LastValue;
};

/// Zero-valued weights laid out for `config`.
[[nodiscard]] ParameterSet parameter_layout(const NetworkConfig& config);
/// Weights drawn uniformly from [-0.05, 0.05] with a generator seeded by config.seed.
[[nodiscard]] NetworkModel initialize_model(const NetworkConfig& config);

/// Factor a window is divided by before entering the network.
[[nodiscard]] double window_scale(std::span<const double> window, Scaling scaling) noexcept;

/// Next-day prediction on the raw scale.
[[nodiscard]] double model_forward(const NetworkModel& model, std::span<const double> window);

struct TrainingExample {
    std::vector<double> window;
    double target = 0.0;
};

/// Loss and gradients of the batch-mean squared error on the scaled space.
struct LossGradients {
    double loss = 0.0;
    ParameterSet gradients;
};

[[nodiscard]] LossGradients backward(const NetworkModel& model,
                                     std::span<const TrainingExample> batch);
/// Loss only, same definition as backward.
[[nodiscard]] double batch_loss(const NetworkModel& model, std::span<const TrainingExample> batch);

[[nodiscard]] double mse_loss(std::span<const double> predictions,
                              std::span<const double> targets);

// Building blocks, exposed for direct testing.

/// Gate-stacked LSTM weights, gate order (input, forget, cell, output).
struct LstmWeights {
    std::size_t input_dim = 0;
    std::size_t hidden = 0;
    /// 4 * hidden x input_dim, row-major.
    std::vector<double> input_weights;
    /// 4 * hidden x hidden, row-major.
    std::vector<double> recurrent_weights;
    /// 4 * hidden.
    std::vector<double> bias;
};

struct CellState {
    std::vector<double> h;
    std::vector<double> c;
};

[[nodiscard]] CellState lstm_cell_forward(std::span<const double> x, std::span<const double> h_prev,
                                          std::span<const double> c_prev,
                                          const LstmWeights& weights);

/// Valid 1-D convolution with ReLU; kernels are n_f x kernel_size row-major.
[[nodiscard]] std::vector<std::vector<double>> conv1d_forward(std::span<const double> x,
                                                              std::span<const double> kernels,
                                                              std::span<const double> biases,
                                                              std::size_t kernel_size);

/// Non-overlapping max pooling; a trailing partial window yields its own max.
[[nodiscard]] std::vector<double> maxpool1d(std::span<const double> x, std::size_t pool_size);

/// Convolutional gate weights; pre-activations use same padding along the frame.
struct ConvLstmWeights {
    std::size_t in_channels = 0;
    std::size_t filters = 0;
    std::size_t kernel_size = 0;
    /// 4 x filters x in_channels x kernel_size, row-major.
    std::vector<double> input_kernels;
    /// 4 x filters x filters x kernel_size, row-major.
    std::vector<double> recurrent_kernels;
    /// 4 x filters.
    std::vector<double> bias;
};

/// Channel-major frame: values[channel * width + position].
struct Frame {
    std::size_t channels = 0;
    std::size_t width = 0;
    std::vector<double> values;
};

struct ConvCellState {
    Frame h;
    Frame c;
};

[[nodiscard]] ConvCellState convlstm_cell_forward(const Frame& x, const Frame& h_prev,
                                                  const Frame& c_prev,
                                                  const ConvLstmWeights& weights);

}  // namespace epicast::neural
