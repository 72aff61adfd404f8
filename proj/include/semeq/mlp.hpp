#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semeq/dataset.hpp"
#include "semeq/embedding.hpp"
#include "semeq/rng.hpp"

namespace semeq {

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a; // row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}
    double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
};

enum class Activation { Relu, Sigmoid };

struct DenseLayer {
    Matrix weights; // out x in
    std::vector<double> bias;
    Activation activation = Activation::Relu;
};

// Per-example activations captured by a training-mode forward pass and
// consumed by backward(). mask holds the inverted-dropout scale applied to
// each hidden activation (0 for dropped units, 1/(1-rate) for kept ones).
struct ForwardCache {
    std::vector<std::vector<double>> inputs; // input seen by each layer
    std::vector<std::vector<double>> pre;    // pre-activation per layer
    std::vector<std::vector<double>> mask;   // dropout scale per hidden layer
    std::vector<double> output;
    bool valid = false;
};

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> bias;

    void zero();
    void scale(double factor);
};

// A stack of fully connected layers with ReLU hidden activations and a
// sigmoid output. This is the training engine; MlpModel fixes the widths.
class DenseStack {
public:
    DenseStack() = default;

    // widths = {input, hidden..., output}; weights drawn uniformly with
    // fan-in scaling (ReLU gain for hidden layers, symmetric fan-in/out
    // scaling for the sigmoid output), biases zero.
    static DenseStack initialized(const std::vector<std::size_t>& widths,
                                  std::uint64_t seed);

    std::size_t input_width() const;
    std::size_t output_width() const;
    std::size_t layer_count() const { return layers_.size(); }
    const std::vector<DenseLayer>& layers() const { return layers_; }
    std::vector<DenseLayer>& layers() { return layers_; }

    std::vector<double> forward_inference(std::span<const double> input) const;

    // Training-mode pass with inverted dropout on every hidden activation.
    // rate 0 makes it identical to forward_inference.
    std::vector<double> forward_training(std::span<const double> input,
                                         double dropout_rate, Rng& rng,
                                         ForwardCache& cache) const;

    // Accumulates exact gradients of mae_loss(output, target) into grads,
    // honoring the dropout masks recorded in the cache.
    void backward(const ForwardCache& cache,
                  std::span<const double> target, Gradients& grads) const;

    Gradients make_gradients() const;
    void check_finite() const; // throws NumericError on any non-finite param

private:
    std::vector<DenseLayer> layers_;
};

// (1/n) * sum |prediction_i - target_i|
double mae_loss(std::span<const double> prediction,
                std::span<const double> target);

enum class InputMode { Embedding, OneHot };
enum class Optimizer { Adam, Sgd };

struct AdamParams {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 500;
    double dropout_rate = 0.1;
    std::uint64_t seed = 1;
    Optimizer optimizer = Optimizer::Adam;
    AdamParams adam;
    std::optional<std::size_t> early_stop_patience = 50;
};

struct Prediction {
    std::array<double, kNumBands> normalized{};
    std::array<double, kNumBands> gains_db{};
};

// The fixed regression network: dense stack 300/200/100/80/60 with ReLU,
// 40 sigmoid outputs. Input is either a 300-D embedding vector (the
// embedding table itself lives outside the model and is never trained) or
// a one-hot vector over a training vocabulary.
class MlpModel {
public:
    static constexpr std::array<std::size_t, 5> kHiddenWidths{300, 200, 100,
                                                              80, 60};

    MlpModel() = default;

    static MlpModel init_embedding(std::size_t embedding_dim,
                                   std::uint64_t seed);
    static MlpModel init_one_hot(std::vector<std::string> vocabulary,
                                 std::uint64_t seed);

    InputMode mode() const { return mode_; }
    std::size_t input_width() const { return stack_.input_width(); }
    const std::vector<std::string>& vocabulary() const { return vocab_; }
    const DenseStack& stack() const { return stack_; }
    DenseStack& stack() { return stack_; }

    // Builds the network input for a descriptor. Embedding mode resolves
    // through the table (fully out-of-vocabulary descriptors are an
    // OovError, never a silent zero). One-hot mode returns the word's
    // one-hot vector, or all zeros for unseen words.
    std::vector<double> input_for(const std::string& descriptor,
                                  const EmbeddingTable* table) const;

    Prediction predict_vector(std::span<const double> input) const;
    Prediction predict(const std::string& descriptor,
                       const EmbeddingTable* table) const;

    std::vector<unsigned char> to_bytes() const;
    static MlpModel from_bytes(std::span<const unsigned char> bytes);
    void save(const std::filesystem::path& path) const;
    static MlpModel load(const std::filesystem::path& path);

private:
    InputMode mode_ = InputMode::Embedding;
    std::vector<std::string> vocab_; // one-hot mode only, defines input order
    DenseStack stack_;
};

struct TrainExample {
    std::vector<double> input;
    NormalizedTarget target;
};

struct TrainResult {
    std::vector<double> epoch_loss; // mean training loss per epoch
    std::size_t epochs_run = 0;
};

// Mini-batch training with the configured optimizer. Data order is
// reshuffled every epoch from the seeded generator; everything (shuffle,
// dropout, updates) is deterministic for a fixed seed. Throws
// DivergenceError with the epoch index if the loss turns non-finite.
TrainResult train(MlpModel& model, std::span<const TrainExample> examples,
                  const TrainConfig& config);

} // namespace semeq
