#include "semeq/mlp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include "semeq/errors.hpp"
#include "semeq/util.hpp"

namespace semeq {

static_assert(std::endian::native == std::endian::little,
              "model serialization assumes a little-endian host");

void Gradients::zero() {
    for (auto& m : weights) std::fill(m.a.begin(), m.a.end(), 0.0);
    for (auto& b : bias) std::fill(b.begin(), b.end(), 0.0);
}

void Gradients::scale(double factor) {
    for (auto& m : weights)
        for (double& v : m.a) v *= factor;
    for (auto& b : bias)
        for (double& v : b) v *= factor;
}

DenseStack DenseStack::initialized(const std::vector<std::size_t>& widths,
                                   std::uint64_t seed) {
    if (widths.size() < 2) {
        throw ArgumentError("DenseStack needs an input width and at least one layer");
    }
    for (std::size_t w : widths) {
        if (w == 0) throw ArgumentError("layer widths must be positive");
    }
    DenseStack stack;
    Rng rng(seed);
    for (std::size_t l = 1; l < widths.size(); ++l) {
        DenseLayer layer;
        const std::size_t fan_in = widths[l - 1];
        const std::size_t fan_out = widths[l];
        const bool is_output = (l + 1 == widths.size());
        layer.activation = is_output ? Activation::Sigmoid : Activation::Relu;
        // He-uniform for ReLU layers, Glorot-uniform for the sigmoid output
        const double limit =
            is_output ? std::sqrt(6.0 / static_cast<double>(fan_in + fan_out))
                      : std::sqrt(6.0 / static_cast<double>(fan_in));
        layer.weights = Matrix(fan_out, fan_in);
        for (double& w : layer.weights.a) w = rng.uniform(-limit, limit);
        layer.bias.assign(fan_out, 0.0);
        stack.layers_.push_back(std::move(layer));
    }
    return stack;
}

std::size_t DenseStack::input_width() const {
    return layers_.empty() ? 0 : layers_.front().weights.cols;
}

std::size_t DenseStack::output_width() const {
    return layers_.empty() ? 0 : layers_.back().weights.rows;
}

namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void affine(const DenseLayer& layer, std::span<const double> in,
            std::vector<double>& out) {
    const std::size_t rows = layer.weights.rows;
    const std::size_t cols = layer.weights.cols;
    out.resize(rows);
    const double* w = layer.weights.a.data();
    for (std::size_t r = 0; r < rows; ++r) {
        const double* wr = w + r * cols;
        double acc = layer.bias[r];
        for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * in[c];
        out[r] = acc;
    }
}

void check_input(const DenseStack& stack, std::span<const double> input) {
    if (input.size() != stack.input_width()) {
        throw ShapeError("forward: input width " + std::to_string(input.size()) +
                         " does not match model input " +
                         std::to_string(stack.input_width()));
    }
    for (double v : input) {
        if (!std::isfinite(v)) throw NumericError("forward: non-finite input component");
    }
}

} // namespace

std::vector<double> DenseStack::forward_inference(
    std::span<const double> input) const {
    check_input(*this, input);
    std::vector<double> cur(input.begin(), input.end());
    std::vector<double> next;
    for (const auto& layer : layers_) {
        affine(layer, cur, next);
        if (layer.activation == Activation::Relu) {
            for (double& v : next) v = v > 0.0 ? v : 0.0;
        } else {
            for (double& v : next) v = sigmoid(v);
        }
        cur.swap(next);
    }
    return cur;
}

std::vector<double> DenseStack::forward_training(std::span<const double> input,
                                                 double dropout_rate, Rng& rng,
                                                 ForwardCache& cache) const {
    check_input(*this, input);
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
        throw ArgumentError("dropout rate must be in [0, 1)");
    }
    cache.inputs.assign(layers_.size(), {});
    cache.pre.assign(layers_.size(), {});
    cache.mask.assign(layers_.size(), {});

    std::vector<double> cur(input.begin(), input.end());
    std::vector<double> next;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const DenseLayer& layer = layers_[l];
        cache.inputs[l] = cur;
        affine(layer, cur, next);
        cache.pre[l] = next;
        if (layer.activation == Activation::Relu) {
            for (double& v : next) v = v > 0.0 ? v : 0.0;
            if (dropout_rate > 0.0) {
                const double keep_scale = 1.0 / (1.0 - dropout_rate);
                auto& mask = cache.mask[l];
                mask.resize(next.size());
                for (std::size_t i = 0; i < next.size(); ++i) {
                    mask[i] = (rng.uniform() < dropout_rate) ? 0.0 : keep_scale;
                    next[i] *= mask[i];
                }
            }
        } else {
            for (double& v : next) v = sigmoid(v);
        }
        cur.swap(next);
    }
    cache.output = cur;
    cache.valid = true;
    return cur;
}

double mae_loss(std::span<const double> prediction,
                std::span<const double> target) {
    if (prediction.size() != target.size()) {
        throw ShapeError("mae_loss: length mismatch (" +
                         std::to_string(prediction.size()) + " vs " +
                         std::to_string(target.size()) + ")");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < prediction.size(); ++i) {
        sum += std::abs(prediction[i] - target[i]);
    }
    return sum / static_cast<double>(prediction.size());
}

void DenseStack::backward(const ForwardCache& cache,
                          std::span<const double> target,
                          Gradients& grads) const {
    if (!cache.valid || cache.inputs.size() != layers_.size()) {
        throw StateError("backward: stale or missing forward cache");
    }
    if (target.size() != output_width()) {
        throw ShapeError("backward: target width mismatch");
    }
    const std::size_t n_out = output_width();

    // dL/d(output): MAE subgradient, defined as 0 at exact equality
    std::vector<double> delta(n_out);
    for (std::size_t i = 0; i < n_out; ++i) {
        double diff = cache.output[i] - target[i];
        double g = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        // through the sigmoid: s' = s (1 - s)
        double s = cache.output[i];
        delta[i] = g / static_cast<double>(n_out) * s * (1.0 - s);
    }

    std::vector<double> prev_delta;
    for (std::size_t li = layers_.size(); li-- > 0;) {
        const DenseLayer& layer = layers_[li];
        const std::vector<double>& in = cache.inputs[li];

        Matrix& gw = grads.weights[li];
        std::vector<double>& gb = grads.bias[li];
        const std::size_t rows = layer.weights.rows;
        const std::size_t cols = layer.weights.cols;
        for (std::size_t r = 0; r < rows; ++r) {
            const double d = delta[r];
            gb[r] += d;
            if (d != 0.0) {
                double* gwr = gw.a.data() + r * cols;
                for (std::size_t c = 0; c < cols; ++c) gwr[c] += d * in[c];
            }
        }

        if (li == 0) break;

        // propagate to the previous layer's activation
        prev_delta.assign(cols, 0.0);
        const double* w = layer.weights.a.data();
        for (std::size_t r = 0; r < rows; ++r) {
            const double d = delta[r];
            if (d == 0.0) continue;
            const double* wr = w + r * cols;
            for (std::size_t c = 0; c < cols; ++c) prev_delta[c] += wr[c] * d;
        }

        // through dropout and ReLU of layer li-1
        const std::vector<double>& pre = cache.pre[li - 1];
        const std::vector<double>& mask = cache.mask[li - 1];
        for (std::size_t c = 0; c < cols; ++c) {
            double m = mask.empty() ? 1.0 : mask[c];
            prev_delta[c] *= m * (pre[c] > 0.0 ? 1.0 : 0.0);
        }
        delta.swap(prev_delta);
    }
}

Gradients DenseStack::make_gradients() const {
    Gradients g;
    for (const auto& layer : layers_) {
        g.weights.emplace_back(layer.weights.rows, layer.weights.cols);
        g.bias.emplace_back(layer.bias.size(), 0.0);
    }
    return g;
}

void DenseStack::check_finite() const {
    for (const auto& layer : layers_) {
        for (double v : layer.weights.a) {
            if (!std::isfinite(v)) throw NumericError("non-finite weight");
        }
        for (double v : layer.bias) {
            if (!std::isfinite(v)) throw NumericError("non-finite bias");
        }
    }
}

MlpModel MlpModel::init_embedding(std::size_t embedding_dim,
                                  std::uint64_t seed) {
    if (embedding_dim == 0) throw ArgumentError("embedding dimension must be positive");
    MlpModel m;
    m.mode_ = InputMode::Embedding;
    std::vector<std::size_t> widths{embedding_dim};
    widths.insert(widths.end(), kHiddenWidths.begin(), kHiddenWidths.end());
    widths.push_back(kNumBands);
    m.stack_ = DenseStack::initialized(widths, seed);
    return m;
}

MlpModel MlpModel::init_one_hot(std::vector<std::string> vocabulary,
                                std::uint64_t seed) {
    if (vocabulary.empty()) {
        throw ArgumentError("one-hot mode needs a non-empty vocabulary");
    }
    MlpModel m;
    m.mode_ = InputMode::OneHot;
    for (auto& w : vocabulary) w = to_lower_ascii(w);
    m.vocab_ = std::move(vocabulary);
    std::vector<std::size_t> widths{m.vocab_.size()};
    widths.insert(widths.end(), kHiddenWidths.begin(), kHiddenWidths.end());
    widths.push_back(kNumBands);
    m.stack_ = DenseStack::initialized(widths, seed);
    return m;
}

std::vector<double> MlpModel::input_for(const std::string& descriptor,
                                        const EmbeddingTable* table) const {
    if (mode_ == InputMode::Embedding) {
        if (!table) throw ArgumentError("embedding mode needs an embedding table");
        auto vec = embed_descriptor(*table, descriptor);
        if (!vec) {
            throw OovError("descriptor '" + descriptor +
                           "' cannot be resolved in table '" + table->name() + "'");
        }
        if (vec->size() != input_width()) {
            throw ShapeError("table dimension " + std::to_string(vec->size()) +
                             " does not match model input " +
                             std::to_string(input_width()));
        }
        return *vec;
    }
    // one-hot: unseen words become the all-zero vector
    std::vector<double> input(vocab_.size(), 0.0);
    std::string w = to_lower_ascii(trim(descriptor));
    auto it = std::find(vocab_.begin(), vocab_.end(), w);
    if (it != vocab_.end()) {
        input[static_cast<std::size_t>(it - vocab_.begin())] = 1.0;
    }
    return input;
}

Prediction MlpModel::predict_vector(std::span<const double> input) const {
    std::vector<double> out = stack_.forward_inference(input);
    Prediction p;
    for (std::size_t i = 0; i < kNumBands; ++i) {
        p.normalized[i] = out[i];
        p.gains_db[i] = out[i] * 8.0 - 4.0;
    }
    return p;
}

Prediction MlpModel::predict(const std::string& descriptor,
                             const EmbeddingTable* table) const {
    return predict_vector(input_for(descriptor, table));
}

namespace {

constexpr char kModelMagic[8] = {'S', 'E', 'Q', 'M', 'D', 'L', '0', '1'};

template <typename T>
void put(std::vector<unsigned char>& out, const T& v) {
    const auto* p = reinterpret_cast<const unsigned char*>(&v);
    out.insert(out.end(), p, p + sizeof(T));
}

void put_string(std::vector<unsigned char>& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

struct Reader {
    std::span<const unsigned char> bytes;
    std::size_t pos = 0;

    template <typename T>
    T get() {
        if (pos + sizeof(T) > bytes.size()) {
            throw CorruptError("model payload truncated");
        }
        T v;
        std::memcpy(&v, bytes.data() + pos, sizeof(T));
        pos += sizeof(T);
        return v;
    }

    std::string get_string() {
        auto len = get<std::uint32_t>();
        if (pos + len > bytes.size()) throw CorruptError("model payload truncated");
        std::string s(reinterpret_cast<const char*>(bytes.data() + pos), len);
        pos += len;
        return s;
    }
};

} // namespace

std::vector<unsigned char> MlpModel::to_bytes() const {
    std::vector<unsigned char> out;
    out.insert(out.end(), kModelMagic, kModelMagic + sizeof(kModelMagic));
    put<std::uint32_t>(out, mode_ == InputMode::Embedding ? 0u : 1u);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(vocab_.size()));
    for (const auto& w : vocab_) put_string(out, w);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(stack_.layer_count()));
    for (const auto& layer : stack_.layers()) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(layer.weights.rows));
        put<std::uint32_t>(out, static_cast<std::uint32_t>(layer.weights.cols));
        for (double v : layer.weights.a) put(out, v);
        for (double v : layer.bias) put(out, v);
    }
    const std::uint64_t checksum = fnv1a64(out.data(), out.size());
    put(out, checksum);
    return out;
}

MlpModel MlpModel::from_bytes(std::span<const unsigned char> bytes) {
    if (bytes.size() < sizeof(kModelMagic) + sizeof(std::uint64_t)) {
        throw CorruptError("model payload too short");
    }
    if (std::memcmp(bytes.data(), kModelMagic, sizeof(kModelMagic)) != 0) {
        throw FormatError("not a model file (bad magic)");
    }
    const std::size_t payload_len = bytes.size() - sizeof(std::uint64_t);
    std::uint64_t stored = 0;
    std::memcpy(&stored, bytes.data() + payload_len, sizeof(stored));
    if (fnv1a64(bytes.data(), payload_len) != stored) {
        throw CorruptError("model checksum mismatch");
    }

    Reader r{bytes.subspan(sizeof(kModelMagic), payload_len - sizeof(kModelMagic))};
    MlpModel m;
    m.mode_ = r.get<std::uint32_t>() == 0 ? InputMode::Embedding : InputMode::OneHot;
    auto vocab_count = r.get<std::uint32_t>();
    m.vocab_.reserve(vocab_count);
    for (std::uint32_t i = 0; i < vocab_count; ++i) m.vocab_.push_back(r.get_string());

    auto n_layers = r.get<std::uint32_t>();
    DenseStack stack;
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        DenseLayer layer;
        auto rows = r.get<std::uint32_t>();
        auto cols = r.get<std::uint32_t>();
        layer.weights = Matrix(rows, cols);
        for (double& v : layer.weights.a) v = r.get<double>();
        layer.bias.resize(rows);
        for (double& v : layer.bias) v = r.get<double>();
        layer.activation =
            (l + 1 == n_layers) ? Activation::Sigmoid : Activation::Relu;
        stack.layers().push_back(std::move(layer));
    }
    m.stack_ = std::move(stack);

    // shape sanity: hidden widths are part of the format contract
    if (m.stack_.layer_count() != MlpModel::kHiddenWidths.size() + 1 ||
        m.stack_.output_width() != kNumBands) {
        throw FormatError("model file has an unexpected layer layout");
    }
    return m;
}

void MlpModel::save(const std::filesystem::path& path) const {
    atomic_write_file(path, to_bytes());
}

MlpModel MlpModel::load(const std::filesystem::path& path) {
    std::string raw = read_text_file(path);
    std::span<const unsigned char> bytes(
        reinterpret_cast<const unsigned char*>(raw.data()), raw.size());
    return from_bytes(bytes);
}

namespace {

struct AdamState {
    Gradients m;
    Gradients v;
    double beta1_t = 1.0;
    double beta2_t = 1.0;
};

void apply_update(DenseStack& stack, const Gradients& grads,
                  const TrainConfig& cfg, AdamState& adam) {
    if (cfg.optimizer == Optimizer::Sgd) {
        for (std::size_t l = 0; l < stack.layer_count(); ++l) {
            DenseLayer& layer = stack.layers()[l];
            for (std::size_t i = 0; i < layer.weights.a.size(); ++i) {
                layer.weights.a[i] -= cfg.learning_rate * grads.weights[l].a[i];
            }
            for (std::size_t i = 0; i < layer.bias.size(); ++i) {
                layer.bias[i] -= cfg.learning_rate * grads.bias[l][i];
            }
        }
        return;
    }

    adam.beta1_t *= cfg.adam.beta1;
    adam.beta2_t *= cfg.adam.beta2;
    auto step = [&](double& param, double g, double& m, double& v) {
        m = cfg.adam.beta1 * m + (1.0 - cfg.adam.beta1) * g;
        v = cfg.adam.beta2 * v + (1.0 - cfg.adam.beta2) * g * g;
        const double m_hat = m / (1.0 - adam.beta1_t);
        const double v_hat = v / (1.0 - adam.beta2_t);
        param -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam.epsilon);
    };
    for (std::size_t l = 0; l < stack.layer_count(); ++l) {
        DenseLayer& layer = stack.layers()[l];
        for (std::size_t i = 0; i < layer.weights.a.size(); ++i) {
            step(layer.weights.a[i], grads.weights[l].a[i],
                 adam.m.weights[l].a[i], adam.v.weights[l].a[i]);
        }
        for (std::size_t i = 0; i < layer.bias.size(); ++i) {
            step(layer.bias[i], grads.bias[l][i], adam.m.bias[l][i],
                 adam.v.bias[l][i]);
        }
    }
}

} // namespace

TrainResult train(MlpModel& model, std::span<const TrainExample> examples,
                  const TrainConfig& config) {
    if (examples.empty()) throw ArgumentError("train: empty training list");
    if (config.batch_size == 0) throw ArgumentError("train: batch_size must be positive");
    for (const auto& ex : examples) {
        if (ex.input.size() != model.input_width()) {
            throw ShapeError("train: example input width mismatch");
        }
    }

    DenseStack& stack = model.stack();
    Rng rng(config.seed);
    Gradients grads = stack.make_gradients();
    AdamState adam{stack.make_gradients(), stack.make_gradients()};

    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t epochs_since_best = 0;
    ForwardCache cache;

    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        // Fisher-Yates from the seeded generator
        for (std::size_t i = order.size(); i > 1; --i) {
            std::size_t j = rng.below(i);
            std::swap(order[i - 1], order[j]);
        }

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size();
             start += config.batch_size) {
            const std::size_t end =
                std::min(order.size(), start + config.batch_size);
            grads.zero();
            for (std::size_t k = start; k < end; ++k) {
                const TrainExample& ex = examples[order[k]];
                std::vector<double> out = stack.forward_training(
                    ex.input, config.dropout_rate, rng, cache);
                epoch_loss += mae_loss(out, ex.target.values);
                stack.backward(cache, ex.target.values, grads);
            }
            grads.scale(1.0 / static_cast<double>(end - start));
            apply_update(stack, grads, config, adam);
        }
        epoch_loss /= static_cast<double>(examples.size());

        if (!std::isfinite(epoch_loss)) {
            throw DivergenceError("training diverged at epoch " +
                                      std::to_string(epoch),
                                  static_cast<int>(epoch));
        }
        result.epoch_loss.push_back(epoch_loss);
        result.epochs_run = epoch + 1;

        if (epoch_loss < best_loss) {
            best_loss = epoch_loss;
            epochs_since_best = 0;
        } else {
            ++epochs_since_best;
        }
        if (config.early_stop_patience &&
            epochs_since_best >= *config.early_stop_patience) {
            break;
        }
    }
    stack.check_finite();
    return result;
}

} // namespace semeq
