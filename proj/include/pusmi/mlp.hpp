#pragma once

// Small fully connected network with hand-written gradients.
//
// Layout: activations are n x width (one sample per row). Each layer computes
// z = a W^T + b, then optional batch normalisation, then ReLU on hidden layers
// (and on the output layer when `activate_output` is set). Layers followed by
// batch normalisation carry no bias; the normalisation shift replaces it.

#include <cstdint>
#include <optional>
#include <vector>

#include "pusmi/common.hpp"

namespace pusmi::mlp {

struct MlpSpec {
    std::vector<Eigen::Index> layer_sizes;  ///< input, hidden..., output
    bool batchnorm = false;                 ///< on every activated layer
    bool activate_output = false;

    Eigen::Index input_size() const { return layer_sizes.front(); }
    Eigen::Index output_size() const { return layer_sizes.back(); }
    std::size_t num_layers() const { return layer_sizes.size() - 1; }
    bool activated(std::size_t layer) const { return layer + 1 < num_layers() || activate_output; }
    bool normalized(std::size_t layer) const { return batchnorm && activated(layer); }
    void validate() const;
};

inline constexpr double kBatchNormMomentum = 0.9;
inline constexpr double kBatchNormEps = 1e-5;

struct DenseLayer {
    Matrix weight;  ///< out x in
    Vector bias;    ///< empty when the layer is normalised
};

struct BatchNorm {
    Vector gamma;
    Vector beta;
    Vector running_mean;
    Vector running_var;
};

struct MlpParams {
    MlpSpec spec;
    std::vector<DenseLayer> layers;
    std::vector<std::optional<BatchNorm>> norms;  ///< one slot per layer
    double momentum = kBatchNormMomentum;
    /// Bumped by every parameter update; caches remember the version they saw.
    std::uint64_t version = 0;
};

/// Glorot-uniform weights, zero biases, unit gamma, zero shift.
MlpParams init_params(const MlpSpec& spec, std::uint64_t seed);

enum class Mode { kTrain, kEval };

struct LayerCache {
    Matrix input;       ///< a_{l-1}
    Matrix pre;         ///< z before normalisation
    Matrix normalized;  ///< x_hat (train mode) or z normalised by running stats
    Vector inv_std;
    Matrix post;        ///< value fed to the activation
};

struct ForwardCache {
    Mode mode;
    std::uint64_t version;
    std::vector<LayerCache> layers;
};

struct ForwardResult {
    Matrix output;
    ForwardCache cache;
};

/// Train mode normalises with batch statistics and folds them into the running
/// estimates; it needs at least two rows when batch normalisation is on.
ForwardResult forward(MlpParams& params, const Matrix& batch, Mode mode);

/// Eval-mode forward that leaves `params` untouched.
Matrix infer(const MlpParams& params, const Matrix& batch);

struct Gradients {
    std::vector<Matrix> weight;
    std::vector<Vector> bias;
    std::vector<Vector> gamma;
    std::vector<Vector> beta;
    Matrix input;

    bool all_zero() const;
};

/// Exact gradients of sum(output_grad .* output) with respect to every
/// parameter and the input. Throws if the cache belongs to another parameter
/// version or shape.
Gradients backward(const MlpParams& params, const ForwardCache& cache, const Matrix& output_grad);

struct SgdConfig {
    double learning_rate = 1e-3;
    double weight_decay = 5e-4;
    double grad_noise_std = 0.01;
    Eigen::Index batch_size = 64;
    std::uint64_t seed = 0;

    void validate() const;
};

/// p <- p - lr * (g + decay * p + xi), xi ~ N(0, noise^2) per coordinate.
/// Decay skips the batch-norm scale and shift; running statistics are never
/// touched.
void sgd_step(MlpParams& params, const Gradients& grads, const SgdConfig& config, Rng& rng);

/// Visits every trainable scalar (weights, biases, gamma, beta) in a fixed order.
template <typename Fn>
void for_each_parameter(MlpParams& params, Fn&& fn) {
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto& layer = params.layers[l];
        for (Eigen::Index i = 0; i < layer.weight.size(); ++i) fn(layer.weight.data()[i]);
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) fn(layer.bias(i));
        if (params.norms[l]) {
            for (Eigen::Index i = 0; i < params.norms[l]->gamma.size(); ++i) fn(params.norms[l]->gamma(i));
            for (Eigen::Index i = 0; i < params.norms[l]->beta.size(); ++i) fn(params.norms[l]->beta(i));
        }
    }
}

/// Flattened gradients in for_each_parameter order.
std::vector<double> flatten(const MlpParams& params, const Gradients& grads);

}  // namespace pusmi::mlp
