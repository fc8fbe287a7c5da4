#include "pusmi/mlp.hpp"

#include <cmath>

namespace pusmi::mlp {

void MlpSpec::validate() const {
    require(layer_sizes.size() >= 2, "network needs at least an input and an output size");
    for (auto s : layer_sizes) require(s >= 1, "layer sizes must be >= 1");
}

void SgdConfig::validate() const {
    require(learning_rate >= 0.0, "learning rate must be non-negative");
    require(weight_decay >= 0.0, "weight decay must be non-negative");
    require(grad_noise_std >= 0.0, "gradient noise must be non-negative");
    require(batch_size >= 2, "batch size must be >= 2");
}

MlpParams init_params(const MlpSpec& spec, std::uint64_t seed) {
    spec.validate();
    MlpParams p;
    p.spec = spec;
    Rng rng = make_rng(seed, 40);
    for (std::size_t l = 0; l < spec.num_layers(); ++l) {
        const Eigen::Index in = spec.layer_sizes[l];
        const Eigen::Index out = spec.layer_sizes[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        std::uniform_real_distribution<double> u(-limit, limit);
        DenseLayer layer;
        layer.weight.resize(out, in);
        for (Eigen::Index i = 0; i < out; ++i)
            for (Eigen::Index j = 0; j < in; ++j) layer.weight(i, j) = u(rng);
        if (spec.normalized(l)) {
            p.norms.emplace_back(BatchNorm{Vector::Ones(out), Vector::Zero(out), Vector::Zero(out), Vector::Ones(out)});
        } else {
            layer.bias = Vector::Zero(out);
            p.norms.emplace_back(std::nullopt);
        }
        p.layers.push_back(std::move(layer));
    }
    return p;
}

namespace {

void check_batch(const MlpParams& params, const Matrix& batch) {
    if (batch.cols() != params.spec.input_size())
        throw ShapeError("batch width " + std::to_string(batch.cols()) + " != network input " +
                         std::to_string(params.spec.input_size()));
}

// Shared by forward and infer; `running` is null in eval mode.
ForwardResult run(const MlpParams& params, std::vector<std::optional<BatchNorm>>* running, const Matrix& batch,
                  Mode mode) {
    check_batch(params, batch);
    const auto n = batch.rows();
    const bool train = mode == Mode::kTrain;
    if (train && params.spec.batchnorm && n < 2)
        throw PreconditionError("train-mode batch normalisation needs at least two rows");

    ForwardResult res{Matrix(), ForwardCache{mode, params.version, {}}};
    res.cache.layers.reserve(params.layers.size());
    Matrix act = batch;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const DenseLayer& layer = params.layers[l];
        LayerCache lc;
        lc.input = act;
        lc.pre = act * layer.weight.transpose();
        if (layer.bias.size() > 0) lc.pre.rowwise() += layer.bias.transpose();

        if (const auto& bn = params.norms[l]) {
            Eigen::RowVectorXd mean, var;
            if (train) {
                mean = lc.pre.colwise().mean();
                var = (lc.pre.rowwise() - mean).array().square().colwise().mean();
                if (running) {
                    auto& st = *(*running)[l];
                    const double m = params.momentum;
                    const double unbias = static_cast<double>(n) / static_cast<double>(n - 1);
                    st.running_mean = m * st.running_mean + (1.0 - m) * mean.transpose();
                    st.running_var = m * st.running_var + (1.0 - m) * unbias * var.transpose();
                }
            } else {
                mean = bn->running_mean.transpose();
                var = bn->running_var.transpose();
            }
            lc.inv_std = (var.array() + kBatchNormEps).rsqrt().transpose();
            lc.normalized = (lc.pre.rowwise() - mean).array().rowwise() * lc.inv_std.transpose().array();
            lc.post = (lc.normalized.array().rowwise() * bn->gamma.transpose().array()).rowwise() +
                      bn->beta.transpose().array();
        } else {
            lc.post = lc.pre;
        }
        act = params.spec.activated(l) ? Matrix(lc.post.cwiseMax(0.0)) : lc.post;
        res.cache.layers.push_back(std::move(lc));
    }
    res.output = std::move(act);
    return res;
}

}  // namespace

ForwardResult forward(MlpParams& params, const Matrix& batch, Mode mode) {
    return run(params, mode == Mode::kTrain ? &params.norms : nullptr, batch, mode);
}

Matrix infer(const MlpParams& params, const Matrix& batch) {
    return run(params, nullptr, batch, Mode::kEval).output;
}

bool Gradients::all_zero() const {
    auto zero = [](const auto& v) {
        for (const auto& m : v)
            if (m.size() > 0 && !m.isZero(0.0)) return false;
        return true;
    };
    return zero(weight) && zero(bias) && zero(gamma) && zero(beta) && input.isZero(0.0);
}

Gradients backward(const MlpParams& params, const ForwardCache& cache, const Matrix& output_grad) {
    if (cache.version != params.version) throw PreconditionError("stale forward cache: parameters changed since");
    if (cache.layers.size() != params.layers.size()) throw ShapeError("forward cache does not match network depth");
    const auto& last = cache.layers.back();
    if (output_grad.rows() != last.post.rows() || output_grad.cols() != last.post.cols())
        throw ShapeError("output gradient shape does not match forward output");

    const std::size_t depth = params.layers.size();
    Gradients g;
    g.weight.resize(depth);
    g.bias.resize(depth);
    g.gamma.resize(depth);
    g.beta.resize(depth);

    const bool train = cache.mode == Mode::kTrain;
    Matrix grad = output_grad;
    for (std::size_t li = depth; li-- > 0;) {
        const LayerCache& lc = cache.layers[li];
        const DenseLayer& layer = params.layers[li];
        if (lc.input.cols() != layer.weight.cols() || lc.pre.cols() != layer.weight.rows())
            throw ShapeError("forward cache does not match layer shapes");
        if (params.spec.activated(li)) grad = (lc.post.array() > 0.0).select(grad, 0.0);

        Matrix dz;
        if (const auto& bn = params.norms[li]) {
            g.gamma[li] = (grad.array() * lc.normalized.array()).colwise().sum().transpose();
            g.beta[li] = grad.colwise().sum().transpose();
            const Matrix dxhat = grad.array().rowwise() * bn->gamma.transpose().array();
            if (train) {
                const auto n = static_cast<double>(grad.rows());
                const Eigen::RowVectorXd sum_dx = dxhat.colwise().sum();
                const Eigen::RowVectorXd sum_dx_xhat = (dxhat.array() * lc.normalized.array()).colwise().sum();
                Matrix centered = (n * dxhat).rowwise() - sum_dx;
                centered -= (lc.normalized.array().rowwise() * sum_dx_xhat.array()).matrix();
                dz = (centered.array().rowwise() * (lc.inv_std.transpose().array() / n)).matrix();
            } else {
                dz = dxhat.array().rowwise() * lc.inv_std.transpose().array();
            }
        } else {
            dz = std::move(grad);
        }
        g.weight[li] = dz.transpose() * lc.input;
        if (layer.bias.size() > 0) g.bias[li] = dz.colwise().sum().transpose();
        grad = dz * layer.weight;
    }
    g.input = std::move(grad);
    return g;
}

void sgd_step(MlpParams& params, const Gradients& grads, const SgdConfig& config, Rng& rng) {
    config.validate();
    if (grads.weight.size() != params.layers.size()) throw ShapeError("gradient depth does not match network");
    std::normal_distribution<double> noise(0.0, 1.0);
    const bool noisy = config.grad_noise_std > 0.0;
    auto update = [&](double& p, double gr, double decay) {
        double step = gr + decay * p;
        if (noisy) step += config.grad_noise_std * noise(rng);
        p -= config.learning_rate * step;
    };
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto& layer = params.layers[l];
        if (grads.weight[l].rows() != layer.weight.rows() || grads.weight[l].cols() != layer.weight.cols())
            throw ShapeError("weight gradient shape mismatch");
        for (Eigen::Index i = 0; i < layer.weight.size(); ++i)
            update(layer.weight.data()[i], grads.weight[l].data()[i], config.weight_decay);
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i)
            update(layer.bias(i), grads.bias[l](i), config.weight_decay);
        if (auto& bn = params.norms[l]) {
            for (Eigen::Index i = 0; i < bn->gamma.size(); ++i) update(bn->gamma(i), grads.gamma[l](i), 0.0);
            for (Eigen::Index i = 0; i < bn->beta.size(); ++i) update(bn->beta(i), grads.beta[l](i), 0.0);
        }
    }
    ++params.version;
}

std::vector<double> flatten(const MlpParams& params, const Gradients& grads) {
    std::vector<double> out;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& w = grads.weight[l];
        out.insert(out.end(), w.data(), w.data() + w.size());
        const auto& b = grads.bias[l];
        out.insert(out.end(), b.data(), b.data() + b.size());
        if (params.norms[l]) {
            out.insert(out.end(), grads.gamma[l].data(), grads.gamma[l].data() + grads.gamma[l].size());
            out.insert(out.end(), grads.beta[l].data(), grads.beta[l].data() + grads.beta[l].size());
        }
    }
    return out;
}

}  // namespace pusmi::mlp
