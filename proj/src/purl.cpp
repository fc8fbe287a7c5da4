#include "pusmi/purl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pusmi/estimator.hpp"

namespace pusmi {

void PurlConfig::validate(Eigen::Index input_dim) const {
    v_spec.validate();
    w_spec.validate();
    sgd_w.validate();
    sgd_v.validate();
    if (v_spec.input_size() != input_dim)
        throw ShapeError("map input " + std::to_string(v_spec.input_size()) + " != data dim " +
                         std::to_string(input_dim));
    if (v_spec.output_size() != w_spec.input_size()) throw ShapeError("map output must equal ratio head input");
    require(w_spec.output_size() == 1, "ratio head must have a single output");
    require(v_spec.output_size() < input_dim, "representation must be lower-dimensional than the input");
    require(w_steps_per_v_step >= 1, "need at least one head update per map update");
    require(epochs >= 0, "epochs must be non-negative");
    require(patience >= 1, "patience must be >= 1");
    if (validation) {
        validation->require_nonempty();
        if (validation->dim() != input_dim) throw ShapeError("validation data dimension mismatch");
    }
}

PurlConfig PurlConfig::deep(Eigen::Index d) {
    PurlConfig c;
    c.v_spec = {{d, 60, 20}, true, true};
    c.w_spec = {{20, 1}, false, false};
    return c;
}

PurlConfig PurlConfig::linear_toy(Eigen::Index d, Eigen::Index hidden_units) {
    PurlConfig c;
    c.v_spec = {{d, 1}, false, false};
    c.w_spec = {{1, hidden_units, 1}, false, false};
    c.sgd_w.learning_rate = 0.05;
    c.sgd_v.learning_rate = 0.05;
    c.sgd_w.batch_size = 60;
    c.sgd_v.batch_size = 60;
    c.epochs = 150;
    c.patience = 150;
    return c;
}

double composite_objective(const mlp::MlpParams& v, const mlp::MlpParams& w, const PuDataset& data) {
    data.require_nonempty();
    const Vector out_p = mlp::infer(w, mlp::infer(v, data.positives)).col(0);
    const Vector out_u = mlp::infer(w, mlp::infer(v, data.unlabeled)).col(0);
    return j_hat_from_outputs(out_p, out_u);
}

namespace {

/// Endless without-replacement stream of row indices; reshuffles on wrap.
class RowStream {
public:
    RowStream(Eigen::Index n, Rng& rng) : order_(static_cast<std::size_t>(n)), rng_(&rng) {
        std::iota(order_.begin(), order_.end(), Eigen::Index{0});
        reshuffle();
    }
    void reshuffle() {
        std::shuffle(order_.begin(), order_.end(), *rng_);
        pos_ = 0;
    }
    Eigen::Index next() {
        if (pos_ == order_.size()) reshuffle();
        return order_[pos_++];
    }

private:
    std::vector<Eigen::Index> order_;
    std::size_t pos_ = 0;
    Rng* rng_;
};

struct BatchShape {
    Eigen::Index positives;
    Eigen::Index unlabeled;
};

BatchShape batch_shape(Eigen::Index batch, Eigen::Index n_p, Eigen::Index n_u) {
    const auto total = n_p + n_u;
    Eigen::Index pos = (batch * n_p + total - 1) / total;
    pos = std::clamp<Eigen::Index>(pos, 1, batch - 1);
    return {pos, batch - pos};
}

}  // namespace

PurlResult train_purl(const PuDataset& data, const PurlConfig& config, std::uint64_t seed) {
    data.require_nonempty();
    config.validate(data.dim());
    const BatchShape shape_w = batch_shape(config.sgd_w.batch_size, data.n_p(), data.n_u());
    const BatchShape shape_v = batch_shape(config.sgd_v.batch_size, data.n_p(), data.n_u());
    require(std::max(shape_w.positives, shape_v.positives) <= data.n_p() &&
                std::max(shape_w.unlabeled, shape_v.unlabeled) <= data.n_u(),
            "mini-batch larger than the available positive or unlabeled rows");

    PurlResult res;
    res.v_params = mlp::init_params(config.v_spec, derive_seed(seed, 1));
    res.w_params = mlp::init_params(config.w_spec, derive_seed(seed, 2));
    mlp::MlpParams& v = res.v_params;
    mlp::MlpParams& w = res.w_params;

    Rng batch_rng = make_rng(seed, 3);
    Rng noise_w = make_rng(derive_seed(seed, 4), config.sgd_w.seed);
    Rng noise_v = make_rng(derive_seed(seed, 5), config.sgd_v.seed);
    RowStream pos_stream(data.n_p(), batch_rng);
    RowStream unl_stream(data.n_u(), batch_rng);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto evaluate = [&](int iteration) {
        HistoryRow row{iteration, composite_objective(v, w, data), nan};
        if (config.validation) row.validation_j = composite_objective(v, w, *config.validation);
        if (!std::isfinite(row.train_j))
            throw NumericError("PURL diverged at epoch " + std::to_string(iteration) +
                               ": train objective is " + std::to_string(row.train_j));
        return row;
    };
    auto monitored = [&](const HistoryRow& r) { return config.validation ? r.validation_j : r.train_j; };

    res.history.push_back(evaluate(0));
    double best = monitored(res.history.back());
    mlp::MlpParams best_v = v;
    mlp::MlpParams best_w = w;
    int stale = 0;

    const Eigen::Index batches_per_epoch =
        (data.n_p() + data.n_u() + config.sgd_w.batch_size - 1) / config.sgd_w.batch_size;
    const int cycle = config.w_steps_per_v_step + 1;
    long step = 0;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        for (Eigen::Index b = 0; b < batches_per_epoch; ++b, ++step) {
            const bool map_step = step % cycle == cycle - 1;
            const BatchShape shape = map_step ? shape_v : shape_w;
            Matrix x(shape.positives + shape.unlabeled, data.dim());
            for (Eigen::Index i = 0; i < shape.positives; ++i) x.row(i) = data.positives.row(pos_stream.next());
            for (Eigen::Index k = 0; k < shape.unlabeled; ++k)
                x.row(shape.positives + k) = data.unlabeled.row(unl_stream.next());

            auto fv = mlp::forward(v, x, mlp::Mode::kTrain);
            auto fw = mlp::forward(w, fv.output, mlp::Mode::kTrain);
            // dJ/dout: -1/nP on positive rows, out/nU on unlabelled rows
            Matrix grad(x.rows(), 1);
            grad.topRows(shape.positives).setConstant(-1.0 / static_cast<double>(shape.positives));
            grad.bottomRows(shape.unlabeled) =
                fw.output.bottomRows(shape.unlabeled) / static_cast<double>(shape.unlabeled);

            const mlp::Gradients gw = mlp::backward(w, fw.cache, grad);
            if (map_step) {
                const mlp::Gradients gv = mlp::backward(v, fv.cache, gw.input);
                mlp::sgd_step(v, gv, config.sgd_v, noise_v);
                ++res.v_updates;
                if (config.on_update) config.on_update(UpdateTarget::kMap);
            } else {
                mlp::sgd_step(w, gw, config.sgd_w, noise_w);
                ++res.w_updates;
                if (config.on_update) config.on_update(UpdateTarget::kRatioHead);
            }
        }

        res.history.push_back(evaluate(epoch));
        const double score = monitored(res.history.back());
        if (score < best) {
            best = score;
            best_v = v;
            best_w = w;
            res.best_iteration = epoch;
            stale = 0;
        } else if (++stale >= config.patience) {
            break;
        }
    }
    v = std::move(best_v);
    w = std::move(best_w);
    return res;
}

Matrix transform(const PurlResult& result, const Matrix& points) { return mlp::infer(result.v_params, points); }

Vector linear_direction(const mlp::MlpParams& v) {
    require(v.layers.size() == 1 && v.spec.output_size() == 1, "direction needs a linear map with one output");
    Vector dir = v.layers.front().weight.row(0).transpose();
    const double norm = dir.norm();
    if (norm == 0.0) throw NumericError("linear map has zero weights");
    return dir / norm;
}

PcaResult pca_project(const Matrix& points, Eigen::Index k) {
    const Eigen::Index n = points.rows();
    const Eigen::Index d = points.cols();
    require(n >= 2, "PCA needs at least two rows");
    require(k >= 1 && k <= d, "PCA needs 1 <= k <= d");

    PcaResult out;
    out.mean = points.colwise().mean().transpose();
    const Matrix centered = points.rowwise() - out.mean.transpose();
    Matrix cov = centered.transpose() * centered / static_cast<double>(n - 1);
    const double total = cov.trace();
    if (!(total > 0.0)) throw NumericError("PCA on zero-variance data");

    out.components.resize(k, d);
    out.variances.resize(k);
    for (Eigen::Index c = 0; c < k; ++c) {
        Vector vec(d);
        for (Eigen::Index j = 0; j < d; ++j) vec(j) = 1.0 + 0.1 * static_cast<double>(j + 1) / static_cast<double>(d);
        auto orthogonalize = [&](Vector& x) {
            for (Eigen::Index p = 0; p < c; ++p) x -= x.dot(out.components.row(p).transpose()) * out.components.row(p).transpose();
        };
        orthogonalize(vec);
        if (vec.norm() < 1e-12) vec = Vector::Unit(d, c);
        orthogonalize(vec);
        vec.normalize();
        for (int iter = 0; iter < 20000; ++iter) {
            Vector next = cov * vec;
            orthogonalize(next);
            const double norm = next.norm();
            if (norm <= 1e-14 * total) break;  // remaining spectrum is null; keep any orthogonal unit vector
            next /= norm;
            if (next.dot(vec) < 0.0) next = -next;
            const double change = (next - vec).norm();
            vec = next;
            if (change < 1e-13) break;
        }
        Eigen::Index arg;
        vec.cwiseAbs().maxCoeff(&arg);
        if (vec(arg) < 0.0) vec = -vec;
        out.components.row(c) = vec.transpose();
        out.variances(c) = vec.dot(cov * vec);
        cov -= out.variances(c) * vec * vec.transpose();
    }
    out.projected = centered * out.components.transpose();
    return out;
}

}  // namespace pusmi
