#include "pusmi/serialize.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace pusmi::io {

Json to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json to_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Matrix matrix_from_json(const Json& j) {
    if (!j.is_array()) throw PreconditionError("matrix must be an array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const Json& row = j.at(static_cast<std::size_t>(i));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw ShapeError("ragged matrix in JSON");
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return m;
}

Vector vector_from_json(const Json& j) {
    if (!j.is_array()) throw PreconditionError("vector must be an array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
    return v;
}

Json to_json(const RatioModel& model) {
    return Json{{"sigma", model.basis.sigma()}, {"centers", to_json(model.basis.centers())}, {"beta", to_json(model.beta)}};
}

RatioModel ratio_model_from_json(const Json& j) {
    return RatioModel(GaussianBasis(matrix_from_json(j.at("centers")), j.at("sigma").get<double>()),
                      vector_from_json(j.at("beta")));
}

Json to_json(const JointRatioModel& model) {
    return Json{{"sigma", model.basis.sigma()},
                {"centers", to_json(model.basis.centers())},
                {"alpha_pos", to_json(model.alpha_pos)},
                {"alpha_neg", to_json(model.alpha_neg)}};
}

JointRatioModel joint_model_from_json(const Json& j) {
    return JointRatioModel(GaussianBasis(matrix_from_json(j.at("centers")), j.at("sigma").get<double>()),
                           vector_from_json(j.at("alpha_pos")), vector_from_json(j.at("alpha_neg")));
}

namespace {

// JSON has no infinity; failed CV cells are written as null.
Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Json to_json(const FitReport& report) {
    Json table = Json::array();
    for (const CvRow& r : report.cv_table)
        table.push_back(Json{{"sigma", r.sigma}, {"lambda", r.lambda}, {"score", finite_or_null(r.score)}});
    return Json{{"chosen_sigma", report.chosen_sigma},
                {"chosen_lambda", report.chosen_lambda},
                {"final_objective", report.final_objective},
                {"cv_table", std::move(table)}};
}

Json to_json(const SmiEstimate& estimate) {
    return Json{{"value", estimate.value},
                {"raw_negative_flag", estimate.raw_negative_flag},
                {"theta_p", estimate.prior.theta_p()},
                {"prior_ratio", estimate.prior.ratio()},
                {"j_hat", estimate.j_hat}};
}

Json to_json(const PermTestResult& result) {
    Json permuted = Json::array();
    for (double v : result.permuted) permuted.push_back(v);
    return Json{{"observed", result.observed},
                {"p_value", result.p_value},
                {"b_count", result.b_count},
                {"theta_p", result.prior_used.theta_p()},
                {"permuted", std::move(permuted)}};
}

Json to_json(const mlp::MlpSpec& spec) {
    return Json{{"layer_sizes", spec.layer_sizes},
                {"batchnorm", spec.batchnorm},
                {"activate_output", spec.activate_output}};
}

mlp::MlpSpec mlp_spec_from_json(const Json& j) {
    mlp::MlpSpec s;
    s.layer_sizes = j.at("layer_sizes").get<std::vector<Eigen::Index>>();
    s.batchnorm = j.value("batchnorm", false);
    s.activate_output = j.value("activate_output", false);
    s.validate();
    return s;
}

Json to_json(const mlp::MlpParams& params) {
    Json layers = Json::array();
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        Json layer{{"weight", to_json(params.layers[l].weight)}, {"bias", to_json(params.layers[l].bias)}};
        if (const auto& bn = params.norms[l])
            layer["batchnorm"] = Json{{"gamma", to_json(bn->gamma)},
                                      {"beta", to_json(bn->beta)},
                                      {"running_mean", to_json(bn->running_mean)},
                                      {"running_var", to_json(bn->running_var)}};
        layers.push_back(std::move(layer));
    }
    return Json{{"spec", to_json(params.spec)}, {"momentum", params.momentum}, {"layers", std::move(layers)}};
}

mlp::MlpParams mlp_params_from_json(const Json& j) {
    mlp::MlpParams p = mlp::init_params(mlp_spec_from_json(j.at("spec")), 0);
    p.momentum = j.value("momentum", mlp::kBatchNormMomentum);
    const Json& layers = j.at("layers");
    if (layers.size() != p.layers.size()) throw ShapeError("layer count does not match spec");
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const Json& lj = layers.at(l);
        Matrix w = matrix_from_json(lj.at("weight"));
        if (w.rows() != p.layers[l].weight.rows() || w.cols() != p.layers[l].weight.cols())
            throw ShapeError("weight shape does not match spec");
        p.layers[l].weight = std::move(w);
        Vector b = vector_from_json(lj.at("bias"));
        if (b.size() != p.layers[l].bias.size()) throw ShapeError("bias shape does not match spec");
        p.layers[l].bias = std::move(b);
        if (p.norms[l]) {
            const Json& bn = lj.at("batchnorm");
            p.norms[l]->gamma = vector_from_json(bn.at("gamma"));
            p.norms[l]->beta = vector_from_json(bn.at("beta"));
            p.norms[l]->running_mean = vector_from_json(bn.at("running_mean"));
            p.norms[l]->running_var = vector_from_json(bn.at("running_var"));
            if ((p.norms[l]->running_var.array() < 0.0).any()) throw PreconditionError("negative running variance");
        }
    }
    return p;
}

Json to_json(const mlp::SgdConfig& c) {
    return Json{{"learning_rate", c.learning_rate},
                {"weight_decay", c.weight_decay},
                {"grad_noise_std", c.grad_noise_std},
                {"batch_size", c.batch_size},
                {"seed", c.seed}};
}

mlp::SgdConfig sgd_config_from_json(const Json& j, mlp::SgdConfig c) {
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.grad_noise_std = j.value("grad_noise_std", c.grad_noise_std);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
    c.validate();
    return c;
}

PurlConfig purl_config_from_json(const Json& j, PurlConfig c) {
    if (j.contains("v_spec")) c.v_spec = mlp_spec_from_json(j.at("v_spec"));
    if (j.contains("w_spec")) c.w_spec = mlp_spec_from_json(j.at("w_spec"));
    if (j.contains("sgd_w")) c.sgd_w = sgd_config_from_json(j.at("sgd_w"), c.sgd_w);
    if (j.contains("sgd_v")) c.sgd_v = sgd_config_from_json(j.at("sgd_v"), c.sgd_v);
    c.w_steps_per_v_step = j.value("w_steps_per_v_step", c.w_steps_per_v_step);
    c.epochs = j.value("epochs", c.epochs);
    c.patience = j.value("patience", c.patience);
    return c;
}

Json to_json(const PurlConfig& c) {
    return Json{{"v_spec", to_json(c.v_spec)},
                {"w_spec", to_json(c.w_spec)},
                {"sgd_w", to_json(c.sgd_w)},
                {"sgd_v", to_json(c.sgd_v)},
                {"w_steps_per_v_step", c.w_steps_per_v_step},
                {"epochs", c.epochs},
                {"patience", c.patience}};
}

namespace {

void put_double(std::ostream& out, double v) {
    if (std::isnan(v))
        out << "nan";
    else
        out << v;
}

}  // namespace

void write_history_csv(std::ostream& out, const std::vector<HistoryRow>& history) {
    const auto old = out.precision(std::numeric_limits<double>::max_digits10);
    out << "iteration,train_j,validation_j\n";
    for (const auto& r : history) {
        out << r.iteration << ',';
        put_double(out, r.train_j);
        out << ',';
        put_double(out, r.validation_j);
        out << '\n';
    }
    out.precision(old);
}

void write_mse_csv(std::ostream& out, const std::vector<MseRow>& rows) {
    const auto old = out.precision(std::numeric_limits<double>::max_digits10);
    out << "n,n_p,n_u,mse_mean,mse_stderr\n";
    for (const auto& r : rows)
        out << r.n << ',' << r.n_p << ',' << r.n_u << ',' << r.mse_mean << ',' << r.mse_stderr << '\n';
    out.precision(old);
}

void write_type2_csv(std::ostream& out, const std::vector<Type2Row>& rows) {
    const auto old = out.precision(std::numeric_limits<double>::max_digits10);
    out << "n_p,n_u,level,trials,type2_freq\n";
    for (const auto& r : rows)
        out << r.n_p << ',' << r.n_u << ',' << r.level << ',' << r.trials << ',' << r.type2_freq << '\n';
    out.precision(old);
}

}  // namespace pusmi::io
