#include "pusmi/pnsmi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "pusmi/kernels.hpp"
#include "pusmi/quadrature.hpp"

namespace pusmi {

JointRatioModel::JointRatioModel(GaussianBasis b, Vector pos, Vector neg)
    : basis(std::move(b)), alpha_pos(std::move(pos)), alpha_neg(std::move(neg)) {
    if (alpha_pos.size() != basis.size() || alpha_neg.size() != basis.size())
        throw ShapeError("joint model weights must match the basis size");
}

double JointRatioModel::operator()(const Vector& x, int y) const {
    const Vector phi = basis.eval_one(x);
    return y > 0 ? phi.dot(alpha_pos) : phi.dot(alpha_neg);
}

namespace {

void require_both_classes(const LabeledDataset& data) {
    data.validate();
    const auto n_pos = data.count(1);
    require(n_pos >= 1 && n_pos < data.labels.size(), "PN estimation needs both classes present");
}

PnMoments moments_from_design(const Matrix& phi, const std::vector<int>& labels) {
    const auto n = static_cast<double>(phi.rows());
    const Matrix m = kernels::parallel::second_moment(phi);
    Vector v_pos = Vector::Zero(phi.cols());
    Vector v_neg = Vector::Zero(phi.cols());
    double n_pos = 0.0;
    for (Eigen::Index i = 0; i < phi.rows(); ++i) {
        if (labels[static_cast<std::size_t>(i)] > 0) {
            v_pos += phi.row(i).transpose();
            n_pos += 1.0;
        } else {
            v_neg += phi.row(i).transpose();
        }
    }
    return {(n_pos / n) * m, ((n - n_pos) / n) * m, v_pos / n, v_neg / n};
}

}  // namespace

PnMoments compute_pn_moments(const LabeledDataset& data, const GaussianBasis& basis) {
    require_both_classes(data);
    if (data.dim() != basis.dim()) throw ShapeError("data dimension does not match basis");
    return moments_from_design(basis.eval(data.features), data.labels);
}

JointRatioModel fit_pn(const LabeledDataset& data, const GaussianBasis& basis, double lambda) {
    const PnMoments m = compute_pn_moments(data, basis);
    return JointRatioModel(basis, solve_ridge(m.h_pos, m.v_pos, lambda), solve_ridge(m.h_neg, m.v_neg, lambda));
}

double j_hat_pn(const JointRatioModel& model, const PnMoments& m) {
    return 0.5 * (model.alpha_pos.dot(m.h_pos * model.alpha_pos) + model.alpha_neg.dot(m.h_neg * model.alpha_neg)) -
           model.alpha_pos.dot(m.v_pos) - model.alpha_neg.dot(m.v_neg);
}

double smi_hat_pn(const JointRatioModel& model, const LabeledDataset& data) {
    return -j_hat_pn(model, compute_pn_moments(data, model.basis)) - 0.5;
}

PnEstimate estimate_pn_smi(const LabeledDataset& data, const EstimatorConfig& config) {
    require_both_classes(data);
    require(config.folds >= 2, "need at least two folds");
    require(data.size() >= config.folds, "fewer samples than folds");
    require(!config.lambda_grid.empty(), "lambda grid is empty");

    const Matrix centers = select_centers(data.features, config.max_centers, derive_seed(config.seed, 1));
    std::vector<double> sigmas = config.sigma_grid;
    if (sigmas.empty()) sigmas = bandwidth_grid(median_bandwidth(data.features, derive_seed(config.seed, 2)));

    std::vector<Eigen::Index> order(static_cast<std::size_t>(data.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng rng = make_rng(derive_seed(config.seed, 3), 32);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> fold(order.size());
    for (std::size_t r = 0; r < order.size(); ++r)
        fold[static_cast<std::size_t>(order[r])] = static_cast<int>(r % static_cast<std::size_t>(config.folds));

    FitReport report;
    for (double sigma : sigmas) {
        const GaussianBasis basis(centers, sigma);
        const Matrix phi = basis.eval(data.features);
        std::vector<double> sums(config.lambda_grid.size(), 0.0);
        for (int f = 0; f < config.folds; ++f) {
            std::vector<Eigen::Index> train_rows, test_rows;
            for (std::size_t i = 0; i < fold.size(); ++i)
                (fold[i] == f ? test_rows : train_rows).push_back(static_cast<Eigen::Index>(i));
            auto take = [&](const std::vector<Eigen::Index>& rows, Matrix& out, std::vector<int>& labels) {
                out.resize(static_cast<Eigen::Index>(rows.size()), phi.cols());
                labels.clear();
                for (std::size_t r = 0; r < rows.size(); ++r) {
                    out.row(static_cast<Eigen::Index>(r)) = phi.row(rows[r]);
                    labels.push_back(data.labels[static_cast<std::size_t>(rows[r])]);
                }
            };
            Matrix train_phi, test_phi;
            std::vector<int> train_y, test_y;
            take(train_rows, train_phi, train_y);
            take(test_rows, test_phi, test_y);
            const PnMoments train = moments_from_design(train_phi, train_y);
            const PnMoments test = moments_from_design(test_phi, test_y);
            for (std::size_t li = 0; li < config.lambda_grid.size(); ++li) {
                double score;
                try {
                    const double lambda = config.lambda_grid[li];
                    const JointRatioModel g(basis, solve_ridge(train.h_pos, train.v_pos, lambda),
                                            solve_ridge(train.h_neg, train.v_neg, lambda));
                    score = j_hat_pn(g, test);
                } catch (const NumericError&) {
                    score = std::numeric_limits<double>::infinity();
                }
                sums[li] += score;
            }
        }
        for (std::size_t li = 0; li < config.lambda_grid.size(); ++li)
            report.cv_table.push_back({sigma, config.lambda_grid[li], sums[li] / config.folds});
    }
    const CvRow& best = report.cv_table[best_cv_row(report.cv_table)];
    report.chosen_sigma = best.sigma;
    report.chosen_lambda = best.lambda;

    const GaussianBasis basis(centers, report.chosen_sigma);
    const PnMoments m = compute_pn_moments(data, basis);
    JointRatioModel model(basis, solve_ridge(m.h_pos, m.v_pos, report.chosen_lambda),
                          solve_ridge(m.h_neg, m.v_neg, report.chosen_lambda));
    report.final_objective = j_hat_pn(model, m);
    return {-report.final_objective - 0.5, std::move(model), std::move(report)};
}

// ---- population quantities -------------------------------------------------

namespace {

double normal_pdf(double x, double mean, double var) {
    const double z = x - mean;
    return std::exp(-0.5 * z * z / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

/// Log density ratio log p(x|+) - log p(x|-) for the shared diagonal covariance.
double log_class_ratio(const GaussianMixtureSpec& spec, const Vector& x) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < spec.dim(); ++j) {
        const double a = x(j) - spec.mean_pos(j);
        const double b = x(j) - spec.mean_neg(j);
        acc += (b * b - a * a) / (2.0 * spec.cov_diag(j));
    }
    return acc;
}

/// p(x|+)/p(x) as a function of the log class ratio t.
double positive_ratio_from_log(double t, ClassPrior prior) {
    // 1 / (thetaP + thetaN exp(-t)), written to avoid overflow for t << 0
    if (t >= 0.0) return 1.0 / (prior.theta_p() + prior.theta_n() * std::exp(-t));
    const double e = std::exp(t);
    return e / (prior.theta_p() * e + prior.theta_n());
}

double negative_ratio_from_log(double t, ClassPrior prior) {
    if (t <= 0.0) return 1.0 / (prior.theta_n() + prior.theta_p() * std::exp(t));
    const double e = std::exp(-t);
    return e / (prior.theta_n() * e + prior.theta_p());
}

}  // namespace

double true_ratio(const GaussianMixtureSpec& spec, const Vector& x) {
    spec.validate();
    if (x.size() != spec.dim()) throw ShapeError("point dimension does not match spec");
    return positive_ratio_from_log(log_class_ratio(spec, x), spec.prior);
}

double smi_quadrature(const GaussianMixtureSpec& spec, SmiForm form) {
    spec.validate();
    const Vector delta = spec.mean_pos - spec.mean_neg;
    const double var = (delta.array().square() / spec.cov_diag.array()).sum();
    if (var == 0.0) return 0.0;
    // z = delta^T C^{-1} x; under class y, z ~ N(m_y, var) and the log class
    // ratio is z - (m_pos + m_neg) / 2.
    const double m_pos = (delta.array() * spec.mean_pos.array() / spec.cov_diag.array()).sum();
    const double m_neg = (delta.array() * spec.mean_neg.array() / spec.cov_diag.array()).sum();
    const double offset = 0.5 * (m_pos + m_neg);
    const double sd = std::sqrt(var);
    const ClassPrior prior = spec.prior;

    auto marginal = [&](double z) {
        return prior.theta_p() * normal_pdf(z, m_pos, var) + prior.theta_n() * normal_pdf(z, m_neg, var);
    };
    std::function<double(double)> integrand;
    if (form == SmiForm::kPositive) {
        integrand = [&](double z) {
            const double r = positive_ratio_from_log(z - offset, prior) - 1.0;
            return prior.ratio() * 0.5 * r * r * marginal(z);
        };
    } else {
        integrand = [&](double z) {
            const double t = z - offset;
            const double rp = positive_ratio_from_log(t, prior) - 1.0;
            const double rn = negative_ratio_from_log(t, prior) - 1.0;
            return 0.5 * (prior.theta_p() * rp * rp + prior.theta_n() * rn * rn) * marginal(z);
        };
    }
    const double lo = std::min(m_pos, m_neg) - 14.0 * sd;
    const double hi = std::max(m_pos, m_neg) + 14.0 * sd;
    // split at the class means so each piece holds one bump
    const double a = std::min(m_pos, m_neg);
    const double b = std::max(m_pos, m_neg);
    double total = quad::integrate(integrand, lo, a, 1e-15, 1e-12).value;
    total += quad::integrate(integrand, a, b, 1e-15, 1e-12).value;
    total += quad::integrate(integrand, b, hi, 1e-15, 1e-12).value;
    return total;
}

double true_smi_quadrature(const GaussianMixtureSpec& spec) {
    const double joint = smi_quadrature(spec, SmiForm::kJoint);
    const double positive = smi_quadrature(spec, SmiForm::kPositive);
    const double scale = std::max({std::abs(joint), std::abs(positive), 1e-300});
    if (std::abs(joint - positive) > kFormAgreement * scale && std::abs(joint - positive) > 1e-14)
        throw NumericError("quadrature forms disagree: " + std::to_string(joint) + " vs " +
                           std::to_string(positive));
    return joint;
}

PopulationObjective population_objective(const GaussianMixtureSpec& spec,
                                         const std::function<double(const Vector&)>& w) {
    spec.validate();
    const Eigen::Index d = spec.dim();
    require(d <= 2, "population_objective supports d <= 2");
    const Vector sd = spec.cov_diag.array().sqrt();
    const ClassPrior prior = spec.prior;

    auto density = [&](const Vector& x, const Vector& mean) {
        double p = 1.0;
        for (Eigen::Index j = 0; j < d; ++j) p *= normal_pdf(x(j), mean(j), spec.cov_diag(j));
        return p;
    };
    auto lo = [&](Eigen::Index j) { return std::min(spec.mean_pos(j), spec.mean_neg(j)) - 12.0 * sd(j); };
    auto hi = [&](Eigen::Index j) { return std::max(spec.mean_pos(j), spec.mean_neg(j)) + 12.0 * sd(j); };

    PopulationObjective out{};
    if (d == 1) {
        Vector x(1);
        auto sq = [&](double t) {
            x(0) = t;
            const double v = w(x);
            return v * v * (prior.theta_p() * density(x, spec.mean_pos) + prior.theta_n() * density(x, spec.mean_neg));
        };
        auto lin = [&](double t) {
            x(0) = t;
            return w(x) * density(x, spec.mean_pos);
        };
        out.mean_sq_marginal = quad::integrate(sq, lo(0), hi(0), 1e-13, 1e-11).value;
        out.mean_positive = quad::integrate(lin, lo(0), hi(0), 1e-13, 1e-11).value;
        return out;
    }
    Vector x(2);
    auto sq = [&](double s, double t) {
        x << s, t;
        const double v = w(x);
        return v * v * (prior.theta_p() * density(x, spec.mean_pos) + prior.theta_n() * density(x, spec.mean_neg));
    };
    auto lin = [&](double s, double t) {
        x << s, t;
        return w(x) * density(x, spec.mean_pos);
    };
    out.mean_sq_marginal = quad::integrate_2d(sq, lo(0), hi(0), lo(1), hi(1), 1e-11, 1e-9).value;
    out.mean_positive = quad::integrate_2d(lin, lo(0), hi(0), lo(1), hi(1), 1e-11, 1e-9).value;
    return out;
}

}  // namespace pusmi
