#include "pusmi/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pusmi/kernels.hpp"

namespace pusmi {

RatioModel::RatioModel(GaussianBasis b, Vector coef) : basis(std::move(b)), beta(std::move(coef)) {
    if (beta.size() != basis.size())
        throw ShapeError("beta length " + std::to_string(beta.size()) + " != basis size " +
                         std::to_string(basis.size()));
}

double RatioModel::operator()(const Vector& x) const { return basis.eval_one(x).dot(beta); }

Vector RatioModel::eval(const Matrix& points) const { return basis.eval(points) * beta; }

PuMoments compute_moments(const PuDataset& data, const GaussianBasis& basis) {
    data.require_nonempty();
    if (data.dim() != basis.dim()) throw ShapeError("data dimension does not match basis");
    return {kernels::parallel::second_moment(basis.eval(data.unlabeled)),
            kernels::parallel::column_mean(basis.eval(data.positives))};
}

double j_hat_from_outputs(const Vector& w_pos, const Vector& w_unl) {
    require(w_pos.size() >= 1 && w_unl.size() >= 1, "objective needs positive and unlabeled outputs");
    return 0.5 * w_unl.squaredNorm() / static_cast<double>(w_unl.size()) - w_pos.mean();
}

double j_hat(const RatioModel& model, const PuDataset& data) {
    data.require_nonempty();
    if (data.dim() != model.basis.dim()) throw ShapeError("data dimension does not match model");
    return j_hat_from_outputs(model.eval(data.positives), model.eval(data.unlabeled));
}

double j_hat_quadratic(const Vector& beta, const PuMoments& m) {
    return 0.5 * beta.dot(m.h_u * beta) - beta.dot(m.h_p);
}

namespace {

bool try_solve(const Matrix& a, const Vector& rhs, Vector& out) {
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) return false;
    out = llt.solve(rhs);
    if (!out.allFinite()) return false;
    const double scale = std::max(rhs.norm(), std::numeric_limits<double>::min());
    return (a * out - rhs).norm() / scale <= kSolveTolerance;
}

}  // namespace

Vector solve_ridge(const Matrix& h_mat, const Vector& h_vec, double lambda) {
    const Eigen::Index b = h_mat.rows();
    if (h_mat.cols() != b || h_vec.size() != b) throw ShapeError("ridge system shapes disagree");
    require(lambda >= 0.0, "lambda must be non-negative");

    Matrix a = h_mat;
    a.diagonal().array() += lambda;
    Vector beta;
    if (!try_solve(a, h_vec, beta)) {
        const double jitter = kJitterScale * h_mat.trace() / static_cast<double>(b);
        a.diagonal().array() += jitter;
        if (jitter <= 0.0 || !try_solve(a, h_vec, beta))
            throw NumericError("ridge system is singular at lambda=" + std::to_string(lambda) +
                               "; use lambda > 0");
    }
    if (beta.norm() > kMaxBetaNorm)
        throw NumericError("ridge solution norm " + std::to_string(beta.norm()) +
                           " exceeds cap; system is ill-conditioned, use a larger lambda");
    return beta;
}

RatioModel fit_analytic(const PuMoments& moments, const GaussianBasis& basis, double lambda) {
    return RatioModel(basis, solve_ridge(moments.h_u, moments.h_p, lambda));
}

RatioModel fit_analytic(const PuDataset& data, const GaussianBasis& basis, double lambda) {
    return fit_analytic(compute_moments(data, basis), basis, lambda);
}

std::size_t best_cv_row(const std::vector<CvRow>& table) {
    require(!table.empty(), "empty CV table");
    std::size_t best = 0;
    for (std::size_t i = 1; i < table.size(); ++i) {
        const CvRow& a = table[i];
        const CvRow& b = table[best];
        if (a.score < b.score || (a.score == b.score && (a.lambda < b.lambda ||
                                                         (a.lambda == b.lambda && a.sigma < b.sigma))))
            best = i;
    }
    if (!std::isfinite(table[best].score)) throw NumericError("every CV candidate failed to fit");
    return best;
}

namespace {

std::vector<int> fold_labels(Eigen::Index n, int folds, Rng& rng) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> fold(static_cast<std::size_t>(n));
    for (std::size_t r = 0; r < order.size(); ++r)
        fold[static_cast<std::size_t>(order[r])] = static_cast<int>(r % static_cast<std::size_t>(folds));
    return fold;
}

Matrix rows_in_fold(const Matrix& m, const std::vector<int>& fold, int f) {
    const auto count = static_cast<Eigen::Index>(std::count(fold.begin(), fold.end(), f));
    Matrix out(count, m.cols());
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < fold.size(); ++i)
        if (fold[i] == f) out.row(r++) = m.row(static_cast<Eigen::Index>(i));
    return out;
}

}  // namespace

FitReport cross_validate(const PuDataset& data, const Matrix& centers, const std::vector<double>& sigma_grid,
                         const std::vector<double>& lambda_grid, int folds, std::uint64_t seed) {
    data.require_nonempty();
    require(!sigma_grid.empty(), "sigma grid is empty");
    require(!lambda_grid.empty(), "lambda grid is empty");
    require(folds >= 2, "need at least two folds");
    require(data.n_p() >= folds && data.n_u() >= folds, "fewer samples than folds");
    if (centers.cols() != data.dim()) throw ShapeError("centers do not match data dimension");
    for (double l : lambda_grid) require(l >= 0.0, "lambda grid entries must be non-negative");

    Rng p_rng = make_rng(seed, 30);
    Rng u_rng = make_rng(seed, 31);
    const auto p_fold = fold_labels(data.n_p(), folds, p_rng);
    const auto u_fold = fold_labels(data.n_u(), folds, u_rng);

    FitReport report;
    report.cv_table.reserve(sigma_grid.size() * lambda_grid.size());

    for (double sigma : sigma_grid) {
        const GaussianBasis basis(centers, sigma);
        const Matrix phi_p = basis.eval(data.positives);
        const Matrix phi_u = basis.eval(data.unlabeled);
        std::vector<double> sums(lambda_grid.size(), 0.0);

        // Training moments are the full sums minus the held-out fold.
        std::vector<PuMoments> test(static_cast<std::size_t>(folds));
        std::vector<Eigen::Index> n_u_test(static_cast<std::size_t>(folds)), n_p_test(n_u_test.size());
        for (int f = 0; f < folds; ++f) {
            const Matrix u_test = rows_in_fold(phi_u, u_fold, f);
            const Matrix p_test = rows_in_fold(phi_p, p_fold, f);
            test[f] = {kernels::parallel::second_moment(u_test), kernels::parallel::column_mean(p_test)};
            n_u_test[f] = u_test.rows();
            n_p_test[f] = p_test.rows();
        }
        Matrix sum_u = Matrix::Zero(phi_u.cols(), phi_u.cols());
        Vector sum_p = Vector::Zero(phi_p.cols());
        for (int f = 0; f < folds; ++f) {
            sum_u += static_cast<double>(n_u_test[f]) * test[f].h_u;
            sum_p += static_cast<double>(n_p_test[f]) * test[f].h_p;
        }

        for (int f = 0; f < folds; ++f) {
            const auto nu = static_cast<double>(data.n_u() - n_u_test[f]);
            const auto np = static_cast<double>(data.n_p() - n_p_test[f]);
            const PuMoments train{(sum_u - static_cast<double>(n_u_test[f]) * test[f].h_u) / nu,
                                  (sum_p - static_cast<double>(n_p_test[f]) * test[f].h_p) / np};

            for (std::size_t li = 0; li < lambda_grid.size(); ++li) {
                double score;
                try {
                    score = j_hat_quadratic(solve_ridge(train.h_u, train.h_p, lambda_grid[li]), test[f]);
                } catch (const NumericError&) {
                    score = std::numeric_limits<double>::infinity();
                }
                sums[li] += score;
            }
        }
        for (std::size_t li = 0; li < lambda_grid.size(); ++li)
            report.cv_table.push_back({sigma, lambda_grid[li], sums[li] / folds});
    }

    const CvRow& best = report.cv_table[best_cv_row(report.cv_table)];
    report.chosen_sigma = best.sigma;
    report.chosen_lambda = best.lambda;
    return report;
}

SmiEstimate SmiEstimate::from_objective(double j, ClassPrior prior) {
    const double value = prior.ratio() * (-j - 0.5);
    return {value, value < 0.0, prior, j};
}

std::pair<RatioModel, FitReport> fit_ratio(const PuDataset& data, const EstimatorConfig& config) {
    data.require_nonempty();
    const Matrix centers = select_centers(data.unlabeled, config.max_centers, derive_seed(config.seed, 1));
    std::vector<double> sigmas = config.sigma_grid;
    if (sigmas.empty()) sigmas = bandwidth_grid(median_bandwidth(data.unlabeled, derive_seed(config.seed, 2)));

    FitReport report = cross_validate(data, centers, sigmas, config.lambda_grid, config.folds,
                                      derive_seed(config.seed, 3));
    const GaussianBasis basis(centers, report.chosen_sigma);
    const PuMoments moments = compute_moments(data, basis);
    RatioModel model = fit_analytic(moments, basis, report.chosen_lambda);
    report.final_objective = j_hat_quadratic(model.beta, moments);
    return {std::move(model), std::move(report)};
}

EstimateResult estimate_smi(const PuDataset& data, ClassPrior prior, const EstimatorConfig& config) {
    auto [model, report] = fit_ratio(data, config);
    SmiEstimate est = SmiEstimate::from_objective(report.final_objective, prior);
    return {est, std::move(model), std::move(report)};
}

double posterior(const RatioModel& model, ClassPrior prior, const Vector& x) {
    return prior.theta_p() * std::max(model(x), 0.0);
}

bool classify_positive(const RatioModel& model, ClassPrior prior, const Vector& x) {
    return posterior(model, prior, x) > 0.5;
}

}  // namespace pusmi
