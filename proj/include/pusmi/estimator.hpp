#pragma once

// Squared-loss mutual information from positive and unlabelled samples.
//
// A density ratio w(x) ~ p(x | y=+1) / p(x) is fitted by minimising
//
//     J(w) = 1/(2 nU) sum_k w(xU_k)^2 - 1/nP sum_i w(xP_i)
//
// and the information estimate is (thetaP / thetaN) * (-J(w) - 1/2). The class
// prior enters only as that final positive factor, so fitting, model selection
// and any comparison between models are prior-free.

#include <cstdint>
#include <vector>

#include "pusmi/basis.hpp"
#include "pusmi/common.hpp"
#include "pusmi/data.hpp"

namespace pusmi {

inline constexpr double kMaxBetaNorm = 1e6;
inline constexpr double kJitterScale = 1e-12;
inline constexpr double kSolveTolerance = 1e-8;

/// w(x) = beta^T phi(x)
struct RatioModel {
    GaussianBasis basis;
    Vector beta;

    RatioModel(GaussianBasis b, Vector coef);

    double operator()(const Vector& x) const;
    Vector eval(const Matrix& points) const;
};

/// Empirical moments of the basis: H = mean over U of phi phi^T, h = mean over P of phi.
struct PuMoments {
    Matrix h_u;
    Vector h_p;
};

PuMoments compute_moments(const PuDataset& data, const GaussianBasis& basis);

/// J from model outputs on the positive and unlabelled rows.
double j_hat_from_outputs(const Vector& w_pos, const Vector& w_unl);
double j_hat(const RatioModel& model, const PuDataset& data);
/// J = 1/2 beta^T H beta - beta^T h, the quadratic form of a linear model.
double j_hat_quadratic(const Vector& beta, const PuMoments& m);

/// Solves (H + lambda I) beta = h by Cholesky. A failed factorisation or a
/// residual above kSolveTolerance triggers one retry with jitter
/// kJitterScale * trace(H) / b on the diagonal. Solutions with
/// |beta| > kMaxBetaNorm are rejected.
Vector solve_ridge(const Matrix& h_mat, const Vector& h_vec, double lambda);

RatioModel fit_analytic(const PuDataset& data, const GaussianBasis& basis, double lambda);
RatioModel fit_analytic(const PuMoments& moments, const GaussianBasis& basis, double lambda);

struct CvRow {
    double sigma;
    double lambda;
    double score;  ///< mean held-out J; +inf when the fit failed
};

struct FitReport {
    double chosen_sigma = 0.0;
    double chosen_lambda = 0.0;
    std::vector<CvRow> cv_table;
    double final_objective = 0.0;
};

/// Index of the best row: lowest score, ties to smaller lambda then smaller sigma.
std::size_t best_cv_row(const std::vector<CvRow>& table);

/// k-fold model selection over (sigma, lambda). Positives and unlabelled rows
/// get independent seeded fold assignments; centers are shared by all folds.
FitReport cross_validate(const PuDataset& data, const Matrix& centers, const std::vector<double>& sigma_grid,
                         const std::vector<double>& lambda_grid, int folds, std::uint64_t seed);

struct SmiEstimate {
    double value;
    bool raw_negative_flag;
    ClassPrior prior;
    double j_hat;

    /// (thetaP / thetaN) * (-j - 1/2), never clamped.
    static SmiEstimate from_objective(double j, ClassPrior prior);
};

struct EstimatorConfig {
    /// Empty means median heuristic * {1/2, 1, 2}.
    std::vector<double> sigma_grid;
    std::vector<double> lambda_grid{1e-3, 1e-2, 1e-1, 1.0};
    Eigen::Index max_centers = kDefaultMaxCenters;
    int folds = 5;
    std::uint64_t seed = 0;
};

struct EstimateResult {
    SmiEstimate estimate;
    RatioModel model;
    FitReport report;
};

/// Center selection, cross-validation, refit on all rows, then the estimate.
EstimateResult estimate_smi(const PuDataset& data, ClassPrior prior, const EstimatorConfig& config);

/// Same pipeline without the prior: the fitted model and report only.
std::pair<RatioModel, FitReport> fit_ratio(const PuDataset& data, const EstimatorConfig& config);

/// Plug-in p(y=+1 | x) = thetaP * max(w(x), 0).
double posterior(const RatioModel& model, ClassPrior prior, const Vector& x);
/// Positive iff posterior > 1/2.
bool classify_positive(const RatioModel& model, ClassPrior prior, const Vector& x);

}  // namespace pusmi
