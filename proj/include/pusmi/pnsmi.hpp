#pragma once

// Supervised SMI from fully labelled data, and population values by quadrature.
// Both serve as ground truth for the PU estimator.

#include <functional>

#include "pusmi/basis.hpp"
#include "pusmi/data.hpp"
#include "pusmi/estimator.hpp"

namespace pusmi {

/// g(x, y) = alpha_y^T phi(x): one weight vector per class slice.
struct JointRatioModel {
    GaussianBasis basis;
    Vector alpha_pos;
    Vector alpha_neg;

    JointRatioModel(GaussianBasis b, Vector pos, Vector neg);
    double operator()(const Vector& x, int y) const;
};

/// Block moments of the class-sliced basis. With M = mean over all rows of
/// phi phi^T, the diagonal blocks are H_y = (n_y / n) M and h_y is the sum of
/// phi over rows labelled y, divided by n.
struct PnMoments {
    Matrix h_pos;
    Matrix h_neg;
    Vector v_pos;
    Vector v_neg;
};

PnMoments compute_pn_moments(const LabeledDataset& data, const GaussianBasis& basis);

JointRatioModel fit_pn(const LabeledDataset& data, const GaussianBasis& basis, double lambda);

/// alpha^T h - 1/2 alpha^T H alpha - 1/2 on `data`.
double smi_hat_pn(const JointRatioModel& model, const LabeledDataset& data);

/// Empirical squared error of g (no penalty) for the given moments.
double j_hat_pn(const JointRatioModel& model, const PnMoments& m);

struct PnEstimate {
    double value;
    JointRatioModel model;
    FitReport report;
};

/// Same CV machinery as the PU estimator, scored by held-out PN squared error.
PnEstimate estimate_pn_smi(const LabeledDataset& data, const EstimatorConfig& config);

// ---- population quantities for GaussianMixtureSpec ------------------------

/// p(x | y=+1) / p(x)
double true_ratio(const GaussianMixtureSpec& spec, const Vector& x);

enum class SmiForm {
    kJoint,     ///< sum_y p(y)/2 * E_x[(p(x,y)/(p(x)p(y)) - 1)^2]
    kPositive,  ///< thetaP/(2 thetaN) * E_x[(p(x|+)/p(x) - 1)^2]
};

/// One form by adaptive quadrature. With a shared diagonal covariance the
/// ratio depends on x only through z = sum_j (mu+_j - mu-_j) x_j / c_j, which is
/// Gaussian under each class, so the integral is one-dimensional.
double smi_quadrature(const GaussianMixtureSpec& spec, SmiForm form);

inline constexpr double kFormAgreement = 1e-6;

/// Joint-form SMI; throws NumericError if the two forms disagree by more than
/// kFormAgreement relative.
double true_smi_quadrature(const GaussianMixtureSpec& spec);

struct PopulationObjective {
    double mean_sq_marginal;  ///< E_{p(x)}[w^2]
    double mean_positive;     ///< E_{p(x|+)}[w]
    double j() const { return 0.5 * mean_sq_marginal - mean_positive; }
};

/// Population J(w) by 2-D (or 1-D) quadrature; supports d <= 2.
PopulationObjective population_objective(const GaussianMixtureSpec& spec,
                                         const std::function<double(const Vector&)>& w);

}  // namespace pusmi
