#pragma once

// Monte Carlo drivers shared by the CLI and the acceptance suite. Trials run in
// parallel with per-trial derived seeds and are reduced in trial order.

#include <cstdint>
#include <vector>

#include "pusmi/data.hpp"
#include "pusmi/estimator.hpp"
#include "pusmi/purl.hpp"

namespace pusmi {

struct SweepPoint {
    Eigen::Index n_p;
    Eigen::Index n_u;
};

struct MseRow {
    Eigen::Index n;  ///< the swept size
    Eigen::Index n_p;
    Eigen::Index n_u;
    double mse_mean;
    double mse_stderr;
    double mean_estimate;
};

enum class SweepAxis { kPositive, kUnlabeled };

/// Points {(n, fixed)} or {(fixed, n)} depending on the axis.
std::vector<SweepPoint> sweep_points(SweepAxis axis, const std::vector<Eigen::Index>& grid, Eigen::Index fixed);

/// Squared error of the PU estimate against `truth` over `trials` seeds per
/// point, sorted by the swept size.
std::vector<MseRow> mse_sweep_gaussian(const GaussianMixtureSpec& spec, double truth, SweepAxis axis,
                                       const std::vector<SweepPoint>& points, int trials,
                                       const EstimatorConfig& config, std::uint64_t seed);

/// Same against a labelled corpus: PU sets come from make_pu and the truth is
/// the supervised estimate on a resampled labelled pool of `pool_size` rows.
struct LabeledSweep {
    double truth;
    std::vector<MseRow> rows;
};
LabeledSweep mse_sweep_labeled(const LabeledDataset& data, ClassPrior prior, SweepAxis axis,
                               const std::vector<SweepPoint>& points, int trials, Eigen::Index pool_size,
                               const EstimatorConfig& config, std::uint64_t seed);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ToyRun {
    Vector purl_direction;
    Vector pca_direction;
    double purl_cos_e1;  ///< |cos| between the learned direction and the first axis
    double pca_cos_e2;   ///< |cos| between the top principal axis and the second axis
    double smi_purl;     ///< PU estimate after projecting onto the learned direction
    double smi_pca;      ///< PU estimate after projecting onto the top principal axis
    PurlResult purl;
    PuDataset data;
};

/// Draws the PU sample, trains a linear map, runs 1-D PCA on all rows and
/// compares. `estimate_projections` also fits the PU estimator in each 1-D space.
ToyRun run_toy(const GaussianMixtureSpec& spec, Eigen::Index n_p, Eigen::Index n_u, const PurlConfig& config,
               std::uint64_t seed, bool estimate_projections = false);

}  // namespace pusmi
