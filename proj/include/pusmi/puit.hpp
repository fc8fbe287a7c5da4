#pragma once

// Independence test between x and y from PU data only. The observed statistic
// is the PU-SMI estimate; its null distribution comes from re-estimating on
// pseudo-PU samples whose labels carry no information about x.

#include <cstdint>
#include <vector>

#include "pusmi/data.hpp"
#include "pusmi/estimator.hpp"

namespace pusmi {

inline constexpr int kMinPermutations = 19;
inline constexpr int kMaxRedraws = 10;

/// How a permutation round builds its pseudo-PU sample.
enum class PseudoScheme {
    /// Positive and unlabelled rows are pooled and re-split at random into
    /// samples of the original sizes nP and nU.
    kPooled,
    /// Unlabelled rows get Bernoulli(thetaP) labels; the +1 rows form the
    /// pseudo-positive sample and the -1 rows the pseudo-unlabelled sample.
    kDisjoint,
    /// Unlabelled rows get Bernoulli(thetaP) labels; the +1 rows form the
    /// pseudo-positive sample and the full unlabelled sample is kept.
    kNested,
};

struct PermTestOptions {
    int b_count = 1000;
    PseudoScheme scheme = PseudoScheme::kPooled;
    /// Pick (sigma, lambda) by cross-validation on one reference pseudo sample
    /// instead of the real labels, with centers and bandwidth drawn from the
    /// pool. The observed statistic then has no selection advantage over the
    /// rounds. Ignored with recv_per_round.
    bool select_on_pseudo = true;
    /// Re-run cross-validation for every round instead of reusing the observed
    /// (sigma, lambda, centers). Much slower.
    bool recv_per_round = false;
};

struct PermTestResult {
    double observed;
    std::vector<double> permuted;
    double p_value;
    int b_count;
    ClassPrior prior_used;
};

/// (1 + #{permuted >= observed}) / (B + 1)
double permutation_p_value(double observed, const std::vector<double>& permuted);

/// Observed PU-SMI estimate, then b_count rounds on pseudo-PU data built per
/// `options.scheme`. Rounds use independent sub-streams of `seed`. See
/// PermTestOptions for how hyperparameters are chosen.
PermTestResult permutation_test(const PuDataset& data, ClassPrior prior, const EstimatorConfig& config,
                                const PermTestOptions& options, std::uint64_t seed);

struct Type2Row {
    Eigen::Index n_p;
    Eigen::Index n_u;
    double level;
    int trials;
    double type2_freq;  ///< fraction of trials with p-value > level
};

struct Type2Config {
    std::vector<Eigen::Index> n_p_grid;
    std::vector<Eigen::Index> n_u_grid;
    double level = 0.05;
    int trials = 50;
    PermTestOptions test;
    EstimatorConfig estimator;
};

/// Runs `trials` independent tests per (n_p, n_u) in the grid product on data
/// from `spec`. Rows come back ordered by n_p, then n_u.
std::vector<Type2Row> type2_experiment(const GaussianMixtureSpec& spec, const Type2Config& config,
                                       std::uint64_t seed);

/// Fraction of `trials` null-data tests rejected at `level`.
double rejection_rate(const GaussianMixtureSpec& spec, Eigen::Index n_p, Eigen::Index n_u, double level,
                      int trials, const PermTestOptions& test, const EstimatorConfig& estimator,
                      std::uint64_t seed);

}  // namespace pusmi
