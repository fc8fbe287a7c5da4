#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "pusmi/common.hpp"

namespace pusmi {

/// Fully labelled sample; labels are +1 / -1.
struct LabeledDataset {
    Matrix features;
    std::vector<int> labels;

    Eigen::Index size() const { return features.rows(); }
    Eigen::Index dim() const { return features.cols(); }
    std::size_t count(int label) const;
    /// Rows carrying `label`, in file order.
    Matrix rows_with(int label) const;
    void validate() const;
};

/// Positive sample plus an unlabelled sample from the marginal.
struct PuDataset {
    Matrix positives;
    Matrix unlabeled;

    PuDataset() = default;
    PuDataset(Matrix p, Matrix u);

    Eigen::Index dim() const { return positives.cols(); }
    Eigen::Index n_p() const { return positives.rows(); }
    Eigen::Index n_u() const { return unlabeled.rows(); }
    /// Throws unless both parts are non-empty.
    void require_nonempty() const;
};

/// Two Gaussian classes sharing a diagonal covariance.
struct GaussianMixtureSpec {
    Vector mean_pos;
    Vector mean_neg;
    Vector cov_diag;
    ClassPrior prior{0.5};

    Eigen::Index dim() const { return mean_pos.size(); }
    void validate() const;

    /// Means -(1,0) / +(1,0), covariance diag(0.5, 3.5), balanced prior.
    static GaussianMixtureSpec toy(double theta_p = 0.5);
    /// Both classes share the toy negative component (x independent of y).
    static GaussianMixtureSpec null_toy(double theta_p = 0.5);
};

// ---- ingestion -------------------------------------------------------------

/// "<label> <idx>:<val> ..." with 1-based ascending indices. d is the largest
/// index seen; labels <= 0 become -1, the rest +1.
LabeledDataset read_libsvm(std::istream& in);
LabeledDataset load_libsvm(const std::filesystem::path& path);
void write_libsvm(std::ostream& out, const LabeledDataset& data);

/// Comma separated; a header row is detected when its cells are not numeric.
/// The label column is the one named "y", else the last column.
LabeledDataset read_csv(std::istream& in);
LabeledDataset load_csv(const std::filesystem::path& path);

/// Picks the reader from the extension (.csv, anything else is LIBSVM).
LabeledDataset load_labeled(const std::filesystem::path& path);

// ---- sampling --------------------------------------------------------------

/// Positives uniformly without replacement; every unlabelled draw picks its
/// class by a Bernoulli(theta_p) coin and then takes an unused row of that
/// class.
PuDataset make_pu(const LabeledDataset& data, Eigen::Index n_p, Eigen::Index n_u,
                  ClassPrior prior, std::uint64_t seed);

PuDataset sample_gaussian_pu(const GaussianMixtureSpec& spec, Eigen::Index n_p, Eigen::Index n_u,
                             std::uint64_t seed);

/// Labelled draws from the mixture (label drawn first, then features).
LabeledDataset sample_gaussian_labeled(const GaussianMixtureSpec& spec, Eigen::Index n,
                                       std::uint64_t seed);

/// Labelled resample with replacement at a requested class prior.
LabeledDataset resample_labeled(const LabeledDataset& data, Eigen::Index n, ClassPrior prior,
                                std::uint64_t seed);

// ---- optional scaling ------------------------------------------------------

/// Per-feature min-max map onto [0, 1]; constant features map to 0.
class MinMaxScaler {
public:
    static MinMaxScaler fit(const Matrix& x);
    Matrix transform(const Matrix& x) const;
    PuDataset transform(const PuDataset& data) const;

    const Vector& lo() const { return lo_; }
    const Vector& hi() const { return hi_; }

private:
    Vector lo_;
    Vector hi_;
};

}  // namespace pusmi
