#pragma once

#include <cstdint>
#include <vector>

#include "pusmi/common.hpp"

namespace pusmi {

inline constexpr Eigen::Index kDefaultMaxCenters = 200;
inline constexpr Eigen::Index kMedianSubsample = 500;

/// Gaussian kernels exp(-|x - c|^2 / (2 sigma^2)) around fixed centers.
class GaussianBasis {
public:
    GaussianBasis(Matrix centers, double sigma);

    const Matrix& centers() const { return centers_; }
    double sigma() const { return sigma_; }
    Eigen::Index size() const { return centers_.rows(); }
    Eigen::Index dim() const { return centers_.cols(); }

    /// n x b design matrix; entries lie in (0, 1].
    Matrix eval(const Matrix& points) const;
    Vector eval_one(const Vector& x) const;

    GaussianBasis with_sigma(double sigma) const { return GaussianBasis(centers_, sigma); }

private:
    Matrix centers_;
    double sigma_;
};

/// min(b_max, n) distinct rows of `unlabeled`, uniformly without replacement.
Matrix select_centers(const Matrix& unlabeled, Eigen::Index b_max, std::uint64_t seed);

/// Median pairwise distance over at most kMedianSubsample rows.
double median_bandwidth(const Matrix& unlabeled, std::uint64_t seed);

/// median * {1/2, 1, 2}
std::vector<double> bandwidth_grid(double median);

}  // namespace pusmi
