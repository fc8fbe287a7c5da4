#include "pusmi/basis.hpp"

#include <algorithm>
#include <numeric>

#include "pusmi/kernels.hpp"

namespace pusmi {

GaussianBasis::GaussianBasis(Matrix centers, double sigma) : centers_(std::move(centers)), sigma_(sigma) {
    require(centers_.rows() >= 1, "basis needs at least one center");
    require(sigma_ > 0.0, "basis bandwidth must be positive");
}

Matrix GaussianBasis::eval(const Matrix& points) const {
    return kernels::parallel::gaussian_design(points, centers_, sigma_);
}

Vector GaussianBasis::eval_one(const Vector& x) const {
    if (x.size() != dim()) throw ShapeError("point dimension does not match basis");
    return kernels::serial::gaussian_design(x.transpose(), centers_, sigma_).row(0).transpose();
}

Matrix select_centers(const Matrix& unlabeled, Eigen::Index b_max, std::uint64_t seed) {
    require(b_max >= 1, "b_max must be >= 1");
    require(unlabeled.rows() >= 1, "cannot select centers from an empty sample");
    const Eigen::Index b = std::min(b_max, unlabeled.rows());
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(unlabeled.rows()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    Rng rng = make_rng(seed, 20);
    std::shuffle(idx.begin(), idx.end(), rng);
    Matrix centers(b, unlabeled.cols());
    for (Eigen::Index l = 0; l < b; ++l) centers.row(l) = unlabeled.row(idx[static_cast<std::size_t>(l)]);
    return centers;
}

double median_bandwidth(const Matrix& unlabeled, std::uint64_t seed) {
    require(unlabeled.rows() >= 2, "median heuristic needs at least two rows");
    Matrix sample;
    if (unlabeled.rows() > kMedianSubsample)
        sample = select_centers(unlabeled, kMedianSubsample, derive_seed(seed, 21));
    else
        sample = unlabeled;

    std::vector<double> dist = kernels::parallel::pairwise_distances(sample);
    // Coincident rows carry no scale information; dropping them also makes the
    // result invariant to duplicating every row.
    std::erase_if(dist, [](double v) { return !(v > 0.0); });
    if (dist.empty()) throw NumericError("median heuristic: all sampled rows coincide");
    // Lower median keeps the value an observed distance.
    const auto mid = dist.begin() + static_cast<std::ptrdiff_t>((dist.size() - 1) / 2);
    std::nth_element(dist.begin(), mid, dist.end());
    return *mid;
}

std::vector<double> bandwidth_grid(double median) {
    require(median > 0.0, "bandwidth grid needs a positive median");
    return {0.5 * median, median, 2.0 * median};
}

}  // namespace pusmi
