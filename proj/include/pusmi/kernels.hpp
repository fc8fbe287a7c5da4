#pragma once

// Dense inner loops used by the estimators. Every kernel has a plain serial
// version, kept as the reference the tests compare against, and an OpenMP
// version used by the library. Both produce bit-identical output regardless
// of thread count: work is split on fixed boundaries and reduced in order.

#include <functional>
#include <vector>

#include "pusmi/common.hpp"

namespace pusmi::kernels {

namespace serial {

/// out(k, l) = exp(-|x_k - c_l|^2 / (2 sigma^2))
Matrix gaussian_design(const Matrix& points, const Matrix& centers, double sigma);

/// Phi^T Phi / n
Matrix second_moment(const Matrix& phi);

/// Column means of Phi (the h vector).
Vector column_mean(const Matrix& phi);

/// Euclidean distances for all pairs i < j, row-major pair order.
std::vector<double> pairwise_distances(const Matrix& points);

}  // namespace serial

namespace parallel {

Matrix gaussian_design(const Matrix& points, const Matrix& centers, double sigma);
Matrix second_moment(const Matrix& phi);
Vector column_mean(const Matrix& phi);
std::vector<double> pairwise_distances(const Matrix& points);

}  // namespace parallel

/// Row block used by parallel::second_moment. Fixed so results never depend on
/// the number of threads.
inline constexpr Eigen::Index kMomentBlock = 64;

/// Runs body(i) for i in [0, count) across threads. Callers write results into
/// slot i of a pre-sized container so reduction order stays deterministic.
void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body);

/// Sets the OpenMP thread count (no-op when built without OpenMP).
void set_threads(int threads);
int max_threads();

}  // namespace pusmi::kernels
