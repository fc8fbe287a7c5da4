#include "pusmi/kernels.hpp"

#include <cmath>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pusmi::kernels {

namespace {

void check_design_args(const Matrix& points, const Matrix& centers, double sigma) {
    if (points.cols() != centers.cols())
        throw ShapeError("point dim " + std::to_string(points.cols()) + " != center dim " +
                         std::to_string(centers.cols()));
    if (!(sigma > 0.0)) throw PreconditionError("bandwidth must be positive");
}

}  // namespace

// ---- serial reference ------------------------------------------------------

namespace serial {

Matrix gaussian_design(const Matrix& points, const Matrix& centers, double sigma) {
    check_design_args(points, centers, sigma);
    const double scale = 1.0 / (2.0 * sigma * sigma);
    Matrix out(points.rows(), centers.rows());
    for (Eigen::Index k = 0; k < points.rows(); ++k) {
        for (Eigen::Index l = 0; l < centers.rows(); ++l) {
            double sq = 0.0;
            for (Eigen::Index j = 0; j < points.cols(); ++j) {
                const double diff = points(k, j) - centers(l, j);
                sq += diff * diff;
            }
            out(k, l) = std::exp(-sq * scale);
        }
    }
    return out;
}

Matrix second_moment(const Matrix& phi) {
    const Eigen::Index n = phi.rows();
    const Eigen::Index b = phi.cols();
    require(n >= 1, "second moment of an empty design");
    Matrix h = Matrix::Zero(b, b);
    for (Eigen::Index l = 0; l < b; ++l) {
        for (Eigen::Index m = 0; m <= l; ++m) {
            double acc = 0.0;
            for (Eigen::Index k = 0; k < n; ++k) acc += phi(k, l) * phi(k, m);
            h(l, m) = acc / static_cast<double>(n);
            h(m, l) = h(l, m);
        }
    }
    return h;
}

Vector column_mean(const Matrix& phi) {
    require(phi.rows() >= 1, "column mean of an empty design");
    Vector out = Vector::Zero(phi.cols());
    for (Eigen::Index l = 0; l < phi.cols(); ++l) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < phi.rows(); ++k) acc += phi(k, l);
        out(l) = acc / static_cast<double>(phi.rows());
    }
    return out;
}

std::vector<double> pairwise_distances(const Matrix& points) {
    const Eigen::Index n = points.rows();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double sq = 0.0;
            for (Eigen::Index c = 0; c < points.cols(); ++c) {
                const double diff = points(i, c) - points(j, c);
                sq += diff * diff;
            }
            out.push_back(std::sqrt(sq));
        }
    return out;
}

}  // namespace serial

// ---- OpenMP ----------------------------------------------------------------

namespace parallel {

Matrix gaussian_design(const Matrix& points, const Matrix& centers, double sigma) {
    check_design_args(points, centers, sigma);
    const double scale = 1.0 / (2.0 * sigma * sigma);
    const Eigen::Index n = points.rows();
    const Eigen::Index b = centers.rows();
    const Eigen::Index d = points.cols();
    // Row-major copies keep the distance loop contiguous.
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> x = points;
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> c = centers;
    Matrix out(n, b);
#pragma omp parallel for schedule(static)
    for (Eigen::Index k = 0; k < n; ++k) {
        const double* xk = x.data() + k * d;
        for (Eigen::Index l = 0; l < b; ++l) {
            const double* cl = c.data() + l * d;
            double sq = 0.0;
            for (Eigen::Index j = 0; j < d; ++j) {
                const double diff = xk[j] - cl[j];
                sq += diff * diff;
            }
            out(k, l) = std::exp(-sq * scale);
        }
    }
    return out;
}

Matrix second_moment(const Matrix& phi) {
    const Eigen::Index n = phi.rows();
    const Eigen::Index b = phi.cols();
    require(n >= 1, "second moment of an empty design");
    const Eigen::Index blocks = (n + kMomentBlock - 1) / kMomentBlock;
    std::vector<Matrix> partial(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(static)
    for (Eigen::Index blk = 0; blk < blocks; ++blk) {
        const Eigen::Index start = blk * kMomentBlock;
        const Eigen::Index rows = std::min(kMomentBlock, n - start);
        const auto slab = phi.middleRows(start, rows);
        Matrix acc = Matrix::Zero(b, b);
        acc.selfadjointView<Eigen::Lower>().rankUpdate(slab.transpose());
        partial[static_cast<std::size_t>(blk)] = std::move(acc);
    }
    Matrix h = Matrix::Zero(b, b);
    for (const auto& p : partial) h += p;
    h = h.selfadjointView<Eigen::Lower>();
    return h / static_cast<double>(n);
}

Vector column_mean(const Matrix& phi) {
    require(phi.rows() >= 1, "column mean of an empty design");
    Vector out(phi.cols());
#pragma omp parallel for schedule(static)
    for (Eigen::Index l = 0; l < phi.cols(); ++l) out(l) = phi.col(l).mean();
    return out;
}

std::vector<double> pairwise_distances(const Matrix& points) {
    const Eigen::Index n = points.rows();
    std::vector<double> out(static_cast<std::size_t>(n * (n - 1) / 2));
#pragma omp parallel for schedule(dynamic, 8)
    for (Eigen::Index i = 0; i < n; ++i) {
        // offset of pair (i, i+1) in row-major upper-triangle order
        std::size_t pos = static_cast<std::size_t>(i * n - i * (i + 1) / 2);
        for (Eigen::Index j = i + 1; j < n; ++j) out[pos++] = (points.row(i) - points.row(j)).norm();
    }
    return out;
}

}  // namespace parallel

void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body) {
    std::exception_ptr first_error;
    std::mutex error_mutex;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

void set_threads(int threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace pusmi::kernels
