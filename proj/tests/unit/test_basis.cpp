#include <doctest.h>

#include <cmath>
#include <set>

#include "pusmi/basis.hpp"
#include "support/oracles.hpp"

using namespace pusmi;

TEST_CASE("select_centers takes min(b_max, n) distinct rows") {
    const Matrix u50 = Matrix::Random(50, 3);
    const Matrix c = select_centers(u50, 200, 1);
    REQUIRE(c.rows() == 50);
    std::set<std::vector<double>> rows, source;
    for (Eigen::Index i = 0; i < 50; ++i) {
        rows.insert({c(i, 0), c(i, 1), c(i, 2)});
        source.insert({u50(i, 0), u50(i, 1), u50(i, 2)});
    }
    CHECK(rows == source);

    const Matrix u400 = Matrix::Random(400, 2);
    const Matrix c2 = select_centers(u400, 200, 7);
    CHECK(c2.rows() == 200);
    std::set<std::pair<double, double>> distinct;
    for (Eigen::Index i = 0; i < 200; ++i) distinct.insert({c2(i, 0), c2(i, 1)});
    CHECK(distinct.size() == 200);
    CHECK(select_centers(u400, 200, 7) == c2);
    CHECK_THROWS_AS(select_centers(u400, 0, 7), PreconditionError);
}

TEST_CASE("basis evaluation closed forms") {
    Matrix centers(2, 2);
    centers << 0, 0, 3, 4;
    const double sigma = 1.5;
    const GaussianBasis basis(centers, sigma);
    Matrix pts(2, 2);
    pts << 3, 4, sigma * std::sqrt(2.0), 0;
    const Matrix phi = basis.eval(pts);
    CHECK(phi(0, 1) == 1.0);
    CHECK(phi(1, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK_THROWS_AS(basis.eval(Matrix::Zero(2, 3)), ShapeError);
    CHECK_THROWS_AS(basis.eval_one(Vector::Zero(3)), ShapeError);
}

TEST_CASE("basis evaluation matches a scalar loop") {
    const Matrix pts = Matrix::Random(5, 3);
    const Matrix centers = Matrix::Random(4, 3);
    const GaussianBasis basis(centers, 0.7);
    CHECK((basis.eval(pts) - oracle::design(pts, centers, 0.7)).cwiseAbs().maxCoeff() <= 1e-12);
    for (Eigen::Index i = 0; i < 5; ++i)
        CHECK((basis.eval_one(pts.row(i).transpose()).transpose() - basis.eval(pts).row(i)).norm() <= 1e-15);
}

TEST_CASE("median bandwidth") {
    Matrix two(2, 2);
    two << 0, 0, 2, 0;
    CHECK(median_bandwidth(two, 0) == 2.0);

    Matrix same = Matrix::Ones(5, 2);
    CHECK_THROWS_AS(median_bandwidth(same, 0), NumericError);

    const Matrix x = Matrix::Random(120, 3);
    Matrix doubled(240, 3);
    doubled << x, x;
    CHECK(median_bandwidth(doubled, 3) == median_bandwidth(x, 3));

    std::mt19937_64 rng(11);
    std::normal_distribution<double> z;
    Matrix g(100, 5);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = z(rng);
    const double exact = oracle::median_pairwise(g);
    CHECK(std::abs(median_bandwidth(g, 5) - exact) <= 0.1 * exact);

    Matrix big(1500, 5);
    for (Eigen::Index i = 0; i < big.size(); ++i) big.data()[i] = z(rng);
    const double big_exact = oracle::median_pairwise(big);
    CHECK(std::abs(median_bandwidth(big, 5) - big_exact) <= 0.1 * big_exact);

    const auto grid = bandwidth_grid(2.0);
    CHECK(grid == std::vector<double>{1.0, 2.0, 4.0});
}
