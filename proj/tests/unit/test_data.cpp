#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pusmi/data.hpp"

using namespace pusmi;

namespace {

LabeledDataset balanced_corpus(Eigen::Index per_class, std::uint64_t seed) {
    GaussianMixtureSpec spec = GaussianMixtureSpec::toy();
    LabeledDataset pos = sample_gaussian_labeled(spec, 4 * per_class, seed);
    LabeledDataset out;
    out.features.resize(2 * per_class, 2);
    Eigen::Index p = 0, n = 0, r = 0;
    for (Eigen::Index i = 0; i < pos.size() && r < 2 * per_class; ++i) {
        const int y = pos.labels[static_cast<std::size_t>(i)];
        if ((y > 0 && p < per_class) || (y < 0 && n < per_class)) {
            (y > 0 ? p : n)++;
            out.features.row(r++) = pos.features.row(i);
            out.labels.push_back(y);
        }
    }
    REQUIRE(r == 2 * per_class);
    return out;
}

}  // namespace

TEST_CASE("libsvm lines parse into dense zero-filled rows") {
    std::istringstream in("1 1:0.5 3:2.0\n-1 2:1.0\n");
    const LabeledDataset d = read_libsvm(in);
    REQUIRE(d.size() == 2);
    REQUIRE(d.dim() == 3);
    CHECK(d.labels == std::vector<int>{1, -1});
    CHECK(d.features(0, 0) == 0.5);
    CHECK(d.features(0, 1) == 0.0);
    CHECK(d.features(0, 2) == 2.0);
    CHECK(d.features(1, 0) == 0.0);
    CHECK(d.features(1, 1) == 1.0);
    CHECK(d.features(1, 2) == 0.0);
}

TEST_CASE("libsvm label mapping and comments") {
    std::istringstream in("0 1:1\n# note\n\n2 1:2 # trailing\n-3 1:3\n");
    const LabeledDataset d = read_libsvm(in);
    CHECK(d.labels == std::vector<int>{-1, 1, -1});
    CHECK(d.features(1, 0) == 2.0);
}

TEST_CASE("empty libsvm input gives an empty dataset that fails only when sampled") {
    std::istringstream in("");
    const LabeledDataset d = read_libsvm(in);
    CHECK(d.size() == 0);
    CHECK_THROWS_AS(make_pu(d, 1, 1, ClassPrior(0.5), 0), CapacityError);
}

TEST_CASE("libsvm parse errors carry the line number") {
    auto line_of = [](const std::string& text) {
        std::istringstream in(text);
        try {
            read_libsvm(in);
        } catch (const ParseError& e) {
            return e.line();
        }
        return std::size_t{0};
    };
    CHECK(line_of("1 1:0.5\n1 3:1 2:1\n") == 2);
    CHECK(line_of("1 1:0.5\n\n1 2:x\n") == 3);
    CHECK(line_of("abc 1:1\n") == 1);
    CHECK(line_of("1 0:1\n") == 1);
    CHECK(line_of("1 1-1\n") == 1);
    CHECK(line_of("1 2:1 2:3\n") == 1);
}

TEST_CASE("libsvm write then read reproduces the dataset") {
    const LabeledDataset d = sample_gaussian_labeled(GaussianMixtureSpec::toy(), 50, 3);
    std::stringstream buf;
    write_libsvm(buf, d);
    const LabeledDataset back = read_libsvm(buf);
    CHECK(back.labels == d.labels);
    CHECK(back.features == d.features);
}

TEST_CASE("csv reader handles headers and the label column") {
    std::istringstream with_header("a,y,b\n1.5,1,2\n3,-1,4\n");
    const LabeledDataset d = read_csv(with_header);
    REQUIRE(d.dim() == 2);
    CHECK(d.labels == std::vector<int>{1, -1});
    CHECK(d.features(0, 0) == 1.5);
    CHECK(d.features(0, 1) == 2.0);

    std::istringstream no_header("1,2,0\n3,4,1\n");
    const LabeledDataset e = read_csv(no_header);
    CHECK(e.labels == std::vector<int>{-1, 1});
    CHECK(e.features(1, 1) == 4.0);

    std::istringstream ragged("1,2,0\n3,1\n");
    CHECK_THROWS_AS(read_csv(ragged), ParseError);
}

TEST_CASE("missing files are precondition errors") {
    CHECK_THROWS_AS(load_labeled("/nonexistent/data.svm"), PreconditionError);
}

TEST_CASE("make_pu preconditions and capacity") {
    const LabeledDataset d = balanced_corpus(100, 1);
    CHECK_THROWS_AS(make_pu(d, 0, 10, ClassPrior(0.5), 0), PreconditionError);
    CHECK_THROWS_AS(make_pu(d, 10, 0, ClassPrior(0.5), 0), PreconditionError);
    try {
        make_pu(d, 100, 10, ClassPrior(0.5), 0);
        FAIL("expected a capacity error");
    } catch (const CapacityError& e) {
        CHECK(std::string(e.what()).find("positive") != std::string::npos);
    }
    try {
        make_pu(d, 1, 190, ClassPrior(0.01), 0);
        FAIL("expected a capacity error");
    } catch (const CapacityError& e) {
        CHECK(std::string(e.what()).find("negative") != std::string::npos);
    }
}

TEST_CASE("make_pu is deterministic and rows come from the corpus") {
    const LabeledDataset d = balanced_corpus(200, 2);
    const PuDataset a = make_pu(d, 50, 100, ClassPrior(0.5), 9);
    const PuDataset b = make_pu(d, 50, 100, ClassPrior(0.5), 9);
    CHECK(a.positives == b.positives);
    CHECK(a.unlabeled == b.unlabeled);
    const PuDataset c = make_pu(d, 50, 100, ClassPrior(0.5), 10);
    CHECK(c.unlabeled != a.unlabeled);

    const Matrix pos = d.rows_with(1);
    for (Eigen::Index i = 0; i < a.n_p(); ++i) {
        bool found = false;
        for (Eigen::Index r = 0; r < pos.rows() && !found; ++r) found = pos.row(r) == a.positives.row(i);
        CHECK(found);
    }
}

TEST_CASE("make_pu unlabelled class mix follows the prior within 3 sigma") {
    const LabeledDataset d = balanced_corpus(2500, 4);
    const Matrix pos = d.rows_with(1);
    const PuDataset pu = make_pu(d, 1, 2000, ClassPrior(0.5), 123);
    Eigen::Index positives = 0;
    for (Eigen::Index k = 0; k < pu.n_u(); ++k)
        for (Eigen::Index r = 0; r < pos.rows(); ++r)
            if (pos.row(r) == pu.unlabeled.row(k)) {
                ++positives;
                break;
            }
    const double n = 2000.0;
    const double frac = static_cast<double>(positives) / n;
    CHECK(std::abs(frac - 0.5) <= 3.0 * std::sqrt(0.25 / n));
}

TEST_CASE("gaussian generator shapes and null symmetry") {
    const PuDataset d = sample_gaussian_pu(GaussianMixtureSpec::toy(), 200, 400, 1);
    CHECK(d.positives.rows() == 200);
    CHECK(d.positives.cols() == 2);
    CHECK(d.unlabeled.rows() == 400);
    const GaussianMixtureSpec null = GaussianMixtureSpec::null_toy();
    CHECK(null.mean_pos == null.mean_neg);

    const PuDataset big = sample_gaussian_pu(GaussianMixtureSpec::toy(), 20000, 10, 5);
    CHECK(big.positives.col(0).mean() == doctest::Approx(-1.0).epsilon(0.02));
    const Vector centered = big.positives.col(1).array() - big.positives.col(1).mean();
    CHECK(centered.squaredNorm() / 19999.0 == doctest::Approx(3.5).epsilon(0.05));
}

TEST_CASE("PU dataset shape checks") {
    CHECK_THROWS_AS(PuDataset(Matrix::Zero(3, 2), Matrix::Zero(3, 3)), ShapeError);
    CHECK_THROWS_AS(PuDataset(Matrix::Zero(0, 2), Matrix::Zero(3, 2)).require_nonempty(), PreconditionError);
}

TEST_CASE("min-max scaler maps onto the unit box") {
    Matrix x(3, 2);
    x << 1, 5, 2, 5, 3, 5;
    const MinMaxScaler s = MinMaxScaler::fit(x);
    const Matrix y = s.transform(x);
    CHECK(y(0, 0) == 0.0);
    CHECK(y(1, 0) == 0.5);
    CHECK(y(2, 0) == 1.0);
    CHECK(y.col(1).isZero());
}
