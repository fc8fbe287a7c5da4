#include <doctest.h>

#include <cmath>
#include <type_traits>

#include "pusmi/experiments.hpp"
#include "pusmi/purl.hpp"

using namespace pusmi;

namespace {

PurlConfig small_config(Eigen::Index batch) {
    PurlConfig c = PurlConfig::linear_toy(2, 5);
    c.sgd_w.batch_size = batch;
    c.sgd_v.batch_size = batch;
    return c;
}

}  // namespace

static_assert(std::is_invocable_r_v<PurlResult, decltype(&train_purl), const PuDataset&, const PurlConfig&,
                                    std::uint64_t>,
              "training takes no class prior");

TEST_CASE("alternation schedule: four head updates then one map update") {
    const PuDataset data = sample_gaussian_pu(GaussianMixtureSpec::toy(), 20, 80, 1);
    PurlConfig c = small_config(20);
    c.epochs = 3;
    c.patience = 10;
    std::string trace;
    c.on_update = [&](UpdateTarget t) { trace += t == UpdateTarget::kRatioHead ? 'w' : 'v'; };
    const PurlResult r = train_purl(data, c, 2);
    CHECK(trace == "wwwwvwwwwvwwwwv");
    CHECK(r.w_updates == 12);
    CHECK(r.v_updates == 3);
    CHECK(r.history.size() == 4);
    CHECK(r.history.front().iteration == 0);
}

TEST_CASE("schedule cycles across epoch boundaries") {
    const PuDataset data = sample_gaussian_pu(GaussianMixtureSpec::toy(), 20, 40, 1);
    PurlConfig c = small_config(20);  // three batches per epoch
    c.epochs = 2;
    std::string trace;
    c.on_update = [&](UpdateTarget t) { trace += t == UpdateTarget::kRatioHead ? 'w' : 'v'; };
    train_purl(data, c, 2);
    CHECK(trace == "wwwwvw");
}

TEST_CASE("zero learning rates leave parameters and history unchanged") {
    const PuDataset data = sample_gaussian_pu(GaussianMixtureSpec::toy(), 30, 60, 3);
    PurlConfig c = small_config(30);
    c.sgd_w.learning_rate = 0.0;
    c.sgd_v.learning_rate = 0.0;
    c.epochs = 4;
    c.patience = 10;
    const PurlResult r = train_purl(data, c, 4);
    const mlp::MlpParams v0 = mlp::init_params(c.v_spec, derive_seed(4, 1));
    CHECK(r.v_params.layers[0].weight == v0.layers[0].weight);
    for (const auto& row : r.history) CHECK(row.train_j == r.history.front().train_j);
    CHECK(r.best_iteration == 0);
    CHECK(std::isnan(r.history.front().validation_j));
}

TEST_CASE("validation history and early stopping") {
    const GaussianMixtureSpec spec = GaussianMixtureSpec::toy();
    PurlConfig c = small_config(30);
    c.validation = sample_gaussian_pu(spec, 50, 100, 9);
    c.epochs = 40;
    c.patience = 3;
    const PurlResult r = train_purl(sample_gaussian_pu(spec, 60, 120, 8), c, 5);
    for (const auto& row : r.history) CHECK(std::isfinite(row.validation_j));
    CHECK(static_cast<int>(r.history.size()) <= c.epochs + 1);
    double best = r.history.front().validation_j;
    int arg = 0;
    for (const auto& row : r.history)
        if (row.validation_j < best) {
            best = row.validation_j;
            arg = row.iteration;
        }
    CHECK(r.best_iteration == arg);
    CHECK(composite_objective(r.v_params, r.w_params, *c.validation) == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("noise-free small steps do not worsen the training objective") {
    PurlConfig c = small_config(60);
    c.sgd_w.learning_rate = c.sgd_v.learning_rate = 1e-3;
    c.sgd_w.grad_noise_std = c.sgd_v.grad_noise_std = 0.0;
    c.epochs = 30;
    const PurlResult r = train_purl(sample_gaussian_pu(GaussianMixtureSpec::toy(), 100, 200, 6), c, 7);
    CHECK(r.history[static_cast<std::size_t>(r.best_iteration)].train_j <= r.history.front().train_j);
}

TEST_CASE("divergence is reported") {
    PurlConfig c = small_config(60);
    c.sgd_w.learning_rate = c.sgd_v.learning_rate = 1e150;
    c.epochs = 20;
    CHECK_THROWS_AS(train_purl(sample_gaussian_pu(GaussianMixtureSpec::toy(), 100, 200, 6), c, 7), NumericError);
}

TEST_CASE("config validation") {
    PurlConfig c = PurlConfig::linear_toy(2);
    CHECK_THROWS_AS(c.validate(3), ShapeError);
    c.w_steps_per_v_step = 0;
    CHECK_THROWS_AS(c.validate(2), PreconditionError);
    PurlConfig d = PurlConfig::deep(50);
    CHECK_NOTHROW(d.validate(50));
    CHECK(d.v_spec.layer_sizes == std::vector<Eigen::Index>{50, 60, 20});
    CHECK_THROWS_AS(PurlConfig::deep(5).validate(5), PreconditionError);
    PurlConfig e = PurlConfig::linear_toy(1);
    CHECK_THROWS_AS(e.validate(1), PreconditionError);
}

TEST_CASE("transform applies the learned map row by row") {
    PurlConfig c = small_config(30);
    c.epochs = 0;
    PurlResult r = train_purl(sample_gaussian_pu(GaussianMixtureSpec::toy(), 30, 60, 1), c, 1);
    r.v_params.layers[0].weight << 1.0, 0.0;
    r.v_params.layers[0].bias.setZero();
    const Matrix x = Matrix::Random(7, 2);
    CHECK(transform(r, x) == x.col(0));
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(7);
    perm.setIdentity();
    std::swap(perm.indices()(0), perm.indices()(5));
    CHECK(transform(r, perm * x) == perm * transform(r, x));
    CHECK_THROWS_AS(transform(r, Matrix::Random(2, 3)), ShapeError);
    CHECK(linear_direction(r.v_params) == Vector::Unit(2, 0));
}

TEST_CASE("PCA on structured data") {
    Matrix line(50, 3);
    const Vector dir = Vector::LinSpaced(3, 1.0, 3.0).normalized();
    for (Eigen::Index i = 0; i < 50; ++i) line.row(i) = (0.1 * i - 2.0) * dir.transpose();
    const PcaResult pl = pca_project(line, 1);
    CHECK(std::abs(pl.components.row(0).dot(dir.transpose())) == doctest::Approx(1.0).epsilon(1e-12));

    std::mt19937_64 rng(2);
    std::normal_distribution<double> z;
    Matrix iso(200, 4);
    for (Eigen::Index i = 0; i < iso.size(); ++i) iso.data()[i] = z(rng);
    const PcaResult pi = pca_project(iso, 4);
    CHECK((pi.components * pi.components.transpose() - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-8);

    CHECK_THROWS_AS(pca_project(Matrix::Ones(5, 2), 1), NumericError);
    CHECK_THROWS_AS(pca_project(iso, 5), PreconditionError);
}

TEST_CASE("PCA top component on the toy spec matches an eigen-decomposition") {
    const PuDataset d = sample_gaussian_pu(GaussianMixtureSpec::toy(), 200, 200, 3);
    Matrix all(400, 2);
    all << d.positives, d.unlabeled;
    const PcaResult p = pca_project(all, 2);
    const Matrix centered = all.rowwise() - all.colwise().mean();
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(centered.transpose() * centered / 399.0);
    const Vector top = eig.eigenvectors().col(1);
    CHECK(std::abs(p.components.row(0).dot(top.transpose())) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(p.variances(0) == doctest::Approx(eig.eigenvalues()(1)).epsilon(1e-10));
    CHECK(std::abs(p.components(0, 1)) >= 0.99);
}

TEST_CASE("learned projection keeps more information than PCA on the toy spec") {
    double purl = 0.0, pca = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const ToyRun r = run_toy(GaussianMixtureSpec::toy(), 200, 400, PurlConfig::linear_toy(2), s, true);
        purl += r.smi_purl;
        pca += r.smi_pca;
    }
    CHECK(purl > pca);
}
