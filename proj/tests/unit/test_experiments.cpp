#include <doctest.h>

#include <cmath>

#include "pusmi/experiments.hpp"
#include "pusmi/pnsmi.hpp"

using namespace pusmi;

TEST_CASE("log-log slope of an exact power law") {
    const std::vector<double> x{1, 2, 4, 8, 16};
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 / v);
    CHECK(loglog_slope(x, y) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK_THROWS_AS(loglog_slope({1.0}, {1.0}), PreconditionError);
    CHECK_THROWS_AS(loglog_slope({1.0, 2.0}, {1.0, 0.0}), PreconditionError);
}

TEST_CASE("sweeps are sorted, seeded and sized") {
    const GaussianMixtureSpec spec = GaussianMixtureSpec::toy();
    EstimatorConfig cfg;
    cfg.max_centers = 30;
    const auto pts = sweep_points(SweepAxis::kPositive, {40, 20}, 60);
    const auto a = mse_sweep_gaussian(spec, 0.38, SweepAxis::kPositive, pts, 4, cfg, 3);
    REQUIRE(a.size() == 2);
    CHECK(a[0].n == 20);
    CHECK(a[1].n == 40);
    CHECK(a[0].n_u == 60);
    CHECK(a[0].mse_mean > 0.0);
    const auto b = mse_sweep_gaussian(spec, 0.38, SweepAxis::kPositive, pts, 4, cfg, 3);
    CHECK(a[0].mse_mean == b[0].mse_mean);
    const auto one = mse_sweep_gaussian(spec, 0.38, SweepAxis::kUnlabeled, sweep_points(SweepAxis::kUnlabeled, {50}, 20),
                                        2, cfg, 3);
    CHECK(one.size() == 1);
    CHECK(one[0].n == 50);
    CHECK(one[0].n_p == 20);
}

TEST_CASE("labelled sweep uses the supervised truth") {
    const LabeledDataset corpus = sample_gaussian_labeled(GaussianMixtureSpec::toy(), 600, 4);
    EstimatorConfig cfg;
    cfg.max_centers = 30;
    const LabeledSweep s = mse_sweep_labeled(corpus, ClassPrior(0.5), SweepAxis::kPositive,
                                             sweep_points(SweepAxis::kPositive, {20}, 80), 3, 2000, cfg, 5);
    CHECK(s.truth > 0.1);
    CHECK(s.truth < 0.8);
    CHECK(s.rows.size() == 1);
}

TEST_CASE("toy run reports both directions") {
    const ToyRun r = run_toy(GaussianMixtureSpec::toy(), 200, 400, PurlConfig::linear_toy(2), 1);
    CHECK(r.purl_direction.norm() == doctest::Approx(1.0));
    CHECK(r.pca_direction.norm() == doctest::Approx(1.0));
    CHECK(r.purl_cos_e1 >= 0.95);
    CHECK(r.pca_cos_e2 >= 0.95);
}
