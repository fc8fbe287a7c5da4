#include "pusmi/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "pusmi/kernels.hpp"
#include "pusmi/pnsmi.hpp"

namespace pusmi {

std::vector<SweepPoint> sweep_points(SweepAxis axis, const std::vector<Eigen::Index>& grid, Eigen::Index fixed) {
    std::vector<SweepPoint> out;
    for (Eigen::Index n : grid) out.push_back(axis == SweepAxis::kPositive ? SweepPoint{n, fixed} : SweepPoint{fixed, n});
    return out;
}

namespace {

MseRow summarize(SweepAxis axis, SweepPoint pt, const std::vector<double>& estimates, double truth) {
    const auto t = static_cast<double>(estimates.size());
    double mean_sq = 0.0;
    double mean_est = 0.0;
    for (double e : estimates) {
        mean_sq += (e - truth) * (e - truth);
        mean_est += e;
    }
    mean_sq /= t;
    mean_est /= t;
    double var = 0.0;
    for (double e : estimates) {
        const double sq = (e - truth) * (e - truth);
        var += (sq - mean_sq) * (sq - mean_sq);
    }
    const double stderr_ = estimates.size() > 1 ? std::sqrt(var / (t - 1.0) / t) : 0.0;
    return {axis == SweepAxis::kPositive ? pt.n_p : pt.n_u, pt.n_p, pt.n_u, mean_sq, stderr_, mean_est};
}

template <typename Draw>
std::vector<MseRow> run_sweep(SweepAxis axis, const std::vector<SweepPoint>& points, int trials, double truth,
                              ClassPrior prior, const EstimatorConfig& config, std::uint64_t seed, Draw&& draw) {
    require(!points.empty(), "sweep grid is empty");
    require(trials >= 1, "need at least one trial");
    std::vector<MseRow> rows;
    for (std::size_t p = 0; p < points.size(); ++p) {
        const SweepPoint pt = points[p];
        std::vector<double> estimates(static_cast<std::size_t>(trials));
        kernels::for_each_index(estimates.size(), [&](std::size_t t) {
            const std::uint64_t trial_seed = derive_seed(derive_seed(seed, pt.n_p * 100003 + pt.n_u), t);
            const PuDataset data = draw(pt, trial_seed);
            EstimatorConfig est = config;
            est.seed = derive_seed(trial_seed, 1);
            estimates[t] = estimate_smi(data, prior, est).estimate.value;
        });
        rows.push_back(summarize(axis, pt, estimates, truth));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const MseRow& a, const MseRow& b) { return a.n < b.n; });
    return rows;
}

}  // namespace

std::vector<MseRow> mse_sweep_gaussian(const GaussianMixtureSpec& spec, double truth, SweepAxis axis,
                                       const std::vector<SweepPoint>& points, int trials,
                                       const EstimatorConfig& config, std::uint64_t seed) {
    return run_sweep(axis, points, trials, truth, spec.prior, config, seed, [&](SweepPoint pt, std::uint64_t s) {
        return sample_gaussian_pu(spec, pt.n_p, pt.n_u, s);
    });
}

LabeledSweep mse_sweep_labeled(const LabeledDataset& data, ClassPrior prior, SweepAxis axis,
                               const std::vector<SweepPoint>& points, int trials, Eigen::Index pool_size,
                               const EstimatorConfig& config, std::uint64_t seed) {
    const LabeledDataset pool = resample_labeled(data, pool_size, prior, derive_seed(seed, 77));
    EstimatorConfig pool_config = config;
    pool_config.seed = derive_seed(seed, 78);
    LabeledSweep out;
    out.truth = estimate_pn_smi(pool, pool_config).value;
    out.rows = run_sweep(axis, points, trials, out.truth, prior, config, seed, [&](SweepPoint pt, std::uint64_t s) {
        return make_pu(data, pt.n_p, pt.n_u, prior, s);
    });
    return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size() && x.size() >= 2, "slope needs at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        require(x[i] > 0.0 && y[i] > 0.0, "log-log slope needs positive values");
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    require(sxx > 0.0, "slope needs distinct x values");
    return sxy / sxx;
}

ToyRun run_toy(const GaussianMixtureSpec& spec, Eigen::Index n_p, Eigen::Index n_u, const PurlConfig& config,
               std::uint64_t seed, bool estimate_projections) {
    require(spec.dim() == 2, "toy comparison expects 2-D data");
    PuDataset data = sample_gaussian_pu(spec, n_p, n_u, derive_seed(seed, 1));
    PurlResult purl = train_purl(data, config, derive_seed(seed, 2));
    const Vector purl_dir = linear_direction(purl.v_params);

    Matrix all(data.n_p() + data.n_u(), data.dim());
    all << data.positives, data.unlabeled;
    const PcaResult pca = pca_project(all, 1);
    const Vector pca_dir = pca.components.row(0).transpose();

    ToyRun run{purl_dir,
               pca_dir,
               std::abs(purl_dir(0)),
               std::abs(pca_dir(1)),
               0.0,
               0.0,
               std::move(purl),
               std::move(data)};
    if (estimate_projections) {
        EstimatorConfig est;
        est.seed = derive_seed(seed, 3);
        auto project = [&](const Vector& dir) {
            return PuDataset(run.data.positives * dir, run.data.unlabeled * dir);
        };
        run.smi_purl = estimate_smi(project(purl_dir), spec.prior, est).estimate.value;
        run.smi_pca = estimate_smi(project(pca_dir), spec.prior, est).estimate.value;
    }
    return run;
}

}  // namespace pusmi
