#include "pusmi/puit.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

#include "pusmi/kernels.hpp"

namespace pusmi {

double permutation_p_value(double observed, const std::vector<double>& permuted) {
    const auto exceed = std::count_if(permuted.begin(), permuted.end(), [&](double v) { return v >= observed; });
    return static_cast<double>(1 + exceed) / static_cast<double>(permuted.size() + 1);
}

namespace {

/// Row indices into the pool for one pseudo-PU sample.
struct PseudoSplit {
    std::vector<Eigen::Index> positives;
    std::vector<Eigen::Index> unlabeled;  ///< empty means the whole pool
};

PseudoSplit draw_split(PseudoScheme scheme, Eigen::Index n_p, Eigen::Index pool, ClassPrior prior, Rng& rng) {
    if (scheme == PseudoScheme::kPooled) {
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(pool));
        std::iota(idx.begin(), idx.end(), Eigen::Index{0});
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto cut = idx.begin() + n_p;
        return {{idx.begin(), cut}, {cut, idx.end()}};
    }
    std::bernoulli_distribution coin(prior.theta_p());
    for (int attempt = 0; attempt <= kMaxRedraws; ++attempt) {
        PseudoSplit s;
        for (Eigen::Index k = 0; k < pool; ++k) (coin(rng) ? s.positives : s.unlabeled).push_back(k);
        if (scheme == PseudoScheme::kNested) s.unlabeled.clear();
        const bool ok = !s.positives.empty() && (scheme == PseudoScheme::kNested || !s.unlabeled.empty());
        if (ok) return s;
    }
    throw NumericError("permutation round drew an empty pseudo sample after " + std::to_string(kMaxRedraws) +
                       " redraws");
}

Matrix gather(const Matrix& m, const std::vector<Eigen::Index>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
    return out;
}

}  // namespace

PermTestResult permutation_test(const PuDataset& data, ClassPrior prior, const EstimatorConfig& config,
                                const PermTestOptions& options, std::uint64_t seed) {
    require(options.b_count >= kMinPermutations,
            "need at least " + std::to_string(kMinPermutations) + " permutations");
    data.require_nonempty();

    Matrix pool;
    if (options.scheme == PseudoScheme::kPooled) {
        pool.resize(data.n_p() + data.n_u(), data.dim());
        pool << data.positives, data.unlabeled;
    } else {
        pool = data.unlabeled;
    }
    const auto pool_n = static_cast<double>(pool.rows());

    PermTestResult res{0.0, std::vector<double>(static_cast<std::size_t>(options.b_count)), 1.0, options.b_count,
                       prior};
    const bool pseudo_select = options.select_on_pseudo && !options.recv_per_round;
    std::optional<EstimateResult> observed;
    if (!pseudo_select) {
        observed = estimate_smi(data, prior, config);
    } else {
        Rng rng = make_rng(seed, 999);
        const PseudoSplit split = draw_split(options.scheme, data.n_p(), pool.rows(), prior, rng);
        const PuDataset reference(gather(pool, split.positives),
                                  split.unlabeled.empty() ? pool : gather(pool, split.unlabeled));
        // Centers and bandwidth come from the pool so that the real split is
        // exchangeable with the pseudo splits.
        const Matrix centers =
            select_centers(pool, std::min(config.max_centers, data.n_u()), derive_seed(config.seed, 1));
        std::vector<double> sigmas = config.sigma_grid;
        if (sigmas.empty()) sigmas = bandwidth_grid(median_bandwidth(pool, derive_seed(config.seed, 2)));
        FitReport report = cross_validate(reference, centers, sigmas, config.lambda_grid, config.folds,
                                          derive_seed(config.seed, 3));
        const GaussianBasis basis(centers, report.chosen_sigma);
        const PuMoments moments = compute_moments(data, basis);
        RatioModel model = fit_analytic(moments, basis, report.chosen_lambda);
        report.final_objective = j_hat_quadratic(model.beta, moments);
        observed = EstimateResult{SmiEstimate::from_objective(report.final_objective, prior), std::move(model),
                                  std::move(report)};
    }
    res.observed = observed->estimate.value;

    // Frozen model: pseudo samples partition the pool, so the pseudo-unlabelled
    // moment is the pool moment minus the pseudo-positive part.
    const GaussianBasis& basis = observed->model.basis;
    const Matrix phi = basis.eval(pool);
    const Matrix h_pool = kernels::parallel::second_moment(phi);
    const double lambda = observed->report.chosen_lambda;

    kernels::for_each_index(res.permuted.size(), [&](std::size_t round) {
        Rng rng = make_rng(seed, 1000 + round);
        const PseudoSplit split = draw_split(options.scheme, data.n_p(), pool.rows(), prior, rng);
        if (options.recv_per_round) {
            EstimatorConfig round_config = config;
            round_config.seed = derive_seed(config.seed, 5000 + round);
            Matrix u = split.unlabeled.empty() ? pool : gather(pool, split.unlabeled);
            res.permuted[round] =
                estimate_smi(PuDataset(gather(pool, split.positives), std::move(u)), prior, round_config)
                    .estimate.value;
            return;
        }
        const Matrix phi_p = gather(phi, split.positives);
        const Vector h_p = kernels::serial::column_mean(phi_p);
        Matrix h_u = h_pool;
        if (!split.unlabeled.empty()) {
            const auto n_pp = static_cast<double>(split.positives.size());
            const auto n_uu = static_cast<double>(split.unlabeled.size());
            h_u = (pool_n * h_pool - n_pp * kernels::serial::second_moment(phi_p)) / n_uu;
        }
        const Vector beta = solve_ridge(h_u, h_p, lambda);
        res.permuted[round] = SmiEstimate::from_objective(j_hat_quadratic(beta, PuMoments{h_u, h_p}), prior).value;
    });

    res.p_value = permutation_p_value(res.observed, res.permuted);
    return res;
}

std::vector<Type2Row> type2_experiment(const GaussianMixtureSpec& spec, const Type2Config& config,
                                       std::uint64_t seed) {
    require(!config.n_p_grid.empty() && !config.n_u_grid.empty(), "type-II sweep needs non-empty grids");
    require(config.level > 0.0 && config.level <= 1.0, "level must lie in (0, 1]");
    require(config.trials >= 1, "need at least one trial");

    std::vector<Type2Row> rows;
    std::uint64_t point = 0;
    for (Eigen::Index n_p : config.n_p_grid) {
        for (Eigen::Index n_u : config.n_u_grid) {
            std::vector<double> p_values(static_cast<std::size_t>(config.trials));
            const std::uint64_t point_seed = derive_seed(seed, point++);
            kernels::for_each_index(p_values.size(), [&](std::size_t t) {
                const std::uint64_t trial_seed = derive_seed(point_seed, t);
                const PuDataset data = sample_gaussian_pu(spec, n_p, n_u, trial_seed);
                EstimatorConfig est = config.estimator;
                est.seed = derive_seed(trial_seed, 1);
                p_values[t] = permutation_test(data, spec.prior, est, config.test, derive_seed(trial_seed, 2)).p_value;
            });
            const auto accepted =
                std::count_if(p_values.begin(), p_values.end(), [&](double p) { return p > config.level; });
            rows.push_back({n_p, n_u, config.level, config.trials,
                            static_cast<double>(accepted) / static_cast<double>(config.trials)});
        }
    }
    return rows;
}

double rejection_rate(const GaussianMixtureSpec& spec, Eigen::Index n_p, Eigen::Index n_u, double level,
                      int trials, const PermTestOptions& test, const EstimatorConfig& estimator,
                      std::uint64_t seed) {
    Type2Config cfg;
    cfg.n_p_grid = {n_p};
    cfg.n_u_grid = {n_u};
    cfg.level = level;
    cfg.trials = trials;
    cfg.test = test;
    cfg.estimator = estimator;
    return 1.0 - type2_experiment(spec, cfg, seed).front().type2_freq;
}

}  // namespace pusmi
