#pragma once

// Representation learning from PU data: a map v (d -> m) and a ratio head w
// (m -> 1) are trained by alternating SGD on the PU squared-error objective of
// w(v(x)). No class prior appears anywhere in training.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "pusmi/data.hpp"
#include "pusmi/mlp.hpp"

namespace pusmi {

enum class UpdateTarget { kRatioHead, kMap };

struct PurlConfig {
    mlp::MlpSpec v_spec;
    mlp::MlpSpec w_spec;
    mlp::SgdConfig sgd_w;
    mlp::SgdConfig sgd_v;
    int w_steps_per_v_step = 4;
    int epochs = 200;
    int patience = 20;
    std::optional<PuDataset> validation;
    /// Called once per parameter update, in order.
    std::function<void(UpdateTarget)> on_update;

    void validate(Eigen::Index input_dim) const;

    /// d-60-20-1 with batch norm on the hidden layers; v is everything up to
    /// the 20-wide layer, w the final linear layer.
    static PurlConfig deep(Eigen::Index d);
    /// Linear d -> 1 map followed by a 1-hidden_units-1 ReLU ratio head.
    static PurlConfig linear_toy(Eigen::Index d, Eigen::Index hidden_units = 20);
};

struct HistoryRow {
    int iteration;  ///< 0 is the state before training
    double train_j;
    double validation_j;  ///< NaN without a validation set
};

struct PurlResult {
    mlp::MlpParams v_params;
    mlp::MlpParams w_params;
    std::vector<HistoryRow> history;
    int best_iteration = 0;
    int w_updates = 0;
    int v_updates = 0;
};

/// PU objective of w(v(x)) with both networks in eval mode.
double composite_objective(const mlp::MlpParams& v, const mlp::MlpParams& w, const PuDataset& data);

/// Each epoch draws ceil((nP + nU) / batch) mini-batches holding
/// ceil(batch * nP / (nP + nU)) positives and the rest unlabelled. The update
/// sequence cycles w_steps_per_v_step head updates then one map update.
/// Stops after `epochs` or `patience` epochs without a better monitored
/// objective (validation if given, else train) and returns the best snapshot.
PurlResult train_purl(const PuDataset& data, const PurlConfig& config, std::uint64_t seed);

/// Eval-mode v on `points`.
Matrix transform(const PurlResult& result, const Matrix& points);

/// Unit direction of a linear single-output map (first layer weight row).
Vector linear_direction(const mlp::MlpParams& v);

struct PcaResult {
    Matrix components;  ///< k x d, orthonormal rows
    Matrix projected;   ///< n x k
    Vector mean;
    Vector variances;
};

/// Top-k principal directions of the centred sample covariance by power
/// iteration with deflation.
PcaResult pca_project(const Matrix& points, Eigen::Index k);

}  // namespace pusmi
