#pragma once

// JSON documents for models and reports. Matrices are arrays of rows.

#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "pusmi/estimator.hpp"
#include "pusmi/experiments.hpp"
#include "pusmi/mlp.hpp"
#include "pusmi/pnsmi.hpp"
#include "pusmi/puit.hpp"
#include "pusmi/purl.hpp"

namespace pusmi::io {

using Json = nlohmann::ordered_json;

Json to_json(const Matrix& m);
Json to_json(const Vector& v);
Matrix matrix_from_json(const Json& j);
Vector vector_from_json(const Json& j);

/// {sigma, centers, beta}
Json to_json(const RatioModel& model);
RatioModel ratio_model_from_json(const Json& j);

/// {sigma, centers, alpha_pos, alpha_neg}
Json to_json(const JointRatioModel& model);
JointRatioModel joint_model_from_json(const Json& j);

Json to_json(const FitReport& report);
Json to_json(const SmiEstimate& estimate);
Json to_json(const PermTestResult& result);

/// {spec: {...}, layers: [{weight, bias, batchnorm?}], momentum}
Json to_json(const mlp::MlpParams& params);
mlp::MlpParams mlp_params_from_json(const Json& j);

Json to_json(const mlp::MlpSpec& spec);
mlp::MlpSpec mlp_spec_from_json(const Json& j);
Json to_json(const mlp::SgdConfig& config);
mlp::SgdConfig sgd_config_from_json(const Json& j, mlp::SgdConfig defaults = {});

/// Fields present in `j` override `base`. The validation set is not part of
/// the document.
PurlConfig purl_config_from_json(const Json& j, PurlConfig base);
Json to_json(const PurlConfig& config);

/// Per-iteration objectives as CSV: iteration,train_j,validation_j
void write_history_csv(std::ostream& out, const std::vector<HistoryRow>& history);
/// n,n_p,n_u,mse_mean,mse_stderr
void write_mse_csv(std::ostream& out, const std::vector<MseRow>& rows);
/// n_p,n_u,level,trials,type2_freq
void write_type2_csv(std::ostream& out, const std::vector<Type2Row>& rows);

}  // namespace pusmi::io
