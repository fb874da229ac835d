#ifndef DIDFORGE_INFERENCE_HPP
#define DIDFORGE_INFERENCE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "didforge/gtatt.hpp"

namespace didforge {

// Per-unit influence contributions, one column per estimand.  Columns are
// the (g,t) cells in order, then the aggregates in the order supplied.
struct InfluenceMatrix {
  Eigen::MatrixXd values;           // n_units x n_estimands
  std::vector<std::string> labels;  // "att_g2_t3", "overall", "es_0", ...
  Eigen::VectorXd estimates;        // point estimates, aligned with labels
};

InfluenceMatrix build_influence_matrix(
    const std::vector<GroupTimeResult>& results,
    const std::vector<AggregateResult>& aggregates);

// Recompute the influence column of a group-time result from its stored
// nuisance fits (missing_nuisance when the result does not carry them).
Eigen::VectorXd build_influence(const GroupTimeResult& result,
                                const PanelDataset& data);

enum class Multiplier { Rademacher, Mammen };

struct BootstrapOptions {
  double ci_level = 0.95;
  bool quantile_ci = false;  // percentile CIs instead of normal approximation
  bool iqr_se = false;       // normalized-IQR standard error
  int threads = 0;
};

struct BootstrapResult {
  int draws = 0;
  Multiplier multiplier = Multiplier::Rademacher;
  std::uint64_t seed = 0;
  double ci_level = 0.95;
  std::vector<std::string> labels;
  Eigen::VectorXd estimates;
  Eigen::VectorXd se;
  Eigen::VectorXd ci_lo;
  Eigen::VectorXd ci_hi;
};

// Perturbed statistics (1/n) sum_i V_bi psi_i, one row per replicate.
// Replicate b draws its multipliers from a counter-based substream, so the
// matrix is identical no matter how the loop is scheduled.
Eigen::MatrixXd bootstrap_stats(const InfluenceMatrix& infl, int draws,
                                Multiplier multiplier, std::uint64_t seed,
                                int threads = 0);

BootstrapResult multiplier_bootstrap(const InfluenceMatrix& infl, int draws,
                                     Multiplier multiplier, std::uint64_t seed,
                                     const BootstrapOptions& opts = {});

double normal_quantile(double p);

const char* multiplier_name(Multiplier m);

}  // namespace didforge

#endif
