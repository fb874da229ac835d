#ifndef DIDFORGE_DIAGNOSTICS_HPP
#define DIDFORGE_DIAGNOSTICS_HPP

#include <string>
#include <vector>

#include "didforge/gtatt.hpp"
#include "didforge/panel.hpp"
#include "didforge/twfe.hpp"

namespace didforge {

// Covariate-balance audit of the within estimator: apply its implicit
// regression weights to functions of the covariates and compare the
// weighted treated and comparison means.  The change panel is balanced by
// construction (those columns are in the regression); the level and
// time-invariant panels are diagnostic only.
struct BalanceRow {
  std::string label;
  std::string panel;  // "dX", "X_post", "X_pre", "Z", "extra"
  bool exact = false; // balanced by construction (OLS orthogonality)
  double treated_mean = 0.0;
  double comparison_mean = 0.0;
  double diff = 0.0;
  double std_diff = 0.0;  // diff / pooled unweighted sd of the function
};

struct BalanceTable {
  int g = 0;  // 0 for the two-period / overall table
  int t = 0;
  std::vector<BalanceRow> rows;
};

struct BalanceReport {
  bool two_period = true;
  std::string weight_kind;           // "twfe-implicit" or "gps-benchmark"
  std::vector<BalanceTable> tables;  // multi-period: per (g,t), overall last
};

// Extra covariate functions: "name" (a covariate), "name^2", or
// "name1*name2", with names drawn from the x/z columns.  x functions are
// evaluated at both the post and base period.  unknown_function otherwise.
BalanceReport balance_audit(const TwfeWeights& weights,
                            const PanelDataset& data,
                            const std::vector<std::string>& extra = {});

// Weighted outcome contrast under the implicit weights; equals the fitted
// alpha up to floating point and is exposed as a user-facing self-check.
double reconstruct_alpha(const TwfeWeights& weights, const PanelDataset& data);

// Same balance tables using the propensity-based balancing weights as the
// benchmark the implicit weights are compared against (two-period form).
BalanceReport ipw_benchmark_balance(const PanelDataset& data,
                                    const GpsFit& gps,
                                    const std::vector<std::string>& extra = {});

// Multi-period benchmark: fits a generalized propensity score per (g,t).
BalanceReport ipw_benchmark_balance_all(
    const PanelDataset& data, const AttOptions& opts = {},
    const std::vector<std::string>& extra = {});

std::string render_balance_table(const BalanceReport& report);

}  // namespace didforge

#endif
