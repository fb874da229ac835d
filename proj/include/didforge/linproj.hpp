#ifndef DIDFORGE_LINPROJ_HPP
#define DIDFORGE_LINPROJ_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace didforge {

// Deterministic least-squares engine used by every estimator and
// decomposition.  Solved by column-pivoted Householder QR (fixed pivoting
// rule, no randomization); rank is declared deficient when a pivot falls
// below 1e-10 of the leading one, because the decomposition identities
// downstream are meaningless under collinearity.
struct ProjectionFit {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd fitted;     // all rows, including out-of-subset rows
  Eigen::VectorXd residuals;  // response - fitted, all rows
  double gram_condition = 0;  // condition estimate of the cross-product matrix
  int dof = 0;                // subset rows minus columns
};

// Least squares of `response` on `design` over `subset` (all rows when
// absent), with fitted values produced for every row so callers can use the
// fit for imputation.  Throws rank_deficient / empty_subset.
ProjectionFit project(const Eigen::VectorXd& response,
                      const Eigen::MatrixXd& design,
                      const std::vector<int>* subset = nullptr);

// Residualize `target` on `partialled` over `subset` and return
//   sum(resid * response) / sum(resid^2)
// which by Frisch-Waugh-Lovell equals the joint-regression coefficient on
// `target`.  Throws degenerate_denominator when the residualized target has
// no variance left.
double fwl_ratio(const Eigen::VectorXd& target,
                 const Eigen::MatrixXd& partialled,
                 const Eigen::VectorXd& response,
                 const std::vector<int>* subset = nullptr);

constexpr double kRankTolerance = 1e-10;

}  // namespace didforge

#endif
