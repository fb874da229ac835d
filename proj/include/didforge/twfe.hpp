#ifndef DIDFORGE_TWFE_HPP
#define DIDFORGE_TWFE_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "didforge/panel.hpp"

namespace didforge {

enum class TwfeMode { TwoPeriod, MultiPeriod };

// Two-way fixed-effects fit.  Two-period mode regresses the outcome change
// on treatment and covariate changes (intercept included); multi-period mode
// runs the within (double-demeaned) regression pooled over all (i,t).
struct TwfeFit {
  TwfeMode mode = TwfeMode::TwoPeriod;
  double alpha = 0.0;        // coefficient on treatment
  Eigen::VectorXd beta;      // covariate coefficients from the joint fit
  Eigen::VectorXd gamma;     // projection of treatment on the covariates
  double alpha_den = 0.0;    // mean squared residualized treatment variation

  // two-period extras
  Eigen::VectorXd treat_projection;  // fitted values of L(D|dX), per unit
  double p_treated = 0.0;

  // multi-period extras
  Eigen::VectorXd period_treated_share;  // share treated per period

  int n_units = 0;
  int n_periods = 0;
};

TwfeFit fit_two_period(const TwoPeriodView& view);
TwfeFit fit_two_period(const PanelDataset& data);
TwfeFit fit_multi_period(const PanelDataset& data);

// Double-demeaned treatment value shared by every unit of group g in period
// t; group and period shares are the sample ones stored in the fit.
double h_cell(const TwfeFit& fit, int g, int t);

enum class WeightVariant {
  TwoPeriodConditionalAtt,
  TwoPeriodImplicit,
  MultiPeriodConditionalAtt,
  MultiPeriodImplicit,
};

struct WeightEntry {
  int unit = 0;
  int group = 0;   // the cell's g
  int period = 0;  // the cell's t
  int side = 1;    // 1 treated-side, 0 comparison-side
  double value = 0.0;
};

struct WeightCellSummary {
  int group = 0;
  int period = 0;
  int side = 1;
  int count = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double share_negative = 0.0;
};

struct TwfeWeights {
  WeightVariant variant = WeightVariant::TwoPeriodImplicit;
  std::vector<WeightEntry> entries;
  std::vector<WeightCellSummary> cells;
  double share_negative = 0.0;  // over causal-interpretation cells
  double min = 0.0;
  double max = 0.0;
};

// Weights attached to conditional treatment effects.  Two-period: treated
// units only, normalized to mean one.  Multi-period: one weight per (i,t)
// cell, pre-treatment cells included so the sum rules (post-period
// weights sum to 1, pre-period to -1) can be checked.
TwfeWeights conditional_att_weights(const TwfeFit& fit,
                                    const PanelDataset& data);

// Re-weighting representation of alpha: treated-side and comparison-side
// weights whose weighted outcome contrast reproduces alpha exactly.
TwfeWeights implicit_weights(const TwfeFit& fit, const PanelDataset& data);

// Applies implicit weights to their designated outcome contrast; equals
// fit.alpha up to floating point.
double weighted_outcome_contrast(const TwfeWeights& weights,
                                 const PanelDataset& data);

// Reference constants for the multi-period decomposition.  Their choice
// shifts the per-cell attributions but provably not the weighted total;
// defaults are zero.
struct ReferenceConstants {
  Eigen::VectorXd theta_t;  // length T
  Eigen::VectorXd lambda0;  // length k
};

// Fits theta_t and lambda0 from the pooled never-treated subsample.
ReferenceConstants estimate_reference_constants(const PanelDataset& data);

struct WeightedTerm {
  int unit = 0;
  int group = 0;
  int period = 0;
  double weight = 0.0;
  double value = 0.0;         // the conditional contrast / reference path
  double contribution = 0.0;  // weight * value / cell size, summing to alpha
};

struct NegativeWeightCensus {
  int n_cells = 0;
  int n_negative = 0;
  double share_negative = 0.0;
  int n_near_zero = 0;  // |w| <= 1e-6
  Eigen::VectorXd profile_x;  // mean covariate change/demeaned level
  Eigen::VectorXd profile_z;  // mean time-invariant covariates
};

struct ReversalRow {
  int unit = 0;
  int group = 0;
  int period = 0;
  double treat_projection = 0.0;
  double weight = 0.0;
};

struct DecompositionReport {
  TwfeMode mode = TwfeMode::TwoPeriod;
  double alpha = 0.0;
  std::vector<WeightedTerm> weighted_conditional_terms;
  double reconstruction = 0.0;  // reproduces alpha
  NegativeWeightCensus census;
  // treated cells ranked by the treatment projection (descending); the
  // weight column demonstrates the inverse relationship
  std::vector<ReversalRow> reversal_ranking;
  double reversal_slope = 0.0;      // two-period: w = a + b * L(D|dX), b < 0
  double reversal_intercept = 0.0;
  bool has_oracle = false;
  double oracle_weighted_att = 0.0;
  double oracle_bias = 0.0;  // alpha minus weighted true conditional effects
};

// Decomposition of alpha into weighted conditional terms.  `oracle_cell_att`
// (n x T, entries meaningful for t >= G_i) supplies true conditional
// treatment effects for bias attribution.  `ref` only affects the
// multi-period per-cell attributions, not the total.
DecompositionReport decompose(const TwfeFit& fit, const PanelDataset& data,
                              const Eigen::MatrixXd* oracle_cell_att = nullptr,
                              const ReferenceConstants* ref = nullptr);

}  // namespace didforge

#endif
