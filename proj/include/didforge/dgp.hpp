#ifndef DIDFORGE_DGP_HPP
#define DIDFORGE_DGP_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "didforge/panel.hpp"

namespace didforge {

// Synthetic staggered-adoption panel generator.  Untreated outcomes follow
//   Y_it(0) = theta_t + Z'delta_t + X_it'beta_t
//           + sum_{s<=t} dX_is'dx_loading_s
//           + amplitude * sum_{s<=t} |dX_is|^2
//           + eta_i + v_it
// so each linearity condition behind the within estimator can be switched
// on or off independently.  Treatment assignment is a multinomial logit on
// baseline covariate levels, time-invariant covariates and the unit effect;
// treatment adds tau(g,t,X_it,Z_i) from period g onward, so pre-treatment
// outcomes are untreated potential outcomes by construction.
struct DgpAssignment {
  std::vector<int> groups;        // treated groups, each in {2..T}
  bool include_never = true;      // never-treated class (score fixed at 0)
  Eigen::VectorXd intercepts;     // one per treated group
  Eigen::MatrixXd coef_x1;        // groups x k, loadings on baseline X
  Eigen::MatrixXd coef_z;         // groups x l
  Eigen::VectorXd coef_eta;       // one per treated group
};

struct DgpXProcess {
  double x1_mean = 0.0;
  double x1_sd = 1.0;
  double rho = 1.0;
  double drift = 0.0;
  double innovation_sd = 1.0;
  // innovation mean shift per treated group (never-treated shift is 0)
  Eigen::VectorXd innovation_shift;
};

struct DgpOutcome {
  Eigen::VectorXd theta_t;      // T
  Eigen::MatrixXd delta_t;      // l x T
  Eigen::MatrixXd beta_t;       // k x T
  Eigen::MatrixXd dx_loading_t; // k x T, column t-1 scales dX_t (col 0 unused)
  double nonlin_amplitude = 0.0;
  double eta_sd = 1.0;
  Eigen::VectorXd eta_shift;    // per treated group
  double noise_sd = 1.0;
};

struct DgpTreatment {
  double base = 0.0;
  double event_slope = 0.0;   // per period since treatment
  Eigen::VectorXd coef_x;     // k, interaction with X_it
  Eigen::VectorXd coef_z;     // l
};

struct DgpConfig {
  int n_units = 1000;
  int n_periods = 2;
  int k = 1;
  int l = 0;
  std::uint64_t seed = 1;
  DgpAssignment assignment;
  DgpXProcess x_process;
  DgpOutcome outcome;
  DgpTreatment treatment;
  int oracle_mc_draws = 100000;

  // Allocate coefficient containers consistent with the dimensions; values
  // default to zero / identity-ish so presets only set what they need.
  static DgpConfig make(int n, int T, int k, int l,
                        const std::vector<int>& groups, std::uint64_t seed);
};

struct OracleCell {
  int g = 0;
  int t = 0;
  double att = 0.0;
  double mc_se = 0.0;
};

struct DgpOracle {
  std::vector<OracleCell> cells;       // every (g,t) with t >= g
  double att_overall = 0.0;
  double att_overall_se = 0.0;
  std::vector<OracleCell> event_study; // g field holds event time e
  std::string method;                  // "analytic" or "monte-carlo"
  int mc_draws = 0;

  double att(int g, int t) const;
  double att_es(int e) const;
};

std::pair<PanelDataset, DgpOracle> generate(const DgpConfig& config);

// Presets named after the modeling assumption they break; "clean" satisfies
// all of them with a constant effect of 2.
DgpConfig violation_preset(const std::string& name);
std::vector<std::string> preset_names();

// Exact tau(G_i, t, X_it, Z_i) per treated cell of `data`, NaN elsewhere.
// Verifies that `data` was produced by `config` (config_mismatch otherwise).
Eigen::MatrixXd oracle_conditional_atts(const DgpConfig& config,
                                        const PanelDataset& data);

std::string config_to_json(const DgpConfig& config);
DgpConfig config_from_json(const std::string& text);
std::string oracle_to_json(const DgpOracle& oracle);

}  // namespace didforge

#endif
