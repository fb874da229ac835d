#ifndef DIDFORGE_GTATT_HPP
#define DIDFORGE_GTATT_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "didforge/panel.hpp"

namespace didforge {

enum class Method { RA, IPW, DR };
enum class BasePeriod { Varying, Universal };   // g-1 vs period 1
enum class ComparisonGroup { NotYetTreated, NeverTreated };
enum class GpsLink { Logit, Probit };

struct AttOptions {
  BasePeriod base_period = BasePeriod::Varying;
  ComparisonGroup comparison = ComparisonGroup::NotYetTreated;
  GpsLink link = GpsLink::Logit;
  double eps_trim = 1e-4;   // overlap trim on 1 - fitted gps
  // Nuisance design switches; dropping Z deliberately misspecifies a
  // nuisance, used to exercise double robustness.
  bool or_include_z = true;
  bool gps_include_z = true;
  int threads = 0;  // estimate_all: 0 = library default
};

// Generalized propensity score fit on the {G=g} union {D_t=0} subsample.
struct GpsFit {
  int g = 0;
  int t = 0;
  GpsLink link = GpsLink::Logit;
  Eigen::VectorXd coefficients;
  std::vector<int> subsample;   // dataset rows the model was fit on
  Eigen::VectorXd fitted;       // aligned with subsample
  bool converged = false;
  int iterations = 0;
  double min_fitted = 0.0;
  double max_fitted = 0.0;
};

GpsFit fit_gps(const PanelDataset& data, int g, int t,
               const AttOptions& opts = {});

struct GroupTimeResult {
  int g = 0;
  int t = 0;
  Method method = Method::DR;
  double estimate = 0.0;
  int n_treated = 0;
  int n_comparison = 0;
  Eigen::VectorXd influence;  // per unit, centered
  Eigen::VectorXd or_coef;    // outcome-regression coefficients (empty: none)
  Eigen::VectorXd gps_coef;   // propensity coefficients (empty: none)
  double gps_min = std::numeric_limits<double>::quiet_NaN();
  double gps_max = std::numeric_limits<double>::quiet_NaN();
  AttOptions options;
};

GroupTimeResult att_gt_ra(const PanelDataset& data, int g, int t,
                          const AttOptions& opts = {});
GroupTimeResult att_gt_ipw(const PanelDataset& data, int g, int t,
                           const GpsFit& gps, const AttOptions& opts = {});
GroupTimeResult att_gt_dr(const PanelDataset& data, int g, int t,
                          const AttOptions& opts = {});

// All (g,t) cells with t >= g, ordered by (g,t); cells are independent and
// evaluated in parallel, results identical to serial evaluation.
std::vector<GroupTimeResult> estimate_all(const PanelDataset& data,
                                          Method method,
                                          const AttOptions& opts = {});

struct AggregateResult {
  enum class Kind { Overall, EventStudy };
  Kind kind = Kind::Overall;
  int event_time = 0;
  double estimate = 0.0;
  Eigen::VectorXd influence;
  std::vector<std::tuple<int, int, double>> component_weights;  // (g,t,w)
};

// ATT averaged within group over its post-treatment periods, then across
// ever-treated groups by size.  Group shares are estimated, which adds a
// share-estimation term to the influence values.
AggregateResult aggregate_overall(const std::vector<GroupTimeResult>& results,
                                  const PanelDataset& data);

// Average effect after exactly e periods of exposure across eligible groups.
AggregateResult aggregate_event_study(
    const std::vector<GroupTimeResult>& results, const PanelDataset& data,
    int e);

// Feasible event times given the groups present.
std::vector<int> feasible_event_times(const PanelDataset& data);

const char* method_name(Method m);

}  // namespace didforge

#endif
