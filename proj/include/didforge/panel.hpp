#ifndef DIDFORGE_PANEL_HPP
#define DIDFORGE_PANEL_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace didforge {

// Balanced panel in wide layout: one row per unit, one column per period.
// Periods are re-indexed to 1..T (original labels kept in `period_labels`).
// `group(i)` is the first treated period of unit i, with never-treated units
// stored as T+1.  Treatment is derived: D_it = 1{t >= group(i)}.
struct PanelDataset {
  int n_units = 0;
  int n_periods = 0;                    // T
  Eigen::MatrixXd outcome;              // n x T
  std::vector<Eigen::MatrixXd> x_tv;    // k matrices, each n x T
  Eigen::MatrixXd z_ti;                 // n x l (l may be 0)
  Eigen::VectorXi group;                // n, values in {2..T+1}

  std::vector<std::string> unit_ids;
  std::vector<double> period_labels;    // original time values, sorted
  std::vector<std::string> x_names;
  std::vector<std::string> z_names;

  int k() const { return static_cast<int>(x_tv.size()); }
  int l() const { return static_cast<int>(z_ti.cols()); }
  int never_code() const { return n_periods + 1; }

  bool treated_at(int i, int t) const { return t >= group(i); }
  double d(int i, int t) const { return treated_at(i, t) ? 1.0 : 0.0; }

  // Treated groups present in the data, sorted (excludes the never code).
  std::vector<int> treated_groups() const;
  // Unit counts per group value (includes never code when present).
  std::vector<std::pair<int, int>> group_sizes() const;
  // p_g = share of units in group g; pbar_g conditions on ever-treated.
  double p_g(int g) const;
  double pbar_g(int g) const;
  int n_ever_treated() const;

  // X_it for unit i, period t, as a k-vector.
  Eigen::VectorXd x_at(int i, int t) const;
};

struct ColumnMapping {
  std::string id = "id";
  std::string time = "time";
  std::string outcome = "y";
  std::string group = "g";
  std::vector<std::string> x_tv;   // time-varying covariate columns
  std::vector<std::string> z_ti;   // time-invariant covariate columns
};

// Long-format CSV, header row required.  `g` equal to 0 or empty means never
// treated; otherwise g must match one of the time labels (values after the
// last period are treated as never).  Errors: missing_cell (unbalanced),
// non_constant_time_invariant, already_treated_at_start, unknown_column.
PanelDataset load_csv(const std::string& path, const ColumnMapping& schema);
PanelDataset load_csv_string(const std::string& text,
                             const ColumnMapping& schema);
void write_csv(const PanelDataset& data, const std::string& path,
               const ColumnMapping& schema = {});
std::string to_csv_string(const PanelDataset& data,
                          const ColumnMapping& schema = {});

// First-difference view for the two-period design (T = 2, one treated
// group).  `dx` carries an intercept in column 0 followed by the covariate
// changes.
struct TwoPeriodView {
  Eigen::VectorXd dy;      // n
  Eigen::MatrixXd dx;      // n x (1+k)
  Eigen::MatrixXd x_pre;   // n x k
  Eigen::MatrixXd x_post;  // n x k
  Eigen::MatrixXd z;       // n x l
  Eigen::VectorXd d;       // n, 0/1
};

TwoPeriodView two_period_view(const PanelDataset& data);

// One variable after the within transformation
// v..*it = v_it - mean_t(v_i.) - mean_i(v_.t) + grand mean.
struct DemeanedVariable {
  Eigen::MatrixXd dd;           // n x T
  Eigen::VectorXd unit_mean;    // n
  Eigen::VectorXd period_mean;  // T
  double grand_mean = 0.0;
};

DemeanedVariable double_demean(const Eigen::MatrixXd& values);

struct DemeanedPanel {
  DemeanedVariable y;
  DemeanedVariable d;
  std::vector<DemeanedVariable> x;  // k entries
};

DemeanedPanel double_demean(const PanelDataset& data);

struct ValidationReport {
  std::vector<std::pair<int, int>> group_sizes;       // (group value, count)
  std::vector<int> small_groups;                      // below min_group_size
  std::vector<std::pair<int, int>> no_comparison;     // (g,t) with no D_t=0
  bool has_never_treated = false;
  int min_group_size = 0;
  // Filled by callers that already fit generalized propensity scores.
  double gps_min = std::numeric_limits<double>::quiet_NaN();
  double gps_max = std::numeric_limits<double>::quiet_NaN();
  bool ok() const { return small_groups.empty() && no_comparison.empty(); }
};

ValidationReport validate(const PanelDataset& data, int min_group_size = 5);

}  // namespace didforge

#endif
