#include "didforge/dgp.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "didforge/errors.hpp"
#include "didforge/rng.hpp"

namespace didforge {

namespace {

// rng stream ids
enum : std::uint64_t {
  kStreamZ = 0,
  kStreamX1 = 1,
  kStreamEta = 2,
  kStreamInnov = 3,
  kStreamNoise = 4,
  kStreamAssign = 5,
};

struct UnitDraw {
  Eigen::VectorXd z;        // l
  Eigen::MatrixXd x;        // k x T
  double eta_base = 0.0;
  int class_index = -1;     // position in classes (treated groups..., never)
  int group = 0;            // group code, never = T+1
};

int n_classes(const DgpConfig& c) {
  return static_cast<int>(c.assignment.groups.size()) +
         (c.assignment.include_never ? 1 : 0);
}

// Assignment scores, softmax probabilities, and the drawn class for one
// unit.  Never-treated is the reference class with score 0.
void assign_unit(const DgpConfig& c, std::uint64_t seed, std::int64_t idx,
                 UnitDraw& u) {
  const int m = static_cast<int>(c.assignment.groups.size());
  const int total = n_classes(c);
  Eigen::VectorXd score(total);
  for (int a = 0; a < m; ++a) {
    double s = c.assignment.intercepts(a);
    for (int j = 0; j < c.k; ++j) s += c.assignment.coef_x1(a, j) * u.x(j, 0);
    for (int j = 0; j < c.l; ++j) s += c.assignment.coef_z(a, j) * u.z(j);
    s += c.assignment.coef_eta(a) * u.eta_base;
    score(a) = s;
  }
  if (c.assignment.include_never) score(total - 1) = 0.0;

  const double smax = score.maxCoeff();
  Eigen::VectorXd prob = (score.array() - smax).exp();
  prob /= prob.sum();
  if (prob.minCoeff() < 1e-4 || prob.maxCoeff() > 1.0 - 1e-4)
    fail(errc::overlap_config,
         "assignment probabilities leave (1e-4, 1-1e-4); soften the "
         "assignment coefficients");

  const double ucdf = rng::uniform(seed, kStreamAssign, idx);
  double acc = 0.0;
  u.class_index = total - 1;
  for (int a = 0; a < total; ++a) {
    acc += prob(a);
    if (ucdf <= acc) {
      u.class_index = a;
      break;
    }
  }
  u.group = (u.class_index < m) ? c.assignment.groups[u.class_index]
                                : c.n_periods + 1;
}

// Draw covariates, unit effect and group for one unit; `idx` can be a
// dataset row or an oracle replication index.
UnitDraw draw_unit(const DgpConfig& c, std::uint64_t seed, std::int64_t idx) {
  const int T = c.n_periods, k = c.k, l = c.l;
  UnitDraw u;
  u.z.resize(l);
  for (int j = 0; j < l; ++j) u.z(j) = rng::normal(seed, kStreamZ, idx * l + j);
  u.x.resize(k, T);
  for (int j = 0; j < k; ++j)
    u.x(j, 0) = c.x_process.x1_mean +
                c.x_process.x1_sd * rng::normal(seed, kStreamX1, idx * k + j);
  u.eta_base = c.outcome.eta_sd * rng::normal(seed, kStreamEta, idx);
  assign_unit(c, seed, idx, u);

  const int m = static_cast<int>(c.assignment.groups.size());
  const double shift =
      u.class_index < m ? c.x_process.innovation_shift(u.class_index) : 0.0;
  for (int t = 1; t < T; ++t) {
    for (int j = 0; j < k; ++j) {
      const double innov =
          c.x_process.innovation_sd *
              rng::normal(seed, kStreamInnov, (idx * T + t) * k + j) +
          shift;
      u.x(j, t) = c.x_process.drift + c.x_process.rho * u.x(j, t - 1) + innov;
    }
  }
  return u;
}

double tau(const DgpConfig& c, int g, int t, const Eigen::VectorXd& x_t,
           const Eigen::VectorXd& z) {
  double v = c.treatment.base + c.treatment.event_slope * (t - g);
  v += c.treatment.coef_x.dot(x_t);
  v += c.treatment.coef_z.dot(z);
  return v;
}

double untreated_outcome(const DgpConfig& c, const UnitDraw& u, double eta,
                         int t /*1-based*/, double noise) {
  const int k = c.k, l = c.l;
  double y = c.outcome.theta_t(t - 1) + eta + noise;
  for (int j = 0; j < l; ++j) y += u.z(j) * c.outcome.delta_t(j, t - 1);
  for (int j = 0; j < k; ++j) y += u.x(j, t - 1) * c.outcome.beta_t(j, t - 1);
  for (int s = 2; s <= t; ++s) {
    double q = 0.0;
    for (int j = 0; j < k; ++j) {
      const double dx = u.x(j, s - 1) - u.x(j, s - 2);
      y += dx * c.outcome.dx_loading_t(j, s - 1);
      q += dx * dx;
    }
    y += c.outcome.nonlin_amplitude * q;
  }
  return y;
}

bool assignment_is_covariate_free(const DgpConfig& c) {
  return (c.k == 0 || c.assignment.coef_x1.cwiseAbs().maxCoeff() == 0.0) &&
         (c.l == 0 || c.assignment.coef_z.cwiseAbs().maxCoeff() == 0.0) &&
         c.assignment.coef_eta.cwiseAbs().maxCoeff() == 0.0;
}

bool tau_is_cell_constant(const DgpConfig& c) {
  const bool no_x = c.k == 0 || c.treatment.coef_x.cwiseAbs().maxCoeff() == 0.0;
  const bool no_z = c.l == 0 || c.treatment.coef_z.cwiseAbs().maxCoeff() == 0.0;
  return no_x && no_z;
}

// E[X_jt | G = g] when assignment is covariate-free: the AR recursion with
// the group's innovation shift, identical across dimensions j.
double x_mean_given_group(const DgpConfig& c, int class_index, int t) {
  const int m = static_cast<int>(c.assignment.groups.size());
  const double shift = class_index < m && class_index >= 0
                           ? c.x_process.innovation_shift(class_index)
                           : 0.0;
  double mean = c.x_process.x1_mean;
  for (int s = 2; s <= t; ++s)
    mean = c.x_process.drift + c.x_process.rho * mean + shift;
  return mean;
}

DgpOracle analytic_oracle(const DgpConfig& c) {
  DgpOracle o;
  o.method = "analytic";
  const int T = c.n_periods;
  const bool free_assign = assignment_is_covariate_free(c);

  std::vector<double> pg(c.assignment.groups.size(), 0.0);
  if (free_assign) {
    const int m = static_cast<int>(c.assignment.groups.size());
    const int total = n_classes(c);
    Eigen::VectorXd score = Eigen::VectorXd::Zero(total);
    for (int a = 0; a < m; ++a) score(a) = c.assignment.intercepts(a);
    Eigen::VectorXd prob = (score.array() - score.maxCoeff()).exp();
    prob /= prob.sum();
    for (int a = 0; a < m; ++a) pg[a] = prob(a);
  }

  const double coef_x_sum =
      c.k > 0 ? c.treatment.coef_x.sum() : 0.0;
  for (std::size_t a = 0; a < c.assignment.groups.size(); ++a) {
    const int g = c.assignment.groups[a];
    for (int t = g; t <= T; ++t) {
      double att = c.treatment.base + c.treatment.event_slope * (t - g);
      if (!tau_is_cell_constant(c)) {
        // covariate-free assignment: E[Z|G]=0 and E[X_t|G] is closed form
        att += coef_x_sum * x_mean_given_group(c, static_cast<int>(a), t);
      }
      o.cells.push_back({g, t, att, 0.0});
    }
  }

  // aggregate with exact shares (covariate-free) or rely on cell-constant
  // values where the shares cancel
  double pbar_norm = 0.0;
  for (double p : pg) pbar_norm += p;
  double overall = 0.0;
  for (std::size_t a = 0; a < c.assignment.groups.size(); ++a) {
    const int g = c.assignment.groups[a];
    double group_mean = 0.0;
    for (int t = g; t <= T; ++t) group_mean += o.att(g, t);
    group_mean /= (T - g + 1);
    const double w = free_assign ? pg[a] / pbar_norm
                                 : 1.0 / c.assignment.groups.size();
    overall += w * group_mean;
  }
  o.att_overall = overall;

  const int e_max = T - *std::min_element(c.assignment.groups.begin(),
                                          c.assignment.groups.end());
  for (int e = 0; e <= e_max; ++e) {
    double num = 0.0, den = 0.0;
    for (std::size_t a = 0; a < c.assignment.groups.size(); ++a) {
      const int g = c.assignment.groups[a];
      if (g + e < 2 || g + e > T) continue;
      const double w = free_assign ? pg[a] : 1.0;
      num += w * o.att(g, g + e);
      den += w;
    }
    if (den > 0) o.event_study.push_back({e, 0, num / den, 0.0});
  }
  return o;
}

DgpOracle monte_carlo_oracle(const DgpConfig& c) {
  DgpOracle o;
  o.method = "monte-carlo";
  o.mc_draws = c.oracle_mc_draws;
  const int T = c.n_periods;
  const std::uint64_t oseed = rng::splitmix64(c.seed ^ 0xA11CEULL);

  struct Acc {
    double sum = 0.0, sumsq = 0.0;
    long count = 0;
  };
  std::vector<std::vector<Acc>> acc(c.assignment.groups.size(),
                                    std::vector<Acc>(T + 1));
  std::vector<long> group_count(c.assignment.groups.size(), 0);
  long ever = 0;

  for (long r = 0; r < c.oracle_mc_draws; ++r) {
    UnitDraw u = draw_unit(c, oseed, r);
    if (u.group > T) continue;
    const int a = static_cast<int>(
        std::find(c.assignment.groups.begin(), c.assignment.groups.end(),
                  u.group) -
        c.assignment.groups.begin());
    ++group_count[a];
    ++ever;
    for (int t = u.group; t <= T; ++t) {
      Eigen::VectorXd xt(c.k);
      for (int j = 0; j < c.k; ++j) xt(j) = u.x(j, t - 1);
      const double v = tau(c, u.group, t, xt, u.z);
      acc[a][t].sum += v;
      acc[a][t].sumsq += v * v;
      acc[a][t].count++;
    }
  }

  double overall = 0.0, overall_var = 0.0;
  for (std::size_t a = 0; a < c.assignment.groups.size(); ++a) {
    const int g = c.assignment.groups[a];
    const double pbar = static_cast<double>(group_count[a]) / ever;
    double group_mean = 0.0, group_var = 0.0;
    for (int t = g; t <= T; ++t) {
      const auto& s = acc[a][t];
      const double mean = s.sum / s.count;
      const double var =
          (s.sumsq - s.count * mean * mean) / (s.count - 1.0) / s.count;
      o.cells.push_back({g, t, mean, std::sqrt(std::max(0.0, var))});
      group_mean += mean;
      group_var += var;
    }
    group_mean /= (T - g + 1);
    group_var /= (T - g + 1.0) * (T - g + 1.0);
    overall += pbar * group_mean;
    overall_var += pbar * pbar * group_var;
  }
  o.att_overall = overall;
  o.att_overall_se = std::sqrt(overall_var);

  const int e_max = T - *std::min_element(c.assignment.groups.begin(),
                                          c.assignment.groups.end());
  for (int e = 0; e <= e_max; ++e) {
    double num = 0.0, den = 0.0, var = 0.0;
    for (std::size_t a = 0; a < c.assignment.groups.size(); ++a) {
      const int g = c.assignment.groups[a];
      if (g + e < 2 || g + e > T) continue;
      const double w = static_cast<double>(group_count[a]);
      for (const auto& cell : o.cells) {
        if (cell.g == g && cell.t == g + e) {
          num += w * cell.att;
          var += w * w * cell.mc_se * cell.mc_se;
          break;
        }
      }
      den += w;
    }
    if (den > 0)
      o.event_study.push_back({e, 0, num / den, std::sqrt(var) / den});
  }
  return o;
}

}  // namespace

DgpConfig DgpConfig::make(int n, int T, int k, int l,
                          const std::vector<int>& groups,
                          std::uint64_t seed) {
  DgpConfig c;
  c.n_units = n;
  c.n_periods = T;
  c.k = k;
  c.l = l;
  c.seed = seed;
  const int m = static_cast<int>(groups.size());
  c.assignment.groups = groups;
  c.assignment.intercepts = Eigen::VectorXd::Zero(m);
  c.assignment.coef_x1 = Eigen::MatrixXd::Zero(m, k);
  c.assignment.coef_z = Eigen::MatrixXd::Zero(m, l);
  c.assignment.coef_eta = Eigen::VectorXd::Zero(m);
  c.x_process.innovation_shift = Eigen::VectorXd::Zero(m);
  c.outcome.theta_t = Eigen::VectorXd::Zero(T);
  c.outcome.delta_t = Eigen::MatrixXd::Zero(l, T);
  c.outcome.beta_t = Eigen::MatrixXd::Zero(k, T);
  c.outcome.dx_loading_t = Eigen::MatrixXd::Zero(k, T);
  c.outcome.eta_shift = Eigen::VectorXd::Zero(m);
  c.treatment.coef_x = Eigen::VectorXd::Zero(k);
  c.treatment.coef_z = Eigen::VectorXd::Zero(l);
  return c;
}

double DgpOracle::att(int g, int t) const {
  for (const auto& c : cells)
    if (c.g == g && c.t == t) return c.att;
  fail(errc::missing_cell_result, "oracle has no cell (" + std::to_string(g) +
                                      "," + std::to_string(t) + ")");
}

double DgpOracle::att_es(int e) const {
  for (const auto& c : event_study)
    if (c.g == e) return c.att;
  fail(errc::no_eligible_group,
       "oracle has no event-study value for e=" + std::to_string(e));
}

std::pair<PanelDataset, DgpOracle> generate(const DgpConfig& c) {
  if (c.assignment.groups.empty())
    fail(errc::invalid_value, "config needs at least one treated group");
  for (int g : c.assignment.groups)
    if (g < 2 || g > c.n_periods)
      fail(errc::invalid_value, "treated group outside {2..T}");

  const int n = c.n_units, T = c.n_periods, k = c.k, l = c.l;
  PanelDataset data;
  data.n_units = n;
  data.n_periods = T;
  data.outcome.resize(n, T);
  data.x_tv.assign(k, Eigen::MatrixXd(n, T));
  data.z_ti.resize(n, l);
  data.group.resize(n);
  for (int t = 1; t <= T; ++t) data.period_labels.push_back(t);
  for (int j = 0; j < k; ++j) data.x_names.push_back("x" + std::to_string(j + 1));
  for (int j = 0; j < l; ++j) data.z_names.push_back("z" + std::to_string(j + 1));

  const int m = static_cast<int>(c.assignment.groups.size());
  for (int i = 0; i < n; ++i) {
    UnitDraw u = draw_unit(c, c.seed, i);
    data.unit_ids.push_back(std::to_string(i + 1));
    data.group(i) = u.group;
    for (int j = 0; j < l; ++j) data.z_ti(i, j) = u.z(j);
    for (int j = 0; j < k; ++j)
      for (int t = 0; t < T; ++t) data.x_tv[j](i, t) = u.x(j, t);

    const double eta =
        u.eta_base +
        (u.class_index < m ? c.outcome.eta_shift(u.class_index) : 0.0);
    for (int t = 1; t <= T; ++t) {
      const double noise =
          c.outcome.noise_sd * rng::normal(c.seed, kStreamNoise, static_cast<std::int64_t>(i) * T + (t - 1));
      double y = untreated_outcome(c, u, eta, t, noise);
      if (t >= u.group) {
        Eigen::VectorXd xt(k);
        for (int j = 0; j < k; ++j) xt(j) = u.x(j, t - 1);
        y += tau(c, u.group, t, xt, u.z);
      }
      data.outcome(i, t - 1) = y;
    }
  }

  DgpOracle oracle;
  const bool analytic =
      assignment_is_covariate_free(c) ||
      (tau_is_cell_constant(c) && c.treatment.event_slope == 0.0);
  oracle = analytic ? analytic_oracle(c) : monte_carlo_oracle(c);
  return {std::move(data), std::move(oracle)};
}

Eigen::MatrixXd oracle_conditional_atts(const DgpConfig& config,
                                        const PanelDataset& data) {
  auto [regen, oracle] = generate(config);
  (void)oracle;
  if (regen.n_units != data.n_units || regen.n_periods != data.n_periods ||
      regen.outcome != data.outcome || regen.group != data.group)
    fail(errc::config_mismatch, "dataset was not generated by this config");

  const int n = data.n_units, T = data.n_periods, k = data.k();
  Eigen::MatrixXd out =
      Eigen::MatrixXd::Constant(n, T, std::numeric_limits<double>::quiet_NaN());
  for (int i = 0; i < n; ++i) {
    const int g = data.group(i);
    for (int t = g; t <= T; ++t) {
      Eigen::VectorXd xt(k);
      for (int j = 0; j < k; ++j) xt(j) = data.x_tv[j](i, t - 1);
      out(i, t - 1) = tau(config, g, t, xt, data.z_ti.row(i).transpose());
    }
  }
  return out;
}

namespace {

void set_constant_col(Eigen::MatrixXd& m, double v) { m.setConstant(v); }

}  // namespace

DgpConfig violation_preset(const std::string& name) {
  // Shared scaffold: one treated cohort vs never-treated, Gaussian
  // covariates, unit effects shifted for the treated.
  auto base2 = [](std::vector<int> groups, int T, int k, int l) {
    DgpConfig c = DgpConfig::make(4000, T, k, l, groups, 1);
    c.assignment.intercepts.setConstant(-0.2);
    c.x_process.rho = 0.8;
    c.x_process.drift = 0.1;
    c.outcome.eta_shift.setConstant(0.5);
    for (int t = 0; t < T; ++t) c.outcome.theta_t(t) = 0.5 * t;
    return c;
  };

  if (name == "clean") {
    DgpConfig c = base2({2}, 3, 1, 1);
    c.assignment.coef_x1.setConstant(0.4);
    c.assignment.coef_z.setConstant(0.4);
    c.x_process.innovation_shift.setConstant(0.3);
    set_constant_col(c.outcome.delta_t, 0.5);
    set_constant_col(c.outcome.beta_t, 0.8);
    c.treatment.base = 2.0;
    return c;
  }
  if (name == "violate_A_timeinvariant") {
    DgpConfig c = base2({2}, 2, 1, 1);
    c.assignment.coef_x1.setConstant(0.3);
    c.assignment.coef_z.setConstant(0.8);
    c.x_process.innovation_shift.setConstant(0.3);
    c.outcome.delta_t(0, 0) = 0.3;
    c.outcome.delta_t(0, 1) = 1.1;  // trend loads on Z
    set_constant_col(c.outcome.beta_t, 0.8);
    c.treatment.base = 2.0;
    return c;
  }
  if (name == "violate_B_levels") {
    DgpConfig c = base2({2}, 2, 1, 1);
    c.assignment.coef_x1.setConstant(0.8);
    c.assignment.coef_z.setConstant(0.3);
    c.x_process.innovation_shift.setConstant(0.3);
    set_constant_col(c.outcome.delta_t, 0.5);
    c.outcome.beta_t(0, 0) = 0.4;
    c.outcome.beta_t(0, 1) = 1.2;  // trend loads on the X level
    c.treatment.base = 2.0;
    return c;
  }
  if (name == "violate_C_nonlinear") {
    DgpConfig c = base2({2}, 2, 1, 1);
    c.assignment.coef_x1.setConstant(0.5);
    c.assignment.coef_z.setConstant(0.3);
    c.x_process.innovation_shift.setConstant(0.4);
    set_constant_col(c.outcome.delta_t, 0.5);
    set_constant_col(c.outcome.beta_t, 0.8);
    c.outcome.nonlin_amplitude = 0.8;
    c.treatment.base = 2.0;
    return c;
  }
  if (name == "violate_E_timevarying_beta") {
    // cohort at period 3: the pooled within regression mixes two
    // transitions whose change-loadings differ, while the cell estimators
    // only ever condition on (X_3, X_2, Z)
    DgpConfig c = base2({3}, 3, 1, 1);
    c.assignment.coef_x1.setConstant(0.4);
    c.assignment.coef_z.setConstant(0.4);
    c.x_process.innovation_shift.setConstant(0.5);
    set_constant_col(c.outcome.delta_t, 0.5);
    set_constant_col(c.outcome.beta_t, 0.0);
    c.outcome.dx_loading_t(0, 1) = 0.5;
    c.outcome.dx_loading_t(0, 2) = 1.8;  // change-loading varies over time
    c.treatment.base = 2.0;
    return c;
  }
  if (name == "negative_weights") {
    DgpConfig c = DgpConfig::make(4000, 2, 1, 0, {2}, 1);
    c.outcome.theta_t(1) = 0.5;
    c.x_process.rho = 1.0;
    c.x_process.innovation_sd = 0.5;
    c.x_process.innovation_shift.setConstant(2.0);
    set_constant_col(c.outcome.beta_t, 0.5);
    c.outcome.eta_shift.setConstant(0.5);
    c.treatment.base = 1.0;
    return c;
  }
  if (name == "weight_reversal") {
    DgpConfig c = DgpConfig::make(4000, 2, 1, 0, {2}, 1);
    c.outcome.theta_t(1) = 0.5;
    c.x_process.rho = 1.0;
    c.x_process.innovation_shift.setConstant(1.2);
    set_constant_col(c.outcome.beta_t, 0.5);
    c.outcome.eta_shift.setConstant(0.5);
    c.treatment.base = 1.0;
    return c;
  }
  if (name == "heterogeneous_att") {
    DgpConfig c = base2({2}, 2, 1, 1);
    c.assignment.coef_x1.setConstant(0.6);
    c.assignment.coef_z.setConstant(0.4);
    c.x_process.innovation_shift.setConstant(0.3);
    set_constant_col(c.outcome.delta_t, 0.5);
    set_constant_col(c.outcome.beta_t, 0.8);
    c.treatment.base = 1.0;
    c.treatment.coef_x.setConstant(0.8);
    c.treatment.coef_z.setConstant(0.5);
    return c;
  }
  fail(errc::unknown_preset, "unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() {
  return {"clean",
          "violate_A_timeinvariant",
          "violate_B_levels",
          "violate_C_nonlinear",
          "violate_E_timevarying_beta",
          "negative_weights",
          "weight_reversal",
          "heterogeneous_att"};
}

// ---------------------------------------------------------------------------
// JSON round trip

namespace {

using nlohmann::json;

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json mat_to_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(row);
  }
  return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v(i) = a[i].get<double>();
  return v;
}

Eigen::MatrixXd mat_from_json(const json& a) {
  const int rows = static_cast<int>(a.size());
  const int cols = rows > 0 ? static_cast<int>(a[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = a[i][j].get<double>();
  return m;
}

}  // namespace

std::string config_to_json(const DgpConfig& c) {
  json j;
  j["n_units"] = c.n_units;
  j["n_periods"] = c.n_periods;
  j["k"] = c.k;
  j["l"] = c.l;
  j["seed"] = c.seed;
  j["oracle_mc_draws"] = c.oracle_mc_draws;
  j["assignment"] = {{"groups", c.assignment.groups},
                     {"include_never", c.assignment.include_never},
                     {"intercepts", vec_to_json(c.assignment.intercepts)},
                     {"coef_x1", mat_to_json(c.assignment.coef_x1)},
                     {"coef_z", mat_to_json(c.assignment.coef_z)},
                     {"coef_eta", vec_to_json(c.assignment.coef_eta)}};
  j["x_process"] = {{"x1_mean", c.x_process.x1_mean},
                    {"x1_sd", c.x_process.x1_sd},
                    {"rho", c.x_process.rho},
                    {"drift", c.x_process.drift},
                    {"innovation_sd", c.x_process.innovation_sd},
                    {"innovation_shift",
                     vec_to_json(c.x_process.innovation_shift)}};
  j["outcome"] = {{"theta_t", vec_to_json(c.outcome.theta_t)},
                  {"delta_t", mat_to_json(c.outcome.delta_t)},
                  {"beta_t", mat_to_json(c.outcome.beta_t)},
                  {"dx_loading_t", mat_to_json(c.outcome.dx_loading_t)},
                  {"nonlin_amplitude", c.outcome.nonlin_amplitude},
                  {"eta_sd", c.outcome.eta_sd},
                  {"eta_shift", vec_to_json(c.outcome.eta_shift)},
                  {"noise_sd", c.outcome.noise_sd}};
  j["treatment"] = {{"base", c.treatment.base},
                    {"event_slope", c.treatment.event_slope},
                    {"coef_x", vec_to_json(c.treatment.coef_x)},
                    {"coef_z", vec_to_json(c.treatment.coef_z)}};
  return j.dump(2) + "\n";
}

DgpConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    fail(errc::invalid_value, std::string("bad config JSON: ") + e.what());
  }
  try {
    DgpConfig c = DgpConfig::make(
        j.at("n_units").get<int>(), j.at("n_periods").get<int>(),
        j.at("k").get<int>(), j.at("l").get<int>(),
        j.at("assignment").at("groups").get<std::vector<int>>(),
        j.at("seed").get<std::uint64_t>());
    c.oracle_mc_draws = j.value("oracle_mc_draws", 100000);
    const auto& a = j.at("assignment");
    c.assignment.include_never = a.value("include_never", true);
    c.assignment.intercepts = vec_from_json(a.at("intercepts"));
    c.assignment.coef_x1 = mat_from_json(a.at("coef_x1"));
    c.assignment.coef_z = mat_from_json(a.at("coef_z"));
    c.assignment.coef_eta = vec_from_json(a.at("coef_eta"));
    const auto& x = j.at("x_process");
    c.x_process.x1_mean = x.at("x1_mean").get<double>();
    c.x_process.x1_sd = x.at("x1_sd").get<double>();
    c.x_process.rho = x.at("rho").get<double>();
    c.x_process.drift = x.at("drift").get<double>();
    c.x_process.innovation_sd = x.at("innovation_sd").get<double>();
    c.x_process.innovation_shift = vec_from_json(x.at("innovation_shift"));
    const auto& o = j.at("outcome");
    c.outcome.theta_t = vec_from_json(o.at("theta_t"));
    c.outcome.delta_t = mat_from_json(o.at("delta_t"));
    c.outcome.beta_t = mat_from_json(o.at("beta_t"));
    c.outcome.dx_loading_t = mat_from_json(o.at("dx_loading_t"));
    c.outcome.nonlin_amplitude = o.at("nonlin_amplitude").get<double>();
    c.outcome.eta_sd = o.at("eta_sd").get<double>();
    c.outcome.eta_shift = vec_from_json(o.at("eta_shift"));
    c.outcome.noise_sd = o.at("noise_sd").get<double>();
    const auto& tr = j.at("treatment");
    c.treatment.base = tr.at("base").get<double>();
    c.treatment.event_slope = tr.at("event_slope").get<double>();
    c.treatment.coef_x = vec_from_json(tr.at("coef_x"));
    c.treatment.coef_z = vec_from_json(tr.at("coef_z"));
    return c;
  } catch (const error&) {
    throw;
  } catch (const std::exception& e) {
    fail(errc::invalid_value, std::string("bad config JSON: ") + e.what());
  }
}

std::string oracle_to_json(const DgpOracle& o) {
  json j;
  j["method"] = o.method;
  j["mc_draws"] = o.mc_draws;
  json cells = json::array();
  for (const auto& c : o.cells)
    cells.push_back(
        {{"g", c.g}, {"t", c.t}, {"att", c.att}, {"mc_se", c.mc_se}});
  j["att_gt"] = cells;
  j["att_overall"] = o.att_overall;
  j["att_overall_mc_se"] = o.att_overall_se;
  json es = json::array();
  for (const auto& c : o.event_study)
    es.push_back({{"e", c.g}, {"att", c.att}, {"mc_se", c.mc_se}});
  j["att_event_study"] = es;
  return j.dump(2) + "\n";
}

}  // namespace didforge
