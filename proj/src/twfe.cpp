#include "didforge/twfe.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "didforge/errors.hpp"
#include "didforge/linproj.hpp"

namespace didforge {

namespace {

void check_variation_in_d(const Eigen::VectorXd& d) {
  const double n1 = d.sum();
  if (n1 == 0.0 || n1 == static_cast<double>(d.size()))
    fail(errc::no_variation_in_d,
         "treatment indicator is constant across units");
}

}  // namespace

TwfeFit fit_two_period(const TwoPeriodView& view) {
  const int n = static_cast<int>(view.dy.size());
  check_variation_in_d(view.d);

  TwfeFit fit;
  fit.mode = TwfeMode::TwoPeriod;
  fit.n_units = n;
  fit.n_periods = 2;
  fit.p_treated = view.d.mean();

  ProjectionFit gproj = project(view.d, view.dx);
  fit.gamma = gproj.coefficients;
  fit.treat_projection = gproj.fitted;
  fit.alpha_den = gproj.residuals.squaredNorm() / n;
  if (fit.alpha_den <= 1e-12)
    fail(errc::no_residual_treatment_variation,
         "treatment is fully explained by the covariate changes");

  Eigen::MatrixXd joint(n, 1 + view.dx.cols());
  joint.col(0) = view.d;
  joint.rightCols(view.dx.cols()) = view.dx;
  ProjectionFit jfit = project(view.dy, joint);
  fit.alpha = jfit.coefficients(0);
  fit.beta = jfit.coefficients.tail(view.dx.cols());
  return fit;
}

TwfeFit fit_two_period(const PanelDataset& data) {
  return fit_two_period(two_period_view(data));
}

TwfeFit fit_multi_period(const PanelDataset& data) {
  const int n = data.n_units, T = data.n_periods, k = data.k();
  if (T < 2) fail(errc::invalid_value, "need at least two periods");

  DemeanedPanel dm = double_demean(data);
  const int rows = n * T;
  Eigen::VectorXd ydd(rows), ddd(rows);
  Eigen::MatrixXd xdd(rows, k);
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < T; ++t) {
      const int r = i * T + t;
      ydd(r) = dm.y.dd(i, t);
      ddd(r) = dm.d.dd(i, t);
      for (int j = 0; j < k; ++j) xdd(r, j) = dm.x[j].dd(i, t);
    }
  }

  TwfeFit fit;
  fit.mode = TwfeMode::MultiPeriod;
  fit.n_units = n;
  fit.n_periods = T;
  fit.period_treated_share = dm.d.period_mean;

  Eigen::VectorXd resid;
  if (k > 0) {
    ProjectionFit gproj = project(ddd, xdd);
    fit.gamma = gproj.coefficients;
    resid = gproj.residuals;
  } else {
    fit.gamma.resize(0);
    resid = ddd;
  }
  fit.alpha_den = resid.squaredNorm() / rows;
  if (fit.alpha_den <= 1e-12)
    fail(errc::no_residual_treatment_variation,
         "no residual treatment variation after the within transformation");
  fit.alpha = resid.dot(ydd) / resid.squaredNorm();

  if (k > 0) {
    Eigen::MatrixXd joint(rows, 1 + k);
    joint.col(0) = ddd;
    joint.rightCols(k) = xdd;
    ProjectionFit jfit = project(ydd, joint);
    fit.beta = jfit.coefficients.tail(k);
  } else {
    fit.beta.resize(0);
  }
  return fit;
}

double h_cell(const TwfeFit& fit, int g, int t) {
  const int T = fit.n_periods;
  const double ind = (t >= g) ? 1.0 : 0.0;
  const double unit_share = static_cast<double>(T - g + 1) / T;
  return ind - unit_share - fit.period_treated_share(t - 1) +
         fit.period_treated_share.mean();
}

namespace {

void summarize(TwfeWeights& w, bool causal_side_only) {
  std::map<std::tuple<int, int, int>, WeightCellSummary> cells;
  int n_causal = 0, n_neg = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& e : w.entries) {
    auto& c = cells[{e.group, e.period, e.side}];
    if (c.count == 0) {
      c.group = e.group;
      c.period = e.period;
      c.side = e.side;
      c.min = c.max = e.value;
    }
    c.count++;
    c.mean += e.value;
    c.min = std::min(c.min, e.value);
    c.max = std::max(c.max, e.value);
    c.share_negative += (e.value < 0.0);
    const bool causal = !causal_side_only || e.side == 1;
    if (causal) {
      ++n_causal;
      n_neg += (e.value < 0.0);
      lo = std::min(lo, e.value);
      hi = std::max(hi, e.value);
    }
  }
  for (auto& [key, c] : cells) {
    c.mean /= c.count;
    c.share_negative /= c.count;
    w.cells.push_back(c);
  }
  w.share_negative = n_causal > 0 ? static_cast<double>(n_neg) / n_causal : 0.0;
  w.min = n_causal > 0 ? lo : 0.0;
  w.max = n_causal > 0 ? hi : 0.0;
}

// Demeaned covariate projection values per (i,t), zero when k = 0.
Eigen::MatrixXd covariate_projection(const TwfeFit& fit,
                                     const DemeanedPanel& dm, int n, int T,
                                     int k) {
  Eigen::MatrixXd proj = Eigen::MatrixXd::Zero(n, T);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < T; ++t)
      for (int j = 0; j < k; ++j)
        proj(i, t) += dm.x[j].dd(i, t) * fit.gamma(j);
  return proj;
}

}  // namespace

TwfeWeights conditional_att_weights(const TwfeFit& fit,
                                    const PanelDataset& data) {
  TwfeWeights w;
  if (fit.mode == TwfeMode::TwoPeriod) {
    w.variant = WeightVariant::TwoPeriodConditionalAtt;
    double m = 0.0;
    int n1 = 0;
    for (int i = 0; i < data.n_units; ++i) {
      if (data.group(i) == 2) {
        m += 1.0 - fit.treat_projection(i);
        ++n1;
      }
    }
    m /= n1;
    for (int i = 0; i < data.n_units; ++i) {
      if (data.group(i) != 2) continue;
      w.entries.push_back(
          {i, 2, 2, 1, (1.0 - fit.treat_projection(i)) / m});
    }
    summarize(w, false);
    return w;
  }

  w.variant = WeightVariant::MultiPeriodConditionalAtt;
  const int n = data.n_units, T = data.n_periods, k = data.k();
  DemeanedPanel dm = double_demean(data);
  Eigen::MatrixXd proj = covariate_projection(fit, dm, n, T, k);
  const double denom = T * fit.alpha_den;
  for (int i = 0; i < n; ++i) {
    const int g = data.group(i);
    const double pg = data.p_g(g);
    for (int t = 1; t <= T; ++t) {
      const double value = (h_cell(fit, g, t) - proj(i, t - 1)) * pg / denom;
      w.entries.push_back({i, g, t, (g <= T && t >= g) ? 1 : 0, value});
    }
  }
  // the causal-interpretation census covers post-treatment cells only
  summarize(w, true);
  return w;
}

TwfeWeights implicit_weights(const TwfeFit& fit, const PanelDataset& data) {
  TwfeWeights w;
  if (fit.mode == TwfeMode::TwoPeriod) {
    w.variant = WeightVariant::TwoPeriodImplicit;
    const double p = fit.p_treated;
    for (int i = 0; i < data.n_units; ++i) {
      const double lhat = fit.treat_projection(i);
      if (data.group(i) == 2)
        w.entries.push_back({i, 2, 2, 1, p * (1.0 - lhat) / fit.alpha_den});
      else
        w.entries.push_back({i, 2, 2, 0, (1.0 - p) * lhat / fit.alpha_den});
    }
    summarize(w, false);
    return w;
  }

  w.variant = WeightVariant::MultiPeriodImplicit;
  const int n = data.n_units, T = data.n_periods, k = data.k();
  DemeanedPanel dm = double_demean(data);
  Eigen::MatrixXd proj = covariate_projection(fit, dm, n, T, k);

  // Periods before the first adoption have no (g,t) cell to carry their
  // comparison term, but the residualized treatment still loads on them.
  // They enter as their own comparison entries (group 0), which keeps the
  // weighted contrast equal to alpha on any staggered panel, not only when
  // adoption starts in period 2.
  const int first_g = data.treated_groups().front();
  for (int t = 2; t < first_g; ++t)
    for (int i = 0; i < n; ++i)
      w.entries.push_back({i, 0, t, 2,
                           (dm.d.dd(i, t - 1) - proj(i, t - 1)) /
                               (T * fit.alpha_den)});

  for (int g : data.treated_groups()) {
    const double factor = (static_cast<double>(T - g + 1) / T) * data.p_g(g) /
                          (data.pbar_g(g) * fit.alpha_den);
    for (int t = g; t <= T; ++t) {
      const double h = h_cell(fit, g, t);
      const double p0 = 1.0 - fit.period_treated_share(t - 1);
      const double odds0 = p0 / (1.0 - p0);
      for (int i = 0; i < n; ++i) {
        if (data.group(i) == g) {
          w.entries.push_back({i, g, t, 1, (h - proj(i, t - 1)) * factor});
        } else if (data.group(i) > t) {  // D_it = 0
          const double v =
              -(dm.d.dd(i, t - 1) - proj(i, t - 1)) * factor * odds0;
          w.entries.push_back({i, g, t, 0, v});
        }
      }
    }
  }
  summarize(w, false);
  return w;
}

double weighted_outcome_contrast(const TwfeWeights& weights,
                                 const PanelDataset& data) {
  if (weights.variant == WeightVariant::TwoPeriodImplicit) {
    double treated = 0, comparison = 0;
    int n1 = 0, n0 = 0;
    for (const auto& e : weights.entries) {
      const double dy = data.outcome(e.unit, 1) - data.outcome(e.unit, 0);
      if (e.side == 1) {
        treated += e.value * dy;
        ++n1;
      } else {
        comparison += e.value * dy;
        ++n0;
      }
    }
    return treated / n1 - comparison / n0;
  }
  if (weights.variant != WeightVariant::MultiPeriodImplicit)
    fail(errc::invalid_value,
         "weighted outcome contrast is defined for implicit weights");

  const int T = data.n_periods;
  std::map<std::pair<int, int>, std::array<double, 4>> cells;
  double pre_adoption = 0.0;
  for (const auto& e : weights.entries) {
    const double path = data.outcome(e.unit, e.period - 1) -
                        data.outcome(e.unit, 0);  // Y_t - Y_1
    if (e.side == 2) {
      pre_adoption += e.value * path / data.n_units;
      continue;
    }
    auto& c = cells[{e.group, e.period}];
    if (e.side == 1) {
      c[0] += e.value * path;
      c[1] += 1;
    } else {
      c[2] += e.value * path;
      c[3] += 1;
    }
  }
  double alpha = pre_adoption;
  for (const auto& [cell, c] : cells) {
    const auto [g, t] = cell;
    const double treated = c[1] > 0 ? c[0] / c[1] : 0.0;
    const double comparison = c[3] > 0 ? c[2] / c[3] : 0.0;
    alpha += (treated - comparison) * data.pbar_g(g) / (T - g + 1);
  }
  return alpha;
}

ReferenceConstants estimate_reference_constants(const PanelDataset& data) {
  const int n = data.n_units, T = data.n_periods, k = data.k();
  std::vector<int> never;
  for (int i = 0; i < n; ++i)
    if (data.group(i) > T) never.push_back(i);
  if (never.empty())
    fail(errc::no_comparison,
         "no never-treated units to estimate reference constants from");

  const int rows = static_cast<int>(never.size()) * T;
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(rows, T + k);
  Eigen::VectorXd y(rows);
  int r = 0;
  for (int i : never) {
    for (int t = 0; t < T; ++t, ++r) {
      y(r) = data.outcome(i, t);
      design(r, t) = 1.0;  // period dummies, no separate intercept
      for (int j = 0; j < k; ++j) design(r, T + j) = data.x_tv[j](i, t);
    }
  }
  ProjectionFit fit = project(y, design);
  ReferenceConstants ref;
  ref.theta_t = fit.coefficients.head(T);
  ref.lambda0 = fit.coefficients.tail(k);
  return ref;
}

namespace {

NegativeWeightCensus census_from(
    const std::vector<std::tuple<int, int, double>>& cells,  // (unit,t,weight)
    const PanelDataset& data, TwfeMode mode,
    const Eigen::MatrixXd* proj_x /* multi: demeaned x values not needed */) {
  (void)proj_x;
  NegativeWeightCensus census;
  const int k = data.k(), l = data.l();
  census.profile_x = Eigen::VectorXd::Zero(k);
  census.profile_z = Eigen::VectorXd::Zero(l);
  for (const auto& [i, t, weight] : cells) {
    census.n_cells++;
    if (std::abs(weight) <= 1e-6) census.n_near_zero++;
    if (weight < 0.0) {
      census.n_negative++;
      for (int j = 0; j < k; ++j) {
        const double v = mode == TwfeMode::TwoPeriod
                             ? data.x_tv[j](i, 1) - data.x_tv[j](i, 0)
                             : data.x_tv[j](i, t - 1);
        census.profile_x(j) += v;
      }
      for (int j = 0; j < l; ++j) census.profile_z(j) += data.z_ti(i, j);
    }
  }
  if (census.n_negative > 0) {
    census.profile_x /= census.n_negative;
    census.profile_z /= census.n_negative;
  }
  census.share_negative =
      census.n_cells > 0
          ? static_cast<double>(census.n_negative) / census.n_cells
          : 0.0;
  return census;
}

}  // namespace

DecompositionReport decompose(const TwfeFit& fit, const PanelDataset& data,
                              const Eigen::MatrixXd* oracle_cell_att,
                              const ReferenceConstants* ref) {
  DecompositionReport rep;
  rep.mode = fit.mode;
  rep.alpha = fit.alpha;

  if (fit.mode == TwfeMode::TwoPeriod) {
    TwoPeriodView view = two_period_view(data);
    std::vector<int> treated, untreated;
    for (int i = 0; i < data.n_units; ++i)
      (view.d(i) > 0.5 ? treated : untreated).push_back(i);

    ProjectionFit l1 = project(view.dy, view.dx, &treated);
    ProjectionFit l0 = project(view.dy, view.dx, &untreated);
    TwfeWeights w = conditional_att_weights(fit, data);

    std::vector<std::tuple<int, int, double>> cells;
    double recon = 0, oracle_sum = 0;
    for (const auto& e : w.entries) {
      const double value = l1.fitted(e.unit) - l0.fitted(e.unit);
      const double contribution = e.value * value / treated.size();
      rep.weighted_conditional_terms.push_back(
          {e.unit, e.group, e.period, e.value, value, contribution});
      recon += contribution;
      cells.emplace_back(e.unit, e.period, e.value);
      if (oracle_cell_att)
        oracle_sum += e.value * (*oracle_cell_att)(e.unit, 1) / treated.size();
      rep.reversal_ranking.push_back(
          {e.unit, e.group, e.period, fit.treat_projection(e.unit), e.value});
    }
    rep.reconstruction = recon;
    rep.census = census_from(cells, data, fit.mode, nullptr);
    std::sort(rep.reversal_ranking.begin(), rep.reversal_ranking.end(),
              [](const ReversalRow& a, const ReversalRow& b) {
                return a.treat_projection > b.treat_projection;
              });
    // w is affine in the treatment projection; recover slope and intercept
    // by least squares on the treated cells.  Without covariates the
    // projection is constant and the relationship is degenerate.
    Eigen::MatrixXd xr(rep.reversal_ranking.size(), 2);
    Eigen::VectorXd yr(rep.reversal_ranking.size());
    double proj_lo = std::numeric_limits<double>::infinity(), proj_hi = -proj_lo;
    for (std::size_t r = 0; r < rep.reversal_ranking.size(); ++r) {
      xr(r, 0) = 1.0;
      xr(r, 1) = rep.reversal_ranking[r].treat_projection;
      yr(r) = rep.reversal_ranking[r].weight;
      proj_lo = std::min(proj_lo, xr(r, 1));
      proj_hi = std::max(proj_hi, xr(r, 1));
    }
    if (proj_hi - proj_lo > 1e-12) {
      ProjectionFit affine = project(yr, xr);
      rep.reversal_intercept = affine.coefficients(0);
      rep.reversal_slope = affine.coefficients(1);
    } else {
      rep.reversal_intercept = yr.mean();
      rep.reversal_slope = 0.0;
    }
    if (oracle_cell_att) {
      rep.has_oracle = true;
      rep.oracle_weighted_att = oracle_sum;
      rep.oracle_bias = fit.alpha - oracle_sum;
    }
    return rep;
  }

  // multi-period
  const int n = data.n_units, T = data.n_periods, k = data.k();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(T);
  Eigen::VectorXd lambda0 = Eigen::VectorXd::Zero(k);
  if (ref) {
    theta = ref->theta_t;
    lambda0 = ref->lambda0;
  }

  TwfeWeights w = conditional_att_weights(fit, data);
  std::vector<int> group_count(T + 2, 0);
  for (int i = 0; i < n; ++i) group_count[data.group(i)]++;

  DemeanedPanel dm = double_demean(data);
  Eigen::MatrixXd proj = covariate_projection(fit, dm, n, T, k);

  double recon = 0, oracle_sum = 0;
  std::vector<std::tuple<int, int, double>> post_cells;
  for (const auto& e : w.entries) {
    const int i = e.unit, g = e.group, t = e.period;
    const int base = std::min(g - 1, T);  // never-treated reference period T
    double path = data.outcome(i, t - 1) - data.outcome(i, base - 1);
    double reference = theta(t - 1) - theta(base - 1);
    for (int j = 0; j < k; ++j)
      reference +=
          (data.x_tv[j](i, t - 1) - data.x_tv[j](i, base - 1)) * lambda0(j);
    const double value = path - reference;
    const double contribution = e.value * value / group_count[g];
    recon += contribution;
    if (e.side == 1) {
      rep.weighted_conditional_terms.push_back(
          {i, g, t, e.value, value, contribution});
      post_cells.emplace_back(i, t, e.value);
      rep.reversal_ranking.push_back({i, g, t, proj(i, t - 1), e.value});
      if (oracle_cell_att)
        oracle_sum += e.value * (*oracle_cell_att)(i, t - 1) / group_count[g];
    }
  }
  rep.reconstruction = recon;
  rep.census = census_from(post_cells, data, fit.mode, nullptr);
  std::sort(rep.reversal_ranking.begin(), rep.reversal_ranking.end(),
            [](const ReversalRow& a, const ReversalRow& b) {
              return a.treat_projection > b.treat_projection;
            });
  if (oracle_cell_att) {
    rep.has_oracle = true;
    rep.oracle_weighted_att = oracle_sum;
    rep.oracle_bias = fit.alpha - oracle_sum;
  }
  return rep;
}

}  // namespace didforge
