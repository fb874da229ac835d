#include "didforge/gtatt.hpp"

#include <algorithm>
#include <cmath>

#include "didforge/errors.hpp"
#include "didforge/linproj.hpp"
#include "didforge/parallel.hpp"

namespace didforge {

const char* method_name(Method m) {
  switch (m) {
    case Method::RA: return "ra";
    case Method::IPW: return "ipw";
    case Method::DR: return "dr";
  }
  return "?";
}

namespace {

struct CellFrame {
  int g = 0, t = 0, base = 0;
  std::vector<int> treated, comparison, subsample;
  Eigen::VectorXd dy;  // Y_t - Y_base, all units
};

CellFrame build_frame(const PanelDataset& data, int g, int t,
                      const AttOptions& opts) {
  const int T = data.n_periods;
  if (t < g || g < 2 || t > T)
    fail(errc::invalid_value, "cell requires 2 <= g <= t <= T");
  CellFrame f;
  f.g = g;
  f.t = t;
  f.base = opts.base_period == BasePeriod::Varying ? g - 1 : 1;
  for (int i = 0; i < data.n_units; ++i) {
    if (data.group(i) == g) {
      f.treated.push_back(i);
    } else if (opts.comparison == ComparisonGroup::NotYetTreated
                   ? data.group(i) > t
                   : data.group(i) > T) {
      f.comparison.push_back(i);
    }
  }
  f.subsample = f.treated;
  f.subsample.insert(f.subsample.end(), f.comparison.begin(),
                     f.comparison.end());
  std::sort(f.subsample.begin(), f.subsample.end());
  f.dy = data.outcome.col(t - 1) - data.outcome.col(f.base - 1);
  if (f.treated.empty())
    fail(errc::invalid_value, "no units in group " + std::to_string(g));
  return f;
}

// Nuisance design for a cell: intercept, covariate change since the base
// period, base-period level, optionally Z.
Eigen::MatrixXd build_design(const PanelDataset& data, int t, int base,
                             bool include_z) {
  const int n = data.n_units, k = data.k(), l = include_z ? data.l() : 0;
  Eigen::MatrixXd x(n, 1 + 2 * k + l);
  x.col(0).setOnes();
  for (int j = 0; j < k; ++j) {
    x.col(1 + j) = data.x_tv[j].col(t - 1) - data.x_tv[j].col(base - 1);
    x.col(1 + k + j) = data.x_tv[j].col(base - 1);
  }
  for (int j = 0; j < l; ++j) x.col(1 + 2 * k + j) = data.z_ti.col(j);
  return x;
}

struct LinkEval {
  double p = 0, score_factor = 0, info_weight = 0, odds = 0, odds_deriv = 0;
};

LinkEval eval_link(GpsLink link, double eta, double y) {
  LinkEval e;
  if (link == GpsLink::Logit) {
    const double c = std::clamp(eta, -30.0, 30.0);
    e.p = 1.0 / (1.0 + std::exp(-c));
    e.score_factor = y - e.p;
    e.info_weight = e.p * (1.0 - e.p);
    e.odds = std::exp(c);
    e.odds_deriv = e.odds;
  } else {
    const double c = std::clamp(eta, -8.0, 8.0);
    const double phi = std::exp(-0.5 * c * c) / std::sqrt(2.0 * M_PI);
    double p = 0.5 * std::erfc(-c / std::sqrt(2.0));
    p = std::clamp(p, 1e-12, 1.0 - 1e-12);
    e.p = p;
    e.score_factor = (y - p) * phi / (p * (1.0 - p));
    e.info_weight = phi * phi / (p * (1.0 - p));
    e.odds = p / (1.0 - p);
    e.odds_deriv = phi / ((1.0 - p) * (1.0 - p));
  }
  return e;
}

double log_likelihood(GpsLink link, const Eigen::VectorXd& eta,
                      const std::vector<int>& rows,
                      const std::vector<char>& y) {
  double ll = 0;
  for (int i : rows) {
    const double p = eval_link(link, eta(i), 0).p;
    const double pc = std::clamp(p, 1e-15, 1.0 - 1e-15);
    ll += y[i] ? std::log(pc) : std::log(1.0 - pc);
  }
  return ll;
}

void check_design_rank(const Eigen::MatrixXd& design,
                       const std::vector<int>& rows, errc code) {
  Eigen::MatrixXd xs(rows.size(), design.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) xs.row(r) = design.row(rows[r]);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xs);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < design.cols())
    fail(code, "nuisance design is rank deficient on its subsample");
}

}  // namespace

GpsFit fit_gps(const PanelDataset& data, int g, int t,
               const AttOptions& opts) {
  CellFrame f = build_frame(data, g, t, opts);
  if (f.comparison.empty())
    fail(errc::no_comparison, "no comparison units for (" + std::to_string(g) +
                                  "," + std::to_string(t) + ")");
  const Eigen::MatrixXd design =
      build_design(data, t, f.base, opts.gps_include_z);
  check_design_rank(design, f.subsample, errc::rank_deficient);
  const int p = static_cast<int>(design.cols());
  const int n_sub = static_cast<int>(f.subsample.size());

  std::vector<char> y(data.n_units, 0);
  for (int i : f.treated) y[i] = 1;

  Eigen::VectorXd phi = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(data.n_units);
  double ll = log_likelihood(opts.link, eta, f.subsample, y);
  bool converged = false;
  int iter = 0;
  const int max_iter = 100;

  for (; iter < max_iter; ++iter) {
    Eigen::VectorXd score = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(p, p);
    for (int i : f.subsample) {
      const LinkEval le = eval_link(opts.link, eta(i), y[i]);
      score += le.score_factor * design.row(i).transpose();
      info.selfadjointView<Eigen::Lower>().rankUpdate(
          design.row(i).transpose(), le.info_weight);
    }
    score /= n_sub;
    info = Eigen::MatrixXd(info.selfadjointView<Eigen::Lower>()) / n_sub;
    if (score.cwiseAbs().maxCoeff() < 1e-11) {
      converged = true;
      break;
    }
    Eigen::VectorXd step = info.ldlt().solve(score);
    double lambda = 1.0;
    while (lambda > 1e-10) {
      Eigen::VectorXd cand = phi + lambda * step;
      Eigen::VectorXd eta_cand = design * cand;
      const double ll_cand = log_likelihood(opts.link, eta_cand, f.subsample, y);
      if (ll_cand >= ll - 1e-14) {
        phi = cand;
        eta = eta_cand;
        ll = ll_cand;
        break;
      }
      lambda *= 0.5;
    }
    if (phi.cwiseAbs().maxCoeff() > 1e5) break;
  }

  // Separation: when the fitted index strictly splits the classes the
  // likelihood is unbounded and any apparent convergence is saturation.
  {
    double min_treated = std::numeric_limits<double>::infinity();
    double max_comparison = -std::numeric_limits<double>::infinity();
    for (int i : f.treated) min_treated = std::min(min_treated, eta(i));
    for (int i : f.comparison) max_comparison = std::max(max_comparison, eta(i));
    if (min_treated > max_comparison ||
        (!converged && phi.cwiseAbs().maxCoeff() > 1e4))
      fail(errc::perfect_separation,
           "generalized propensity score is separated on (" +
               std::to_string(g) + "," + std::to_string(t) + ")");
  }

  GpsFit fit;
  fit.g = g;
  fit.t = t;
  fit.link = opts.link;
  fit.coefficients = phi;
  fit.subsample = f.subsample;
  fit.fitted.resize(n_sub);
  fit.converged = converged;
  fit.iterations = iter;
  double lo = 1.0, hi = 0.0;
  for (int r = 0; r < n_sub; ++r) {
    const double pr = eval_link(opts.link, eta(f.subsample[r]), 0).p;
    fit.fitted(r) = pr;
    lo = std::min(lo, pr);
    hi = std::max(hi, pr);
  }
  fit.min_fitted = lo;
  fit.max_fitted = hi;
  return fit;
}

namespace {

// Shared influence-building context for one (g,t) cell.  All sums are
// normalized by the full sample size n so the pieces compose directly.
struct CellEstimate {
  double estimate = 0;
  Eigen::VectorXd influence;
};

Eigen::VectorXd center(Eigen::VectorXd v) {
  v.array() -= v.mean();
  return v;
}

// Regression-adjustment moment and influence given the fitted OR
// coefficients; shared by RA and (with e from the DR residual) the DR
// treated leg.
CellEstimate ra_estimate(const CellFrame& f, const Eigen::MatrixXd& design,
                         const Eigen::VectorXd& lambda, int n) {
  const Eigen::VectorXd e = f.dy - design * lambda;
  const double p_t = static_cast<double>(f.treated.size()) / n;
  double theta = 0;
  for (int i : f.treated) theta += e(i);
  theta /= f.treated.size();

  // correction for the estimated OR coefficients
  const int p = static_cast<int>(design.cols());
  Eigen::MatrixXd m_c = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd a_t = Eigen::VectorXd::Zero(p);
  for (int i : f.comparison)
    m_c.selfadjointView<Eigen::Lower>().rankUpdate(design.row(i).transpose(),
                                                   1.0);
  for (int i : f.treated) a_t += design.row(i).transpose();
  m_c = Eigen::MatrixXd(m_c.selfadjointView<Eigen::Lower>()) / n;
  a_t /= n;
  const Eigen::VectorXd a = m_c.ldlt().solve(a_t) / p_t;

  CellEstimate out;
  out.estimate = theta;
  out.influence = Eigen::VectorXd::Zero(n);
  for (int i : f.treated) out.influence(i) += (e(i) - theta) / p_t;
  for (int i : f.comparison)
    out.influence(i) -= a.dot(design.row(i)) * e(i);
  out.influence = center(std::move(out.influence));
  return out;
}

void check_overlap(const CellFrame& f, const GpsFit& gps, double eps_trim) {
  for (std::size_t r = 0; r < gps.subsample.size(); ++r) {
    const int i = gps.subsample[r];
    const bool is_comparison =
        std::find(f.comparison.begin(), f.comparison.end(), i) !=
        f.comparison.end();
    if (is_comparison && gps.fitted(r) > 1.0 - eps_trim)
      fail(errc::overlap_violation,
           "fitted propensity " + std::to_string(gps.fitted(r)) +
               " exceeds the overlap trim on a comparison unit");
  }
}

// Weighted comparison-leg moment with its propensity correction; `resp` is
// the response the weights are applied to (dy for IPW, OR residual for DR).
struct ComparisonLeg {
  double theta_c = 0;
  Eigen::VectorXd influence;          // main + gps-correction, uncentered
  Eigen::VectorXd odds;               // per unit (comparison rows only)
  double ebar = 0;                    // E_n[C * odds]
  Eigen::VectorXd a_co;               // E_n[C * odds * x]
};

ComparisonLeg comparison_leg(const CellFrame& f,
                             const Eigen::MatrixXd& gps_design,
                             const GpsFit& gps, const Eigen::VectorXd& resp,
                             int n, GpsLink link,
                             const std::vector<char>& is_treated) {
  const int p = static_cast<int>(gps_design.cols());
  const Eigen::VectorXd eta = gps_design * gps.coefficients;

  ComparisonLeg leg;
  leg.odds = Eigen::VectorXd::Zero(n);
  leg.a_co = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd a_codx = Eigen::VectorXd::Zero(p);  // E_n[C o' resp x]
  Eigen::VectorXd a_cod = Eigen::VectorXd::Zero(p);   // E_n[C o' x]
  double num = 0;
  for (int i : f.comparison) {
    const LinkEval le = eval_link(link, eta(i), 0);
    leg.odds(i) = le.odds;
    leg.ebar += le.odds;
    num += le.odds * resp(i);
    a_codx += le.odds_deriv * resp(i) * gps_design.row(i).transpose();
    a_cod += le.odds_deriv * gps_design.row(i).transpose();
    leg.a_co += le.odds * gps_design.row(i).transpose();
  }
  leg.ebar /= n;
  num /= n;
  a_codx /= n;
  a_cod /= n;
  leg.a_co /= n;
  leg.theta_c = num / leg.ebar;

  // d theta_c / d phi, premultiplied by the inverse information
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(p, p);
  for (std::size_t r = 0; r < gps.subsample.size(); ++r) {
    const int i = gps.subsample[r];
    const LinkEval le = eval_link(link, eta(i), 0);
    info.selfadjointView<Eigen::Lower>().rankUpdate(
        gps_design.row(i).transpose(), le.info_weight);
  }
  info = Eigen::MatrixXd(info.selfadjointView<Eigen::Lower>()) / n;
  const Eigen::VectorXd r_phi = (a_codx - leg.theta_c * a_cod) / leg.ebar;
  const Eigen::VectorXd c_psi = info.ldlt().solve(r_phi);

  leg.influence = Eigen::VectorXd::Zero(n);
  for (int i : f.comparison)
    leg.influence(i) -= (leg.odds(i) / leg.ebar) * (resp(i) - leg.theta_c);
  for (std::size_t r = 0; r < gps.subsample.size(); ++r) {
    const int i = gps.subsample[r];
    const LinkEval le = eval_link(link, eta(i), is_treated[i] ? 1.0 : 0.0);
    leg.influence(i) -= c_psi.dot(gps_design.row(i)) * le.score_factor;
  }
  return leg;
}

}  // namespace

GroupTimeResult att_gt_ra(const PanelDataset& data, int g, int t,
                          const AttOptions& opts) {
  CellFrame f = build_frame(data, g, t, opts);
  if (f.comparison.empty())
    fail(errc::empty_comparison, "no comparison units for (" +
                                     std::to_string(g) + "," +
                                     std::to_string(t) + ")");
  const Eigen::MatrixXd design =
      build_design(data, t, f.base, opts.or_include_z);
  ProjectionFit or_fit;
  try {
    or_fit = project(f.dy, design, &f.comparison);
  } catch (const error& e) {
    if (e.code() == errc::rank_deficient)
      fail(errc::rank_deficient_outcome_model, e.what());
    throw;
  }
  CellEstimate est =
      ra_estimate(f, design, or_fit.coefficients, data.n_units);

  GroupTimeResult res;
  res.g = g;
  res.t = t;
  res.method = Method::RA;
  res.estimate = est.estimate;
  res.n_treated = static_cast<int>(f.treated.size());
  res.n_comparison = static_cast<int>(f.comparison.size());
  res.influence = std::move(est.influence);
  res.or_coef = or_fit.coefficients;
  res.options = opts;
  return res;
}

GroupTimeResult att_gt_ipw(const PanelDataset& data, int g, int t,
                           const GpsFit& gps, const AttOptions& opts) {
  CellFrame f = build_frame(data, g, t, opts);
  if (f.comparison.empty())
    fail(errc::empty_comparison, "no comparison units");
  check_overlap(f, gps, opts.eps_trim);
  const Eigen::MatrixXd gps_design =
      build_design(data, t, f.base, opts.gps_include_z);
  std::vector<char> is_treated(data.n_units, 0);
  for (int i : f.treated) is_treated[i] = 1;

  const int n = data.n_units;
  const double p_t = static_cast<double>(f.treated.size()) / n;
  double theta_t = 0;
  for (int i : f.treated) theta_t += f.dy(i);
  theta_t /= f.treated.size();

  ComparisonLeg leg =
      comparison_leg(f, gps_design, gps, f.dy, n, opts.link, is_treated);

  GroupTimeResult res;
  res.g = g;
  res.t = t;
  res.method = Method::IPW;
  res.estimate = theta_t - leg.theta_c;
  res.n_treated = static_cast<int>(f.treated.size());
  res.n_comparison = static_cast<int>(f.comparison.size());
  Eigen::VectorXd infl = leg.influence;
  for (int i : f.treated) infl(i) += (f.dy(i) - theta_t) / p_t;
  res.influence = center(std::move(infl));
  res.gps_coef = gps.coefficients;
  res.gps_min = gps.min_fitted;
  res.gps_max = gps.max_fitted;
  res.options = opts;
  return res;
}

GroupTimeResult att_gt_dr(const PanelDataset& data, int g, int t,
                          const AttOptions& opts) {
  CellFrame f = build_frame(data, g, t, opts);
  if (f.comparison.empty())
    fail(errc::empty_comparison, "no comparison units");
  const Eigen::MatrixXd or_design =
      build_design(data, t, f.base, opts.or_include_z);
  ProjectionFit or_fit;
  try {
    or_fit = project(f.dy, or_design, &f.comparison);
  } catch (const error& e) {
    if (e.code() == errc::rank_deficient)
      fail(errc::rank_deficient_outcome_model, e.what());
    throw;
  }
  GpsFit gps = fit_gps(data, g, t, opts);
  check_overlap(f, gps, opts.eps_trim);
  const Eigen::MatrixXd gps_design =
      build_design(data, t, f.base, opts.gps_include_z);
  std::vector<char> is_treated(data.n_units, 0);
  for (int i : f.treated) is_treated[i] = 1;

  const int n = data.n_units;
  const double p_t = static_cast<double>(f.treated.size()) / n;
  const Eigen::VectorXd e = f.dy - or_design * or_fit.coefficients;

  double theta_t = 0;
  for (int i : f.treated) theta_t += e(i);
  theta_t /= f.treated.size();

  ComparisonLeg leg =
      comparison_leg(f, gps_design, gps, e, n, opts.link, is_treated);

  // correction for the estimated OR coefficients, entering both legs
  const int p = static_cast<int>(or_design.cols());
  Eigen::MatrixXd m_c = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd a_t = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd a_co = Eigen::VectorXd::Zero(p);
  for (int i : f.comparison) {
    m_c.selfadjointView<Eigen::Lower>().rankUpdate(or_design.row(i).transpose(),
                                                   1.0);
    a_co += leg.odds(i) * or_design.row(i).transpose();
  }
  for (int i : f.treated) a_t += or_design.row(i).transpose();
  m_c = Eigen::MatrixXd(m_c.selfadjointView<Eigen::Lower>()) / n;
  a_t /= n;
  a_co /= n;
  const Eigen::VectorXd b =
      m_c.ldlt().solve(a_co / leg.ebar - a_t / p_t);

  Eigen::VectorXd infl = leg.influence;
  for (int i : f.treated) infl(i) += (e(i) - theta_t) / p_t;
  for (int i : f.comparison) infl(i) += b.dot(or_design.row(i)) * e(i);

  GroupTimeResult res;
  res.g = g;
  res.t = t;
  res.method = Method::DR;
  res.estimate = theta_t - leg.theta_c;
  res.n_treated = static_cast<int>(f.treated.size());
  res.n_comparison = static_cast<int>(f.comparison.size());
  res.influence = center(std::move(infl));
  res.or_coef = or_fit.coefficients;
  res.gps_coef = gps.coefficients;
  res.gps_min = gps.min_fitted;
  res.gps_max = gps.max_fitted;
  res.options = opts;
  return res;
}

std::vector<GroupTimeResult> estimate_all(const PanelDataset& data,
                                          Method method,
                                          const AttOptions& opts) {
  std::vector<std::pair<int, int>> cells;
  for (int g : data.treated_groups())
    for (int t = g; t <= data.n_periods; ++t) cells.emplace_back(g, t);

  std::vector<GroupTimeResult> results(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  const int nt = resolve_threads(opts.threads);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nt)
#endif
  for (int c = 0; c < static_cast<int>(cells.size()); ++c) {
    try {
      const auto [g, t] = cells[c];
      switch (method) {
        case Method::RA:
          results[c] = att_gt_ra(data, g, t, opts);
          break;
        case Method::IPW:
          results[c] = att_gt_ipw(data, g, t, fit_gps(data, g, t, opts), opts);
          break;
        case Method::DR:
          results[c] = att_gt_dr(data, g, t, opts);
          break;
      }
    } catch (...) {
      errors[c] = std::current_exception();
    }
  }
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);
  return results;
}

namespace {

const GroupTimeResult* find_cell(const std::vector<GroupTimeResult>& results,
                                 int g, int t) {
  for (const auto& r : results)
    if (r.g == g && r.t == t) return &r;
  return nullptr;
}

}  // namespace

AggregateResult aggregate_overall(const std::vector<GroupTimeResult>& results,
                                  const PanelDataset& data) {
  const int n = data.n_units, T = data.n_periods;
  const auto groups = data.treated_groups();
  const double p_ever = static_cast<double>(data.n_ever_treated()) / n;

  AggregateResult agg;
  agg.kind = AggregateResult::Kind::Overall;
  agg.influence = Eigen::VectorXd::Zero(n);

  for (int g : groups) {
    const double pbar = data.pbar_g(g);
    double group_mean = 0;
    for (int t = g; t <= T; ++t) {
      const GroupTimeResult* cell = find_cell(results, g, t);
      if (!cell)
        fail(errc::missing_cell_result,
             "aggregation requires cell (" + std::to_string(g) + "," +
                 std::to_string(t) + ")");
      const double w = pbar / (T - g + 1);
      agg.estimate += w * cell->estimate;
      agg.influence += w * cell->influence;
      agg.component_weights.emplace_back(g, t, w);
      group_mean += cell->estimate / (T - g + 1);
    }
    // group shares are estimated from the sample
    for (int i = 0; i < n; ++i) {
      const double ever = data.group(i) <= T ? 1.0 : 0.0;
      const double ind = data.group(i) == g ? 1.0 : 0.0;
      agg.influence(i) += group_mean * (ind - pbar * ever) / p_ever;
    }
  }
  agg.influence.array() -= agg.influence.mean();
  return agg;
}

AggregateResult aggregate_event_study(
    const std::vector<GroupTimeResult>& results, const PanelDataset& data,
    int e) {
  const int n = data.n_units, T = data.n_periods;
  std::vector<int> eligible;
  int n_elig = 0;
  for (int g : data.treated_groups()) {
    if (g + e >= 2 && g + e <= T) {
      eligible.push_back(g);
      for (int i = 0; i < n; ++i) n_elig += (data.group(i) == g);
    }
  }
  if (eligible.empty())
    fail(errc::no_eligible_group,
         "no group observed at event time " + std::to_string(e));
  const double p_elig = static_cast<double>(n_elig) / n;

  AggregateResult agg;
  agg.kind = AggregateResult::Kind::EventStudy;
  agg.event_time = e;
  agg.influence = Eigen::VectorXd::Zero(n);
  for (int g : eligible) {
    const GroupTimeResult* cell = find_cell(results, g, g + e);
    if (!cell)
      fail(errc::missing_cell_result,
           "aggregation requires cell (" + std::to_string(g) + "," +
               std::to_string(g + e) + ")");
    int n_g = 0;
    for (int i = 0; i < n; ++i) n_g += (data.group(i) == g);
    const double w = static_cast<double>(n_g) / n_elig;
    agg.estimate += w * cell->estimate;
    agg.influence += w * cell->influence;
    agg.component_weights.emplace_back(g, g + e, w);
    for (int i = 0; i < n; ++i) {
      const double in_elig =
          std::find(eligible.begin(), eligible.end(), data.group(i)) !=
                  eligible.end()
              ? 1.0
              : 0.0;
      const double ind = data.group(i) == g ? 1.0 : 0.0;
      agg.influence(i) += cell->estimate * (ind - w * in_elig) / p_elig;
    }
  }
  agg.influence.array() -= agg.influence.mean();
  return agg;
}

std::vector<int> feasible_event_times(const PanelDataset& data) {
  std::vector<int> out;
  const auto groups = data.treated_groups();
  if (groups.empty()) return out;
  const int e_max = data.n_periods - groups.front();
  for (int e = 0; e <= e_max; ++e) out.push_back(e);
  return out;
}

}  // namespace didforge
