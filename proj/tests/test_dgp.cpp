#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "didforge/dgp.hpp"
#include "didforge/errors.hpp"
#include "didforge/linproj.hpp"
#include "didforge/panel.hpp"
#include "support/oracles.hpp"

using namespace didforge;

TEST_CASE("zero effect gives a zero oracle everywhere") {
  DgpConfig c = DgpConfig::make(200, 3, 1, 1, {2, 3}, 4);
  c.assignment.intercepts.setConstant(-0.4);
  c.outcome.theta_t << 0, 1, 2;
  auto [data, oracle] = generate(c);
  for (const auto& cell : oracle.cells) CHECK(cell.att == 0.0);
  CHECK(oracle.att_overall == 0.0);
}

TEST_CASE("constant effect gives an exact analytic oracle") {
  DgpConfig c = DgpConfig::make(300, 4, 2, 1, {2, 3}, 8);
  c.assignment.intercepts.setConstant(-0.3);
  c.assignment.coef_x1.setConstant(0.4);  // confounded, still analytic
  c.assignment.coef_z.setConstant(0.3);
  c.outcome.beta_t.setConstant(0.5);
  c.treatment.base = 2.0;
  auto [data, oracle] = generate(c);
  CHECK(oracle.method == "analytic");
  for (const auto& cell : oracle.cells) CHECK(cell.att == 2.0);
  CHECK(oracle.att_overall == 2.0);
  CHECK(oracle.att_es(0) == 2.0);
}

TEST_CASE("generation is reproducible bit for bit") {
  DgpConfig c = violation_preset("clean");
  c.n_units = 150;
  c.seed = 77;
  auto [a, oa] = generate(c);
  auto [b, ob] = generate(c);
  CHECK(a.outcome == b.outcome);
  CHECK(a.group == b.group);
  CHECK(a.z_ti == b.z_ti);
  CHECK(oa.att_overall == ob.att_overall);
}

TEST_CASE("different seeds produce different panels") {
  DgpConfig c = violation_preset("clean");
  c.n_units = 100;
  c.seed = 1;
  auto a = generate(c).first;
  c.seed = 2;
  auto b = generate(c).first;
  CHECK(a.outcome != b.outcome);
}

TEST_CASE("generated panels pass validation with staggered treatment") {
  DgpConfig c = DgpConfig::make(400, 5, 1, 1, {2, 4}, 21);
  c.assignment.intercepts.setConstant(-0.5);
  auto data = generate(c).first;
  auto rep = validate(data);
  CHECK(rep.no_comparison.empty());
  CHECK(rep.has_never_treated);
  // derived treatment is monotone within unit by construction
  for (int i = 0; i < data.n_units; ++i)
    for (int t = 2; t <= data.n_periods; ++t)
      CHECK(data.d(i, t - 1) <= data.d(i, t));
}

TEST_CASE("extreme assignment coefficients violate overlap") {
  DgpConfig c = DgpConfig::make(100, 2, 1, 0, {2}, 3);
  c.assignment.intercepts.setConstant(0.0);
  c.assignment.coef_x1.setConstant(12.0);
  try {
    generate(c);
    CHECK(false);
  } catch (const error& e) {
    CHECK(e.code() == errc::overlap_config);
  }
}

TEST_CASE("conditional effects: constant tau") {
  DgpConfig c = violation_preset("clean");
  c.n_units = 120;
  c.seed = 13;
  auto data = generate(c).first;
  Eigen::MatrixXd cells = oracle_conditional_atts(c, data);
  for (int i = 0; i < data.n_units; ++i)
    for (int t = data.group(i); t <= data.n_periods; ++t)
      CHECK(cells(i, t - 1) == 2.0);
}

TEST_CASE("conditional effects: tau = 1 + z") {
  DgpConfig c = DgpConfig::make(150, 2, 1, 1, {2}, 19);
  c.assignment.intercepts.setConstant(-0.2);
  c.treatment.base = 1.0;
  c.treatment.coef_z.setConstant(1.0);
  auto data = generate(c).first;
  Eigen::MatrixXd cells = oracle_conditional_atts(c, data);
  for (int i = 0; i < data.n_units; ++i)
    if (data.group(i) == 2)
      CHECK(cells(i, 1) ==
            doctest::Approx(1.0 + data.z_ti(i, 0)).epsilon(1e-14));
}

TEST_CASE("conditional effects match potential-outcome differences") {
  DgpConfig c = violation_preset("heterogeneous_att");
  c.n_units = 200;
  c.seed = 23;
  auto data = generate(c).first;
  DgpConfig c0 = c;
  c0.treatment = DgpTreatment{};
  c0.treatment.coef_x = Eigen::VectorXd::Zero(c.k);
  c0.treatment.coef_z = Eigen::VectorXd::Zero(c.l);
  auto untreated = generate(c0).first;

  Eigen::MatrixXd cells = oracle_conditional_atts(c, data);
  for (int i = 0; i < data.n_units; ++i) {
    for (int t = data.group(i); t <= data.n_periods; ++t) {
      const double fd = data.outcome(i, t - 1) - untreated.outcome(i, t - 1);
      CHECK(cells(i, t - 1) == doctest::Approx(fd).epsilon(1e-10));
    }
  }
}

TEST_CASE("config mismatch is detected") {
  DgpConfig c = violation_preset("clean");
  c.n_units = 80;
  auto data = generate(c).first;
  data.outcome(0, 0) += 1.0;
  CHECK_THROWS_AS(oracle_conditional_atts(c, data), error);
}

TEST_CASE("analytic oracle agrees with the Monte Carlo oracle") {
  // covariate-free assignment with an X-interacted effect: both oracle
  // routes are available, so cross-check them
  DgpConfig c = DgpConfig::make(100, 3, 1, 0, {2, 3}, 29);
  c.assignment.intercepts.setConstant(-0.4);
  c.x_process.rho = 0.6;
  c.x_process.drift = 0.3;
  c.x_process.innovation_shift << 0.5, -0.2;
  c.treatment.base = 1.0;
  c.treatment.coef_x.setConstant(0.7);
  auto [data, analytic] = generate(c);
  REQUIRE(analytic.method == "analytic");

  DgpConfig cmc = c;
  cmc.assignment.coef_eta.setConstant(1e-12);  // force the MC route
  cmc.oracle_mc_draws = 400000;
  auto [data2, mc] = generate(cmc);
  REQUIRE(mc.method == "monte-carlo");
  for (const auto& cell : analytic.cells) {
    double mc_att = mc.att(cell.g, cell.t);
    double mc_se = 0;
    for (const auto& m : mc.cells)
      if (m.g == cell.g && m.t == cell.t) mc_se = m.mc_se;
    CHECK(std::abs(mc_att - cell.att) < 3.0 * mc_se);
  }
  CHECK(std::abs(mc.att_overall - analytic.att_overall) <
        3.0 * mc.att_overall_se + 1e-3);
}

TEST_CASE("unknown preset is rejected, known presets generate") {
  CHECK_THROWS_AS(violation_preset("nope"), error);
  for (const auto& name : preset_names()) {
    DgpConfig c = violation_preset(name);
    c.n_units = 60;
    c.seed = 31;
    auto data = generate(c).first;
    CHECK(data.n_units == 60);
  }
}

TEST_CASE("config JSON round-trips") {
  DgpConfig c = violation_preset("violate_E_timevarying_beta");
  c.n_units = 123;
  c.seed = 99;
  DgpConfig back = config_from_json(config_to_json(c));
  auto a = generate(c).first;
  auto b = generate(back).first;
  CHECK(a.outcome == b.outcome);
  CHECK(a.group == b.group);
}

TEST_CASE("parallel trends holds conditionally in generated data") {
  // staggered clean-trend config: among units untreated at t=2, group
  // membership has no explanatory power for the outcome change given
  // (dX, X_pre, Z)
  DgpConfig c = DgpConfig::make(5000, 3, 1, 1, {2, 3}, 37);
  c.assignment.intercepts.setConstant(-0.5);
  c.assignment.coef_x1.setConstant(0.4);
  c.assignment.coef_z.setConstant(0.4);
  c.outcome.theta_t << 0, 0.5, 1.0;
  c.outcome.delta_t.setConstant(0.5);
  c.outcome.beta_t.setConstant(0.8);
  c.outcome.eta_shift.setConstant(0.5);
  c.treatment.base = 2.0;
  auto data = generate(c).first;

  std::vector<int> rows;
  for (int i = 0; i < data.n_units; ++i)
    if (data.group(i) > 2) rows.push_back(i);
  const int m = static_cast<int>(rows.size());
  Eigen::VectorXd dy(data.n_units);
  Eigen::MatrixXd design(data.n_units, 5);
  for (int i = 0; i < data.n_units; ++i) {
    dy(i) = data.outcome(i, 1) - data.outcome(i, 0);
    design(i, 0) = 1.0;
    design(i, 1) = data.x_tv[0](i, 1) - data.x_tv[0](i, 0);
    design(i, 2) = data.x_tv[0](i, 0);
    design(i, 3) = data.z_ti(i, 0);
    design(i, 4) = data.group(i) == 3 ? 1.0 : 0.0;  // group-3 dummy
  }
  ProjectionFit fit = project(dy, design, &rows);
  // homoskedastic OLS standard error for the dummy coefficient
  double ssr = 0;
  for (int i : rows) ssr += fit.residuals(i) * fit.residuals(i);
  const double sigma2 = ssr / fit.dof;
  Eigen::MatrixXd xs(m, 5);
  for (int r = 0; r < m; ++r) xs.row(r) = design.row(rows[r]);
  const Eigen::MatrixXd gram_inv = (xs.transpose() * xs).inverse();
  const double se = std::sqrt(sigma2 * gram_inv(4, 4));
  CHECK(std::abs(fit.coefficients(4)) < 3.0 * se);
}
