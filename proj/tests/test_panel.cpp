#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "didforge/errors.hpp"
#include "didforge/panel.hpp"
#include "didforge/rng.hpp"

using namespace didforge;

namespace {

const char* kSmallCsv =
    "id,time,y,g,x1,z1\n"
    "a,1,1.0,2,0.5,1\n"
    "a,2,2.0,2,0.7,1\n"
    "b,1,0.5,0,0.1,2\n"
    "b,2,0.9,0,0.2,2\n"
    "c,1,1.2,2,0.0,0\n"
    "c,2,3.1,2,1.0,0\n"
    "d,1,0.1,0,0.3,1\n"
    "d,2,0.4,0,0.4,1\n";

ColumnMapping small_schema() {
  ColumnMapping m;
  m.x_tv = {"x1"};
  m.z_ti = {"z1"};
  return m;
}

PanelDataset make_panel(int n, int T, const Eigen::VectorXi& group) {
  PanelDataset d;
  d.n_units = n;
  d.n_periods = T;
  d.outcome.setZero(n, T);
  d.z_ti.resize(n, 0);
  d.group = group;
  for (int t = 0; t < T; ++t) d.period_labels.push_back(t + 1);
  for (int i = 0; i < n; ++i) d.unit_ids.push_back(std::to_string(i + 1));
  return d;
}

}  // namespace

TEST_CASE("well-formed input round-trips") {
  auto data = load_csv_string(kSmallCsv, small_schema());
  CHECK(data.n_units == 4);
  CHECK(data.n_periods == 2);
  CHECK(data.k() == 1);
  CHECK(data.l() == 1);
  CHECK(data.group(0) == 2);
  CHECK(data.group(1) == 3);  // never treated -> T+1
  CHECK(data.outcome(2, 1) == doctest::Approx(3.1));
  CHECK(data.z_ti(1, 0) == doctest::Approx(2.0));

  // export/import round trip preserves everything
  auto text = to_csv_string(data, small_schema());
  auto again = load_csv_string(text, small_schema());
  CHECK(again.outcome == data.outcome);
  CHECK(again.group == data.group);
  CHECK(again.z_ti == data.z_ti);
}

TEST_CASE("missing cell is rejected") {
  std::string csv =
      "id,time,y,g,x1,z1\n"
      "a,1,1.0,2,0.5,1\n"
      "a,2,2.0,2,0.7,1\n"
      "b,1,0.5,0,0.1,2\n";
  CHECK_THROWS_AS(load_csv_string(csv, small_schema()), error);
  try {
    load_csv_string(csv, small_schema());
  } catch (const error& e) {
    CHECK(e.code() == errc::missing_cell);
  }
}

TEST_CASE("non-constant time-invariant column is rejected") {
  std::string csv =
      "id,time,y,g,x1,z1\n"
      "a,1,1.0,2,0.5,1\n"
      "a,2,2.0,2,0.7,2\n"
      "b,1,0.5,0,0.1,2\n"
      "b,2,0.9,0,0.2,2\n";
  try {
    load_csv_string(csv, small_schema());
    CHECK(false);
  } catch (const error& e) {
    CHECK(e.code() == errc::non_constant_time_invariant);
  }
}

TEST_CASE("already treated at start is rejected") {
  std::string csv =
      "id,time,y,g,x1,z1\n"
      "a,1,1.0,1,0.5,1\n"
      "a,2,2.0,1,0.7,1\n"
      "b,1,0.5,0,0.1,2\n"
      "b,2,0.9,0,0.2,2\n";
  try {
    load_csv_string(csv, small_schema());
    CHECK(false);
  } catch (const error& e) {
    CHECK(e.code() == errc::already_treated_at_start);
  }
}

TEST_CASE("unknown column is rejected") {
  ColumnMapping m = small_schema();
  m.x_tv = {"nope"};
  try {
    load_csv_string(kSmallCsv, m);
    CHECK(false);
  } catch (const error& e) {
    CHECK(e.code() == errc::unknown_column);
  }
}

TEST_CASE("group probabilities sum to one over their supports") {
  auto data = load_csv_string(kSmallCsv, small_schema());
  double sum_p = 0;
  for (const auto& [g, cnt] : data.group_sizes()) sum_p += data.p_g(g);
  CHECK(sum_p == doctest::Approx(1.0).epsilon(1e-14));
  double sum_pbar = 0;
  for (int g : data.treated_groups()) sum_pbar += data.pbar_g(g);
  CHECK(sum_pbar == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("additively separable outcome double-demeans to zero") {
  Eigen::MatrixXd y(2, 2);
  y << 1, 2, 3, 4;
  auto dm = double_demean(y);
  CHECK(dm.dd.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("double demeaning matches hand arithmetic") {
  Eigen::MatrixXd y(2, 2);
  y << 1, 2, 3, 5;
  auto dm = double_demean(y);
  CHECK(dm.dd(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(dm.dd(0, 1) == doctest::Approx(-0.25).epsilon(1e-14));
  CHECK(dm.dd(1, 0) == doctest::Approx(-0.25).epsilon(1e-14));
  CHECK(dm.dd(1, 1) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("per-unit and per-period sums of demeaned values vanish") {
  const int n = 13, T = 5;
  Eigen::MatrixXd y(n, T);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < T; ++t) y(i, t) = rng::normal(42, 1, i * T + t);
  auto dm = double_demean(y);
  for (int i = 0; i < n; ++i) CHECK(std::abs(dm.dd.row(i).sum()) < 1e-12);
  for (int t = 0; t < T; ++t) CHECK(std::abs(dm.dd.col(t).sum()) < 1e-12);
}

TEST_CASE("double demeaning is idempotent") {
  const int n = 9, T = 4;
  Eigen::MatrixXd y(n, T);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < T; ++t) y(i, t) = rng::normal(7, 2, i * T + t);
  auto once = double_demean(y);
  auto twice = double_demean(once.dd);
  const double scale = once.dd.cwiseAbs().maxCoeff();
  CHECK((twice.dd - once.dd).cwiseAbs().maxCoeff() < 1e-12 * scale);
}

TEST_CASE("demeaned treatment is orthogonal to period- and unit-constants") {
  // sample analogue of the double-demeaning orthogonality properties
  const int n = 50, T = 4;
  Eigen::VectorXi group(n);
  for (int i = 0; i < n; ++i) group(i) = 2 + (i % 4);  // groups 2..5=never
  auto data = make_panel(n, T, group);
  auto dm = double_demean(data);

  Eigen::VectorXd c_t(T);
  for (int t = 0; t < T; ++t) c_t(t) = rng::normal(3, 3, t);
  double acc = 0;
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < T; ++t) acc += dm.d.dd(i, t) * c_t(t);
  CHECK(std::abs(acc / (n * T)) < 1e-10);

  for (int i = 0; i < n; ++i) {
    const double b_i = rng::normal(3, 4, i);
    double s = 0;
    for (int t = 0; t < T; ++t) s += dm.d.dd(i, t) * b_i;
    CHECK(std::abs(s / T) < 1e-10);
  }
}

TEST_CASE("two-period view differences outcomes and prepends an intercept") {
  auto data = load_csv_string(kSmallCsv, small_schema());
  auto v = two_period_view(data);
  CHECK(v.dy(0) == doctest::Approx(1.0));
  CHECK(v.dy(2) == doctest::Approx(1.9));
  CHECK(v.d(0) == 1.0);
  CHECK(v.d(1) == 0.0);
  for (int i = 0; i < 4; ++i) CHECK(v.dx(i, 0) == 1.0);
  CHECK(v.dx(0, 1) == doctest::Approx(0.2));
}

TEST_CASE("two-period view on a unit pair matches subtraction plus intercept") {
  std::string csv =
      "id,time,y,g,x1\n"
      "a,1,0,2,0\n"
      "a,2,1,2,2\n"
      "b,1,0,0,1\n"
      "b,2,1,0,1\n";
  ColumnMapping m;
  m.x_tv = {"x1"};
  auto v = two_period_view(load_csv_string(csv, m));
  CHECK(v.dx(0, 0) == 1.0);
  CHECK(v.dx(0, 1) == doctest::Approx(2.0));
  CHECK(v.dx(1, 0) == 1.0);
  CHECK(v.dx(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("three periods are not a two-period design") {
  auto data = make_panel(6, 3, Eigen::VectorXi::Constant(6, 2));
  data.group(3) = data.group(4) = data.group(5) = 4;
  try {
    two_period_view(data);
    CHECK(false);
  } catch (const error& e) {
    CHECK(e.code() == errc::not_two_period);
  }
}

TEST_CASE("validate flags missing comparison sets and small groups") {
  // everyone treated at period 2, T=2: no comparison units for (2,2)
  auto all_treated = make_panel(6, 2, Eigen::VectorXi::Constant(6, 2));
  auto rep = validate(all_treated);
  REQUIRE(rep.no_comparison.size() == 1);
  CHECK(rep.no_comparison[0] == std::make_pair(2, 2));
  CHECK_FALSE(rep.has_never_treated);

  // with a never-treated group every (g,t) has a comparison
  Eigen::VectorXi group(6);
  group << 2, 2, 2, 3, 3, 3;  // 3 = T+1 = never
  auto with_never = make_panel(6, 2, group);
  auto rep2 = validate(with_never, 2);
  CHECK(rep2.no_comparison.empty());
  CHECK(rep2.has_never_treated);
  CHECK(rep2.small_groups.empty());

  // one-unit group under minimum of 5
  Eigen::VectorXi g3(6);
  g3 << 2, 3, 3, 3, 3, 3;
  auto rep3 = validate(make_panel(6, 2, g3), 5);
  REQUIRE(rep3.small_groups.size() == 1);
  CHECK(rep3.small_groups[0] == 2);
}
