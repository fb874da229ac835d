#include "didforge/panel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "didforge/errors.hpp"

namespace didforge {

std::vector<int> PanelDataset::treated_groups() const {
  std::vector<int> gs;
  for (int i = 0; i < n_units; ++i) {
    if (group(i) <= n_periods &&
        std::find(gs.begin(), gs.end(), group(i)) == gs.end())
      gs.push_back(group(i));
  }
  std::sort(gs.begin(), gs.end());
  return gs;
}

std::vector<std::pair<int, int>> PanelDataset::group_sizes() const {
  std::map<int, int> counts;
  for (int i = 0; i < n_units; ++i) counts[group(i)]++;
  return {counts.begin(), counts.end()};
}

double PanelDataset::p_g(int g) const {
  int c = 0;
  for (int i = 0; i < n_units; ++i) c += (group(i) == g);
  return static_cast<double>(c) / n_units;
}

int PanelDataset::n_ever_treated() const {
  int c = 0;
  for (int i = 0; i < n_units; ++i) c += (group(i) <= n_periods);
  return c;
}

double PanelDataset::pbar_g(int g) const {
  const int ever = n_ever_treated();
  if (ever == 0) return 0.0;
  int c = 0;
  for (int i = 0; i < n_units; ++i) c += (group(i) == g);
  return static_cast<double>(c) / ever;
}

Eigen::VectorXd PanelDataset::x_at(int i, int t) const {
  Eigen::VectorXd v(k());
  for (int j = 0; j < k(); ++j) v(j) = x_tv[j](i, t - 1);
  return v;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(field);
  for (auto& f : out) {
    const auto a = f.find_first_not_of(" \t");
    const auto b = f.find_last_not_of(" \t");
    f = (a == std::string::npos) ? std::string() : f.substr(a, b - a + 1);
  }
  return out;
}

double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) fail(errc::invalid_value, std::string("bad number in column ") + what + ": '" + s + "'");
    return v;
  } catch (const error&) {
    throw;
  } catch (...) {
    fail(errc::invalid_value, std::string("bad number in column ") + what + ": '" + s + "'");
  }
}

struct LongRow {
  std::string id;
  double time;
  double y;
  double g;  // NaN means empty / never
  std::vector<double> x;
  std::vector<double> z;
};

}  // namespace

PanelDataset load_csv_string(const std::string& text,
                             const ColumnMapping& schema) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    fail(errc::invalid_value, "empty CSV input");
  const auto header = split_csv_line(line);
  std::unordered_map<std::string, int> col;
  for (std::size_t j = 0; j < header.size(); ++j) col[header[j]] = static_cast<int>(j);

  auto need = [&](const std::string& name) {
    auto it = col.find(name);
    if (it == col.end())
      fail(errc::unknown_column, "column '" + name + "' not found in header");
    return it->second;
  };
  const int c_id = need(schema.id);
  const int c_time = need(schema.time);
  const int c_y = need(schema.outcome);
  const int c_g = need(schema.group);
  std::vector<int> c_x, c_z;
  for (const auto& name : schema.x_tv) c_x.push_back(need(name));
  for (const auto& name : schema.z_ti) c_z.push_back(need(name));

  std::vector<LongRow> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size())
      fail(errc::invalid_value, "row has wrong field count: " + line);
    LongRow r;
    r.id = f[c_id];
    r.time = parse_double(f[c_time], schema.time.c_str());
    r.y = parse_double(f[c_y], schema.outcome.c_str());
    r.g = f[c_g].empty() ? std::numeric_limits<double>::quiet_NaN()
                         : parse_double(f[c_g], schema.group.c_str());
    for (int j : c_x) r.x.push_back(parse_double(f[j], "x"));
    for (int j : c_z) r.z.push_back(parse_double(f[j], "z"));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) fail(errc::invalid_value, "CSV has no data rows");

  // Period index: original labels sorted, re-indexed 1..T.
  std::vector<double> labels;
  for (const auto& r : rows) labels.push_back(r.time);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  const int T = static_cast<int>(labels.size());
  std::map<double, int> t_index;
  for (int t = 0; t < T; ++t) t_index[labels[t]] = t + 1;

  // Units in order of first appearance.
  std::vector<std::string> ids;
  std::unordered_map<std::string, int> u_index;
  for (const auto& r : rows) {
    if (!u_index.count(r.id)) {
      u_index[r.id] = static_cast<int>(ids.size());
      ids.push_back(r.id);
    }
  }
  const int n = static_cast<int>(ids.size());
  const int k = static_cast<int>(schema.x_tv.size());
  const int l = static_cast<int>(schema.z_ti.size());

  PanelDataset data;
  data.n_units = n;
  data.n_periods = T;
  data.outcome.setConstant(n, T, std::numeric_limits<double>::quiet_NaN());
  data.x_tv.assign(k, Eigen::MatrixXd::Constant(
                          n, T, std::numeric_limits<double>::quiet_NaN()));
  data.z_ti.setZero(n, l);
  data.group.setConstant(n, -1);
  data.unit_ids = ids;
  data.period_labels = labels;
  data.x_names = schema.x_tv;
  data.z_names = schema.z_ti;

  std::vector<std::vector<char>> seen(n, std::vector<char>(T, 0));
  std::vector<char> z_set(n, 0);
  std::vector<double> g_raw(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<char> g_set(n, 0);

  for (const auto& r : rows) {
    const int i = u_index[r.id];
    const int t = t_index[r.time];
    if (seen[i][t - 1])
      fail(errc::invalid_value,
           "duplicate cell for unit " + r.id + " at time " + std::to_string(r.time));
    seen[i][t - 1] = 1;
    data.outcome(i, t - 1) = r.y;
    for (int j = 0; j < k; ++j) data.x_tv[j](i, t - 1) = r.x[j];
    if (!z_set[i]) {
      for (int j = 0; j < l; ++j) data.z_ti(i, j) = r.z[j];
      z_set[i] = 1;
    } else {
      for (int j = 0; j < l; ++j) {
        const double ref = data.z_ti(i, j);
        if (std::abs(r.z[j] - ref) > 1e-9 * std::max(1.0, std::abs(ref)))
          fail(errc::non_constant_time_invariant,
               "column '" + schema.z_ti[j] + "' varies within unit " + r.id);
      }
    }
    if (!g_set[i]) {
      g_raw[i] = r.g;
      g_set[i] = 1;
    } else {
      const bool both_never = std::isnan(g_raw[i]) && std::isnan(r.g);
      if (!both_never && g_raw[i] != r.g)
        fail(errc::invalid_value, "group varies within unit " + r.id);
    }
  }

  for (int i = 0; i < n; ++i)
    for (int t = 0; t < T; ++t)
      if (!seen[i][t])
        fail(errc::missing_cell, "unit " + ids[i] + " is missing period " +
                                     std::to_string(labels[t]));

  for (int i = 0; i < n; ++i) {
    const double g = g_raw[i];
    if (std::isnan(g) || g == 0.0 || std::isinf(g)) {
      data.group(i) = T + 1;
      continue;
    }
    auto it = t_index.find(g);
    int gi;
    if (it != t_index.end()) {
      gi = it->second;
    } else if (g > labels.back()) {
      gi = T + 1;  // treated only after the sample ends
    } else {
      fail(errc::invalid_value, "group value " + std::to_string(g) +
                                    " for unit " + ids[i] +
                                    " matches no period");
    }
    if (gi <= 1)
      fail(errc::already_treated_at_start,
           "unit " + ids[i] + " is already treated in the first period");
    data.group(i) = gi;
  }
  return data;
}

PanelDataset load_csv(const std::string& path, const ColumnMapping& schema) {
  std::ifstream in(path);
  if (!in) fail(errc::invalid_value, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_csv_string(ss.str(), schema);
}

namespace {
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

std::string to_csv_string(const PanelDataset& data,
                          const ColumnMapping& schema) {
  std::ostringstream out;
  out << schema.id << ',' << schema.time << ',' << schema.outcome << ','
      << schema.group;
  for (const auto& name : data.x_names) out << ',' << name;
  for (const auto& name : data.z_names) out << ',' << name;
  out << '\n';
  for (int i = 0; i < data.n_units; ++i) {
    for (int t = 1; t <= data.n_periods; ++t) {
      out << data.unit_ids[i] << ',' << fmt(data.period_labels[t - 1]) << ','
          << fmt(data.outcome(i, t - 1)) << ',';
      if (data.group(i) > data.n_periods)
        out << 0;
      else
        out << fmt(data.period_labels[data.group(i) - 1]);
      for (int j = 0; j < data.k(); ++j) out << ',' << fmt(data.x_tv[j](i, t - 1));
      for (int j = 0; j < data.l(); ++j) out << ',' << fmt(data.z_ti(i, j));
      out << '\n';
    }
  }
  return out.str();
}

void write_csv(const PanelDataset& data, const std::string& path,
               const ColumnMapping& schema) {
  std::ofstream out(path);
  if (!out) fail(errc::invalid_value, "cannot write '" + path + "'");
  out << to_csv_string(data, schema);
}

TwoPeriodView two_period_view(const PanelDataset& data) {
  if (data.n_periods != 2)
    fail(errc::not_two_period,
         "two-period view requires T = 2, got T = " +
             std::to_string(data.n_periods));
  const auto gs = data.treated_groups();
  if (gs.size() != 1 || gs[0] != 2)
    fail(errc::not_two_period,
         "two-period view requires a single group treated in period 2");

  const int n = data.n_units, k = data.k();
  TwoPeriodView v;
  v.dy = data.outcome.col(1) - data.outcome.col(0);
  v.dx.setOnes(n, 1 + k);
  v.x_pre.resize(n, k);
  v.x_post.resize(n, k);
  for (int j = 0; j < k; ++j) {
    v.x_pre.col(j) = data.x_tv[j].col(0);
    v.x_post.col(j) = data.x_tv[j].col(1);
    v.dx.col(1 + j) = v.x_post.col(j) - v.x_pre.col(j);
  }
  v.z = data.z_ti;
  v.d.resize(n);
  for (int i = 0; i < n; ++i) v.d(i) = data.d(i, 2);
  return v;
}

DemeanedVariable double_demean(const Eigen::MatrixXd& values) {
  DemeanedVariable out;
  const int n = static_cast<int>(values.rows());
  const int T = static_cast<int>(values.cols());
  out.unit_mean = values.rowwise().mean();
  out.period_mean = values.colwise().mean();
  out.grand_mean = values.mean();
  out.dd.resize(n, T);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < T; ++t)
      out.dd(i, t) =
          values(i, t) - out.unit_mean(i) - out.period_mean(t) + out.grand_mean;
  return out;
}

DemeanedPanel double_demean(const PanelDataset& data) {
  DemeanedPanel out;
  out.y = double_demean(data.outcome);
  Eigen::MatrixXd d(data.n_units, data.n_periods);
  for (int i = 0; i < data.n_units; ++i)
    for (int t = 1; t <= data.n_periods; ++t) d(i, t - 1) = data.d(i, t);
  out.d = double_demean(d);
  for (int j = 0; j < data.k(); ++j)
    out.x.push_back(double_demean(data.x_tv[j]));
  return out;
}

ValidationReport validate(const PanelDataset& data, int min_group_size) {
  ValidationReport rep;
  rep.min_group_size = min_group_size;
  rep.group_sizes = data.group_sizes();
  for (const auto& [g, count] : rep.group_sizes) {
    if (g > data.n_periods) rep.has_never_treated = true;
    if (count < min_group_size) rep.small_groups.push_back(g);
  }
  for (int g : data.treated_groups()) {
    for (int t = g; t <= data.n_periods; ++t) {
      int comparison = 0;
      for (int i = 0; i < data.n_units; ++i) comparison += (data.group(i) > t);
      if (comparison == 0) rep.no_comparison.emplace_back(g, t);
    }
  }
  return rep;
}

}  // namespace didforge
