#include "didforge/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "didforge/errors.hpp"

namespace didforge {

namespace {

struct FnDef {
  std::string label;
  std::string panel;
  bool exact = false;
  std::function<double(int)> eval;  // unit -> value
};

// A covariate reference: either a time-varying column (evaluated at a
// period) or a time-invariant column.
struct CovRef {
  bool time_varying = false;
  int index = -1;
};

CovRef resolve_cov(const PanelDataset& data, const std::string& name) {
  for (int j = 0; j < data.k(); ++j)
    if (data.x_names[j] == name) return {true, j};
  for (int j = 0; j < data.l(); ++j)
    if (data.z_names[j] == name) return {false, j};
  fail(errc::unknown_function, "unknown covariate '" + name + "'");
}

double cov_value(const PanelDataset& data, const CovRef& ref, int unit,
                 int period) {
  return ref.time_varying ? data.x_tv[ref.index](unit, period - 1)
                          : data.z_ti(unit, ref.index);
}

std::vector<FnDef> default_functions(const PanelDataset& data, int t, int base,
                                     bool mark_dx_exact) {
  std::vector<FnDef> fns;
  for (int j = 0; j < data.k(); ++j) {
    const std::string name = data.x_names[j];
    fns.push_back({"d_" + name, "dX", mark_dx_exact,
                   [&data, j, t, base](int i) {
                     return data.x_tv[j](i, t - 1) - data.x_tv[j](i, base - 1);
                   }});
  }
  for (int j = 0; j < data.k(); ++j) {
    const std::string name = data.x_names[j];
    fns.push_back({name + "@post", "X_post", false,
                   [&data, j, t](int i) { return data.x_tv[j](i, t - 1); }});
  }
  for (int j = 0; j < data.k(); ++j) {
    const std::string name = data.x_names[j];
    fns.push_back({name + "@pre", "X_pre", false, [&data, j, base](int i) {
                     return data.x_tv[j](i, base - 1);
                   }});
  }
  for (int j = 0; j < data.l(); ++j) {
    fns.push_back({data.z_names[j], "Z", false,
                   [&data, j](int i) { return data.z_ti(i, j); }});
  }
  return fns;
}

// "name", "name^2" or "a*b"; x entries are evaluated at the post and base
// periods of the cell.
void append_extra(std::vector<FnDef>& fns, const PanelDataset& data,
                  const std::string& token, int t, int base) {
  auto add_pairs = [&](const std::string& label, const CovRef& a, int pa,
                       const CovRef& b, int pb) {
    fns.push_back({label, "extra", false, [&data, a, pa, b, pb](int i) {
                     return cov_value(data, a, i, pa) *
                            cov_value(data, b, i, pb);
                   }});
  };
  const auto star = token.find('*');
  const auto caret = token.find("^2");
  if (star != std::string::npos) {
    const std::string na = token.substr(0, star);
    const std::string nb = token.substr(star + 1);
    const CovRef a = resolve_cov(data, na);
    const CovRef b = resolve_cov(data, nb);
    if (a.time_varying || b.time_varying) {
      add_pairs(token + "@post", a, t, b, t);
      add_pairs(token + "@pre", a, base, b, base);
    } else {
      add_pairs(token, a, 1, b, 1);
    }
    return;
  }
  if (caret != std::string::npos && caret == token.size() - 2) {
    const std::string name = token.substr(0, caret);
    const CovRef a = resolve_cov(data, name);
    if (a.time_varying) {
      add_pairs(token + "@post", a, t, a, t);
      add_pairs(token + "@pre", a, base, a, base);
    } else {
      add_pairs(token, a, 1, a, 1);
    }
    return;
  }
  const CovRef a = resolve_cov(data, token);
  if (a.time_varying) {
    fns.push_back({token + "@post", "extra", false,
                   [&data, a, t](int i) { return cov_value(data, a, i, t); }});
    fns.push_back({token + "@pre", "extra", false, [&data, a, base](int i) {
                     return cov_value(data, a, i, base);
                   }});
  } else {
    fns.push_back({token, "extra", false,
                   [&data, a](int i) { return cov_value(data, a, i, 1); }});
  }
}

struct SideWeights {
  std::vector<int> units;
  std::vector<double> weights;  // normalized to mean one
};

void normalize(SideWeights& s) {
  double mean = 0;
  for (double w : s.weights) mean += w;
  mean /= s.weights.size();
  for (double& w : s.weights) w /= mean;
}

BalanceTable balance_table(const PanelDataset& data, const SideWeights& treat,
                           const SideWeights& comp,
                           const std::vector<FnDef>& fns, int g, int t) {
  BalanceTable table;
  table.g = g;
  table.t = t;
  for (const auto& fn : fns) {
    BalanceRow row;
    row.label = fn.label;
    row.panel = fn.panel;
    row.exact = fn.exact;
    double tm = 0, cm = 0;
    for (std::size_t r = 0; r < treat.units.size(); ++r)
      tm += treat.weights[r] * fn.eval(treat.units[r]);
    tm /= treat.units.size();
    for (std::size_t r = 0; r < comp.units.size(); ++r)
      cm += comp.weights[r] * fn.eval(comp.units[r]);
    cm /= comp.units.size();
    row.treated_mean = tm;
    row.comparison_mean = cm;
    row.diff = tm - cm;

    // pooled unweighted sd across both groups
    double sum = 0, sumsq = 0;
    const double count =
        static_cast<double>(treat.units.size() + comp.units.size());
    for (int i : treat.units) {
      const double v = fn.eval(i);
      sum += v;
      sumsq += v * v;
    }
    for (int i : comp.units) {
      const double v = fn.eval(i);
      sum += v;
      sumsq += v * v;
    }
    const double var = (sumsq - sum * sum / count) / (count - 1.0);
    const double sd = std::sqrt(std::max(0.0, var));
    row.std_diff = sd > 0 ? row.diff / sd : 0.0;
    table.rows.push_back(row);
  }
  return table;
}

BalanceTable combine_tables(const std::vector<BalanceTable>& tables,
                            const std::vector<double>& weights) {
  BalanceTable overall;
  overall.g = 0;
  overall.t = 0;
  if (tables.empty()) return overall;
  overall.rows = tables.front().rows;
  for (auto& row : overall.rows) {
    row.treated_mean = row.comparison_mean = row.diff = row.std_diff = 0;
  }
  for (std::size_t c = 0; c < tables.size(); ++c) {
    for (std::size_t r = 0; r < overall.rows.size(); ++r) {
      overall.rows[r].treated_mean += weights[c] * tables[c].rows[r].treated_mean;
      overall.rows[r].comparison_mean +=
          weights[c] * tables[c].rows[r].comparison_mean;
      overall.rows[r].diff += weights[c] * tables[c].rows[r].diff;
      overall.rows[r].std_diff += weights[c] * tables[c].rows[r].std_diff;
    }
  }
  return overall;
}

}  // namespace

BalanceReport balance_audit(const TwfeWeights& weights,
                            const PanelDataset& data,
                            const std::vector<std::string>& extra) {
  BalanceReport rep;
  rep.weight_kind = "twfe-implicit";
  if (weights.variant == WeightVariant::TwoPeriodImplicit) {
    rep.two_period = true;
    SideWeights treat, comp;
    for (const auto& e : weights.entries) {
      auto& side = e.side == 1 ? treat : comp;
      side.units.push_back(e.unit);
      side.weights.push_back(e.value);
    }
    normalize(treat);
    normalize(comp);
    auto fns = default_functions(data, 2, 1, /*mark_dx_exact=*/true);
    for (const auto& tok : extra) append_extra(fns, data, tok, 2, 1);
    rep.tables.push_back(balance_table(data, treat, comp, fns, 0, 0));
    return rep;
  }
  if (weights.variant != WeightVariant::MultiPeriodImplicit)
    fail(errc::invalid_value, "balance audit needs implicit weights");

  rep.two_period = false;
  const int T = data.n_periods;
  std::vector<BalanceTable> tables;
  std::vector<double> agg_weights;
  for (int g : data.treated_groups()) {
    for (int t = g; t <= T; ++t) {
      SideWeights treat, comp;
      for (const auto& e : weights.entries) {
        if (e.group != g || e.period != t) continue;
        auto& side = e.side == 1 ? treat : comp;
        side.units.push_back(e.unit);
        side.weights.push_back(e.value);
      }
      if (treat.units.empty() || comp.units.empty()) continue;
      normalize(treat);
      normalize(comp);
      auto fns = default_functions(data, t, g - 1, false);
      for (const auto& tok : extra) append_extra(fns, data, tok, t, g - 1);
      tables.push_back(balance_table(data, treat, comp, fns, g, t));
      agg_weights.push_back(data.pbar_g(g) / (T - g + 1));
    }
  }
  rep.tables = tables;
  rep.tables.push_back(combine_tables(tables, agg_weights));
  return rep;
}

double reconstruct_alpha(const TwfeWeights& weights, const PanelDataset& data) {
  return weighted_outcome_contrast(weights, data);
}

namespace {

BalanceTable gps_benchmark_table(const PanelDataset& data, const GpsFit& gps,
                                 int g, int t, int base,
                                 const std::vector<std::string>& extra,
                                 bool mark_dx) {
  SideWeights treat, comp;
  for (std::size_t r = 0; r < gps.subsample.size(); ++r) {
    const int i = gps.subsample[r];
    const double p = gps.fitted(r);
    if (data.group(i) == g) {
      treat.units.push_back(i);
      treat.weights.push_back(1.0);
    } else {
      if (p > 1.0 - 1e-6)
        fail(errc::propensity_near_one,
             "fitted propensity too close to one on a comparison unit");
      comp.units.push_back(i);
      comp.weights.push_back(p / (1.0 - p));
    }
  }
  normalize(treat);
  normalize(comp);
  auto fns = default_functions(data, t, base, mark_dx);
  for (const auto& tok : extra) append_extra(fns, data, tok, t, base);
  return balance_table(data, treat, comp, fns, g, t);
}

}  // namespace

BalanceReport ipw_benchmark_balance(const PanelDataset& data,
                                    const GpsFit& gps,
                                    const std::vector<std::string>& extra) {
  BalanceReport rep;
  rep.two_period = true;
  rep.weight_kind = "gps-benchmark";
  const int base = gps.g - 1;
  BalanceTable table =
      gps_benchmark_table(data, gps, gps.g, gps.t, base, extra, false);
  table.g = table.t = 0;
  rep.tables.push_back(table);
  return rep;
}

BalanceReport ipw_benchmark_balance_all(const PanelDataset& data,
                                        const AttOptions& opts,
                                        const std::vector<std::string>& extra) {
  BalanceReport rep;
  rep.two_period = false;
  rep.weight_kind = "gps-benchmark";
  const int T = data.n_periods;
  std::vector<BalanceTable> tables;
  std::vector<double> agg_weights;
  for (int g : data.treated_groups()) {
    for (int t = g; t <= T; ++t) {
      GpsFit gps = fit_gps(data, g, t, opts);
      const int base = opts.base_period == BasePeriod::Varying ? g - 1 : 1;
      tables.push_back(
          gps_benchmark_table(data, gps, g, t, base, extra, false));
      agg_weights.push_back(data.pbar_g(g) / (T - g + 1));
    }
  }
  rep.tables = tables;
  rep.tables.push_back(combine_tables(tables, agg_weights));
  return rep;
}

std::string render_balance_table(const BalanceReport& report) {
  std::ostringstream out;
  auto line = [&](const std::string& a, const std::string& b,
                  const std::string& c, const std::string& d,
                  const std::string& e, const std::string& f) {
    out << "  ";
    out.width(22);
    out << std::left << a;
    out.width(8);
    out << std::left << b;
    for (const std::string& s : {c, d, e, f}) {
      out.width(14);
      out << std::right << s;
    }
    out << '\n';
  };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.5g", v);
    return std::string(buf);
  };
  for (const auto& table : report.tables) {
    if (report.two_period)
      out << "balance (" << report.weight_kind << ")\n";
    else if (table.g == 0)
      out << "balance overall (" << report.weight_kind << ")\n";
    else
      out << "balance g=" << table.g << " t=" << table.t << " ("
          << report.weight_kind << ")\n";
    line("function", "panel", "treated", "comparison", "diff", "std.diff");
    for (const auto& r : table.rows) {
      line(r.label + (r.exact ? " *" : ""), r.panel, num(r.treated_mean),
           num(r.comparison_mean), num(r.diff), num(r.std_diff));
    }
    out << "  (* exact by construction; level and Z panels are diagnostic)\n";
  }
  return out.str();
}

}  // namespace didforge
