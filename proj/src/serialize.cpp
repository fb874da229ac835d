#include "didforge/serialize.hpp"

#include <cstdio>

#include <json.hpp>

namespace didforge {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace

const char* weight_variant_name(WeightVariant v) {
  switch (v) {
    case WeightVariant::TwoPeriodConditionalAtt: return "two_period_conditional_att";
    case WeightVariant::TwoPeriodImplicit: return "two_period_implicit";
    case WeightVariant::MultiPeriodConditionalAtt: return "multi_period_conditional_att";
    case WeightVariant::MultiPeriodImplicit: return "multi_period_implicit";
  }
  return "?";
}

std::string twfe_to_json(const TwfeFit& fit) {
  json j;
  j["mode"] = fit.mode == TwfeMode::TwoPeriod ? "two_period" : "multi_period";
  j["alpha"] = fit.alpha;
  j["beta"] = vec_to_json(fit.beta);
  j["gamma"] = vec_to_json(fit.gamma);
  j["alpha_den"] = fit.alpha_den;
  if (fit.mode == TwfeMode::TwoPeriod) j["p_treated"] = fit.p_treated;
  j["n_units"] = fit.n_units;
  j["n_periods"] = fit.n_periods;
  return j.dump(2) + "\n";
}

std::string weights_to_csv(const std::vector<TwfeWeights>& weight_sets) {
  std::string out = "variant,unit,group,period,side,weight\n";
  for (const auto& ws : weight_sets) {
    for (const auto& e : ws.entries) {
      out += weight_variant_name(ws.variant);
      out += ',' + std::to_string(e.unit) + ',' + std::to_string(e.group) +
             ',' + std::to_string(e.period) + ',' + std::to_string(e.side) +
             ',' + fmt(e.value) + '\n';
    }
  }
  return out;
}

std::string weights_to_json(const std::vector<TwfeWeights>& weight_sets) {
  json j = json::array();
  for (const auto& ws : weight_sets) {
    json cells = json::array();
    for (const auto& c : ws.cells)
      cells.push_back({{"group", c.group},
                       {"period", c.period},
                       {"side", c.side},
                       {"count", c.count},
                       {"mean", c.mean},
                       {"min", c.min},
                       {"max", c.max},
                       {"share_negative", c.share_negative}});
    j.push_back({{"variant", weight_variant_name(ws.variant)},
                 {"share_negative", ws.share_negative},
                 {"min", ws.min},
                 {"max", ws.max},
                 {"cells", cells}});
  }
  return j.dump(2) + "\n";
}

std::string decomposition_to_json(const DecompositionReport& report,
                                  double reconstruction_from_implicit) {
  json j;
  j["mode"] =
      report.mode == TwfeMode::TwoPeriod ? "two_period" : "multi_period";
  j["alpha"] = report.alpha;
  j["reconstruction"] = report.reconstruction;
  j["reconstruction_from_implicit"] = reconstruction_from_implicit;
  j["census"] = {{"n_cells", report.census.n_cells},
                 {"n_negative", report.census.n_negative},
                 {"share_negative", report.census.share_negative},
                 {"n_near_zero", report.census.n_near_zero},
                 {"profile_x", vec_to_json(report.census.profile_x)},
                 {"profile_z", vec_to_json(report.census.profile_z)}};
  json ranking = json::array();
  const std::size_t keep = std::min<std::size_t>(report.reversal_ranking.size(), 50);
  for (std::size_t r = 0; r < keep; ++r) {
    const auto& row = report.reversal_ranking[r];
    ranking.push_back({{"unit", row.unit},
                       {"group", row.group},
                       {"period", row.period},
                       {"treat_projection", row.treat_projection},
                       {"weight", row.weight}});
  }
  j["weight_reversal"] = {{"ranking_head", ranking},
                          {"slope", report.reversal_slope},
                          {"intercept", report.reversal_intercept}};
  if (report.has_oracle) {
    j["oracle"] = {{"weighted_conditional_att", report.oracle_weighted_att},
                   {"bias", report.oracle_bias}};
  }
  return j.dump(2) + "\n";
}

std::string decomposition_terms_to_csv(const DecompositionReport& report) {
  std::string out = "unit,group,period,weight,value,contribution\n";
  for (const auto& t : report.weighted_conditional_terms) {
    out += std::to_string(t.unit) + ',' + std::to_string(t.group) + ',' +
           std::to_string(t.period) + ',' + fmt(t.weight) + ',' +
           fmt(t.value) + ',' + fmt(t.contribution) + '\n';
  }
  return out;
}

namespace {

json result_row(const GroupTimeResult& r, const BootstrapResult* boot,
                int index) {
  json row = {{"g", r.g},
              {"t", r.t},
              {"method", method_name(r.method)},
              {"estimate", r.estimate},
              {"n_treated", r.n_treated},
              {"n_comparison", r.n_comparison}};
  if (r.or_coef.size() > 0) row["or_coef"] = vec_to_json(r.or_coef);
  if (r.gps_coef.size() > 0) {
    row["gps_coef"] = vec_to_json(r.gps_coef);
    row["gps_min"] = r.gps_min;
    row["gps_max"] = r.gps_max;
  }
  if (boot) {
    row["se"] = boot->se(index);
    row["ci_lo"] = boot->ci_lo(index);
    row["ci_hi"] = boot->ci_hi(index);
  }
  return row;
}

}  // namespace

std::string results_to_json(const std::vector<GroupTimeResult>& results,
                            const BootstrapResult* boot) {
  json j = json::array();
  for (std::size_t i = 0; i < results.size(); ++i)
    j.push_back(result_row(results[i], boot, static_cast<int>(i)));
  return j.dump(2) + "\n";
}

std::string results_to_csv(const std::vector<GroupTimeResult>& results,
                           const BootstrapResult* boot) {
  std::string out =
      "g,t,method,estimate,se,ci_lo,ci_hi,n_treated,n_comparison\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    out += std::to_string(r.g) + ',' + std::to_string(r.t) + ',' +
           method_name(r.method) + ',' + fmt(r.estimate) + ',';
    if (boot) {
      out += fmt(boot->se(i)) + ',' + fmt(boot->ci_lo(i)) + ',' +
             fmt(boot->ci_hi(i));
    } else {
      out += ",,";
    }
    out += ',' + std::to_string(r.n_treated) + ',' +
           std::to_string(r.n_comparison) + '\n';
  }
  return out;
}

std::string aggregates_to_json(const std::vector<AggregateResult>& aggregates,
                               const BootstrapResult* boot,
                               int n_cell_columns) {
  json j = json::array();
  for (std::size_t i = 0; i < aggregates.size(); ++i) {
    const auto& a = aggregates[i];
    json row;
    row["kind"] = a.kind == AggregateResult::Kind::Overall
                      ? std::string("overall")
                      : "es_" + std::to_string(a.event_time);
    row["estimate"] = a.estimate;
    json weights = json::array();
    for (const auto& [g, t, w] : a.component_weights)
      weights.push_back({{"g", g}, {"t", t}, {"weight", w}});
    row["component_weights"] = weights;
    if (boot) {
      const int col = n_cell_columns + static_cast<int>(i);
      row["se"] = boot->se(col);
      row["ci_lo"] = boot->ci_lo(col);
      row["ci_hi"] = boot->ci_hi(col);
    }
    j.push_back(row);
  }
  return j.dump(2) + "\n";
}

std::string balance_to_json(const BalanceReport& report) {
  json j;
  j["weight_kind"] = report.weight_kind;
  j["two_period"] = report.two_period;
  json tables = json::array();
  for (const auto& table : report.tables) {
    json rows = json::array();
    for (const auto& r : table.rows)
      rows.push_back({{"label", r.label},
                      {"panel", r.panel},
                      {"exact", r.exact},
                      {"treated_mean", r.treated_mean},
                      {"comparison_mean", r.comparison_mean},
                      {"diff", r.diff},
                      {"std_diff", r.std_diff}});
    tables.push_back({{"g", table.g}, {"t", table.t}, {"rows", rows}});
  }
  j["tables"] = tables;
  return j.dump(2) + "\n";
}

std::string balance_to_csv(const BalanceReport& report) {
  std::string out =
      "table_g,table_t,label,panel,exact,treated_mean,comparison_mean,diff,"
      "std_diff\n";
  for (const auto& table : report.tables) {
    for (const auto& r : table.rows) {
      out += std::to_string(table.g) + ',' + std::to_string(table.t) + ',' +
             r.label + ',' + r.panel + ',' + (r.exact ? "1" : "0") + ',' +
             fmt(r.treated_mean) + ',' + fmt(r.comparison_mean) + ',' +
             fmt(r.diff) + ',' + fmt(r.std_diff) + '\n';
    }
  }
  return out;
}

}  // namespace didforge
