#include "didforge/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "didforge/dgp.hpp"
#include "didforge/diagnostics.hpp"
#include "didforge/errors.hpp"
#include "didforge/serialize.hpp"
#include "didforge/twfe.hpp"

namespace didforge {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::invalid_value, "cannot write " + path.string());
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::invalid_value, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json config_echo(const RunConfig& cfg) {
  json j;
  j["subcommand"] = cfg.subcommand;
  j["input"] = cfg.input;
  j["method"] = method_name(cfg.method);
  j["base_period"] =
      cfg.base_period == BasePeriod::Varying ? "varying" : "universal";
  j["comparison"] = cfg.comparison == ComparisonGroup::NotYetTreated
                        ? "notyet"
                        : "never";
  j["bootstrap_draws"] = cfg.bootstrap_draws;
  j["multiplier"] = multiplier_name(cfg.multiplier);
  j["seed"] = cfg.seed;
  j["ci_level"] = cfg.ci_level;
  j["columns"] = {{"id", cfg.columns.id},
                  {"time", cfg.columns.time},
                  {"y", cfg.columns.outcome},
                  {"g", cfg.columns.group},
                  {"xvars", cfg.columns.x_tv},
                  {"zvars", cfg.columns.z_ti}};
  return j;
}

void write_run_meta(const RunConfig& cfg, const fs::path& dir,
                    const json& extra = json()) {
  json j;
  j["tool"] = "didforge";
  j["version"] = "0.1.0";
  j["config"] = config_echo(cfg);
  if (!extra.is_null()) j["data"] = extra;
  write_file(dir / "run_meta.json", j.dump(2) + "\n");
}

json validation_echo(const PanelDataset& data) {
  ValidationReport rep = validate(data);
  json v;
  json sizes = json::array();
  for (const auto& [g, count] : rep.group_sizes)
    sizes.push_back({{"g", g}, {"count", count}});
  v["group_sizes"] = sizes;
  v["small_groups"] = rep.small_groups;
  json missing = json::array();
  for (const auto& [g, t] : rep.no_comparison)
    missing.push_back({{"g", g}, {"t", t}});
  v["no_comparison"] = missing;
  v["has_never_treated"] = rep.has_never_treated;
  return v;
}

int handle_error(const RunConfig& cfg, const error& e) {
  json j;
  j["error"] = e.code_name();
  j["message"] = e.what();
  const int code = e.numerical() ? kExitNumerical : kExitInput;
  j["exit_code"] = code;
  std::cerr << "didforge: " << e.code_name() << ": " << e.what() << "\n";
  std::error_code ignore;
  fs::create_directories(cfg.out_dir, ignore);
  std::ofstream out(fs::path(cfg.out_dir) / "error.json", std::ios::binary);
  if (out) out << j.dump(2) + "\n";
  return code;
}

AttOptions att_options(const RunConfig& cfg) {
  AttOptions opts;
  opts.base_period = cfg.base_period;
  opts.comparison = cfg.comparison;
  opts.threads = cfg.threads;
  return opts;
}

PanelDataset load_input(const RunConfig& cfg) {
  if (cfg.input.empty()) fail(errc::invalid_value, "--input is required");
  return load_csv(cfg.input, cfg.columns);
}

bool is_two_period_design(const PanelDataset& data) {
  const auto gs = data.treated_groups();
  return data.n_periods == 2 && gs.size() == 1 && gs[0] == 2;
}

}  // namespace

int cmd_estimate(const RunConfig& cfg) {
  try {
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    PanelDataset data = load_input(cfg);

    const AttOptions opts = att_options(cfg);
    auto results = estimate_all(data, cfg.method, opts);
    std::vector<AggregateResult> aggregates;
    aggregates.push_back(aggregate_overall(results, data));
    for (int e : feasible_event_times(data))
      aggregates.push_back(aggregate_event_study(results, data, e));

    InfluenceMatrix infl = build_influence_matrix(results, aggregates);
    BootstrapOptions bopts;
    bopts.ci_level = cfg.ci_level;
    bopts.threads = cfg.threads;
    BootstrapResult boot = multiplier_bootstrap(
        infl, cfg.bootstrap_draws, cfg.multiplier, cfg.seed, bopts);

    write_file(dir / "att_gt.json", results_to_json(results, &boot));
    write_file(dir / "att_gt.csv", results_to_csv(results, &boot));
    write_file(dir / "aggregates.json",
               aggregates_to_json(aggregates, &boot,
                                  static_cast<int>(results.size())));
    json extra = validation_echo(data);
    if (cfg.method != Method::RA) {
      double lo = 1.0, hi = 0.0;
      for (const auto& r : results) {
        lo = std::min(lo, r.gps_min);
        hi = std::max(hi, r.gps_max);
      }
      extra["gps_fitted_range"] = {lo, hi};
    }
    write_run_meta(cfg, dir, extra);
    return kExitOk;
  } catch (const error& e) {
    return handle_error(cfg, e);
  }
}

int cmd_decompose(const RunConfig& cfg) {
  try {
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    PanelDataset data = load_input(cfg);

    Eigen::MatrixXd oracle_cells;
    const bool has_oracle = !cfg.dgp_config_path.empty();
    if (has_oracle) {
      DgpConfig dgp = config_from_json(read_file(cfg.dgp_config_path));
      oracle_cells = oracle_conditional_atts(dgp, data);
    }

    std::vector<TwfeWeights> weight_sets;
    std::string decomposition_json;

    TwfeFit mfit = fit_multi_period(data);
    ReferenceConstants ref;
    const ReferenceConstants* ref_ptr = nullptr;
    if (cfg.estimated_reference) {
      ref = estimate_reference_constants(data);
      ref_ptr = &ref;
    }
    DecompositionReport mrep =
        decompose(mfit, data, has_oracle ? &oracle_cells : nullptr, ref_ptr);
    TwfeWeights m_implicit = implicit_weights(mfit, data);
    const double m_recon = weighted_outcome_contrast(m_implicit, data);
    if (std::abs(mrep.reconstruction - mfit.alpha) > 1e-8 ||
        std::abs(m_recon - mfit.alpha) > 1e-8)
      fail(errc::degenerate_denominator,
           "internal check failed: weights do not reproduce alpha");
    weight_sets.push_back(conditional_att_weights(mfit, data));
    weight_sets.push_back(m_implicit);

    std::string twfe_json = twfe_to_json(mfit);
    decomposition_json = decomposition_to_json(mrep, m_recon);
    DecompositionReport primary_rep = mrep;

    if (is_two_period_design(data)) {
      TwfeFit fit2 = fit_two_period(data);
      DecompositionReport rep2 =
          decompose(fit2, data, has_oracle ? &oracle_cells : nullptr);
      TwfeWeights implicit2 = implicit_weights(fit2, data);
      const double recon2 = weighted_outcome_contrast(implicit2, data);
      if (std::abs(rep2.reconstruction - fit2.alpha) > 1e-8 ||
          std::abs(recon2 - fit2.alpha) > 1e-8)
        fail(errc::degenerate_denominator,
             "internal check failed: weights do not reproduce alpha");
      weight_sets.push_back(conditional_att_weights(fit2, data));
      weight_sets.push_back(implicit2);
      // two-period report is primary for a two-period design
      twfe_json = twfe_to_json(fit2);
      decomposition_json = decomposition_to_json(rep2, recon2);
      primary_rep = rep2;
    }

    write_file(dir / "twfe.json", twfe_json);
    write_file(dir / "weights.csv", weights_to_csv(weight_sets));
    write_file(dir / "weights.json", weights_to_json(weight_sets));
    write_file(dir / "decomposition.json", decomposition_json);
    write_file(dir / "decomposition_terms.csv",
               decomposition_terms_to_csv(primary_rep));
    write_run_meta(cfg, dir);
    return kExitOk;
  } catch (const error& e) {
    return handle_error(cfg, e);
  }
}

int cmd_diagnose(const RunConfig& cfg) {
  try {
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    PanelDataset data = load_input(cfg);

    TwfeFit fit = is_two_period_design(data) ? fit_two_period(data)
                                             : fit_multi_period(data);
    TwfeWeights weights = implicit_weights(fit, data);
    const double recon = reconstruct_alpha(weights, data);
    if (std::abs(recon - fit.alpha) > 1e-8)
      fail(errc::degenerate_denominator,
           "internal check failed: implicit weights do not reproduce alpha");

    BalanceReport report = balance_audit(weights, data, cfg.functions);
    std::string json_out = balance_to_json(report);
    std::string csv_out = balance_to_csv(report);
    std::string text = render_balance_table(report);
    if (cfg.gps_benchmark) {
      BalanceReport bench =
          is_two_period_design(data)
              ? ipw_benchmark_balance(data, fit_gps(data, 2, 2, att_options(cfg)),
                                      cfg.functions)
              : ipw_benchmark_balance_all(data, att_options(cfg),
                                          cfg.functions);
      write_file(dir / "balance_gps_benchmark.json", balance_to_json(bench));
      text += render_balance_table(bench);
    }
    write_file(dir / "balance.json", json_out);
    write_file(dir / "balance.csv", csv_out);
    std::cout << text;
    write_run_meta(cfg, dir);
    return kExitOk;
  } catch (const error& e) {
    return handle_error(cfg, e);
  }
}

int cmd_simulate(const RunConfig& cfg) {
  try {
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    DgpConfig config;
    if (!cfg.preset.empty())
      config = violation_preset(cfg.preset);
    else if (!cfg.config_path.empty())
      config = config_from_json(read_file(cfg.config_path));
    else
      fail(errc::invalid_value, "simulate needs --preset or --config");
    if (cfg.n_override > 0) config.n_units = cfg.n_override;
    config.seed = cfg.seed;

    auto [data, oracle] = generate(config);
    ColumnMapping schema;
    schema.x_tv = data.x_names;
    schema.z_ti = data.z_names;
    write_csv(data, (dir / "panel.csv").string(), schema);
    write_file(dir / "oracle.json", oracle_to_json(oracle));
    write_file(dir / "dgp_config.json", config_to_json(config));
    write_run_meta(cfg, dir);
    return kExitOk;
  } catch (const error& e) {
    return handle_error(cfg, e);
  }
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"didforge: panel difference-in-differences engine"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string method = "dr", base = "varying", comparison = "notyet",
              multiplier = "rademacher";
  std::string xvars, zvars;

  auto add_data_flags = [&](CLI::App* sub) {
    sub->add_option("--input", cfg.input, "input CSV (long format)");
    sub->add_option("--id-col", cfg.columns.id, "unit id column");
    sub->add_option("--time-col", cfg.columns.time, "time column");
    sub->add_option("--y-col", cfg.columns.outcome, "outcome column");
    sub->add_option("--g-col", cfg.columns.group, "first-treatment column");
    sub->add_option("--xvars", xvars, "comma-separated time-varying columns");
    sub->add_option("--zvars", zvars, "comma-separated time-invariant columns");
    sub->add_option("--out-dir", cfg.out_dir, "output directory");
    sub->add_option("--threads", cfg.threads, "thread cap (0 = default)");
  };

  CLI::App* est = app.add_subcommand("estimate", "group-time ATT estimation");
  add_data_flags(est);
  est->add_option("--method", method, "ra|ipw|dr");
  est->add_option("--base-period", base, "varying|universal");
  est->add_option("--comparison", comparison, "notyet|never");
  est->add_option("--bootstrap-draws", cfg.bootstrap_draws, "multiplier draws");
  est->add_option("--multiplier", multiplier, "rademacher|mammen");
  est->add_option("--seed", cfg.seed, "bootstrap seed");
  est->add_option("--ci-level", cfg.ci_level, "confidence level");

  CLI::App* dec = app.add_subcommand("decompose", "within-estimator decomposition");
  add_data_flags(dec);
  dec->add_option("--dgp-config", cfg.dgp_config_path,
                  "config the data was simulated from (enables oracle bias)");
  dec->add_flag("--estimated-reference", cfg.estimated_reference,
                "use never-treated reference constants in the report");

  CLI::App* dia = app.add_subcommand("diagnose", "implicit-weight balance audit");
  add_data_flags(dia);
  dia->add_flag("--with-gps-benchmark", cfg.gps_benchmark,
                "also report propensity-based balancing weights");
  dia->add_option("--functions", cfg.functions,
                  "extra covariate functions (name, name^2, a*b)");

  CLI::App* sim = app.add_subcommand("simulate", "synthetic panel generation");
  sim->add_option("--preset", cfg.preset, "preset name");
  sim->add_option("--config", cfg.config_path, "config JSON path");
  sim->add_option("--n", cfg.n_override, "override the number of units");
  sim->add_option("--seed", cfg.seed, "generator seed");
  sim->add_option("--out-dir", cfg.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInput;
  }

  auto parse_lists = [&]() {
    auto split = [](const std::string& s) {
      std::vector<std::string> out;
      std::string field;
      std::istringstream ss(s);
      while (std::getline(ss, field, ','))
        if (!field.empty()) out.push_back(field);
      return out;
    };
    cfg.columns.x_tv = split(xvars);
    cfg.columns.z_ti = split(zvars);
  };
  parse_lists();

  if (method == "ra") cfg.method = Method::RA;
  else if (method == "ipw") cfg.method = Method::IPW;
  else if (method == "dr") cfg.method = Method::DR;
  else { std::cerr << "didforge: unknown method '" << method << "'\n"; return kExitInput; }
  if (base == "varying") cfg.base_period = BasePeriod::Varying;
  else if (base == "universal") cfg.base_period = BasePeriod::Universal;
  else { std::cerr << "didforge: unknown base period '" << base << "'\n"; return kExitInput; }
  if (comparison == "notyet") cfg.comparison = ComparisonGroup::NotYetTreated;
  else if (comparison == "never") cfg.comparison = ComparisonGroup::NeverTreated;
  else { std::cerr << "didforge: unknown comparison '" << comparison << "'\n"; return kExitInput; }
  if (multiplier == "rademacher") cfg.multiplier = Multiplier::Rademacher;
  else if (multiplier == "mammen") cfg.multiplier = Multiplier::Mammen;
  else { std::cerr << "didforge: unknown multiplier '" << multiplier << "'\n"; return kExitInput; }

  if (est->parsed()) { cfg.subcommand = "estimate"; return cmd_estimate(cfg); }
  if (dec->parsed()) { cfg.subcommand = "decompose"; return cmd_decompose(cfg); }
  if (dia->parsed()) { cfg.subcommand = "diagnose"; return cmd_diagnose(cfg); }
  if (sim->parsed()) { cfg.subcommand = "simulate"; return cmd_simulate(cfg); }
  return kExitInput;
}

}  // namespace didforge
