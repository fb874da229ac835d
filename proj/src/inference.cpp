#include "didforge/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "didforge/errors.hpp"
#include "didforge/parallel.hpp"
#include "didforge/rng.hpp"

namespace didforge {

const char* multiplier_name(Multiplier m) {
  return m == Multiplier::Rademacher ? "rademacher" : "mammen";
}

InfluenceMatrix build_influence_matrix(
    const std::vector<GroupTimeResult>& results,
    const std::vector<AggregateResult>& aggregates) {
  InfluenceMatrix out;
  if (results.empty()) fail(errc::missing_nuisance, "no results to stack");
  const int n = static_cast<int>(results.front().influence.size());
  out.values.resize(n, results.size() + aggregates.size());
  out.estimates.resize(results.size() + aggregates.size());
  int col = 0;
  for (const auto& r : results) {
    out.values.col(col) = r.influence;
    out.estimates(col) = r.estimate;
    out.labels.push_back("att_g" + std::to_string(r.g) + "_t" +
                         std::to_string(r.t));
    ++col;
  }
  for (const auto& a : aggregates) {
    out.values.col(col) = a.influence;
    out.estimates(col) = a.estimate;
    out.labels.push_back(a.kind == AggregateResult::Kind::Overall
                             ? std::string("overall")
                             : "es_" + std::to_string(a.event_time));
    ++col;
  }
  return out;
}

Eigen::VectorXd build_influence(const GroupTimeResult& result,
                                const PanelDataset& data) {
  const bool needs_or =
      result.method == Method::RA || result.method == Method::DR;
  const bool needs_gps =
      result.method == Method::IPW || result.method == Method::DR;
  if ((needs_or && result.or_coef.size() == 0) ||
      (needs_gps && result.gps_coef.size() == 0))
    fail(errc::missing_nuisance,
         "result does not carry the nuisance fits its influence needs");

  // Re-run the estimator from the stored options; the recomputed influence
  // column must match the stored one.
  switch (result.method) {
    case Method::RA:
      return att_gt_ra(data, result.g, result.t, result.options).influence;
    case Method::IPW: {
      GpsFit gps = fit_gps(data, result.g, result.t, result.options);
      return att_gt_ipw(data, result.g, result.t, gps, result.options)
          .influence;
    }
    case Method::DR:
      return att_gt_dr(data, result.g, result.t, result.options).influence;
  }
  fail(errc::missing_nuisance, "unknown method");
}

namespace {

inline double draw_multiplier(Multiplier m, std::uint64_t seed, int b, int i) {
  const std::uint64_t stream = (1ULL << 32) + static_cast<std::uint64_t>(b);
  if (m == Multiplier::Rademacher)
    return rng::rademacher(seed, stream, static_cast<std::uint64_t>(i));
  // Mammen two-point: values and probabilities chosen so the multiplier has
  // mean zero and unit variance.
  static const double sqrt5 = std::sqrt(5.0);
  static const double lo = (1.0 - sqrt5) / 2.0;
  static const double hi = (1.0 + sqrt5) / 2.0;
  static const double p_lo = (sqrt5 + 1.0) / (2.0 * sqrt5);
  const double u = rng::uniform(seed, stream, static_cast<std::uint64_t>(i));
  return u <= p_lo ? lo : hi;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * (sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - lo;
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

Eigen::MatrixXd bootstrap_stats(const InfluenceMatrix& infl, int draws,
                                Multiplier multiplier, std::uint64_t seed,
                                int threads) {
  const int n = static_cast<int>(infl.values.rows());
  const int m = static_cast<int>(infl.values.cols());
  Eigen::MatrixXd stats(draws, m);
  const int nt = resolve_threads(threads);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nt)
#endif
  for (int b = 0; b < draws; ++b) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < n; ++i) {
      const double v = draw_multiplier(multiplier, seed, b, i);
      acc += v * infl.values.row(i).transpose();
    }
    stats.row(b) = acc.transpose() / n;
  }
  return stats;
}

BootstrapResult multiplier_bootstrap(const InfluenceMatrix& infl, int draws,
                                     Multiplier multiplier, std::uint64_t seed,
                                     const BootstrapOptions& opts) {
  if (draws < 200)
    fail(errc::too_few_draws,
         "multiplier bootstrap needs at least 200 draws, got " +
             std::to_string(draws));
  const int m = static_cast<int>(infl.values.cols());
  const Eigen::MatrixXd stats =
      bootstrap_stats(infl, draws, multiplier, seed, opts.threads);

  BootstrapResult out;
  out.draws = draws;
  out.multiplier = multiplier;
  out.seed = seed;
  out.ci_level = opts.ci_level;
  out.labels = infl.labels;
  out.estimates = infl.estimates;
  out.se.resize(m);
  out.ci_lo.resize(m);
  out.ci_hi.resize(m);

  const double alpha = 1.0 - opts.ci_level;
  const double z = normal_quantile(1.0 - alpha / 2.0);
  // interquartile range of a standard normal
  const double iqr_norm = 2.0 * normal_quantile(0.75);

  for (int c = 0; c < m; ++c) {
    std::vector<double> col(draws);
    for (int b = 0; b < draws; ++b) col[b] = stats(b, c);
    const double mean =
        std::accumulate(col.begin(), col.end(), 0.0) / draws;
    double var = 0;
    for (double v : col) var += (v - mean) * (v - mean);
    var /= (draws - 1);
    std::sort(col.begin(), col.end());
    const double se = opts.iqr_se
                          ? (quantile_sorted(col, 0.75) -
                             quantile_sorted(col, 0.25)) /
                                iqr_norm
                          : std::sqrt(var);
    out.se(c) = se;
    const double est = infl.estimates(c);
    if (opts.quantile_ci) {
      out.ci_lo(c) = est - quantile_sorted(col, 1.0 - alpha / 2.0);
      out.ci_hi(c) = est - quantile_sorted(col, alpha / 2.0);
    } else {
      out.ci_lo(c) = est - z * se;
      out.ci_hi(c) = est + z * se;
    }
  }
  return out;
}

// Acklam's rational approximation to the standard normal quantile;
// absolute error below 1.2e-9, deterministic across platforms.
double normal_quantile(double p) {
  if (p <= 0.0 || p >= 1.0)
    fail(errc::invalid_value, "normal quantile needs p in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
            c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  if (p > phigh) {
    q = std::sqrt(-2 * std::log(1 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
             c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  q = p - 0.5;
  r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r +
          a[5]) *
         q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

}  // namespace didforge
