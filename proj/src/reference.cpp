#include "didforge/reference.hpp"

#include "didforge/rng.hpp"

namespace didforge::reference {

namespace {

double draw_multiplier(Multiplier m, std::uint64_t seed, int b, int i) {
  const std::uint64_t stream = (1ULL << 32) + static_cast<std::uint64_t>(b);
  if (m == Multiplier::Rademacher)
    return rng::rademacher(seed, stream, static_cast<std::uint64_t>(i));
  const double sqrt5 = std::sqrt(5.0);
  const double u = rng::uniform(seed, stream, static_cast<std::uint64_t>(i));
  return u <= (sqrt5 + 1.0) / (2.0 * sqrt5) ? (1.0 - sqrt5) / 2.0
                                            : (1.0 + sqrt5) / 2.0;
}

}  // namespace

Eigen::MatrixXd bootstrap_stats(const InfluenceMatrix& infl, int draws,
                                Multiplier multiplier, std::uint64_t seed) {
  const int n = static_cast<int>(infl.values.rows());
  const int m = static_cast<int>(infl.values.cols());
  Eigen::MatrixXd stats(draws, m);
  for (int b = 0; b < draws; ++b) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < n; ++i)
      acc += draw_multiplier(multiplier, seed, b, i) *
             infl.values.row(i).transpose();
    stats.row(b) = acc.transpose() / n;
  }
  return stats;
}

std::vector<GroupTimeResult> estimate_all(const PanelDataset& data,
                                          Method method,
                                          const AttOptions& opts) {
  std::vector<GroupTimeResult> results;
  for (int g : data.treated_groups()) {
    for (int t = g; t <= data.n_periods; ++t) {
      switch (method) {
        case Method::RA:
          results.push_back(att_gt_ra(data, g, t, opts));
          break;
        case Method::IPW:
          results.push_back(
              att_gt_ipw(data, g, t, fit_gps(data, g, t, opts), opts));
          break;
        case Method::DR:
          results.push_back(att_gt_dr(data, g, t, opts));
          break;
      }
    }
  }
  return results;
}

}  // namespace didforge::reference
