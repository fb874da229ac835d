#include "didforge/linproj.hpp"

#include <cmath>
#include <sstream>

#include "didforge/errors.hpp"

namespace didforge {

namespace {

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m,
                            const std::vector<int>& rows) {
  Eigen::MatrixXd out(rows.size(), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(r) = m.row(rows[r]);
  return out;
}

Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<int>& rows) {
  Eigen::VectorXd out(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) out(r) = v(rows[r]);
  return out;
}

}  // namespace

ProjectionFit project(const Eigen::VectorXd& response,
                      const Eigen::MatrixXd& design,
                      const std::vector<int>* subset) {
  const int p = static_cast<int>(design.cols());
  Eigen::MatrixXd xs;
  Eigen::VectorXd ys;
  int n_sub;
  if (subset) {
    if (subset->empty()) fail(errc::empty_subset, "projection subset is empty");
    xs = gather_rows(design, *subset);
    ys = gather(response, *subset);
    n_sub = static_cast<int>(subset->size());
  } else {
    xs = design;
    ys = response;
    n_sub = static_cast<int>(design.rows());
  }
  if (p == 0) fail(errc::rank_deficient, "design has no columns");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xs);
  qr.setThreshold(kRankTolerance);
  const int rank = static_cast<int>(qr.rank());
  if (rank < p) {
    // The pivot order tells us which columns could not be supported.
    std::ostringstream msg;
    msg << "rank-deficient design (rank " << rank << " of " << p
        << "); dependent columns:";
    const auto& perm = qr.colsPermutation().indices();
    for (int j = rank; j < p; ++j) msg << ' ' << perm(j);
    fail(errc::rank_deficient, msg.str());
  }

  ProjectionFit fit;
  fit.coefficients = qr.solve(ys);
  fit.fitted = design * fit.coefficients;
  fit.residuals = response - fit.fitted;
  fit.dof = n_sub - p;
  const auto& rdiag = qr.matrixR().diagonal();
  const double rmax = std::abs(rdiag(0));
  const double rmin = std::abs(rdiag(rank - 1));
  fit.gram_condition = rmin > 0 ? (rmax / rmin) * (rmax / rmin)
                                : std::numeric_limits<double>::infinity();
  return fit;
}

double fwl_ratio(const Eigen::VectorXd& target,
                 const Eigen::MatrixXd& partialled,
                 const Eigen::VectorXd& response,
                 const std::vector<int>* subset) {
  ProjectionFit fit = project(target, partialled, subset);
  double num = 0.0, den = 0.0, scale = 0.0;
  auto accumulate = [&](int i) {
    const double r = fit.residuals(i);
    num += r * response(i);
    den += r * r;
    scale += target(i) * target(i);
  };
  if (subset) {
    for (int i : *subset) accumulate(i);
  } else {
    for (int i = 0; i < target.size(); ++i) accumulate(i);
  }
  if (den <= 1e-12 * std::max(1.0, scale))
    fail(errc::degenerate_denominator,
         "residualized target has no remaining variance");
  return num / den;
}

}  // namespace didforge
