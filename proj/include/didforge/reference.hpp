#ifndef DIDFORGE_REFERENCE_HPP
#define DIDFORGE_REFERENCE_HPP

#include "didforge/gtatt.hpp"
#include "didforge/inference.hpp"

// Plain serial implementations of the OpenMP kernels.  Kept for two
// purposes: tests pin the parallel kernels to these bit for bit, and the
// benchmark tool compares their runtimes.
namespace didforge::reference {

Eigen::MatrixXd bootstrap_stats(const InfluenceMatrix& infl, int draws,
                                Multiplier multiplier, std::uint64_t seed);

std::vector<GroupTimeResult> estimate_all(const PanelDataset& data,
                                          Method method,
                                          const AttOptions& opts = {});

}  // namespace didforge::reference

#endif
