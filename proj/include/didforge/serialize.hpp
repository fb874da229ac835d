#ifndef DIDFORGE_SERIALIZE_HPP
#define DIDFORGE_SERIALIZE_HPP

#include <string>
#include <vector>

#include "didforge/diagnostics.hpp"
#include "didforge/gtatt.hpp"
#include "didforge/inference.hpp"
#include "didforge/twfe.hpp"

namespace didforge {

// Machine-readable report emission.  JSON is the canonical format; CSV
// mirrors the tabular artifacts.  Nothing here embeds timestamps, so equal
// runs produce byte-identical files.

std::string twfe_to_json(const TwfeFit& fit);
std::string weights_to_csv(const std::vector<TwfeWeights>& weight_sets);
std::string weights_to_json(const std::vector<TwfeWeights>& weight_sets);
std::string decomposition_to_json(const DecompositionReport& report,
                                  double reconstruction_from_implicit);
std::string decomposition_terms_to_csv(const DecompositionReport& report);

std::string results_to_json(const std::vector<GroupTimeResult>& results,
                            const BootstrapResult* boot);
std::string results_to_csv(const std::vector<GroupTimeResult>& results,
                           const BootstrapResult* boot);
std::string aggregates_to_json(const std::vector<AggregateResult>& aggregates,
                               const BootstrapResult* boot,
                               int n_cell_columns);

std::string balance_to_json(const BalanceReport& report);
std::string balance_to_csv(const BalanceReport& report);

const char* weight_variant_name(WeightVariant v);

}  // namespace didforge

#endif
