#include "didforge/errors.hpp"

namespace didforge {

const char* errc_name(errc c) {
  switch (c) {
    case errc::missing_cell: return "MissingCell";
    case errc::non_constant_time_invariant: return "NonConstantTimeInvariant";
    case errc::already_treated_at_start: return "AlreadyTreatedAtStart";
    case errc::unknown_column: return "UnknownColumn";
    case errc::invalid_value: return "InvalidValue";
    case errc::not_two_period: return "NotTwoPeriod";
    case errc::unknown_preset: return "UnknownPreset";
    case errc::overlap_config: return "OverlapConfigError";
    case errc::config_mismatch: return "ConfigMismatch";
    case errc::unknown_function: return "UnknownFunction";
    case errc::too_few_draws: return "TooFewDraws";
    case errc::missing_cell_result: return "MissingCellResult";
    case errc::missing_nuisance: return "MissingNuisance";
    case errc::empty_subset: return "EmptySubset";
    case errc::no_eligible_group: return "NoEligibleGroup";
    case errc::rank_deficient: return "RankDeficient";
    case errc::rank_deficient_outcome_model: return "RankDeficientOR";
    case errc::degenerate_denominator: return "DegenerateDenominator";
    case errc::no_variation_in_d: return "NoVariationInD";
    case errc::no_residual_treatment_variation:
      return "NoResidualTreatmentVariation";
    case errc::empty_comparison: return "EmptyComparison";
    case errc::no_comparison: return "NoComparison";
    case errc::perfect_separation: return "PerfectSeparation";
    case errc::overlap_violation: return "OverlapViolation";
    case errc::propensity_near_one: return "PropensityNearOne";
  }
  return "Unknown";
}

bool errc_is_numerical(errc c) {
  switch (c) {
    case errc::rank_deficient:
    case errc::rank_deficient_outcome_model:
    case errc::degenerate_denominator:
    case errc::no_variation_in_d:
    case errc::no_residual_treatment_variation:
    case errc::empty_comparison:
    case errc::no_comparison:
    case errc::perfect_separation:
    case errc::overlap_violation:
    case errc::propensity_near_one:
      return true;
    default:
      return false;
  }
}

}  // namespace didforge
