#ifndef DIDFORGE_ERRORS_HPP
#define DIDFORGE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace didforge {

enum class errc {
  // input / schema
  missing_cell,
  non_constant_time_invariant,
  already_treated_at_start,
  unknown_column,
  invalid_value,
  not_two_period,
  unknown_preset,
  overlap_config,
  config_mismatch,
  unknown_function,
  too_few_draws,
  missing_cell_result,
  missing_nuisance,
  empty_subset,
  no_eligible_group,
  // numerical / design failures
  rank_deficient,
  rank_deficient_outcome_model,
  degenerate_denominator,
  no_variation_in_d,
  no_residual_treatment_variation,
  empty_comparison,
  no_comparison,
  perfect_separation,
  overlap_violation,
  propensity_near_one,
};

const char* errc_name(errc c);

// Numerical failures exit with a different code than input/validation
// problems so scripts can tell them apart.
bool errc_is_numerical(errc c);

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  errc code() const { return code_; }
  const char* code_name() const { return errc_name(code_); }
  bool numerical() const { return errc_is_numerical(code_); }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) {
  throw error(code, what);
}

}  // namespace didforge

#endif
