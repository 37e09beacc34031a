#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace holling {

/// Failure categories raised by the library. The CLI maps each category onto
/// an exit code via is_numerical().
enum class errc {
  invalid_argument,
  assumption_violated,
  unsupported_exponents,
  no_interior_equilibrium,
  empty_feasible_interval,
  hypothesis_violated,
  parse_error,
  monotonicity,
  step_underflow,
  budget_exhausted,
  non_finite_derivative,
  no_cycle_detected,
};

constexpr std::string_view to_string(errc code) noexcept {
  switch (code) {
    case errc::invalid_argument: return "invalid-argument";
    case errc::assumption_violated: return "assumption-violated";
    case errc::unsupported_exponents: return "unsupported-exponents";
    case errc::no_interior_equilibrium: return "no-interior-equilibrium";
    case errc::empty_feasible_interval: return "empty-feasible-interval";
    case errc::hypothesis_violated: return "hypothesis-violated";
    case errc::parse_error: return "parse-error";
    case errc::monotonicity: return "monotonicity";
    case errc::step_underflow: return "step-underflow";
    case errc::budget_exhausted: return "budget-exhausted";
    case errc::non_finite_derivative: return "non-finite-derivative";
    case errc::no_cycle_detected: return "no-cycle-detected";
  }
  return "unknown";
}

/// Integrator and detection failures are numerical; everything else is a
/// problem with the caller's input.
constexpr bool is_numerical(errc code) noexcept {
  return code == errc::step_underflow || code == errc::budget_exhausted ||
         code == errc::non_finite_derivative || code == errc::no_cycle_detected;
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

}  // namespace holling
