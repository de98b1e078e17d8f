#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace bcfb {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string details;  // measured values vs thresholds
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_pass() const {
    for (const CheckResult& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

// Runs every Monte Carlo / analytic consistency check the library promises,
// at its stated size and tolerance, on streams derived from `seed`.
VerifyReport verify_suite(std::uint64_t seed);

void print_report(const VerifyReport& report, std::ostream& out);

// Individual checks shared with the acceptance suite.
CheckResult check_concentration_trend(std::uint64_t seed);
CheckResult check_quant_single_codeword(std::uint64_t seed);
CheckResult check_quant_sandwich(std::uint64_t seed);
CheckResult check_average_powers(std::uint64_t seed, double rho, long blocks_per_redraw);
CheckResult check_random_beams_trend(std::uint64_t seed);
CheckResult check_asymptotic_power_limits(std::uint64_t seed);

}  // namespace bcfb
