#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcfb/asymptotic.hpp"
#include "bcfb/simharness.hpp"

namespace bcfb {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Experiment config document. Keys: L, m, rho_db (number or
// {start, stop, step}), gamma (number or per-user list), rate_bits (number
// or per-user list), schemes, trials, codebook_redraws, seed. Unknown keys
// are errors. L, m and rho_db are required.
ExperimentSpec load_experiment_config(const std::filesystem::path& path);

struct EtaClassFile {
  Real rho = 0.0;  // linear
  std::vector<EtaClass> classes;
};

// Class document for the asymptotic tools: {"rho_db": x, "classes":
// [{"fraction", "gamma", "rbar"}...]}; "rbar" accepts the string "inf".
EtaClassFile load_eta_classes(const std::filesystem::path& path);

}  // namespace bcfb
