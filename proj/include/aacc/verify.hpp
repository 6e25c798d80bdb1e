#pragma once

// Self-checks behind the `verify` subcommand: the exact tabular oracle on
// random instances and finite-difference checks of the network gradients.

#include <cstdint>
#include <string>
#include <vector>

#include "aacc/types.hpp"

namespace aacc::verify {

struct CheckLine {
  std::string name;
  bool passed = false;
  double value = 0.0;      // worst observed deviation
  double tolerance = 0.0;
  std::string detail;
};

struct Report {
  std::vector<CheckLine> lines;
  bool passed() const;
  std::string text() const;  // one "PASS|FAIL name value<=tol detail" line per check
};

struct Options {
  int instances = 10;
  int num_observations = 4;
  int num_actions = 2;
  int num_contexts = 3;
  double gamma = 0.95;
  std::uint64_t seed = 7;
  long mc_episodes = 100000;  // per start observation; 0 skips the Monte Carlo check
  int gradient_configs = 20;
};

// Relative error used by the network checks: |a - b| / max(|a|, |b|, 1e-6).
inline constexpr double kGradientRelFloor = 1e-6;
inline constexpr double kGradientTolerance = 1e-4;

// Worst relative error of analytic vs central-difference gradients over
// `configs` random network shapes, parameters and inputs.
double gradient_check_actor(int configs, Rng& rng);
double gradient_check_critic(int configs, Rng& rng);
double gradient_check_encoder(int configs, Rng& rng);
double gradient_check_critic_encoder(int configs, Rng& rng);

Report run_verification(const Options& options);

}  // namespace aacc::verify
